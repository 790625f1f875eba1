#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>

#include "jtms/graph_io.hpp"
#include "jtms/pipeline.hpp"
#include "jtms/scene_io.hpp"
#include "jtms/scene_sim.hpp"
#include "jtms/text.hpp"

using namespace jtms;

namespace {

Detection make_det(int id, int frame, double cx, double cy, double w, double h,
                   double score, std::shared_ptr<const TemplateGrid> tmpl = nullptr) {
    Detection d;
    d.id = id;
    d.frame = frame;
    d.cx = cx;
    d.cy = cy;
    d.w = w;
    d.h = h;
    d.score = score;
    if (tmpl) d.template_id = 0;
    d.tmpl = std::move(tmpl);
    return d;
}

Trajectory make_traj(int id, int start, std::vector<std::array<double, 2>> pts,
                     Color color = {0.5, 0.5, 0.5}) {
    Trajectory t;
    t.id = id;
    t.start_frame = start;
    t.points = std::move(pts);
    t.color = color;
    return t;
}

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto dir = std::filesystem::temp_directory_path() / ("jtms_" + tag);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

RunPaths run_paths_for(const std::filesystem::path& scene,
                       const std::filesystem::path& out) {
    RunPaths paths;
    paths.trajectories = (scene / "trajectories.txt").string();
    paths.detections = (scene / "detections.txt").string();
    paths.templates_dir = (scene / "templates").string();
    paths.ground_truth = (scene / "ground_truth.txt").string();
    paths.out_graph = (out / "graph.txt").string();
    paths.out_solution = (out / "solution.txt").string();
    paths.out_tracks = (out / "tracks.txt").string();
    paths.out_segmentation = (out / "segmentation.txt").string();
    paths.out_overlay = (out / "overlay.txt").string();
    paths.out_metrics = (out / "metrics.txt").string();
    return paths;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("detection filtering rules") {
    PipelineConfig cfg;  // threshold 0.5, coverage 0.20, image fraction 0.60
    auto ones = std::make_shared<const TemplateGrid>(TemplateGrid::ones(4, 4));
    auto sparse = std::make_shared<TemplateGrid>(TemplateGrid::ones(4, 4));
    for (auto& v : sparse->values) v = 0.1;  // 10% coverage

    const double image_area = 100.0 * 100.0;
    std::vector<Detection> dets;
    dets.push_back(make_det(0, 0, 50, 50, 10, 10, 0.4));          // low score
    dets.push_back(make_det(1, 0, 50, 50, 10, 10, 0.9, ones));    // kept, 1% of image
    dets.push_back(make_det(2, 0, 50, 50, 84, 84, 0.9, ones));    // ~70% of image
    dets.push_back(make_det(3, 0, 50, 50, 10, 10, 0.9, sparse));  // 10% box coverage
    dets.push_back(make_det(4, 0, 50, 50, 10, 10, 0.9));          // no template: kept

    const auto kept = filter_detections(dets, cfg, image_area);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == 1);
    CHECK(kept[1].id == 4);
}

TEST_CASE("no detections reproduces the trajectory-only graph") {
    const std::vector<Trajectory> trajs = {
        make_traj(0, 0, {{10, 10}, {12, 10}, {14, 10}}, {0.9, 0.1, 0.1}),
        make_traj(1, 0, {{14, 10}, {16, 10}, {18, 10}}, {0.9, 0.1, 0.1}),
        make_traj(2, 0, {{60, 60}, {60, 60}, {60, 60}}, {0.1, 0.1, 0.9}),
    };
    PipelineConfig cfg;
    const AssembledGraph with_none =
        assemble_joint_graph(trajs, {}, cfg, 100.0, 100.0, Ablation::None);
    CHECK(with_none.graph.high_count() == 0);
    CHECK(with_none.graph.low_count() == 3);

    // Dropping detections through the ablation gives the same bytes.
    auto ones = std::make_shared<const TemplateGrid>(TemplateGrid::ones(2, 2));
    const std::vector<Detection> dets = {make_det(0, 1, 12, 10, 8, 8, 0.9, ones)};
    const AssembledGraph ablated =
        assemble_joint_graph(trajs, dets, cfg, 100.0, 100.0, Ablation::NoHigh);
    CHECK(dump_graph(ablated.graph) == dump_graph(with_none.graph));
}

TEST_CASE("single hl edge gets the clamped template cost") {
    const std::vector<Trajectory> trajs = {
        make_traj(0, 0, {{50, 50}, {50, 50}, {50, 50}})};
    auto ones = std::make_shared<const TemplateGrid>(TemplateGrid::ones(2, 2));
    const std::vector<Detection> dets = {make_det(0, 1, 50, 50, 20, 20, 0.9, ones)};

    PipelineConfig cfg;
    cfg.hl_weight = 3.0;
    const AssembledGraph assembled =
        assemble_joint_graph(trajs, dets, cfg, 100.0, 100.0);
    REQUIRE(assembled.graph.edge_count() == 1);
    const EdgeRef& e = assembled.graph.edge(0);
    CHECK(e.cls == EdgeClass::HighLow);
    // T = 1 means cut probability 0 (clamped): a strongly attractive edge.
    CHECK(e.cut_cost ==
          doctest::Approx(3.0 * std::log((1.0 - 1e-6) / 1e-6)).epsilon(1e-9));
}

TEST_CASE("high-high edge from an iou 0.9 pair") {
    const double shift = 10.0 / 19.0;
    const std::vector<Detection> dets = {make_det(0, 0, 50, 50, 10, 10, 0.9),
                                         make_det(1, 0, 50 + shift, 50, 10, 10, 0.8)};
    PipelineConfig cfg;
    const AssembledGraph assembled = assemble_joint_graph({}, dets, cfg, 100.0, 100.0);
    REQUIRE(assembled.graph.edge_count() == 1);
    CHECK(assembled.graph.edge(0).cls == EdgeClass::HighHigh);
    CHECK(assembled.graph.edge(0).cut_cost == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("uninformative pairs are omitted") {
    // Two detections with IoU < 0.7 and d^sp < 1.2: no edge at all.
    const std::vector<Detection> dets = {make_det(0, 0, 50, 50, 10, 10, 0.9),
                                         make_det(1, 0, 58, 50, 10, 10, 0.9)};
    PipelineConfig cfg;
    const AssembledGraph assembled = assemble_joint_graph({}, dets, cfg, 100.0, 100.0);
    CHECK(assembled.graph.edge_count() == 0);
    CHECK(assembled.graph.high_count() == 2);
}

TEST_CASE("tracklet construction chains by iou") {
    std::vector<Detection> dets;
    for (int f = 0; f < 6; ++f)
        dets.push_back(make_det(f, f, 20.0 + 2.0 * f, 30.0, 10, 10, 0.9));
    // A far-away box that chains with nothing.
    dets.push_back(make_det(6, 0, 90.0, 90.0, 4, 4, 0.9));

    const auto tracklets = build_tracklets(dets);
    REQUIRE(tracklets.size() == 2);  // starts at frames 0 and 1
    CHECK(tracklets[0].start_frame() == 0);
    CHECK(tracklets[0].end_frame() == 4);
    CHECK(tracklets[0].direction == WalkDirection::Right);
    CHECK(tracklets[1].detections[0].id == 1);

    std::vector<Detection> leftward;
    for (int f = 0; f < 5; ++f)
        leftward.push_back(make_det(f, f, 60.0 - 2.0 * f, 30.0, 10, 10, 0.9));
    const auto left = build_tracklets(leftward);
    REQUIRE(left.size() == 1);
    CHECK(left[0].direction == WalkDirection::Left);
}

TEST_CASE("tracklet-mode hl edges carry the summed flipped-template cost") {
    // Asymmetric template, strong on the left half as drawn facing right;
    // a left-walking tracklet samples it mirrored.
    TemplateGrid half = TemplateGrid::ones(1, 2);
    half.values = {1.0, 0.8};
    auto half_ptr = std::make_shared<const TemplateGrid>(half);

    std::vector<Detection> dets;
    for (int f = 0; f < 5; ++f)
        dets.push_back(make_det(f, f, 60.0 - 2.0 * f, 30.0, 20, 20, 0.9, half_ptr));

    // A trajectory pinned to the left half of every box (u = 0.15).
    std::vector<Trajectory> trajs = {make_traj(
        0, 0, {{53, 30}, {51, 30}, {49, 30}, {47, 30}, {45, 30}}, {0.5, 0.5, 0.5})};

    PipelineConfig cfg;
    cfg.mode = GraphMode::TrackletNodes;
    cfg.sigma_hl = 1.2;
    cfg.hl_weight = 2.0;
    const AssembledGraph assembled =
        assemble_joint_graph(trajs, dets, cfg, 100.0, 100.0);
    REQUIRE(assembled.tracklets.size() == 1);
    CHECK(assembled.tracklets[0].direction == WalkDirection::Left);

    const EdgeRef* hl = nullptr;
    for (const EdgeRef& e : assembled.graph.edges())
        if (e.cls == EdgeClass::HighLow) {
            REQUIRE(hl == nullptr);
            hl = &e;
        }
    REQUIRE(hl != nullptr);
    // Mirrored sampling reads T = 0.8 every frame: p = 0.2 per box.
    CHECK(hl->cut_cost ==
          doctest::Approx(2.0 * 5.0 * std::log(0.8 / 0.2)).epsilon(1e-12));
    CHECK(hl->cut_cost ==
          doctest::Approx(2.0 * tracklet_trajectory_cost(assembled.tracklets[0],
                                                         trajs[0], 1.2))
              .epsilon(1e-12));

    // The declared direction decides which template half the point reads.
    Tracklet as_right = assembled.tracklets[0];
    as_right.direction = WalkDirection::Right;
    CHECK(tracklet_trajectory_cost(assembled.tracklets[0], trajs[0], 1.2) !=
          tracklet_trajectory_cost(as_right, trajs[0], 1.2));
}

TEST_CASE("extract_tracks picks the best detection per frame") {
    const std::vector<Trajectory> trajs = {
        make_traj(0, 0, {{50, 50}, {50, 50}})};
    auto ones = std::make_shared<const TemplateGrid>(TemplateGrid::ones(2, 2));
    std::vector<Detection> dets = {make_det(0, 0, 50, 50, 20, 20, 0.9, ones),
                                   make_det(1, 0, 50, 50, 20, 20, 0.8, ones),
                                   make_det(2, 1, 50, 50, 20, 20, 0.7, ones)};
    PipelineConfig cfg;
    const AssembledGraph assembled =
        assemble_joint_graph(trajs, dets, cfg, 100.0, 100.0);
    // Everything is strongly attracted: all one component.
    Decomposition all_one;
    all_one.component_of.assign(assembled.graph.node_count(), 0);
    const TrackOutput out = extract_tracks(assembled, all_one, dets);
    REQUIRE(out.tracks.size() == 1);
    const auto& frames = out.tracks.at(0);
    CHECK(frames.at(0) == 0);  // score 0.9 beats 0.8
    CHECK(frames.at(1) == 2);
    CHECK(out.segmentation.at(0) == 0);

    // A segmentation-only component is possible: split the trajectory off.
    Decomposition split;
    split.component_of = {0, 0, 0, 1};
    const TrackOutput out2 = extract_tracks(assembled, split, dets);
    CHECK(out2.tracks.count(1) == 0);
    CHECK(out2.segmentation.at(0) == 1);
}

TEST_CASE("run writes every output and is deterministic") {
    const auto scene_dir = fresh_dir("scene");
    write_scene_dir(scene_dir.string(), crossing_benchmark(5));

    PipelineConfig cfg;
    cfg.low_low_radius = 30.0;

    const auto out1 = fresh_dir("run1");
    const auto out2 = fresh_dir("run2");
    const RunResult r1 = run(cfg, run_paths_for(scene_dir, out1));
    const RunResult r2 = run(cfg, run_paths_for(scene_dir, out2));
    CHECK(r1.objective == r2.objective);
    CHECK(r1.components == r2.components);

    for (const char* name :
         {"graph.txt", "solution.txt", "tracks.txt", "segmentation.txt", "overlay.txt",
          "metrics.txt"}) {
        CAPTURE(name);
        const std::string a = read_text_file((out1 / name).string());
        const std::string b = read_text_file((out2 / name).string());
        CHECK(a == b);
        CHECK(!a.empty());
    }
}

TEST_CASE("every ablation runs end to end with metrics") {
    const auto scene_dir = fresh_dir("scene_abl");
    write_scene_dir(scene_dir.string(), crossing_benchmark(7));
    PipelineConfig cfg;
    cfg.low_low_radius = 30.0;

    for (Ablation ab : {Ablation::None, Ablation::NoHigh, Ablation::NoLow,
                        Ablation::NoHighLow}) {
        CAPTURE(static_cast<int>(ab));
        const auto out = fresh_dir("run_abl");
        const RunResult r = run(cfg, run_paths_for(scene_dir, out), ab);
        CHECK(r.components >= 1);
        CHECK(!read_text_file((out / "metrics.txt").string()).empty());
        if (ab == Ablation::NoHigh) CHECK(r.high_nodes == 0);
        if (ab == Ablation::NoLow) CHECK(r.low_nodes == 0);
    }
}

TEST_CASE("run propagates missing files with their path") {
    PipelineConfig cfg;
    RunPaths paths;
    paths.trajectories = "/nonexistent/trajectories.txt";
    paths.detections = "/nonexistent/detections.txt";
    paths.templates_dir = "/nonexistent";
    CHECK_THROWS_WITH_AS(run(cfg, paths),
                         doctest::Contains("/nonexistent/trajectories.txt"),
                         std::runtime_error);
}

TEST_CASE("no-high run equals the trajectory-only subgraph run") {
    const SceneBundle bundle = crossing_benchmark(11);
    PipelineConfig cfg;
    cfg.low_low_radius = 30.0;

    const AssembledGraph ablated =
        assemble_joint_graph(bundle.trajectories, bundle.detections, cfg,
                             bundle.spec.width, bundle.spec.height, Ablation::NoHigh);
    const AssembledGraph plain = assemble_joint_graph(
        bundle.trajectories, {}, cfg, bundle.spec.width, bundle.spec.height);
    CHECK(dump_graph(ablated.graph) == dump_graph(plain.graph));

    auto [d1, rep1] = solve(ablated.graph);
    auto [d2, rep2] = solve(plain.graph);
    CHECK(d1 == d2);

    const TrackOutput t1 = extract_tracks(ablated, d1, bundle.detections);
    const TrackOutput t2 = extract_tracks(plain, d2, {});
    CHECK(t1.segmentation == t2.segmentation);
}

TEST_CASE("config round trip and validation") {
    PipelineConfig cfg;
    cfg.hl_weight = 20.0;
    cfg.sigma_hl = 1.2;
    cfg.mode = GraphMode::TrackletNodes;
    cfg.theta.theta2 = 5.5;
    cfg.match_weights = {0.5, 1, 2, 3, 4, 5};
    const PipelineConfig back = parse_config(dump_config(cfg));
    CHECK(back.hl_weight == 20.0);
    CHECK(back.sigma_hl == 1.2);
    CHECK(back.mode == GraphMode::TrackletNodes);
    CHECK(back.theta.theta2 == 5.5);
    CHECK(back.match_weights[3] == 3.0);

    CHECK_THROWS_WITH_AS(parse_config("bogus_key = 1\n"),
                         doctest::Contains("unknown key"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("hl_weight = -2\n"), std::invalid_argument);
}

TEST_CASE("tracklet-mode graph stays valid and solvable") {
    const SceneBundle bundle = crossing_benchmark(13);
    PipelineConfig cfg;
    cfg.mode = GraphMode::TrackletNodes;
    cfg.sigma_hl = 1.2;
    cfg.low_low_radius = 30.0;

    // A small slice keeps this test quick: first 15 frames only.
    std::vector<Trajectory> trajs;
    for (Trajectory t : bundle.trajectories) {
        if (t.start_frame >= 15) continue;
        if (t.end_frame() >= 15)
            t.points.resize(static_cast<std::size_t>(15 - t.start_frame));
        if (t.points.size() >= 2) trajs.push_back(std::move(t));
    }
    std::vector<Detection> dets;
    for (const Detection& d : bundle.detections)
        if (d.frame < 15) dets.push_back(d);

    const AssembledGraph assembled = assemble_joint_graph(
        trajs, dets, cfg, bundle.spec.width, bundle.spec.height);
    CHECK(assembled.graph.high_count() == assembled.tracklets.size());
    auto [d, report] = solve(assembled.graph);
    CHECK(is_feasible(assembled.graph, labeling_of(assembled.graph, d)));
    const TrackOutput out = extract_tracks(assembled, d, dets);
    CHECK(out.segmentation.size() == trajs.size());
}

}  // TEST_SUITE
