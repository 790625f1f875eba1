// jtms: joint trajectory/detection multicut segmentation and tracking.
//
// Subcommands: simulate, build-graph, solve, track, evaluate, run.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "jtms/graph_io.hpp"
#include "jtms/metrics.hpp"
#include "jtms/pipeline.hpp"
#include "jtms/scene_io.hpp"
#include "jtms/scene_sim.hpp"
#include "jtms/solver.hpp"
#include "jtms/text.hpp"

namespace {

jtms::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return jtms::parse_config(jtms::read_text_file(path));
}

jtms::Ablation ablation_from(const std::string& name) {
    if (name == "none") return jtms::Ablation::None;
    if (name == "no-high") return jtms::Ablation::NoHigh;
    if (name == "no-low") return jtms::Ablation::NoLow;
    if (name == "no-hl") return jtms::Ablation::NoHighLow;
    throw std::invalid_argument("unknown ablation '" + name + "'");
}

void print_report(const jtms::SolveReport& report) {
    std::cout << "objective=" << jtms::format_double(report.final_objective)
              << " rounds=" << report.rounds << " moves=" << report.moves << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint multicut segmentation and tracking"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic scene");
    std::string sim_scene = "crossing";
    std::uint64_t sim_seed = 1;
    std::string sim_out = ".";
    sim->add_option("--scene", sim_scene, "scene name (crossing)");
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--out-dir", sim_out, "output directory")->required();

    // build-graph
    auto* bg = app.add_subcommand("build-graph", "assemble the joint graph");
    std::string bg_traj, bg_det, bg_templates, bg_config, bg_ablation = "none", bg_out;
    bg->add_option("--trajectories", bg_traj)->required();
    bg->add_option("--detections", bg_det)->required();
    bg->add_option("--templates", bg_templates, "template directory")->required();
    bg->add_option("--config", bg_config, "config file (key = value)");
    bg->add_option("--ablation", bg_ablation, "none|no-high|no-low|no-hl");
    bg->add_option("--out", bg_out, "graph dump path")->required();

    // solve
    auto* sv = app.add_subcommand("solve", "minimize the multicut objective");
    std::string sv_graph, sv_out;
    int sv_max_rounds = 100;
    bool sv_exact = false;
    sv->add_option("--graph", sv_graph)->required();
    sv->add_option("--out", sv_out, "solution path")->required();
    sv->add_option("--max-rounds", sv_max_rounds);
    sv->add_flag("--exact", sv_exact, "exhaustive enumeration (<= 12 nodes)");

    // track
    auto* tr = app.add_subcommand("track", "extract tracks and segmentation");
    std::string tr_traj, tr_det, tr_templates, tr_config, tr_ablation = "none";
    std::string tr_solution, tr_tracks, tr_seg, tr_overlay;
    tr->add_option("--trajectories", tr_traj)->required();
    tr->add_option("--detections", tr_det)->required();
    tr->add_option("--templates", tr_templates)->required();
    tr->add_option("--config", tr_config);
    tr->add_option("--ablation", tr_ablation);
    tr->add_option("--solution", tr_solution)->required();
    tr->add_option("--tracks", tr_tracks)->required();
    tr->add_option("--segmentation", tr_seg)->required();
    tr->add_option("--overlay", tr_overlay);

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "score against ground truth");
    std::string ev_gt, ev_seg, ev_tracks, ev_traj, ev_det, ev_format = "text", ev_out;
    ev->add_option("--ground-truth", ev_gt)->required();
    ev->add_option("--segmentation", ev_seg)->required();
    ev->add_option("--tracks", ev_tracks)->required();
    ev->add_option("--trajectories", ev_traj)->required();
    ev->add_option("--detections", ev_det)->required();
    ev->add_option("--format", ev_format, "text|json");
    ev->add_option("--out", ev_out, "write here instead of stdout");

    // run
    auto* rn = app.add_subcommand("run", "simulate-to-metrics in one step");
    std::string rn_traj, rn_det, rn_templates, rn_gt, rn_config, rn_ablation = "none";
    std::string rn_out_dir = ".";
    bool rn_exact = false;
    rn->add_option("--trajectories", rn_traj)->required();
    rn->add_option("--detections", rn_det)->required();
    rn->add_option("--templates", rn_templates)->required();
    rn->add_option("--ground-truth", rn_gt, "enables the metrics file");
    rn->add_option("--config", rn_config);
    rn->add_option("--ablation", rn_ablation);
    rn->add_option("--out-dir", rn_out_dir)->required();
    rn->add_flag("--exact", rn_exact);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            if (sim_scene != "crossing")
                throw std::invalid_argument("unknown scene '" + sim_scene + "'");
            const jtms::SceneBundle bundle = jtms::crossing_benchmark(sim_seed);
            jtms::write_scene_dir(sim_out, bundle);
            std::cout << "trajectories=" << bundle.trajectories.size()
                      << " detections=" << bundle.detections.size()
                      << " frames=" << bundle.spec.frame_count << "\n";
        } else if (*bg) {
            const jtms::PipelineConfig cfg = load_config(bg_config);
            const jtms::TrajectoryFile tf =
                jtms::parse_trajectories(jtms::read_text_file(bg_traj));
            std::vector<jtms::Detection> dets =
                jtms::parse_detections(jtms::read_text_file(bg_det));
            jtms::resolve_templates(dets, jtms::load_templates(bg_templates, dets));
            dets = jtms::filter_detections(std::move(dets), cfg,
                                           tf.image_width * tf.image_height);
            const jtms::AssembledGraph assembled = jtms::assemble_joint_graph(
                tf.trajectories, dets, cfg, tf.image_width, tf.image_height,
                ablation_from(bg_ablation));
            jtms::write_graph_file(bg_out, assembled.graph);
            std::cout << "high=" << assembled.graph.high_count()
                      << " low=" << assembled.graph.low_count()
                      << " edges=" << assembled.graph.edge_count() << "\n";
        } else if (*sv) {
            const jtms::JointGraph g = jtms::read_graph_file(sv_graph);
            jtms::Decomposition d;
            jtms::SolveReport report;
            if (sv_exact) {
                auto [dec, value] = jtms::solve_exact(g);
                d = std::move(dec);
                report.final_objective = value;
                report.initial_objective = value;
            } else {
                jtms::SolveParams params;
                params.max_outer_rounds = sv_max_rounds;
                auto [dec, rep] = jtms::solve(g, params);
                d = std::move(dec);
                report = rep;
            }
            jtms::write_solution_file(sv_out, d);
            print_report(report);
        } else if (*tr) {
            const jtms::PipelineConfig cfg = load_config(tr_config);
            const jtms::TrajectoryFile tf =
                jtms::parse_trajectories(jtms::read_text_file(tr_traj));
            std::vector<jtms::Detection> dets =
                jtms::parse_detections(jtms::read_text_file(tr_det));
            jtms::resolve_templates(dets, jtms::load_templates(tr_templates, dets));
            dets = jtms::filter_detections(std::move(dets), cfg,
                                           tf.image_width * tf.image_height);
            const jtms::AssembledGraph assembled = jtms::assemble_joint_graph(
                tf.trajectories, dets, cfg, tf.image_width, tf.image_height,
                ablation_from(tr_ablation));
            const jtms::Decomposition d = jtms::read_solution_file(tr_solution);
            const jtms::TrackOutput out = jtms::extract_tracks(assembled, d, dets);
            jtms::write_text_file(tr_tracks, jtms::dump_tracks(out));
            jtms::write_text_file(tr_seg, jtms::dump_segmentation(out));
            if (!tr_overlay.empty())
                jtms::write_text_file(tr_overlay,
                                      jtms::dump_overlay(out, dets, tf.trajectories));
        } else if (*ev) {
            const jtms::SceneGroundTruth gt =
                jtms::parse_ground_truth(jtms::read_text_file(ev_gt));
            const jtms::TrajectoryFile tf =
                jtms::parse_trajectories(jtms::read_text_file(ev_traj));
            const std::vector<jtms::Detection> dets =
                jtms::parse_detections(jtms::read_text_file(ev_det));

            // Segmentation block.
            std::map<int, int> pred;
            {
                const std::string seg_text = jtms::read_text_file(ev_seg);
                jtms::LineReader reader(seg_text);
                std::string_view line;
                if (!reader.next(line) || line != "jtms-seg 1")
                    throw std::invalid_argument("expected header 'jtms-seg 1'");
                while (reader.next(line)) {
                    auto fields = jtms::split_fields(line);
                    if (fields.size() != 3 || fields[0] != "s")
                        throw std::invalid_argument("bad segmentation record");
                    pred[static_cast<int>(jtms::parse_int(fields[1], "segmentation"))] =
                        static_cast<int>(jtms::parse_int(fields[2], "segmentation"));
                }
            }
            jtms::SegScore seg;
            if (!pred.empty()) {
                std::map<int, int> truth, lengths;
                for (const jtms::Trajectory& t : tf.trajectories) {
                    auto it = gt.trajectory_object.find(t.id);
                    if (it == gt.trajectory_object.end())
                        throw std::invalid_argument("ground truth misses trajectory " +
                                                    std::to_string(t.id));
                    truth[t.id] = it->second;
                    lengths[t.id] = static_cast<int>(t.points.size());
                }
                seg = jtms::seg_score(pred, truth, lengths);
            }

            // Tracking block.
            std::map<int, jtms::TrackBoxes> gt_tracks;
            for (const auto& [obj, frames] : gt.true_boxes)
                for (const auto& [frame, box] : frames) gt_tracks[obj][frame] = box;
            std::map<int, const jtms::Detection*> by_id;
            for (const jtms::Detection& det : dets) by_id[det.id] = &det;
            std::map<int, jtms::TrackBoxes> hyp_tracks;
            {
                const std::string tracks_text = jtms::read_text_file(ev_tracks);
                jtms::LineReader reader(tracks_text);
                std::string_view line;
                if (!reader.next(line) || line != "jtms-tracks 1")
                    throw std::invalid_argument("expected header 'jtms-tracks 1'");
                while (reader.next(line)) {
                    auto fields = jtms::split_fields(line);
                    if (fields.size() != 4 || fields[0] != "k")
                        throw std::invalid_argument("bad track record");
                    const int comp = static_cast<int>(jtms::parse_int(fields[1], "tracks"));
                    const int frame = static_cast<int>(jtms::parse_int(fields[2], "tracks"));
                    const int det = static_cast<int>(jtms::parse_int(fields[3], "tracks"));
                    auto det_it = by_id.find(det);
                    if (det_it == by_id.end())
                        throw std::invalid_argument("tracks file references unknown detection " +
                                                    std::to_string(det));
                    hyp_tracks[comp][frame] = det_it->second->box();
                }
            }
            const jtms::MotScore mot = jtms::clear_mot(gt_tracks, hyp_tracks);

            const std::string text = ev_format == "json"
                                         ? jtms::format_metrics_json(seg, mot)
                                         : jtms::format_metrics_text(seg, mot);
            if (ev_out.empty()) std::cout << text;
            else jtms::write_text_file(ev_out, text);
        } else if (*rn) {
            const jtms::PipelineConfig cfg = load_config(rn_config);
            std::filesystem::create_directories(rn_out_dir);
            jtms::RunPaths paths;
            paths.trajectories = rn_traj;
            paths.detections = rn_det;
            paths.templates_dir = rn_templates;
            paths.ground_truth = rn_gt;
            paths.out_graph = rn_out_dir + "/graph.txt";
            paths.out_solution = rn_out_dir + "/solution.txt";
            paths.out_tracks = rn_out_dir + "/tracks.txt";
            paths.out_segmentation = rn_out_dir + "/segmentation.txt";
            paths.out_overlay = rn_out_dir + "/overlay.txt";
            if (!rn_gt.empty()) paths.out_metrics = rn_out_dir + "/metrics.txt";
            const jtms::RunResult result =
                jtms::run(cfg, paths, ablation_from(rn_ablation), rn_exact);
            print_report(result.report);
            std::cout << "high=" << result.high_nodes << " low=" << result.low_nodes
                      << " edges=" << result.edges << " components=" << result.components
                      << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
