// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "jtms/graph.hpp"
#include "jtms/graph_io.hpp"
#include "jtms/metrics.hpp"
#include "jtms/pipeline.hpp"
#include "jtms/potentials.hpp"
#include "jtms/rng.hpp"
#include "jtms/scene_io.hpp"
#include "jtms/scene_sim.hpp"
#include "jtms/solver.hpp"
#include "jtms/text.hpp"

using namespace jtms;

namespace {

int failures = 0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d %s: %s\n", pass ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.c_str());
    if (!pass) ++failures;
}

JointGraph random_graph(Rng& rng, std::size_t n, double density, double lo, double hi) {
    std::vector<EdgeRef> edges;
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = i + 1; j < n; ++j)
            if (rng.uniform() < density)
                edges.push_back({i, j, EdgeClass::LowLow, rng.uniform(lo, hi)});
    return build_graph(0, n, std::move(edges));
}

// --- criterion 1: every solve result satisfies the cycle inequalities -----

void criterion_feasibility() {
    Timer timer;
    Rng rng(1001);
    int feasible = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 2 + rng.integer(19);  // [2, 20]
        const JointGraph g = random_graph(rng, n, 0.5, -1.0, 1.0);
        auto [d, rep] = solve(g);
        if (is_feasible(g, labeling_of(g, d))) ++feasible;
    }
    const double secs = timer.seconds();
    report(1, "feasibility", feasible == trials && secs < 10.0,
           std::to_string(feasible) + "/" + std::to_string(trials) + " feasible, " +
               format_double(secs) + "s (budget 10s)");
}

// --- criterion 2: heuristic tracks the exact oracle ------------------------

void criterion_oracle_equivalence() {
    Timer timer;
    Rng rng(2002);
    const int trials = 200;
    int exact_matches = 0;
    double gap_sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        const JointGraph g = random_graph(rng, 8, 0.7, -1.0, 1.0);
        auto [dh, rep] = solve(g);
        auto [de, best] = solve_exact(g);
        const double gap = rep.final_objective - best;
        if (std::abs(gap) <= 1e-12) ++exact_matches;
        gap_sum += std::max(0.0, gap);
    }
    const double mean_gap = gap_sum / trials;
    const double secs = timer.seconds();
    const bool pass = exact_matches >= trials * 9 / 10 && mean_gap <= 0.05 && secs < 30.0;
    report(2, "oracle equivalence", pass,
           std::to_string(exact_matches) + "/" + std::to_string(trials) +
               " exact (need >= 180), mean gap " + format_double(mean_gap) +
               " (<= 0.05), " + format_double(secs) + "s (budget 30s)");
}

// --- criterion 3: potential reference values --------------------------------

void criterion_potential_values() {
    Detection a, b;
    a.frame = 0;
    a.cx = 5.0;
    a.cy = 5.0;
    a.w = 10.0;
    a.h = 10.0;
    a.score = 1.0;
    b = a;
    b.frame = 1;
    b.cx = 5.0 + 10.0 / 19.0;  // IoU exactly 0.9
    const double p_iou = detection_pair_probability(a, b);
    const bool iou_ok = std::abs(p_iou - 0.017986) <= 1e-5;

    Detection far = a;
    far.cx = 25.0;  // d^sp = 2.0
    const double p_far = detection_pair_probability(a, far);
    const bool far_ok = std::abs(p_far - 0.98201) <= 1e-5;

    double worst = 0.0;
    for (double p = 1e-5; p <= 1.0 - 1e-5; p += 1e-3)
        worst = std::max(worst, std::abs(logistic(-cut_cost(p)) - p));
    const bool round_ok = worst < 1e-12;

    report(3, "potential unit values", iou_ok && far_ok && round_ok,
           "p(IoU=0.9)=" + format_double(p_iou) + ", p(dsp=2)=" + format_double(p_far) +
               ", max round-trip error " + format_double(worst));
}

// --- criterion 4: the cost convention makes the MAP claim literal ----------

// Independent likelihood enumeration over all partitions: recursive, keeps
// the first strict maximizer (lexicographically smallest canonical labels).
Decomposition likelihood_argmax(const JointGraph& g, const std::vector<double>& p_cut) {
    const std::size_t n = g.node_count();
    std::vector<std::uint32_t> labels(n, 0);
    std::vector<std::uint32_t> best_labels;
    double best = -std::numeric_limits<double>::infinity();
    auto evaluate = [&] {
        double likelihood = 1.0;
        for (std::size_t e = 0; e < g.edge_count(); ++e) {
            const bool cut = labels[g.edge(e).u] != labels[g.edge(e).v];
            likelihood *= cut ? p_cut[e] : 1.0 - p_cut[e];
        }
        if (likelihood > best) {
            best = likelihood;
            best_labels = labels;
        }
    };
    auto rec = [&](auto&& self, std::size_t i, std::uint32_t mx) -> void {
        if (i == n) {
            evaluate();
            return;
        }
        for (std::uint32_t v = 0; v <= mx + 1; ++v) {
            labels[i] = v;
            self(self, i + 1, std::max(mx, v));
        }
    };
    rec(rec, 1, 0);
    return Decomposition{best_labels};
}

void criterion_map_consistency() {
    Rng rng(4004);
    const int trials = 100;
    int agree = 0;
    for (int t = 0; t < trials; ++t) {
        const std::size_t n = 2 + rng.integer(6);  // [2, 7]
        std::vector<EdgeRef> edges;
        std::vector<double> p_cut;
        for (std::uint32_t i = 0; i < n; ++i)
            for (std::uint32_t j = i + 1; j < n; ++j) {
                if (rng.uniform() >= 0.6) continue;
                const double p = rng.uniform(0.05, 0.95);
                edges.push_back({i, j, EdgeClass::LowLow, cut_cost(p)});
                p_cut.push_back(p);
            }
        const JointGraph g = build_graph(0, n, std::move(edges));
        auto [d, value] = solve_exact(g);
        if (canonicalize(d) == canonicalize(likelihood_argmax(g, p_cut))) ++agree;
    }
    report(4, "MAP consistency", agree == trials,
           std::to_string(agree) + "/" + std::to_string(trials) +
               " partitions equal the likelihood argmax");
}

// --- criterion 5: the joint graph beats its parts ---------------------------

struct ArmScores {
    SegScore seg;
    MotScore mot;
};

ArmScores evaluate_arm(const SceneBundle& bundle, const PipelineConfig& cfg,
                       Ablation ablation) {
    std::vector<Detection> dets = filter_detections(
        bundle.detections, cfg,
        static_cast<double>(bundle.spec.width) * bundle.spec.height);
    const AssembledGraph assembled =
        assemble_joint_graph(bundle.trajectories, dets, cfg, bundle.spec.width,
                             bundle.spec.height, ablation);
    auto [d, rep] = solve(assembled.graph, cfg.solver);
    const TrackOutput out = extract_tracks(assembled, d, dets);

    ArmScores scores;
    if (!assembled.trajectory_ids.empty()) {
        std::map<int, int> pred, truth, lengths;
        for (const Trajectory& t : bundle.trajectories) {
            pred[t.id] = static_cast<int>(out.segmentation.at(t.id));
            truth[t.id] = bundle.ground_truth.trajectory_object.at(t.id);
            lengths[t.id] = static_cast<int>(t.points.size());
        }
        scores.seg = seg_score(pred, truth, lengths);
    }

    std::map<int, TrackBoxes> gt_tracks;
    for (const auto& [obj, frames] : bundle.ground_truth.true_boxes)
        for (const auto& [frame, box] : frames) gt_tracks[obj][frame] = box;
    std::map<int, const Detection*> by_id;
    for (const Detection& det : dets) by_id[det.id] = &det;
    std::map<int, TrackBoxes> hyp_tracks;
    for (const auto& [comp, frames] : out.tracks)
        for (const auto& [frame, det_id] : frames)
            hyp_tracks[static_cast<int>(comp)][frame] = by_id.at(det_id)->box();
    scores.mot = clear_mot(gt_tracks, hyp_tracks);
    return scores;
}

void criterion_joint_beats_parts() {
    Timer timer;
    PipelineConfig cfg;
    cfg.low_low_radius = 30.0;

    bool all_pass = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const SceneBundle bundle = crossing_benchmark(seed);
        const ArmScores joint = evaluate_arm(bundle, cfg, Ablation::None);
        const ArmScores no_high = evaluate_arm(bundle, cfg, Ablation::NoHigh);
        const ArmScores no_low = evaluate_arm(bundle, cfg, Ablation::NoLow);

        const bool seg_ok = joint.seg.f_measure >= no_high.seg.f_measure - 1e-12;
        const bool ids_ok = joint.mot.id_switches <= no_low.mot.id_switches;
        const bool abs_ok = joint.seg.f_measure >= 0.90;
        if (!(seg_ok && ids_ok && abs_ok)) all_pass = false;
        detail += "seed " + std::to_string(seed) + ": F " +
                  format_double(joint.seg.f_measure) + " vs " +
                  format_double(no_high.seg.f_measure) + ", IDs " +
                  std::to_string(joint.mot.id_switches) + " vs " +
                  std::to_string(no_low.mot.id_switches) + "; ";
    }
    const double secs = timer.seconds();
    report(5, "joint beats parts", all_pass && secs < 60.0,
           detail + format_double(secs) + "s (budget 60s)");
}

// --- criterion 6: metric identities -----------------------------------------

void criterion_metric_identities() {
    bool ok = true;
    std::string detail;

    // Identical hypothesis.
    {
        TrackBoxes track;
        for (int f = 0; f < 10; ++f) track[f] = Box::from_center(50, 50, 10, 10);
        const MotScore m = clear_mot({{1, track}}, {{9, track}});
        if (!(m.mota == 1.0 && m.motp == 1.0 && m.false_positives == 0 &&
              m.false_negatives == 0 && m.id_switches == 0)) {
            ok = false;
            detail += "identical-hypothesis case failed; ";
        }
    }
    // Two missing frames.
    {
        TrackBoxes track, partial;
        for (int f = 0; f < 10; ++f) track[f] = Box::from_center(50, 50, 10, 10);
        partial = track;
        partial.erase(3);
        partial.erase(8);
        const MotScore m = clear_mot({{1, track}}, {{1, partial}});
        if (!(m.false_negatives == 2 && std::abs(m.mota - 0.8) < 1e-12)) {
            ok = false;
            detail += "missing-frames case failed; ";
        }
    }
    // Swap at the midpoint.
    {
        TrackBoxes a, b, h1, h2;
        for (int f = 0; f < 10; ++f) {
            a[f] = Box::from_center(20, 20, 8, 8);
            b[f] = Box::from_center(80, 80, 8, 8);
            h1[f] = f < 5 ? a[f] : b[f];
            h2[f] = f < 5 ? b[f] : a[f];
        }
        const MotScore m = clear_mot({{1, a}, {2, b}}, {{1, h1}, {2, h2}});
        if (!(m.id_switches == 2 && std::abs(m.mota - 0.9) < 1e-12)) {
            ok = false;
            detail += "swap case failed; ";
        }
    }
    // MOTA identity on random tracks plus permutation invariance.
    Rng rng(6006);
    for (int trial = 0; trial < 100 && ok; ++trial) {
        std::map<int, int> pred, gt, lengths;
        for (int i = 0; i < 20; ++i) {
            gt[i] = static_cast<int>(rng.integer(3));
            pred[i] = static_cast<int>(rng.integer(4));
            lengths[i] = 1 + static_cast<int>(rng.integer(30));
        }
        const SegScore base = seg_score(pred, gt, lengths);
        int perm[4] = {0, 1, 2, 3};
        for (int i = 3; i > 0; --i)
            std::swap(perm[i], perm[rng.integer(static_cast<std::uint64_t>(i) + 1)]);
        std::map<int, int> relabeled;
        for (const auto& [id, c] : pred) relabeled[id] = 10 + perm[c];
        const SegScore s = seg_score(relabeled, gt, lengths);
        if (s.precision != base.precision || s.recall != base.recall ||
            s.f_measure != base.f_measure ||
            s.objects_extracted != base.objects_extracted) {
            ok = false;
            detail += "seg permutation invariance failed at trial " +
                      std::to_string(trial) + "; ";
        }
    }
    report(6, "metric identities", ok, ok ? "all identities hold" : detail);
}

// --- criterion 7: byte-identical reruns -------------------------------------

void criterion_determinism() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "jtms_acceptance";
    fs::remove_all(base);
    const fs::path scene = base / "scene";
    fs::create_directories(scene);
    write_scene_dir(scene.string(), crossing_benchmark(1));

    PipelineConfig cfg;
    cfg.low_low_radius = 30.0;

    auto run_into = [&](const fs::path& dir) {
        fs::create_directories(dir);
        RunPaths paths;
        paths.trajectories = (scene / "trajectories.txt").string();
        paths.detections = (scene / "detections.txt").string();
        paths.templates_dir = (scene / "templates").string();
        paths.ground_truth = (scene / "ground_truth.txt").string();
        paths.out_graph = (dir / "graph.txt").string();
        paths.out_solution = (dir / "solution.txt").string();
        paths.out_tracks = (dir / "tracks.txt").string();
        paths.out_segmentation = (dir / "segmentation.txt").string();
        paths.out_overlay = (dir / "overlay.txt").string();
        paths.out_metrics = (dir / "metrics.txt").string();
        run(cfg, paths);
    };
    run_into(base / "a");
    run_into(base / "b");

    bool ok = true;
    std::string detail;
    for (const char* name : {"graph.txt", "solution.txt", "tracks.txt",
                             "segmentation.txt", "overlay.txt", "metrics.txt"}) {
        const std::string a = read_text_file((base / "a" / name).string());
        const std::string b = read_text_file((base / "b" / name).string());
        if (a != b || a.empty()) {
            ok = false;
            detail += std::string(name) + " differs; ";
        }
    }
    report(7, "determinism", ok, ok ? "all output files byte-identical" : detail);
}

}  // namespace

int main() {
    criterion_feasibility();
    criterion_oracle_equivalence();
    criterion_potential_values();
    criterion_map_consistency();
    criterion_joint_beats_parts();
    criterion_metric_identities();
    criterion_determinism();
    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
