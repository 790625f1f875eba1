#include "jtms/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "jtms/graph_io.hpp"
#include "jtms/metrics.hpp"
#include "jtms/scene_io.hpp"
#include "jtms/text.hpp"

namespace jtms {

namespace {

[[noreturn]] void config_error(std::size_t line, const std::string& what) {
    throw std::invalid_argument("config line " + std::to_string(line) + ": " + what);
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    LineReader reader(text);
    std::string_view line;
    while (reader.next(line)) {
        if (line.front() == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            config_error(reader.line_number(), "expected 'key = value'");
        auto trim = [](std::string_view s) {
            while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
            while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
            return s;
        };
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const std::string ctx = "config line " + std::to_string(reader.line_number());

        if (key == "score_threshold") cfg.score_threshold = parse_double(value, ctx);
        else if (key == "min_box_coverage") cfg.min_box_coverage = parse_double(value, ctx);
        else if (key == "max_image_fraction") cfg.max_image_fraction = parse_double(value, ctx);
        else if (key == "sigma_hl") cfg.sigma_hl = parse_double(value, ctx);
        else if (key == "hl_weight") cfg.hl_weight = parse_double(value, ctx);
        else if (key == "low_low_radius") cfg.low_low_radius = parse_double(value, ctx);
        else if (key == "clamp_epsilon") cfg.clamp_epsilon = parse_double(value, ctx);
        else if (key == "theta_bar0") cfg.theta.theta_bar0 = parse_double(value, ctx);
        else if (key == "theta0") cfg.theta.theta0 = parse_double(value, ctx);
        else if (key == "theta1") cfg.theta.theta1 = parse_double(value, ctx);
        else if (key == "theta2") cfg.theta.theta2 = parse_double(value, ctx);
        else if (key == "theta3") cfg.theta.theta3 = parse_double(value, ctx);
        else if (key == "match_w0") cfg.match_weights[0] = parse_double(value, ctx);
        else if (key == "match_w1") cfg.match_weights[1] = parse_double(value, ctx);
        else if (key == "match_w2") cfg.match_weights[2] = parse_double(value, ctx);
        else if (key == "match_w3") cfg.match_weights[3] = parse_double(value, ctx);
        else if (key == "match_w4") cfg.match_weights[4] = parse_double(value, ctx);
        else if (key == "match_w5") cfg.match_weights[5] = parse_double(value, ctx);
        else if (key == "max_outer_rounds")
            cfg.solver.max_outer_rounds = static_cast<int>(parse_int(value, ctx));
        else if (key == "gain_epsilon") cfg.solver.gain_epsilon = parse_double(value, ctx);
        else if (key == "enable_merge_moves")
            cfg.solver.enable_merge_moves = parse_int(value, ctx) != 0;
        else if (key == "mode") {
            if (value == "detections") cfg.mode = GraphMode::DetectionNodes;
            else if (value == "tracklets") cfg.mode = GraphMode::TrackletNodes;
            else config_error(reader.line_number(), "mode must be detections or tracklets");
        } else {
            config_error(reader.line_number(), "unknown key '" + key + "'");
        }
    }
    if (cfg.hl_weight <= 0.0) throw std::invalid_argument("hl_weight must be positive");
    return cfg;
}

std::string dump_config(const PipelineConfig& cfg) {
    std::string out;
    out += "score_threshold = " + format_double(cfg.score_threshold) + "\n";
    out += "min_box_coverage = " + format_double(cfg.min_box_coverage) + "\n";
    out += "max_image_fraction = " + format_double(cfg.max_image_fraction) + "\n";
    out += "sigma_hl = " + format_double(cfg.sigma_hl) + "\n";
    out += "hl_weight = " + format_double(cfg.hl_weight) + "\n";
    out += "low_low_radius = " + format_double(cfg.low_low_radius) + "\n";
    out += "clamp_epsilon = " + format_double(cfg.clamp_epsilon) + "\n";
    out += "theta_bar0 = " + format_double(cfg.theta.theta_bar0) + "\n";
    out += "theta0 = " + format_double(cfg.theta.theta0) + "\n";
    out += "theta1 = " + format_double(cfg.theta.theta1) + "\n";
    out += "theta2 = " + format_double(cfg.theta.theta2) + "\n";
    out += "theta3 = " + format_double(cfg.theta.theta3) + "\n";
    for (int i = 0; i < 6; ++i)
        out += "match_w" + std::to_string(i) + " = " +
               format_double(cfg.match_weights[static_cast<std::size_t>(i)]) + "\n";
    out += "max_outer_rounds = " + std::to_string(cfg.solver.max_outer_rounds) + "\n";
    out += "gain_epsilon = " + format_double(cfg.solver.gain_epsilon) + "\n";
    out += std::string("enable_merge_moves = ") + (cfg.solver.enable_merge_moves ? "1" : "0") + "\n";
    out += std::string("mode = ") +
           (cfg.mode == GraphMode::DetectionNodes ? "detections" : "tracklets") + "\n";
    return out;
}

std::vector<Detection> filter_detections(std::vector<Detection> detections,
                                         const PipelineConfig& cfg, double image_area) {
    std::vector<Detection> kept;
    kept.reserve(detections.size());
    for (Detection& d : detections) {
        if (d.score < cfg.score_threshold) continue;
        if (d.tmpl) {
            const double mass = d.tmpl->mean() * d.box().area();
            if (mass < cfg.min_box_coverage * d.box().area()) continue;
            if (mass > cfg.max_image_fraction * image_area) continue;
        }
        kept.push_back(std::move(d));
    }
    return kept;
}

std::vector<Tracklet> build_tracklets(std::span<const Detection> detections) {
    std::map<int, std::vector<const Detection*>> by_frame;
    for (const Detection& d : detections) by_frame[d.frame].push_back(&d);

    std::vector<Tracklet> tracklets;
    for (const Detection& start : detections) {
        std::array<Detection, 5> chain;
        chain[0] = start;
        bool complete = true;
        for (int k = 1; k < 5; ++k) {
            auto it = by_frame.find(start.frame + k);
            const Detection* best = nullptr;
            double best_iou = 0.0;
            if (it != by_frame.end()) {
                for (const Detection* cand : it->second) {
                    const double v = iou(chain[static_cast<std::size_t>(k - 1)].box(),
                                         cand->box());
                    if (v > best_iou || (v == best_iou && best && cand->id < best->id)) {
                        best = cand;
                        best_iou = v;
                    }
                }
            }
            if (!best || best_iou <= 0.0) {
                complete = false;
                break;
            }
            chain[static_cast<std::size_t>(k)] = *best;
        }
        if (!complete) continue;
        const double dx = chain[4].cx - chain[0].cx;
        WalkDirection dir = WalkDirection::Unknown;
        if (dx > 0.0) dir = WalkDirection::Right;
        else if (dx < 0.0) dir = WalkDirection::Left;
        tracklets.push_back(make_tracklet(std::move(chain), dir));
    }
    return tracklets;
}

namespace {

// Tracklet-mode HH rule: evidence between two tracklets is the summed cut
// cost over member-detection pairs at most one frame apart (shared
// detections contribute their IoU-1 attraction).
double tracklet_pair_cost(const Tracklet& a, const Tracklet& b, double clamp_eps) {
    double total = 0.0;
    for (const Detection& da : a.detections)
        for (const Detection& db : b.detections) {
            if (std::abs(da.frame - db.frame) > 1) continue;
            const double p = detection_pair_probability(da, db);
            if (p == 0.5) continue;
            total += cut_cost(p, clamp_eps);
        }
    return total;
}

}  // namespace

AssembledGraph assemble_joint_graph(std::span<const Trajectory> trajectories,
                                    std::span<const Detection> detections,
                                    const PipelineConfig& cfg, double image_width,
                                    double image_height, Ablation ablation) {
    AssembledGraph out;
    out.mode = cfg.mode;

    const bool use_high = ablation != Ablation::NoHigh;
    const bool use_low = ablation != Ablation::NoLow;
    const bool use_hl = use_high && use_low && ablation != Ablation::NoHighLow;

    std::vector<const Trajectory*> trajs;
    if (use_low)
        for (const Trajectory& t : trajectories) trajs.push_back(&t);

    std::vector<const Detection*> dets;
    if (use_high && cfg.mode == GraphMode::DetectionNodes)
        for (const Detection& d : detections) dets.push_back(&d);
    if (use_high && cfg.mode == GraphMode::TrackletNodes)
        out.tracklets = build_tracklets(detections);

    const std::size_t high_count = cfg.mode == GraphMode::DetectionNodes
                                       ? dets.size()
                                       : out.tracklets.size();
    const std::size_t low_count = trajs.size();

    for (std::size_t i = 0; i < high_count; ++i)
        out.high_ids.push_back(cfg.mode == GraphMode::DetectionNodes
                                   ? dets[i]->id
                                   : static_cast<int>(i));
    for (const Trajectory* t : trajs) out.trajectory_ids.push_back(t->id);

    std::vector<EdgeRef> edges;

    // High-high edges.
    if (cfg.mode == GraphMode::DetectionNodes) {
        for (std::size_t i = 0; i < dets.size(); ++i)
            for (std::size_t j = i + 1; j < dets.size(); ++j) {
                if (std::abs(dets[i]->frame - dets[j]->frame) > 1) continue;
                const double p = detection_pair_probability(*dets[i], *dets[j]);
                if (p == 0.5) continue;
                edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                 EdgeClass::HighHigh, cut_cost(p, cfg.clamp_epsilon)});
            }
    } else {
        for (std::size_t i = 0; i < out.tracklets.size(); ++i)
            for (std::size_t j = i + 1; j < out.tracklets.size(); ++j) {
                const double c =
                    tracklet_pair_cost(out.tracklets[i], out.tracklets[j], cfg.clamp_epsilon);
                if (c == 0.0) continue;
                edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                 EdgeClass::HighHigh, c});
            }
    }

    // Low-low edges among spatial neighbors.
    if (!trajs.empty()) {
        std::vector<Trajectory> traj_values;  // context needs a contiguous span
        traj_values.reserve(trajs.size());
        for (const Trajectory* t : trajs) traj_values.push_back(*t);
        const TrajectoryContext ctx =
            make_trajectory_context(traj_values, image_width, image_height);
        const double radius_normalized = cfg.low_low_radius / ctx.image_diagonal;
        for (std::size_t i = 0; i < trajs.size(); ++i)
            for (std::size_t j = i + 1; j < trajs.size(); ++j) {
                const TrajectoryDistances dist =
                    trajectory_distances(*trajs[i], *trajs[j], ctx);
                if (dist.spatial > radius_normalized) continue;
                const double p = trajectory_pair_probability(dist, cfg.theta);
                if (p == 0.5) continue;
                edges.push_back({static_cast<std::uint32_t>(high_count + i),
                                 static_cast<std::uint32_t>(high_count + j),
                                 EdgeClass::LowLow, cut_cost(p, cfg.clamp_epsilon)});
            }
    }

    // High-low edges where the potential is informative.
    if (use_hl) {
        if (cfg.mode == GraphMode::DetectionNodes) {
            for (std::size_t i = 0; i < dets.size(); ++i)
                for (std::size_t j = 0; j < trajs.size(); ++j) {
                    if (!trajs[j]->alive_at(dets[i]->frame)) continue;
                    const double p =
                        detection_trajectory_probability(*dets[i], *trajs[j], cfg.sigma_hl);
                    if (p == 0.5) continue;
                    edges.push_back({static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(high_count + j),
                                     EdgeClass::HighLow,
                                     cfg.hl_weight * cut_cost(p, cfg.clamp_epsilon)});
                }
        } else {
            for (std::size_t i = 0; i < out.tracklets.size(); ++i)
                for (std::size_t j = 0; j < trajs.size(); ++j) {
                    const Tracklet& tk = out.tracklets[i];
                    if (trajs[j]->end_frame() < tk.start_frame() ||
                        trajs[j]->start_frame > tk.end_frame())
                        continue;
                    const double c = cfg.hl_weight *
                                     tracklet_trajectory_cost(tk, *trajs[j], cfg.sigma_hl,
                                                              cfg.clamp_epsilon);
                    if (c == 0.0) continue;
                    edges.push_back({static_cast<std::uint32_t>(i),
                                     static_cast<std::uint32_t>(high_count + j),
                                     EdgeClass::HighLow, c});
                }
        }
    }

    out.graph = build_graph(high_count, low_count, std::move(edges));
    return out;
}

TrackOutput extract_tracks(const AssembledGraph& assembled, const Decomposition& d,
                           std::span<const Detection> detections) {
    if (d.size() != assembled.graph.node_count())
        throw std::invalid_argument("decomposition does not label this graph");

    std::map<int, const Detection*> by_id;
    for (const Detection& det : detections) by_id[det.id] = &det;

    TrackOutput out;
    const std::size_t high_count = assembled.graph.high_count();

    // component -> frame -> best detection so far
    std::map<std::uint32_t, std::map<int, const Detection*>> chosen;
    auto consider = [&](std::uint32_t comp, const Detection& det) {
        auto& slot = chosen[comp][det.frame];
        if (!slot || det.score > slot->score ||
            (det.score == slot->score && det.id < slot->id))
            slot = &det;
    };

    for (std::size_t i = 0; i < high_count; ++i) {
        const std::uint32_t comp = d.component_of[i];
        if (assembled.mode == GraphMode::DetectionNodes) {
            auto it = by_id.find(assembled.high_ids[i]);
            if (it == by_id.end())
                throw std::invalid_argument("unknown detection id " +
                                            std::to_string(assembled.high_ids[i]));
            consider(comp, *it->second);
        } else {
            for (const Detection& det : assembled.tracklets[i].detections)
                consider(comp, det);
        }
    }
    for (const auto& [comp, frames] : chosen)
        for (const auto& [frame, det] : frames) out.tracks[comp][frame] = det->id;

    for (std::size_t j = 0; j < assembled.trajectory_ids.size(); ++j)
        out.segmentation[assembled.trajectory_ids[j]] =
            d.component_of[high_count + j];
    return out;
}

std::string dump_tracks(const TrackOutput& output) {
    std::string out = "jtms-tracks 1\n";
    for (const auto& [comp, frames] : output.tracks)
        for (const auto& [frame, det] : frames)
            out += "k " + std::to_string(comp) + " " + std::to_string(frame) + " " +
                   std::to_string(det) + "\n";
    return out;
}

std::string dump_segmentation(const TrackOutput& output) {
    std::string out = "jtms-seg 1\n";
    for (const auto& [traj, comp] : output.segmentation)
        out += "s " + std::to_string(traj) + " " + std::to_string(comp) + "\n";
    return out;
}

std::string dump_overlay(const TrackOutput& output, std::span<const Detection> detections,
                         std::span<const Trajectory> trajectories) {
    std::map<int, const Detection*> det_by_id;
    for (const Detection& d : detections) det_by_id[d.id] = &d;

    // frame ascending; boxes before points within a frame, each in id order.
    std::map<int, std::map<int, std::pair<std::uint32_t, const Detection*>>> frame_boxes;
    for (const auto& [comp, frames] : output.tracks)
        for (const auto& [frame, det_id] : frames)
            frame_boxes[frame][det_id] = {comp, det_by_id.at(det_id)};

    std::string out = "jtms-overlay 1\n";
    std::map<int, std::string> lines;
    for (const auto& [frame, dets] : frame_boxes)
        for (const auto& [det_id, entry] : dets) {
            (void)det_id;
            const auto& [comp, det] = entry;
            lines[frame] += std::to_string(frame) + " box(" + std::to_string(comp) + ") " +
                            format_double(det->cx) + " " + format_double(det->cy) + " " +
                            format_double(det->w) + " " + format_double(det->h) + "\n";
        }
    for (const Trajectory& t : trajectories) {
        auto it = output.segmentation.find(t.id);
        if (it == output.segmentation.end()) continue;
        for (int f = t.start_frame; f <= t.end_frame(); ++f) {
            const auto& p = t.point_at(f);
            lines[f] += std::to_string(f) + " pt(" + std::to_string(it->second) + ") " +
                        format_double(p[0]) + " " + format_double(p[1]) + "\n";
        }
    }
    for (const auto& [frame, text] : lines) {
        (void)frame;
        out += text;
    }
    return out;
}

RunResult run(const PipelineConfig& cfg, const RunPaths& paths, Ablation ablation,
              bool exact) {
    const TrajectoryFile traj_file = parse_trajectories(read_text_file(paths.trajectories));
    std::vector<Detection> detections = parse_detections(read_text_file(paths.detections));
    resolve_templates(detections, load_templates(paths.templates_dir, detections));

    const double image_area = traj_file.image_width * traj_file.image_height;
    detections = filter_detections(std::move(detections), cfg, image_area);

    AssembledGraph assembled =
        assemble_joint_graph(traj_file.trajectories, detections, cfg,
                             traj_file.image_width, traj_file.image_height, ablation);

    Decomposition solution;
    SolveReport report;
    if (exact) {
        auto [d, value] = solve_exact(assembled.graph);
        solution = std::move(d);
        report.final_objective = value;
        report.initial_objective = value;
    } else {
        auto [d, r] = solve(assembled.graph, cfg.solver);
        solution = std::move(d);
        report = r;
    }

    TrackOutput tracks = extract_tracks(assembled, solution, detections);

    if (!paths.out_graph.empty())
        write_text_file(paths.out_graph, dump_graph(assembled.graph));
    if (!paths.out_solution.empty())
        write_text_file(paths.out_solution, dump_solution(solution));
    if (!paths.out_tracks.empty()) write_text_file(paths.out_tracks, dump_tracks(tracks));
    if (!paths.out_segmentation.empty())
        write_text_file(paths.out_segmentation, dump_segmentation(tracks));
    if (!paths.out_overlay.empty())
        write_text_file(paths.out_overlay,
                        dump_overlay(tracks, detections, traj_file.trajectories));

    if (!paths.ground_truth.empty() && !paths.out_metrics.empty()) {
        const SceneGroundTruth gt = parse_ground_truth(read_text_file(paths.ground_truth));
        // Segmentation scores only when the graph carried trajectory nodes
        // (the no-low ablation drops them even though the file has some).
        SegScore seg;
        if (!tracks.segmentation.empty()) {
            std::map<int, int> pred, truth, lengths;
            for (const Trajectory& t : traj_file.trajectories) {
                auto it = gt.trajectory_object.find(t.id);
                if (it == gt.trajectory_object.end())
                    throw std::invalid_argument("ground truth misses trajectory " +
                                                std::to_string(t.id));
                pred[t.id] = static_cast<int>(tracks.segmentation.at(t.id));
                truth[t.id] = it->second;
                lengths[t.id] = static_cast<int>(t.points.size());
            }
            seg = seg_score(pred, truth, lengths);
        }

        std::map<int, TrackBoxes> gt_tracks;
        for (const auto& [obj, frames] : gt.true_boxes)
            for (const auto& [frame, box] : frames) gt_tracks[obj][frame] = box;
        std::map<int, TrackBoxes> hyp_tracks;
        std::map<int, const Detection*> by_id;
        for (const Detection& det : detections) by_id[det.id] = &det;
        for (const auto& [comp, frames] : tracks.tracks)
            for (const auto& [frame, det_id] : frames)
                hyp_tracks[static_cast<int>(comp)][frame] = by_id.at(det_id)->box();
        const MotScore mot = clear_mot(gt_tracks, hyp_tracks);
        write_text_file(paths.out_metrics, format_metrics_text(seg, mot));
    }

    RunResult result;
    result.objective = objective(assembled.graph, solution);
    result.report = report;
    result.high_nodes = assembled.graph.high_count();
    result.low_nodes = assembled.graph.low_count();
    result.edges = assembled.graph.edge_count();
    result.components = solution.component_count();
    return result;
}

}  // namespace jtms
