#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jtms/graph.hpp"
#include "jtms/potentials.hpp"
#include "jtms/solver.hpp"
#include "jtms/types.hpp"

namespace jtms {

enum class GraphMode : std::uint8_t { DetectionNodes, TrackletNodes };

enum class Ablation : std::uint8_t { None, NoHigh, NoLow, NoHighLow };

struct PipelineConfig {
    double score_threshold = 0.5;
    double min_box_coverage = 0.20;   // template mass >= this * box area
    double max_image_fraction = 0.60; // template mass <= this * image area
    double sigma_hl = 2.0;
    double hl_weight = 1.0;           // 20 for sparse post-suppression detections
    double low_low_radius = 50.0;     // px; candidate trajectory pairs
    double clamp_epsilon = kDefaultProbabilityClamp;
    TrajectoryAffinityParams theta;
    std::array<double, 6> match_weights{};
    GraphMode mode = GraphMode::DetectionNodes;
    SolveParams solver;
};

// Flat "key = value" config text; '#' starts a comment line.
PipelineConfig parse_config(std::string_view text);
std::string dump_config(const PipelineConfig& cfg);

/// Sealed graph plus the node <-> entity correspondence. High nodes come
/// first (detections or tracklets in input order), low nodes follow
/// (trajectories in input order). Edges are committed class by class: HH,
/// then LL, then HL, index-ordered pairs within each class.
struct AssembledGraph {
    JointGraph graph;
    GraphMode mode = GraphMode::DetectionNodes;
    std::vector<int> high_ids;        // detection id (or tracklet index) per high node
    std::vector<int> trajectory_ids;  // trajectory id per low node
    std::vector<Tracklet> tracklets;  // tracklet mode only, index = high node
};

/// Score threshold plus the template-mass rules: detections whose template
/// mass falls below min_box_coverage of the box or above max_image_fraction
/// of the image are dropped. Detections without templates only face the
/// score rule.
std::vector<Detection> filter_detections(std::vector<Detection> detections,
                                         const PipelineConfig& cfg, double image_area);

/// Greedy 5-frame chaining by maximal IoU, walking direction from the net
/// horizontal displacement. A stand-in for externally supplied tracklets.
std::vector<Tracklet> build_tracklets(std::span<const Detection> detections);

/// Builds the three edge classes from the potentials; pairs whose
/// probability comes out exactly 0.5 (cost zero) are omitted. The ablation
/// drops detection nodes (NoHigh), trajectory nodes (NoLow) or only the
/// cross-layer edges (NoHighLow).
AssembledGraph assemble_joint_graph(std::span<const Trajectory> trajectories,
                                    std::span<const Detection> detections,
                                    const PipelineConfig& cfg, double image_width,
                                    double image_height,
                                    Ablation ablation = Ablation::None);

struct TrackOutput {
    // component -> frame -> chosen detection id (highest score, lowest id on
    // ties); only components owning at least one detection appear.
    std::map<std::uint32_t, std::map<int, int>> tracks;
    std::map<int, std::uint32_t> segmentation;  // trajectory id -> component
};

TrackOutput extract_tracks(const AssembledGraph& assembled, const Decomposition& d,
                           std::span<const Detection> detections);

// Tracks file:   jtms-tracks 1  /  k <component> <frame> <detection_id>
// Segmentation:  jtms-seg 1     /  s <trajectory_id> <component>
// Overlay:       jtms-overlay 1 /  <frame> box(<comp>) <cx> <cy> <w> <h>
//                                  <frame> pt(<comp>) <x> <y>
std::string dump_tracks(const TrackOutput& output);
std::string dump_segmentation(const TrackOutput& output);
std::string dump_overlay(const TrackOutput& output, std::span<const Detection> detections,
                         std::span<const Trajectory> trajectories);

struct RunPaths {
    std::string trajectories;
    std::string detections;
    std::string templates_dir;
    std::string ground_truth;  // optional; enables the metrics file
    std::string out_graph;
    std::string out_solution;
    std::string out_tracks;
    std::string out_segmentation;
    std::string out_overlay;
    std::string out_metrics;  // ignored unless ground_truth is set
};

struct RunResult {
    double objective = 0.0;
    SolveReport report;
    std::size_t high_nodes = 0;
    std::size_t low_nodes = 0;
    std::size_t edges = 0;
    std::size_t components = 0;
};

/// End-to-end: load, filter, assemble, solve (exact only within the
/// enumeration guard), extract, write every output file. Deterministic for
/// fixed inputs and config.
RunResult run(const PipelineConfig& cfg, const RunPaths& paths,
              Ablation ablation = Ablation::None, bool exact = false);

}  // namespace jtms
