#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "jtms/scene_sim.hpp"
#include "jtms/types.hpp"

namespace jtms {

// Trajectory file:
//   jtms-traj 1 <image_w> <image_h>
//   <id> <t0> <x0> <y0> <x1> <y1> ... | <r> <g> <b>
struct TrajectoryFile {
    double image_width = 0.0;
    double image_height = 0.0;
    std::vector<Trajectory> trajectories;
};

std::string dump_trajectories(const TrajectoryFile& file);
TrajectoryFile parse_trajectories(std::string_view text);

// Detection file:
//   jtms-det 1
//   <id> <frame> <cx> <cy> <w> <h> <score> <template_id>
// template_id -1 means no template; others refer to template files.
std::string dump_detections(const std::vector<Detection>& detections);
std::vector<Detection> parse_detections(std::string_view text);

// Template file: first line "H W", then H rows of W decimals in [0, 1].
std::string dump_template(const TemplateGrid& grid);
TemplateGrid parse_template(std::string_view text);

// Ground truth file:
//   jtms-gt 1
//   t <trajectory_id> <object_id>
//   d <detection_id> <object_id>
//   b <object_id> <frame> <cx> <cy> <w> <h>
std::string dump_ground_truth(const SceneGroundTruth& gt);
SceneGroundTruth parse_ground_truth(std::string_view text);

/// Attaches template grids to detections by template id; throws on a
/// dangling reference.
void resolve_templates(
    std::vector<Detection>& detections,
    const std::map<int, std::shared_ptr<const TemplateGrid>>& templates);

/// Loads every template referenced by the detections from `<dir>/<id>.txt`.
std::map<int, std::shared_ptr<const TemplateGrid>> load_templates(
    const std::string& dir, const std::vector<Detection>& detections);

/// Writes trajectories.txt, detections.txt, ground_truth.txt and
/// templates/<id>.txt under `dir` (created if needed).
void write_scene_dir(const std::string& dir, const SceneBundle& bundle);

}  // namespace jtms
