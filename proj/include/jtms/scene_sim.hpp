#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "jtms/types.hpp"

namespace jtms {

struct PathKey {
    int frame = 0;
    double cx = 0.0, cy = 0.0;
};

/// A moving rectangle. The path is piecewise linear between keyframes and
/// defines the object's visible interval; larger depth occludes smaller.
/// Ids must be >= 1 (0 is the implicit static background).
struct ObjectSpec {
    int id = 0;
    double width = 0.0, height = 0.0;
    std::vector<PathKey> path;
    int depth = 1;
    Color color;
};

struct DetectionNoise {
    double center_std = 0.0;
    double size_std = 0.0;
    double score_min = 1.0, score_max = 1.0;
    double miss_rate = 0.0;
    double false_positive_rate = 0.0;  // expected count per frame
};

struct SceneSpec {
    int width = 0, height = 0;
    int frame_count = 0;
    std::vector<ObjectSpec> objects;
    int sampling_step = 8;
    DetectionNoise noise;
    std::uint64_t seed = 0;
    Color background_color{0.5, 0.5, 0.5};
    int template_size = 8;  // all-ones support grid shared by all detections
    std::optional<TemplateGrid> detection_template;  // overrides the all-ones grid
};

/// True identities behind everything the simulator emits. Object id 0 is
/// the background; false-positive detections map to -1.
struct SceneGroundTruth {
    std::map<int, int> trajectory_object;
    std::map<int, int> detection_object;
    std::map<int, std::map<int, Box>> true_boxes;  // object id -> frame -> box
};

struct SceneBundle {
    SceneSpec spec;
    std::vector<Trajectory> trajectories;
    std::vector<Detection> detections;
    std::vector<TemplateGrid> templates;  // index = template id
    SceneGroundTruth ground_truth;
};

/// Deterministic for a fixed seed. Trajectories are seeded on a
/// sampling_step grid in the first frame, re-seeded on uncovered grid cells
/// every frame, ride their owner's motion, and terminate the frame they get
/// covered by a deeper object or leave the image; points that never reach a
/// second frame are dropped. Detections are the true boxes plus Gaussian
/// jitter, dropped at miss_rate, plus uniform false positives. RNG draw
/// order (trajectories draw nothing): per frame, per object in spec order:
/// miss coin, then center x/y and size w/h normals and the score uniform
/// when kept; then the false-positive count and per false positive cx, cy,
/// w, h, score.
SceneBundle simulate(const SceneSpec& spec);

/// Canned two-object scene behind the acceptance tests: one object crosses
/// in front of another that stops moving halfway through; 15% of detections
/// are dropped. 60 frames, deterministic per seed.
SceneBundle crossing_benchmark(std::uint64_t seed);

}  // namespace jtms
