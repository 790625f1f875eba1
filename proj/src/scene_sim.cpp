#include "jtms/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>

#include "jtms/rng.hpp"

namespace jtms {

namespace {

void validate(const SceneSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0)
        throw std::invalid_argument("scene image size must be positive");
    if (spec.frame_count <= 0)
        throw std::invalid_argument("scene frame count must be positive");
    if (spec.sampling_step < 1)
        throw std::invalid_argument("sampling step must be >= 1");
    const DetectionNoise& n = spec.noise;
    if (n.miss_rate < 0.0 || n.miss_rate > 1.0)
        throw std::invalid_argument("miss rate outside [0, 1]");
    if (n.false_positive_rate < 0.0)
        throw std::invalid_argument("false positive rate must be >= 0");
    if (n.score_min > n.score_max)
        throw std::invalid_argument("score range is empty");

    std::set<int> ids;
    std::set<int> depths;
    for (const ObjectSpec& o : spec.objects) {
        if (o.id < 1) throw std::invalid_argument("object ids must be >= 1");
        if (!ids.insert(o.id).second)
            throw std::invalid_argument("duplicate object id " + std::to_string(o.id));
        if (o.depth < 1) throw std::invalid_argument("object depth must be >= 1");
        if (!depths.insert(o.depth).second)
            throw std::invalid_argument("object depths must be distinct");
        if (o.width <= 0.0 || o.height <= 0.0)
            throw std::invalid_argument("object size must be positive");
        if (o.path.empty()) throw std::invalid_argument("object path is empty");
        for (std::size_t i = 0; i < o.path.size(); ++i) {
            if (o.path[i].frame < 0 || o.path[i].frame >= spec.frame_count)
                throw std::invalid_argument("path keyframe outside the scene");
            if (i > 0 && o.path[i].frame <= o.path[i - 1].frame)
                throw std::invalid_argument("path keyframes must ascend");
        }
    }
}

bool path_defined(const ObjectSpec& o, int frame) {
    return frame >= o.path.front().frame && frame <= o.path.back().frame;
}

std::array<double, 2> object_center(const ObjectSpec& o, int frame) {
    const auto& path = o.path;
    if (path.size() == 1 || frame <= path.front().frame)
        return {path.front().cx, path.front().cy};
    if (frame >= path.back().frame) return {path.back().cx, path.back().cy};
    std::size_t k = 1;
    while (path[k].frame < frame) ++k;
    const PathKey& lo = path[k - 1];
    const PathKey& hi = path[k];
    const double t = static_cast<double>(frame - lo.frame) /
                     static_cast<double>(hi.frame - lo.frame);
    return {lo.cx + t * (hi.cx - lo.cx), lo.cy + t * (hi.cy - lo.cy)};
}

Box object_box(const ObjectSpec& o, int frame) {
    const auto c = object_center(o, frame);
    return Box::from_center(c[0], c[1], o.width, o.height);
}

// Topmost object covering the point, or nullptr for the background.
const ObjectSpec* top_object_at(const SceneSpec& spec, double x, double y, int frame) {
    const ObjectSpec* top = nullptr;
    for (const ObjectSpec& o : spec.objects) {
        if (!path_defined(o, frame)) continue;
        if (!object_box(o, frame).contains(x, y)) continue;
        if (!top || o.depth > top->depth) top = &o;
    }
    return top;
}

struct LiveTrack {
    std::size_t trajectory_index;
    int owner_id;  // 0 = background
    double x, y;
};

}  // namespace

SceneBundle simulate(const SceneSpec& spec) {
    validate(spec);

    SceneBundle bundle;
    bundle.spec = spec;
    bundle.templates.push_back(
        spec.detection_template
            ? *spec.detection_template
            : TemplateGrid::ones(spec.template_size, spec.template_size));
    auto shared_template = std::make_shared<const TemplateGrid>(bundle.templates[0]);

    std::map<int, const ObjectSpec*> object_by_id;
    for (const ObjectSpec& o : spec.objects) object_by_id[o.id] = &o;

    const int step = spec.sampling_step;
    const int cols = (spec.width + step - 1) / step;
    const int rows = (spec.height + step - 1) / step;
    auto cell_center_x = [&](int i) { return i * step + step / 2.0; };
    auto cell_center_y = [&](int j) { return j * step + step / 2.0; };
    auto cell_of = [&](double x, double y) {
        return std::pair<int, int>(static_cast<int>(std::floor(x / step)),
                                   static_cast<int>(std::floor(y / step)));
    };

    std::vector<LiveTrack> live;
    auto seed_cells = [&](int frame) {
        std::vector<std::uint8_t> occupied(static_cast<std::size_t>(cols) * rows, 0);
        for (const LiveTrack& t : live) {
            auto [ci, cj] = cell_of(t.x, t.y);
            if (ci >= 0 && ci < cols && cj >= 0 && cj < rows)
                occupied[static_cast<std::size_t>(cj) * cols + ci] = 1;
        }
        for (int j = 0; j < rows; ++j) {
            for (int i = 0; i < cols; ++i) {
                const double x = cell_center_x(i);
                const double y = cell_center_y(j);
                if (x >= spec.width || y >= spec.height) continue;
                if (occupied[static_cast<std::size_t>(j) * cols + i]) continue;
                const ObjectSpec* owner = top_object_at(spec, x, y, frame);
                Trajectory traj;
                traj.id = static_cast<int>(bundle.trajectories.size());
                traj.start_frame = frame;
                traj.points.push_back({x, y});
                traj.color = owner ? owner->color : spec.background_color;
                bundle.ground_truth.trajectory_object[traj.id] = owner ? owner->id : 0;
                live.push_back({bundle.trajectories.size(), owner ? owner->id : 0, x, y});
                bundle.trajectories.push_back(std::move(traj));
            }
        }
    };

    seed_cells(0);
    for (int f = 1; f < spec.frame_count; ++f) {
        std::vector<LiveTrack> survivors;
        survivors.reserve(live.size());
        for (const LiveTrack& t : live) {
            double nx = t.x, ny = t.y;
            if (t.owner_id != 0) {
                const ObjectSpec* owner = object_by_id.at(t.owner_id);
                if (!path_defined(*owner, f)) continue;  // owner left the scene
                const auto c0 = object_center(*owner, f - 1);
                const auto c1 = object_center(*owner, f);
                nx += c1[0] - c0[0];
                ny += c1[1] - c0[1];
            }
            if (nx < 0.0 || nx > spec.width || ny < 0.0 || ny > spec.height)
                continue;  // left the image
            const ObjectSpec* top = top_object_at(spec, nx, ny, f);
            const int top_id = top ? top->id : 0;
            if (top_id != t.owner_id) continue;  // covered by a deeper object
            bundle.trajectories[t.trajectory_index].points.push_back({nx, ny});
            survivors.push_back({t.trajectory_index, t.owner_id, nx, ny});
        }
        live = std::move(survivors);
        seed_cells(f);
    }

    // Points that never survived a second frame (seeded on the last frame,
    // or covered immediately) are not trajectories; drop them and renumber
    // so ids stay dense.
    {
        std::vector<Trajectory> kept;
        std::map<int, int> kept_labels;
        for (Trajectory& t : bundle.trajectories) {
            if (t.points.size() < 2) continue;
            const int label = bundle.ground_truth.trajectory_object.at(t.id);
            t.id = static_cast<int>(kept.size());
            kept_labels[t.id] = label;
            kept.push_back(std::move(t));
        }
        bundle.trajectories = std::move(kept);
        bundle.ground_truth.trajectory_object = std::move(kept_labels);
    }

    // Ground-truth boxes per visible object per frame.
    for (const ObjectSpec& o : spec.objects)
        for (int f = 0; f < spec.frame_count; ++f)
            if (path_defined(o, f))
                bundle.ground_truth.true_boxes[o.id][f] = object_box(o, f);

    // Detections; the only consumer of the RNG, draw order as documented in
    // the header.
    Rng rng(spec.seed);
    const DetectionNoise& noise = spec.noise;
    for (int f = 0; f < spec.frame_count; ++f) {
        for (const ObjectSpec& o : spec.objects) {
            if (!path_defined(o, f)) continue;
            if (rng.uniform() < noise.miss_rate) continue;
            const auto c = object_center(o, f);
            Detection d;
            d.id = static_cast<int>(bundle.detections.size());
            d.frame = f;
            d.cx = c[0] + rng.normal(0.0, noise.center_std);
            d.cy = c[1] + rng.normal(0.0, noise.center_std);
            d.w = std::max(1.0, o.width + rng.normal(0.0, noise.size_std));
            d.h = std::max(1.0, o.height + rng.normal(0.0, noise.size_std));
            d.score = rng.uniform(noise.score_min, noise.score_max);
            d.template_id = 0;
            d.tmpl = shared_template;
            bundle.ground_truth.detection_object[d.id] = o.id;
            bundle.detections.push_back(std::move(d));
        }
        const int fp_count = rng.poisson(noise.false_positive_rate);
        for (int k = 0; k < fp_count; ++k) {
            Detection d;
            d.id = static_cast<int>(bundle.detections.size());
            d.frame = f;
            d.cx = rng.uniform(0.0, spec.width);
            d.cy = rng.uniform(0.0, spec.height);
            d.w = std::max(1.0, rng.uniform(0.1, 0.3) * spec.width);
            d.h = std::max(1.0, rng.uniform(0.1, 0.3) * spec.height);
            d.score = rng.uniform(noise.score_min, noise.score_max);
            d.template_id = 0;
            d.tmpl = shared_template;
            bundle.ground_truth.detection_object[d.id] = -1;
            bundle.detections.push_back(std::move(d));
        }
    }
    return bundle;
}

SceneBundle crossing_benchmark(std::uint64_t seed) {
    SceneSpec spec;
    spec.width = 240;
    spec.height = 180;
    spec.frame_count = 60;
    spec.sampling_step = 8;
    spec.seed = seed;
    spec.noise.center_std = 1.0;
    spec.noise.size_std = 0.5;
    spec.noise.score_min = 0.5;
    spec.noise.score_max = 1.0;
    spec.noise.miss_rate = 0.15;
    spec.noise.false_positive_rate = 0.0;

    // Walker: moves right for half the sequence, then stands still while the
    // crosser passes in front of it (deeper, offset upward so the occlusion
    // is partial).
    ObjectSpec walker;
    walker.id = 1;
    walker.width = 40.0;
    walker.height = 40.0;
    walker.depth = 1;
    walker.color = {0.85, 0.15, 0.15};
    walker.path = {{0, 34.0, 118.0}, {30, 124.0, 118.0}, {59, 124.0, 118.0}};

    ObjectSpec crosser;
    crosser.id = 2;
    crosser.width = 44.0;
    crosser.height = 44.0;
    crosser.depth = 2;
    crosser.color = {0.15, 0.2, 0.85};
    crosser.path = {{0, 206.0, 94.0}, {59, 29.0, 94.0}};

    spec.objects = {walker, crosser};
    return simulate(spec);
}

}  // namespace jtms
