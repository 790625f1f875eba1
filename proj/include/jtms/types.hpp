#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace jtms {

struct Color {
    double r = 0.0, g = 0.0, b = 0.0;
};

/// Axis-aligned box, top-left corner plus size, in pixels.
struct Box {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;

    static Box from_center(double cx, double cy, double w, double h) {
        return {cx - w / 2.0, cy - h / 2.0, w, h};
    }
    double area() const { return w * h; }
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    bool contains(double px, double py) const {
        return px >= x && px <= x + w && py >= y && py <= y + h;
    }
};

/// A tracked point's path over consecutive frames, with a constant color
/// sampled at seeding time.
struct Trajectory {
    int id = 0;
    int start_frame = 0;
    std::vector<std::array<double, 2>> points;  // one per frame, consecutive
    Color color;

    int end_frame() const {
        return start_frame + static_cast<int>(points.size()) - 1;
    }
    bool alive_at(int frame) const {
        return frame >= start_frame && frame <= end_frame();
    }
    const std::array<double, 2>& point_at(int frame) const {
        return points[static_cast<std::size_t>(frame - start_frame)];
    }
    /// Displacement from `frame` to `frame + 1`; both must be covered.
    std::array<double, 2> step_at(int frame) const {
        const auto& p0 = point_at(frame);
        const auto& p1 = point_at(frame + 1);
        return {p1[0] - p0[0], p1[1] - p0[1]};
    }
};

/// Object-support values on a grid normalized to the unit bounding box.
/// Row 0 is the top of the box; values live in [0, 1].
struct TemplateGrid {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // row-major

    static TemplateGrid ones(int h, int w) {
        return {h, w, std::vector<double>(static_cast<std::size_t>(h) * w, 1.0)};
    }
    double at(int row, int col) const {
        return values[static_cast<std::size_t>(row) * width + col];
    }
    /// Nearest-cell lookup for unit-box coordinates in [0, 1].
    double sample_unit(double u, double v) const;
    TemplateGrid flipped_horizontal() const;
    double mean() const;
};

struct Detection {
    int id = 0;
    int frame = 0;
    double cx = 0.0, cy = 0.0;  // center, pixels
    double w = 0.0, h = 0.0;    // size, pixels, positive
    double score = 0.0;         // confidence in [0, 1]
    int template_id = -1;       // -1 = no template
    std::shared_ptr<const TemplateGrid> tmpl;

    Box box() const { return Box::from_center(cx, cy, w, h); }
};

enum class WalkDirection : std::uint8_t { Left, Right, Unknown };

/// Five detections in strictly consecutive frames treated as one high-level
/// node. Build through make_tracklet, which checks the frame invariant.
struct Tracklet {
    std::array<Detection, 5> detections;
    WalkDirection direction = WalkDirection::Unknown;

    int start_frame() const { return detections.front().frame; }
    int end_frame() const { return detections.back().frame; }
};

Tracklet make_tracklet(std::array<Detection, 5> detections,
                       WalkDirection direction = WalkDirection::Unknown);

}  // namespace jtms
