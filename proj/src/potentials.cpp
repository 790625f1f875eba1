#include "jtms/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace jtms {

namespace {

double hypot2(double dx, double dy) { return std::sqrt(dx * dx + dy * dy); }

// Template value seen by a point, in box coordinates; outside reads 0.
// mirrored flips the template horizontally (left-walking tracklets).
double template_value_at(const Detection& d, double px, double py, bool mirrored) {
    if (!d.tmpl) return 0.0;
    const Box b = d.box();
    const double u = (px - b.x) / b.w;
    const double v = (py - b.y) / b.h;
    if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) return 0.0;
    return d.tmpl->sample_unit(mirrored ? 1.0 - u : u, v);
}

double detection_point_probability(const Detection& d, double px, double py,
                                   double sigma, bool mirrored) {
    const double t = template_value_at(d, px, py, mirrored);
    if (t > 0.5) return 1.0 - t;
    const double dsp = 2.0 * hypot2((d.cx - px) / d.w, (d.cy - py) / d.h);
    if (dsp > sigma) return 1.0;
    return 0.5;
}

}  // namespace

double TemplateGrid::sample_unit(double u, double v) const {
    int col = static_cast<int>(u * width);
    int row = static_cast<int>(v * height);
    col = std::clamp(col, 0, width - 1);
    row = std::clamp(row, 0, height - 1);
    return at(row, col);
}

TemplateGrid TemplateGrid::flipped_horizontal() const {
    TemplateGrid out{height, width, values};
    for (int r = 0; r < height; ++r)
        std::reverse(out.values.begin() + static_cast<std::ptrdiff_t>(r) * width,
                     out.values.begin() + static_cast<std::ptrdiff_t>(r + 1) * width);
    return out;
}

double TemplateGrid::mean() const {
    if (values.empty()) return 0.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

Tracklet make_tracklet(std::array<Detection, 5> detections, WalkDirection direction) {
    for (std::size_t i = 1; i < detections.size(); ++i)
        if (detections[i].frame != detections[i - 1].frame + 1)
            throw std::invalid_argument("tracklet frames must be strictly consecutive");
    return Tracklet{std::move(detections), direction};
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double cut_cost(double p, double clamp_eps) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("cut probability outside [0, 1]");
    p = std::clamp(p, clamp_eps, 1.0 - clamp_eps);
    return std::log((1.0 - p) / p);
}

TrajectoryContext make_trajectory_context(std::span<const Trajectory> trajectories,
                                          double image_width, double image_height) {
    TrajectoryContext ctx;
    ctx.image_diagonal = hypot2(image_width, image_height);
    if (ctx.image_diagonal <= 0.0) ctx.image_diagonal = 1.0;
    if (trajectories.empty()) return ctx;

    int min_frame = trajectories.front().start_frame;
    int max_frame = trajectories.front().end_frame();
    for (const Trajectory& t : trajectories) {
        min_frame = std::min(min_frame, t.start_frame);
        max_frame = std::max(max_frame, t.end_frame());
    }
    ctx.min_frame = min_frame;
    const std::size_t steps =
        max_frame > min_frame ? static_cast<std::size_t>(max_frame - min_frame) : 0;
    std::vector<std::vector<double>> magnitudes(steps);
    for (const Trajectory& t : trajectories) {
        for (int f = t.start_frame; f < t.end_frame(); ++f) {
            const auto d = t.step_at(f);
            magnitudes[static_cast<std::size_t>(f - min_frame)].push_back(
                hypot2(d[0], d[1]));
        }
    }
    ctx.median_step.resize(steps, 0.0);
    for (std::size_t i = 0; i < steps; ++i) {
        auto& m = magnitudes[i];
        if (m.empty()) continue;
        std::sort(m.begin(), m.end());
        const std::size_t mid = m.size() / 2;
        ctx.median_step[i] =
            m.size() % 2 == 1 ? m[mid] : 0.5 * (m[mid - 1] + m[mid]);
    }
    return ctx;
}

TrajectoryDistances trajectory_distances(const Trajectory& a, const Trajectory& b,
                                         const TrajectoryContext& ctx) {
    TrajectoryDistances out;

    const double dr = a.color.r - b.color.r;
    const double dg = a.color.g - b.color.g;
    const double db = a.color.b - b.color.b;
    out.color = std::sqrt(dr * dr + dg * dg + db * db) / std::sqrt(3.0);

    const int lo = std::max(a.start_frame, b.start_frame);
    const int hi = std::min(a.end_frame(), b.end_frame());
    if (lo <= hi) {
        double max_motion = 0.0;
        for (int f = lo; f < hi; ++f) {
            const auto da = a.step_at(f);
            const auto db = b.step_at(f);
            const double diff = hypot2(da[0] - db[0], da[1] - db[1]);
            max_motion = std::max(max_motion, diff / (ctx.median_step_at(f) + 1.0));
        }
        out.motion = max_motion;

        double sum = 0.0;
        for (int f = lo; f <= hi; ++f) {
            const auto& pa = a.point_at(f);
            const auto& pb = b.point_at(f);
            sum += hypot2(pa[0] - pb[0], pa[1] - pb[1]);
        }
        out.spatial = sum / static_cast<double>(hi - lo + 1) / ctx.image_diagonal;
    } else {
        out.motion = 0.0;
        const bool a_first = a.end_frame() < b.start_frame;
        const auto& pa = a_first ? a.points.back() : a.points.front();
        const auto& pb = a_first ? b.points.front() : b.points.back();
        out.spatial = hypot2(pa[0] - pb[0], pa[1] - pb[1]) / ctx.image_diagonal;
    }
    return out;
}

double trajectory_pair_probability(const TrajectoryDistances& d,
                                   const TrajectoryAffinityParams& theta) {
    const double full = theta.theta_bar0 + theta.theta1 * d.motion +
                        theta.theta2 * d.color + theta.theta3 * d.spatial;
    const double floor = theta.theta0 + theta.theta1 * d.motion;
    return logistic(std::max(full, floor));
}

double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double detection_spatial_distance(const Detection& a, const Detection& b) {
    return 2.0 * hypot2((a.cx - b.cx) / (a.w + b.w), (a.cy - b.cy) / (a.h + b.h));
}

double detection_pair_probability(const Detection& a, const Detection& b) {
    if (std::abs(a.frame - b.frame) > 1)
        throw std::invalid_argument("detection pair more than one frame apart");
    const double overlap = iou(a.box(), b.box());
    if (overlap > 0.7) return 1.0 - logistic(20.0 * (overlap - 0.7));
    const double dsp = detection_spatial_distance(a, b);
    if (dsp > 1.2) return 1.0 / (1.0 + std::exp(5.0 * (1.2 - dsp)));
    return 0.5;
}

double detection_trajectory_probability(const Detection& d, const Trajectory& tr,
                                        double sigma) {
    if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    if (!tr.alive_at(d.frame))
        throw std::invalid_argument("trajectory not alive at detection frame");
    const auto& p = tr.point_at(d.frame);
    return detection_point_probability(d, p[0], p[1], sigma, false);
}

double tracklet_trajectory_cost(const Tracklet& tk, const Trajectory& tr, double sigma,
                                double clamp_eps) {
    if (sigma <= 0.0) throw std::invalid_argument("sigma must be positive");
    const bool mirrored = tk.direction == WalkDirection::Left;
    double total = 0.0;
    bool any = false;
    for (const Detection& d : tk.detections) {
        if (!tr.alive_at(d.frame)) continue;
        const auto& p = tr.point_at(d.frame);
        total += cut_cost(detection_point_probability(d, p[0], p[1], sigma, mirrored),
                          clamp_eps);
        any = true;
    }
    if (!any)
        throw std::invalid_argument("tracklet and trajectory share no frame");
    return total;
}

MatchFeature match_feature(const Detection& a, const Detection& b,
                           std::span<const int> keypoints_a,
                           std::span<const int> keypoints_b) {
    if (std::abs(a.frame - b.frame) > 3)
        throw std::invalid_argument("detection pair more than three frames apart");
    std::vector<int> ka(keypoints_a.begin(), keypoints_a.end());
    std::vector<int> kb(keypoints_b.begin(), keypoints_b.end());
    std::sort(ka.begin(), ka.end());
    ka.erase(std::unique(ka.begin(), ka.end()), ka.end());
    std::sort(kb.begin(), kb.end());
    kb.erase(std::unique(kb.begin(), kb.end()), kb.end());

    std::vector<int> inter;
    std::set_intersection(ka.begin(), ka.end(), kb.begin(), kb.end(),
                          std::back_inserter(inter));
    const std::size_t mu = ka.size() + kb.size() - inter.size();

    MatchFeature f;
    f.f1 = mu > 0 ? static_cast<double>(inter.size()) / static_cast<double>(mu) : 0.0;
    f.min_conf = std::min(a.score, b.score);
    f.product = f.f1 * f.min_conf;
    f.f1_sq = f.f1 * f.f1;
    f.min_conf_sq = f.min_conf * f.min_conf;
    return f;
}

double match_probability(const MatchFeature& f, const std::array<double, 6>& weights) {
    return logistic(weights[0] + weights[1] * f.f1 + weights[2] * f.min_conf +
                    weights[3] * f.product + weights[4] * f.f1_sq +
                    weights[5] * f.min_conf_sq);
}

TemplateGrid pedestrian_template(int height, int width) {
    TemplateGrid grid{height, width,
                      std::vector<double>(static_cast<std::size_t>(height) * width, 0.0)};
    // Head / torso / legs half-widths along the vertical axis, with a slight
    // forward lean so a flipped template is actually different.
    for (int r = 0; r < height; ++r) {
        const double v = (r + 0.5) / height;
        double half_width;
        if (v < 0.22) half_width = 0.14;
        else if (v < 0.60) half_width = 0.24;
        else half_width = 0.17;
        const double axis = 0.5 + 0.06 * (v - 0.5);
        for (int c = 0; c < width; ++c) {
            const double u = (c + 0.5) / width;
            const double excess = std::abs(u - axis) - half_width;
            double value = excess <= 0.0 ? 1.0 : std::exp(-(excess * excess) / 0.005);
            grid.values[static_cast<std::size_t>(r) * width + c] =
                std::clamp(value, 0.0, 1.0);
        }
    }
    return grid;
}

}  // namespace jtms
