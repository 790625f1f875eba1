#pragma once

#include <array>
#include <span>

#include "jtms/types.hpp"

namespace jtms {

/// Probabilities are clamped to [eps, 1-eps] before the cost mapping so the
/// solver only ever sees finite costs.
constexpr double kDefaultProbabilityClamp = 1e-6;

double logistic(double z);

/// Signed cost of an edge with cut probability p under the minimize-sum
/// convention: w = log((1-p)/p). Likely cuts (p > 0.5) get negative cost,
/// unlikely ones positive, so minimizing the total cut cost picks the
/// maximum-likelihood partition. Rejects p outside [0, 1].
double cut_cost(double p, double clamp_eps = kDefaultProbabilityClamp);

struct TrajectoryAffinityParams {
    double theta_bar0 = -8.0;
    double theta0 = -6.0;
    double theta1 = 8.0;
    double theta2 = 4.0;
    double theta3 = 2.0;
};

struct TrajectoryDistances {
    double motion = 0.0;   // d^m
    double color = 0.0;    // d^c
    double spatial = 0.0;  // d^sp
};

/// Scene-level normalizers for trajectory distances: per-frame median
/// displacement magnitude over all trajectories alive across the step, and
/// the image diagonal.
struct TrajectoryContext {
    int min_frame = 0;
    std::vector<double> median_step;  // index = frame - min_frame
    double image_diagonal = 1.0;

    double median_step_at(int frame) const {
        const int i = frame - min_frame;
        if (i < 0 || i >= static_cast<int>(median_step.size())) return 0.0;
        return median_step[static_cast<std::size_t>(i)];
    }
};

TrajectoryContext make_trajectory_context(std::span<const Trajectory> trajectories,
                                          double image_width, double image_height);

/// Motion / color / spatial distances between two trajectories. Motion is
/// the maximum per-step displacement difference over the common lifetime,
/// normalized by the scene's median step magnitude plus one; color is the
/// mean RGB distance over sqrt(3); spatial is the mean point distance over
/// the common lifetime (or the distance of the temporally closest endpoints
/// when the trajectories do not overlap), normalized by the image diagonal.
TrajectoryDistances trajectory_distances(const Trajectory& a, const Trajectory& b,
                                         const TrajectoryContext& ctx);

/// p = logistic(max(theta_bar0 + t1*dm + t2*dc + t3*dsp, theta0 + t1*dm)).
double trajectory_pair_probability(const TrajectoryDistances& d,
                                   const TrajectoryAffinityParams& theta);

double iou(const Box& a, const Box& b);

/// 2 * || ((cx_a-cx_b)/(w_a+w_b), (cy_a-cy_b)/(h_a+h_b)) ||
double detection_spatial_distance(const Detection& a, const Detection& b);

/// Piecewise cut probability for two detections at most one frame apart:
/// strong join when boxes overlap well (IoU > 0.7), strong cut when their
/// normalized distance exceeds 1.2, uninformative 0.5 otherwise. The IoU
/// branch takes precedence. Rejects pairs more than one frame apart.
double detection_pair_probability(const Detection& a, const Detection& b);

/// Cut probability between a detection and a trajectory alive at the
/// detection's frame: 1 - T at the trajectory point when the template reads
/// above 0.5 there, 1 when the point passes farther than sigma outside the
/// box, 0.5 otherwise. Points outside the box read T = 0. Rejects dead
/// trajectories and non-positive sigma.
double detection_trajectory_probability(const Detection& d, const Trajectory& tr,
                                        double sigma);

/// Sum of cut costs between a trajectory and every tracklet box whose frame
/// the trajectory covers; the template is mirrored when the tracklet walks
/// left. Rejects pairs without temporal overlap.
double tracklet_trajectory_cost(const Tracklet& tk, const Trajectory& tr, double sigma,
                                double clamp_eps = kDefaultProbabilityClamp);

/// (f1, minConf, f1*minConf, f1^2, minConf^2) with f1 = |Ma n Mb| / |Ma u Mb|.
struct MatchFeature {
    double f1 = 0.0;
    double min_conf = 0.0;
    double product = 0.0;
    double f1_sq = 0.0;
    double min_conf_sq = 0.0;
};

/// Keypoint-match overlap feature for detections at most three frames
/// apart; keypoints are identified by integer ids. f1 falls back to 0 when
/// both sets are empty.
MatchFeature match_feature(const Detection& a, const Detection& b,
                           std::span<const int> keypoints_a,
                           std::span<const int> keypoints_b);

/// logistic(w0 + w1*f1 + w2*minConf + w3*f1*minConf + w4*f1^2 + w5*minConf^2)
double match_probability(const MatchFeature& f, const std::array<double, 6>& weights);

/// Synthetic mean-pedestrian silhouette, facing right; values in [0, 1].
TemplateGrid pedestrian_template(int height = 24, int width = 12);

}  // namespace jtms
