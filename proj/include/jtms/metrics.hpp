#pragma once

#include <map>
#include <string>

#include "jtms/types.hpp"

namespace jtms {

struct SegScore {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;     // 2PR/(P+R) of the averaged P and R
    int objects_extracted = 0;  // non-background objects with per-object F >= 0.75
    int objects_total = 0;      // non-background objects in the ground truth
};

/// Scores a trajectory clustering against true object identities. Clusters
/// are matched one-to-one to ground-truth objects (background label 0
/// included) by maximizing total per-pair F; per-object precision/recall
/// weight trajectories by their length in frames, averages run over all
/// ground-truth objects and unmatched objects score zero. Invariant under
/// cluster relabeling. Rejects prediction/length maps whose id universe
/// differs from the ground truth, and more than 12 ground-truth objects.
SegScore seg_score(const std::map<int, int>& predicted_cluster,
                   const std::map<int, int>& true_object,
                   const std::map<int, int>& trajectory_length);

/// One track as per-frame boxes.
using TrackBoxes = std::map<int, Box>;

struct MotScore {
    double recall = 0.0;
    double precision = 0.0;
    double far = 0.0;  // false positives per frame
    int gt = 0;
    int mostly_tracked = 0;
    int partly_tracked = 0;
    int mostly_lost = 0;
    int false_positives = 0;
    int false_negatives = 0;
    int id_switches = 0;
    int fragmentations = 0;
    double mota = 0.0;
    double motp = 0.0;  // mean IoU of matched boxes
};

/// CLEAR MOT with IoU matching: correspondences persist from the previous
/// frame while their overlap stays above the threshold, remaining boxes are
/// matched by an optimal assignment maximizing total IoU. An id switch is a
/// ground-truth track matched to a different hypothesis than its last
/// match; a fragmentation is a resumed interruption of its tracked status.
/// Mostly tracked / mostly lost use the standard 80% / 20% lifetime ratios.
MotScore clear_mot(const std::map<int, TrackBoxes>& gt_tracks,
                   const std::map<int, TrackBoxes>& hyp_tracks,
                   double iou_threshold = 0.5);

/// Fixed-order tab-separated report of both metric blocks, one header line
/// and one value line each; formats match the fields above.
std::string format_metrics_text(const SegScore& seg, const MotScore& mot);
std::string format_metrics_json(const SegScore& seg, const MotScore& mot);

}  // namespace jtms
