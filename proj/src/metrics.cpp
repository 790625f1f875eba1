#include "jtms/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "jtms/potentials.hpp"
#include "jtms/text.hpp"

namespace jtms {

namespace {

double f_measure_of(double p, double r) {
    return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

SegScore seg_score(const std::map<int, int>& predicted_cluster,
                   const std::map<int, int>& true_object,
                   const std::map<int, int>& trajectory_length) {
    for (const auto& [id, obj] : true_object) {
        (void)obj;
        if (!predicted_cluster.count(id))
            throw std::invalid_argument("prediction misses trajectory " + std::to_string(id));
        if (!trajectory_length.count(id))
            throw std::invalid_argument("lengths miss trajectory " + std::to_string(id));
    }
    for (const auto& [id, cluster] : predicted_cluster) {
        (void)cluster;
        if (!true_object.count(id))
            throw std::invalid_argument("unknown trajectory " + std::to_string(id) +
                                        " in prediction");
    }

    // Dense indices for clusters and objects, in ascending label order.
    std::vector<int> clusters;
    std::vector<int> objects;
    for (const auto& [id, c] : predicted_cluster) {
        (void)id;
        clusters.push_back(c);
    }
    for (const auto& [id, o] : true_object) {
        (void)id;
        objects.push_back(o);
    }
    std::sort(clusters.begin(), clusters.end());
    clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
    std::sort(objects.begin(), objects.end());
    objects.erase(std::unique(objects.begin(), objects.end()), objects.end());

    const std::size_t nc = clusters.size();
    const std::size_t no = objects.size();
    if (no > 12)
        throw std::invalid_argument("seg_score supports at most 12 ground-truth objects");

    auto cluster_index = [&](int c) {
        return static_cast<std::size_t>(
            std::lower_bound(clusters.begin(), clusters.end(), c) - clusters.begin());
    };
    auto object_index = [&](int o) {
        return static_cast<std::size_t>(
            std::lower_bound(objects.begin(), objects.end(), o) - objects.begin());
    };

    std::vector<double> cluster_weight(nc, 0.0);
    std::vector<double> object_weight(no, 0.0);
    std::vector<double> joint(nc * no, 0.0);
    for (const auto& [id, obj] : true_object) {
        const double w = static_cast<double>(trajectory_length.at(id));
        const std::size_t c = cluster_index(predicted_cluster.at(id));
        const std::size_t o = object_index(obj);
        cluster_weight[c] += w;
        object_weight[o] += w;
        joint[c * no + o] += w;
    }

    std::vector<double> pair_f(nc * no, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t o = 0; o < no; ++o) {
            const double inter = joint[c * no + o];
            if (inter <= 0.0) continue;
            const double p = inter / cluster_weight[c];
            const double r = inter / object_weight[o];
            pair_f[c * no + o] = f_measure_of(p, r);
        }
    }

    // One-to-one assignment maximizing total F: DP over object subsets,
    // clusters processed in ascending label order. Layers are kept for the
    // backtrack.
    const std::size_t full = std::size_t{1} << no;
    std::vector<std::vector<double>> dp(nc + 1, std::vector<double>(full, 0.0));
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t mask = 0; mask < full; ++mask) {
            double best = dp[c][mask];  // cluster c left unmatched
            for (std::size_t o = 0; o < no; ++o) {
                if (!(mask & (std::size_t{1} << o))) continue;
                best = std::max(best,
                                dp[c][mask ^ (std::size_t{1} << o)] + pair_f[c * no + o]);
            }
            dp[c + 1][mask] = best;
        }
    }

    // Backtrack: prefer leaving the cluster unmatched, then the smallest
    // object index, so ties resolve deterministically.
    std::vector<std::ptrdiff_t> object_cluster(no, -1);
    std::size_t mask = full - 1;
    for (std::size_t c = nc; c-- > 0;) {
        if (dp[c + 1][mask] == dp[c][mask]) continue;
        for (std::size_t o = 0; o < no; ++o) {
            if (!(mask & (std::size_t{1} << o))) continue;
            if (dp[c + 1][mask] ==
                dp[c][mask ^ (std::size_t{1} << o)] + pair_f[c * no + o]) {
                object_cluster[o] = static_cast<std::ptrdiff_t>(c);
                mask ^= std::size_t{1} << o;
                break;
            }
        }
    }

    SegScore score;
    double p_sum = 0.0, r_sum = 0.0;
    for (std::size_t o = 0; o < no; ++o) {
        double p = 0.0, r = 0.0;
        if (object_cluster[o] >= 0) {
            const std::size_t c = static_cast<std::size_t>(object_cluster[o]);
            const double inter = joint[c * no + o];
            p = inter > 0.0 ? inter / cluster_weight[c] : 0.0;
            r = inter > 0.0 ? inter / object_weight[o] : 0.0;
        }
        p_sum += p;
        r_sum += r;
        if (objects[o] != 0) {
            ++score.objects_total;
            if (f_measure_of(p, r) >= 0.75) ++score.objects_extracted;
        }
    }
    score.precision = no > 0 ? p_sum / static_cast<double>(no) : 0.0;
    score.recall = no > 0 ? r_sum / static_cast<double>(no) : 0.0;
    score.f_measure = f_measure_of(score.precision, score.recall);
    return score;
}

namespace {

// Optimal one-to-one assignment between the frame's unmatched ground-truth
// and hypothesis boxes, maximizing total IoU over pairs above the
// threshold. DP over subsets of the smaller side; deterministic.
std::vector<std::pair<int, int>> match_frame(
    const std::vector<std::pair<int, const Box*>>& gts,
    const std::vector<std::pair<int, const Box*>>& hyps, double threshold) {
    const std::size_t ng = gts.size(), nh = hyps.size();
    if (ng == 0 || nh == 0) return {};
    if (ng > 20 || nh > 20)
        throw std::invalid_argument("clear_mot supports at most 20 boxes per frame");

    std::vector<double> overlap(ng * nh, 0.0);
    for (std::size_t i = 0; i < ng; ++i)
        for (std::size_t j = 0; j < nh; ++j) {
            const double v = iou(*gts[i].second, *hyps[j].second);
            overlap[i * nh + j] = v >= threshold ? v : -1.0;
        }

    // DP over hypothesis subsets while walking ground truths in order; if
    // the hypothesis side is larger we transpose.
    const bool transpose = nh > ng;
    const std::size_t rows = transpose ? nh : ng;
    const std::size_t cols = transpose ? ng : nh;
    auto score_at = [&](std::size_t r, std::size_t c) {
        return transpose ? overlap[c * nh + r] : overlap[r * nh + c];
    };

    const std::size_t full = std::size_t{1} << cols;
    std::vector<std::vector<double>> dp(rows + 1, std::vector<double>(full, 0.0));
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t m = 0; m < full; ++m) {
            double best = dp[r][m];
            for (std::size_t c = 0; c < cols; ++c) {
                if (!(m & (std::size_t{1} << c)) || score_at(r, c) < 0.0) continue;
                best = std::max(best, dp[r][m ^ (std::size_t{1} << c)] + score_at(r, c));
            }
            dp[r + 1][m] = best;
        }

    std::vector<std::pair<int, int>> matches;  // (gt id, hyp id)
    std::size_t m = full - 1;
    for (std::size_t r = rows; r-- > 0;) {
        if (dp[r + 1][m] == dp[r][m]) continue;
        for (std::size_t c = 0; c < cols; ++c) {
            if (!(m & (std::size_t{1} << c)) || score_at(r, c) < 0.0) continue;
            if (dp[r + 1][m] == dp[r][m ^ (std::size_t{1} << c)] + score_at(r, c)) {
                const std::size_t gi = transpose ? c : r;
                const std::size_t hj = transpose ? r : c;
                matches.emplace_back(gts[gi].first, hyps[hj].first);
                m ^= std::size_t{1} << c;
                break;
            }
        }
    }
    std::sort(matches.begin(), matches.end());
    return matches;
}

}  // namespace

MotScore clear_mot(const std::map<int, TrackBoxes>& gt_tracks,
                   const std::map<int, TrackBoxes>& hyp_tracks, double iou_threshold) {
    std::set<int> frames;
    for (const auto& [id, track] : gt_tracks) {
        (void)id;
        for (const auto& [f, box] : track) {
            (void)box;
            frames.insert(f);
        }
    }
    for (const auto& [id, track] : hyp_tracks) {
        (void)id;
        for (const auto& [f, box] : track) {
            (void)box;
            frames.insert(f);
        }
    }

    MotScore score;
    score.gt = static_cast<int>(gt_tracks.size());

    std::map<int, int> correspondence;   // gt -> hyp, valid as of previous frame
    std::map<int, int> last_hypothesis;  // gt -> last matched hyp ever
    std::map<int, int> matched_frames;
    std::map<int, bool> had_match, in_gap;

    int true_positives = 0;
    int total_gt_boxes = 0;
    double iou_sum = 0.0;

    for (int f : frames) {
        std::vector<std::pair<int, const Box*>> gt_boxes, hyp_boxes;
        for (const auto& [id, track] : gt_tracks) {
            auto it = track.find(f);
            if (it != track.end()) gt_boxes.emplace_back(id, &it->second);
        }
        for (const auto& [id, track] : hyp_tracks) {
            auto it = track.find(f);
            if (it != track.end()) hyp_boxes.emplace_back(id, &it->second);
        }
        total_gt_boxes += static_cast<int>(gt_boxes.size());

        std::map<int, int> frame_match;  // gt -> hyp
        std::set<int> used_hyp;

        // Keep last frame's correspondences while they still overlap.
        for (const auto& [g, h] : correspondence) {
            const Box* gb = nullptr;
            const Box* hb = nullptr;
            for (const auto& [id, box] : gt_boxes)
                if (id == g) gb = box;
            for (const auto& [id, box] : hyp_boxes)
                if (id == h) hb = box;
            if (!gb || !hb || used_hyp.count(h)) continue;
            const double v = iou(*gb, *hb);
            if (v >= iou_threshold) {
                frame_match[g] = h;
                used_hyp.insert(h);
                iou_sum += v;
            }
        }

        // Optimal assignment for the rest.
        std::vector<std::pair<int, const Box*>> free_gt, free_hyp;
        for (const auto& [id, box] : gt_boxes)
            if (!frame_match.count(id)) free_gt.emplace_back(id, box);
        for (const auto& [id, box] : hyp_boxes)
            if (!used_hyp.count(id)) free_hyp.emplace_back(id, box);
        for (const auto& [g, h] : match_frame(free_gt, free_hyp, iou_threshold)) {
            frame_match[g] = h;
            used_hyp.insert(h);
            const Box* gb = nullptr;
            const Box* hb = nullptr;
            for (const auto& [id, box] : gt_boxes)
                if (id == g) gb = box;
            for (const auto& [id, box] : hyp_boxes)
                if (id == h) hb = box;
            iou_sum += iou(*gb, *hb);
        }

        // Bookkeeping: switches, misses, false positives, fragmentations.
        for (const auto& [g, h] : frame_match) {
            auto last = last_hypothesis.find(g);
            if (last != last_hypothesis.end() && last->second != h) ++score.id_switches;
            last_hypothesis[g] = h;
            ++matched_frames[g];
        }
        true_positives += static_cast<int>(frame_match.size());
        score.false_negatives += static_cast<int>(gt_boxes.size() - frame_match.size());
        score.false_positives += static_cast<int>(hyp_boxes.size() - frame_match.size());

        for (const auto& [id, box] : gt_boxes) {
            (void)box;
            if (frame_match.count(id)) {
                if (had_match[id] && in_gap[id]) ++score.fragmentations;
                had_match[id] = true;
                in_gap[id] = false;
            } else if (had_match[id]) {
                in_gap[id] = true;
            }
        }

        correspondence = frame_match;
    }

    for (const auto& [id, track] : gt_tracks) {
        const double total = static_cast<double>(track.size());
        const double ratio = total > 0.0 ? matched_frames[id] / total : 0.0;
        if (ratio >= 0.8) ++score.mostly_tracked;
        else if (ratio < 0.2) ++score.mostly_lost;
        else ++score.partly_tracked;
    }

    score.recall = total_gt_boxes > 0
                       ? static_cast<double>(true_positives) / total_gt_boxes
                       : 0.0;
    score.precision = true_positives + score.false_positives > 0
                          ? static_cast<double>(true_positives) /
                                (true_positives + score.false_positives)
                          : 1.0;
    score.far = frames.empty() ? 0.0
                               : static_cast<double>(score.false_positives) /
                                     static_cast<double>(frames.size());
    score.mota = total_gt_boxes > 0
                     ? 1.0 - static_cast<double>(score.false_positives +
                                                 score.false_negatives +
                                                 score.id_switches) /
                                 total_gt_boxes
                     : 0.0;
    score.motp = true_positives > 0 ? iou_sum / true_positives : 0.0;
    return score;
}

std::string format_metrics_text(const SegScore& seg, const MotScore& mot) {
    std::string out;
    out += "P\tR\tF\tO\tO_total\n";
    out += format_double(seg.precision) + "\t" + format_double(seg.recall) + "\t" +
           format_double(seg.f_measure) + "\t" + std::to_string(seg.objects_extracted) +
           "\t" + std::to_string(seg.objects_total) + "\n";
    out += "Rcll\tPrcsn\tFAR\tGT\tMT\tPT\tML\tFP\tFN\tIDs\tFM\tMOTA\tMOTP\n";
    out += format_double(mot.recall) + "\t" + format_double(mot.precision) + "\t" +
           format_double(mot.far) + "\t" + std::to_string(mot.gt) + "\t" +
           std::to_string(mot.mostly_tracked) + "\t" + std::to_string(mot.partly_tracked) +
           "\t" + std::to_string(mot.mostly_lost) + "\t" +
           std::to_string(mot.false_positives) + "\t" +
           std::to_string(mot.false_negatives) + "\t" + std::to_string(mot.id_switches) +
           "\t" + std::to_string(mot.fragmentations) + "\t" + format_double(mot.mota) +
           "\t" + format_double(mot.motp) + "\n";
    return out;
}

std::string format_metrics_json(const SegScore& seg, const MotScore& mot) {
    std::string out = "{\n";
    out += "  \"P\": " + format_double(seg.precision) + ",\n";
    out += "  \"R\": " + format_double(seg.recall) + ",\n";
    out += "  \"F\": " + format_double(seg.f_measure) + ",\n";
    out += "  \"O\": " + std::to_string(seg.objects_extracted) + ",\n";
    out += "  \"O_total\": " + std::to_string(seg.objects_total) + ",\n";
    out += "  \"Rcll\": " + format_double(mot.recall) + ",\n";
    out += "  \"Prcsn\": " + format_double(mot.precision) + ",\n";
    out += "  \"FAR\": " + format_double(mot.far) + ",\n";
    out += "  \"GT\": " + std::to_string(mot.gt) + ",\n";
    out += "  \"MT\": " + std::to_string(mot.mostly_tracked) + ",\n";
    out += "  \"PT\": " + std::to_string(mot.partly_tracked) + ",\n";
    out += "  \"ML\": " + std::to_string(mot.mostly_lost) + ",\n";
    out += "  \"FP\": " + std::to_string(mot.false_positives) + ",\n";
    out += "  \"FN\": " + std::to_string(mot.false_negatives) + ",\n";
    out += "  \"IDs\": " + std::to_string(mot.id_switches) + ",\n";
    out += "  \"FM\": " + std::to_string(mot.fragmentations) + ",\n";
    out += "  \"MOTA\": " + format_double(mot.mota) + ",\n";
    out += "  \"MOTP\": " + format_double(mot.motp) + "\n";
    out += "}\n";
    return out;
}

}  // namespace jtms
