#include "jtms/solver.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace jtms {

namespace {

constexpr std::uint32_t kNoComponent = 0xffffffffu;

// Commits must beat this margin on the canonically recomputed objective.
// The sequence bookkeeping alone is not trustworthy: its cancellation noise
// scales with the summed edge weights (a full side swap reproduces the
// identical partition with a tiny positive "gain"), and accepting such
// phantom gains cycles forever.
constexpr double kGainNoiseFloor = 1e-9;

struct MergeCandidate {
    double weight;
    std::uint32_t a, b;    // component representatives, a < b
    std::uint64_t va, vb;  // representative versions at push time
};

// Max-heap order: weight desc, then (a, b) asc. Versions complete the order
// so pop order never depends on insertion order.
struct MergeCandidateLess {
    bool operator()(const MergeCandidate& l, const MergeCandidate& r) const {
        if (l.weight != r.weight) return l.weight < r.weight;
        if (l.a != r.a) return l.a > r.a;
        if (l.b != r.b) return l.b > r.b;
        if (l.va != r.va) return l.va > r.va;
        return l.vb > r.vb;
    }
};

std::uint32_t find_rep(std::vector<std::uint32_t>& parent, std::uint32_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

Decomposition greedy_contraction_init(const JointGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::uint32_t> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
    std::vector<std::uint64_t> version(n, 0);
    std::vector<std::unordered_map<std::uint32_t, double>> adj(n);

    std::priority_queue<MergeCandidate, std::vector<MergeCandidate>, MergeCandidateLess> heap;
    for (const EdgeRef& e : g.edges()) {
        std::uint32_t a = std::min(e.u, e.v);
        std::uint32_t b = std::max(e.u, e.v);
        adj[a][b] += e.cut_cost;
        adj[b][a] += e.cut_cost;
        heap.push({adj[a][b], a, b, version[a], version[b]});
    }

    while (!heap.empty()) {
        MergeCandidate top = heap.top();
        heap.pop();
        if (top.weight <= 0.0) break;  // max-heap: nothing positive remains
        if (find_rep(parent, top.a) != top.a || find_rep(parent, top.b) != top.b) continue;
        if (version[top.a] != top.va || version[top.b] != top.vb) continue;

        // Contract b into a; a stays the representative (a < b).
        parent[top.b] = top.a;
        ++version[top.a];
        adj[top.a].erase(top.b);
        adj[top.b].erase(top.a);
        for (const auto& [nb, w] : adj[top.b]) {
            adj[nb].erase(top.b);
            double& merged = adj[top.a][nb];
            merged += w;
            adj[nb][top.a] = merged;
        }
        adj[top.b].clear();
        for (const auto& [nb, w] : adj[top.a]) {
            std::uint32_t x = std::min(top.a, nb);
            std::uint32_t y = std::max(top.a, nb);
            heap.push({w, x, y, version[x], version[y]});
        }
    }

    Decomposition d;
    d.component_of.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) d.component_of[i] = find_rep(parent, i);
    return canonicalize(d);
}

namespace {

// Working state for kl_improve. Component ids are re-canonicalized at the
// start of every round; splits hand out fresh ids above the current count.
class KlState {
public:
    KlState(const JointGraph& g, const Decomposition& d, const SolveParams& params)
        : g_(g),
          params_(params),
          comp_(d.component_of),
          side_(g.node_count(), 0),
          delta_(g.node_count(), 0.0),
          is_candidate_(g.node_count(), 0) {}

    std::pair<Decomposition, SolveReport> run() {
        objective_ = current_objective();
        SolveReport report;
        report.initial_objective = objective_;

        bool changed = true;
        while (changed && report.rounds < params_.max_outer_rounds) {
            changed = false;
            ++report.rounds;
            comp_ = canonicalize(Decomposition{comp_}).component_of;
            next_free_id_ =
                static_cast<std::uint32_t>(Decomposition{comp_}.component_count());

            for (std::uint32_t anchor : component_anchors()) {
                if (min_node_of(comp_[anchor]) != anchor) continue;  // identity changed
                for (std::uint32_t b_anchor : adjacent_anchors(comp_[anchor])) {
                    if (comp_[b_anchor] == comp_[anchor]) continue;
                    if (pass(comp_[anchor], comp_[b_anchor], report.moves)) changed = true;
                }
                if (pass(comp_[anchor], kNoComponent, report.moves)) changed = true;
            }
        }

        Decomposition result = canonicalize(Decomposition{comp_});
        report.final_objective = objective(g_, result);
        return {std::move(result), report};
    }

private:
    // Min node of every component, ascending (= first occurrences).
    std::vector<std::uint32_t> component_anchors() const {
        std::vector<std::uint32_t> anchors;
        std::vector<std::uint8_t> seen;
        for (std::uint32_t v = 0; v < comp_.size(); ++v) {
            std::uint32_t c = comp_[v];
            if (c >= seen.size()) seen.resize(c + 1, 0);
            if (!seen[c]) {
                seen[c] = 1;
                anchors.push_back(v);
            }
        }
        return anchors;
    }

    std::uint32_t min_node_of(std::uint32_t comp_id) const {
        for (std::uint32_t v = 0; v < comp_.size(); ++v)
            if (comp_[v] == comp_id) return v;
        return kNoComponent;
    }

    // Min nodes of components adjacent to a_id, ascending.
    std::vector<std::uint32_t> adjacent_anchors(std::uint32_t a_id) const {
        std::unordered_map<std::uint32_t, std::uint32_t> min_node;  // comp -> min node
        for (std::uint32_t v = 0; v < comp_.size(); ++v) {
            if (comp_[v] == a_id) continue;
            auto [it, fresh] = min_node.try_emplace(comp_[v], v);
            (void)it;
            (void)fresh;  // first occurrence wins: v ascends
        }
        std::vector<std::uint32_t> anchors;
        for (const EdgeRef& e : g_.edges()) {
            std::uint32_t cu = comp_[e.u];
            std::uint32_t cv = comp_[e.v];
            if (cu == cv) continue;
            if (cu == a_id) anchors.push_back(min_node.at(cv));
            else if (cv == a_id) anchors.push_back(min_node.at(cu));
        }
        std::sort(anchors.begin(), anchors.end());
        anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
        return anchors;
    }

    // Repeats two-cut passes on the pair until one stops improving.
    bool pass(std::uint32_t a_id, std::uint32_t b_id, long long& moves) {
        bool committed = false;
        while (pass_once(a_id, b_id, moves)) committed = true;
        return committed;
    }

    // One two-cut pass between components a_id and b_id (kNoComponent = a
    // fresh empty component, enabling splits). Boundary nodes of either side
    // may cross; each candidate moves at most once. Returns true if
    // committed.
    bool pass_once(std::uint32_t a_id, std::uint32_t b_id, long long& moves) {
        const bool split = b_id == kNoComponent;

        std::vector<std::uint32_t> a_nodes;
        for (std::uint32_t v = 0; v < comp_.size(); ++v)
            if (comp_[v] == a_id) a_nodes.push_back(v);
        if (a_nodes.empty()) return false;

        // Candidates with their initial move deltas, plus the total A-B
        // weight for the outright-merge alternative. side_ records which
        // side a candidate starts on (0 = A, 1 = B).
        std::vector<std::uint32_t> candidates;
        double merge_weight = 0.0;
        auto consider = [&](std::uint32_t v, std::uint8_t side) {
            const std::uint32_t own = side == 0 ? a_id : b_id;
            const std::uint32_t other_comp = side == 0 ? b_id : a_id;
            bool boundary = false;
            double delta = 0.0;
            for (std::uint32_t ei : g_.incident_edges(v)) {
                const EdgeRef& e = g_.edge(ei);
                const std::uint32_t other = g_.opposite(ei, v);
                if (comp_[other] == own) {
                    delta += e.cut_cost;
                } else if (!split && comp_[other] == other_comp) {
                    delta -= e.cut_cost;
                    if (side == 0) merge_weight += e.cut_cost;
                    boundary = true;
                }
            }
            if (split || boundary) {
                candidates.push_back(v);
                delta_[v] = delta;
                is_candidate_[v] = 1;
                side_[v] = side;
            }
        };
        for (std::uint32_t v : a_nodes) consider(v, 0);
        if (!split)
            for (std::uint32_t v = 0; v < comp_.size(); ++v)
                if (comp_[v] == b_id) consider(v, 1);
        if (candidates.empty()) return false;

        // Tentative move sequence: best remaining delta first (even when it
        // worsens the objective), node id on ties; keep the best prefix.
        std::vector<std::uint32_t> order;
        order.reserve(candidates.size());
        double cum = 0.0;
        double best_cum = 0.0;
        std::size_t best_prefix = 0;

        // is_candidate_[v] doubles as the "not yet moved" flag during the
        // selection loop.
        for (std::size_t step = 0; step < candidates.size(); ++step) {
            std::uint32_t v = kNoComponent;
            for (std::uint32_t c : candidates) {
                if (!is_candidate_[c]) continue;
                if (v == kNoComponent || delta_[c] < delta_[v] ||
                    (delta_[c] == delta_[v] && c < v))
                    v = c;
            }
            is_candidate_[v] = 0;
            cum += delta_[v];
            order.push_back(v);
            if (cum < best_cum) {
                best_cum = cum;
                best_prefix = order.size();
            }
            // v crossing over flips the contribution of its edges to the
            // unmoved candidates: those on v's starting side lose the edge
            // from their own component, the other side gains it.
            for (std::uint32_t ei : g_.incident_edges(v)) {
                const std::uint32_t other = g_.opposite(ei, v);
                if (!is_candidate_[other]) continue;
                if (side_[other] == side_[v])
                    delta_[other] -= 2.0 * g_.edge(ei).cut_cost;
                else
                    delta_[other] += 2.0 * g_.edge(ei).cut_cost;
            }
        }

        const double prefix_gain = -best_cum;
        const double min_gain = std::max(params_.gain_epsilon, kGainNoiseFloor);
        const bool merge_wins = !split && params_.enable_merge_moves &&
                                merge_weight > min_gain && merge_weight > prefix_gain;
        if (merge_wins) {
            for (std::uint32_t v : a_nodes) comp_[v] = b_id;
            if (!verify_commit(min_gain)) {
                for (std::uint32_t v : a_nodes) comp_[v] = a_id;
                return false;
            }
            ++moves;
            return true;
        }
        if (prefix_gain > min_gain) {
            const std::uint32_t target_for_a = split ? next_free_id_ : b_id;
            for (std::size_t i = 0; i < best_prefix; ++i) {
                const std::uint32_t v = order[i];
                comp_[v] = side_[v] == 0 ? target_for_a : a_id;
            }
            if (!verify_commit(min_gain)) {
                for (std::size_t i = 0; i < best_prefix; ++i) {
                    const std::uint32_t v = order[i];
                    comp_[v] = side_[v] == 0 ? a_id : b_id;
                }
                return false;
            }
            if (split) ++next_free_id_;
            moves += static_cast<long long>(best_prefix);
            return true;
        }
        return false;
    }

    // The sequence bookkeeping decided to commit; accept only if the
    // canonical objective really dropped, and keep it current.
    bool verify_commit(double min_gain) {
        const double fresh = current_objective();
        if (objective_ - fresh > min_gain) {
            objective_ = fresh;
            return true;
        }
        return false;
    }

    double current_objective() const {
        double total = 0.0;
        for (const EdgeRef& e : g_.edges())
            if (comp_[e.u] != comp_[e.v]) total += e.cut_cost;
        return total;
    }

    const JointGraph& g_;
    const SolveParams& params_;
    std::vector<std::uint32_t> comp_;
    std::vector<std::uint8_t> side_;
    std::vector<double> delta_;
    std::vector<std::uint8_t> is_candidate_;
    std::uint32_t next_free_id_ = 0;
    double objective_ = 0.0;
};

}  // namespace

std::pair<Decomposition, SolveReport> kl_improve(const JointGraph& g,
                                                 const Decomposition& d,
                                                 const SolveParams& params) {
    if (d.size() != g.node_count())
        throw std::invalid_argument("decomposition labels " + std::to_string(d.size()) +
                                    " nodes, graph has " + std::to_string(g.node_count()));
    if (params.gain_epsilon < 0.0)
        throw std::invalid_argument("gain_epsilon must be non-negative");
    KlState state(g, d, params);
    return state.run();
}

std::pair<Decomposition, SolveReport> solve(const JointGraph& g, const SolveParams& params) {
    auto [d1, r1] = kl_improve(g, greedy_contraction_init(g), params);
    auto [d2, r2] = kl_improve(g, all_joined(g.node_count()), params);
    const bool joined_arm_wins = r2.final_objective < r1.final_objective;
    Decomposition d = joined_arm_wins ? std::move(d2) : std::move(d1);
    SolveReport report = joined_arm_wins ? r2 : r1;
    // Refine to connected components: same objective, but equal-cost
    // disconnected classes (possible from the all-joined start) split up.
    d = decomposition_of(g, labeling_of(g, d));
    report.final_objective = objective(g, d);
    return {canonicalize(d), report};
}

std::pair<Decomposition, double> solve_exact(const JointGraph& g) {
    const std::size_t n = g.node_count();
    if (n > 12)
        throw std::invalid_argument("solve_exact limited to 12 nodes, got " +
                                    std::to_string(n));
    Decomposition best;
    if (n == 0) return {best, 0.0};

    std::vector<std::uint32_t> labels(n, 0);
    std::vector<std::uint32_t> prefix_max(n, 0);
    double best_objective = std::numeric_limits<double>::infinity();

    for (;;) {
        double obj = 0.0;
        for (const EdgeRef& e : g.edges())
            if (labels[e.u] != labels[e.v]) obj += e.cut_cost;
        if (obj < best_objective) {
            best_objective = obj;
            best.component_of = labels;
        }

        // Advance to the next restricted growth string in lexicographic
        // order: bump the rightmost position that may grow, zero the rest.
        std::size_t i = n;
        bool advanced = false;
        while (i-- > 1) {
            if (labels[i] <= prefix_max[i - 1]) {
                ++labels[i];
                prefix_max[i] = std::max(prefix_max[i - 1], labels[i]);
                for (std::size_t j = i + 1; j < n; ++j) {
                    labels[j] = 0;
                    prefix_max[j] = prefix_max[i];
                }
                advanced = true;
                break;
            }
        }
        if (!advanced) break;
    }
    return {best, best_objective};
}

}  // namespace jtms
