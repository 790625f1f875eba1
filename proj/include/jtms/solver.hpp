#pragma once

#include <utility>

#include "jtms/graph.hpp"

namespace jtms {

struct SolveParams {
    int max_outer_rounds = 100;
    double gain_epsilon = 0.0;      // a change must improve by more than this
    bool enable_merge_moves = true;
};

struct SolveReport {
    double final_objective = 0.0;
    double initial_objective = 0.0;
    int rounds = 0;
    long long moves = 0;  // committed node relocations plus whole-component merges
};

/// Greedy additive edge contraction: starting from singletons, repeatedly
/// merges the component pair with the largest positive inter-component cost
/// sum. Ties resolve to the pair with the smallest (min node id of A,
/// min node id of B). Returns a canonical decomposition.
Decomposition greedy_contraction_init(const JointGraph& g);

/// Kernighan-Lin local search over the given start. Each outer round visits
/// every ordered pair of adjacent components plus every component paired
/// with a fresh empty one (splits). A pass tentatively relocates boundary
/// nodes one at a time, always taking the best remaining objective delta,
/// and commits the best prefix when its gain exceeds gain_epsilon; merging
/// the two components outright is applied instead when it beats the pass.
/// All orderings are by node id, so results are deterministic.
std::pair<Decomposition, SolveReport> kl_improve(const JointGraph& g,
                                                 const Decomposition& d,
                                                 const SolveParams& params = {});

/// Two deterministic arms, better objective wins (contraction arm on
/// ties): kl_improve over greedy_contraction_init, and kl_improve over the
/// all-joined start, whose split passes carve the graph top-down. The
/// winner is refined to connected components (objective unchanged) and
/// canonicalized. The report reflects the winning arm.
std::pair<Decomposition, SolveReport> solve(const JointGraph& g,
                                            const SolveParams& params = {});

/// Exhaustive minimum over all set partitions, enumerated as restricted
/// growth strings in lexicographic order; ties resolve to the first (hence
/// lexicographically smallest canonical) optimum. Rejects graphs with more
/// than 12 nodes.
std::pair<Decomposition, double> solve_exact(const JointGraph& g);

}  // namespace jtms
