#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace jtms {

enum class Layer : std::uint8_t { High, Low };

enum class EdgeClass : std::uint8_t { HighHigh, LowLow, HighLow };

const char* to_string(EdgeClass cls);

struct NodeRef {
    std::uint32_t index = 0;
    Layer layer = Layer::Low;

    bool operator==(const NodeRef&) const = default;
};

/// One undirected edge with its cut cost (log-odds, see potentials.hpp for
/// the sign convention). Endpoints are global node indices.
struct EdgeRef {
    std::uint32_t u = 0;
    std::uint32_t v = 0;
    EdgeClass cls = EdgeClass::LowLow;
    double cut_cost = 0.0;
};

/// Per-edge binary labels, 1 = cut, 0 = joined.
using EdgeLabeling = std::vector<std::uint8_t>;

/// A partition of the graph nodes into components. Component ids form a
/// contiguous 0..k-1 range after canonicalize(); equality of partitions is
/// defined on the canonical form.
struct Decomposition {
    std::vector<std::uint32_t> component_of;

    std::size_t size() const { return component_of.size(); }
    std::size_t component_count() const;

    bool operator==(const Decomposition&) const = default;
};

/// Immutable weighted graph over two node layers. High nodes occupy global
/// indices [0, high_count), low nodes [high_count, high_count + low_count).
/// Sealed at construction; safe to share across threads.
class JointGraph {
public:
    JointGraph() = default;  // the empty graph; build_graph makes real ones

    std::size_t high_count() const { return high_count_; }
    std::size_t low_count() const { return low_count_; }
    std::size_t node_count() const { return high_count_ + low_count_; }
    std::size_t edge_count() const { return edges_.size(); }

    Layer layer_of(std::uint32_t node) const {
        return node < high_count_ ? Layer::High : Layer::Low;
    }
    NodeRef node(std::uint32_t index) const { return {index, layer_of(index)}; }

    const EdgeRef& edge(std::size_t i) const { return edges_[i]; }
    std::span<const EdgeRef> edges() const { return edges_; }

    /// Indices of edges incident to `node`.
    std::span<const std::uint32_t> incident_edges(std::uint32_t node) const {
        return {adjacency_.data() + adj_offset_[node],
                adj_offset_[node + 1] - adj_offset_[node]};
    }

    /// Endpoint of edge `e` that is not `node`.
    std::uint32_t opposite(std::uint32_t e, std::uint32_t node) const {
        const EdgeRef& ed = edges_[e];
        return ed.u == node ? ed.v : ed.u;
    }

private:
    friend JointGraph build_graph(std::size_t, std::size_t, std::vector<EdgeRef>);

    std::size_t high_count_ = 0;
    std::size_t low_count_ = 0;
    std::vector<EdgeRef> edges_;
    std::vector<std::size_t> adj_offset_;
    std::vector<std::uint32_t> adjacency_;
};

/// Validates and seals a graph. Edge order is preserved as given.
/// Throws std::invalid_argument naming the offending edge index on
/// self-loops, duplicate node pairs, out-of-range endpoints, layer/class
/// mismatches and non-finite costs.
JointGraph build_graph(std::size_t high_count, std::size_t low_count,
                       std::vector<EdgeRef> edges);

/// Sum of cut_cost over edges whose endpoints lie in different components,
/// accumulated in edge-insertion order.
double objective(const JointGraph& g, const Decomposition& d);

/// True iff the labeling satisfies all cycle inequalities, i.e. every cut
/// edge has its endpoints in different connected components of the joined
/// subgraph.
bool is_feasible(const JointGraph& g, const EdgeLabeling& y);

/// Labeling induced by a partition: an edge is cut iff its endpoints lie in
/// different components.
EdgeLabeling labeling_of(const JointGraph& g, const Decomposition& d);

/// Connected components of the joined subgraph, in canonical form. Throws
/// std::invalid_argument naming a violated edge if `y` is infeasible.
Decomposition decomposition_of(const JointGraph& g, const EdgeLabeling& y);

/// Relabels component ids by first occurrence in ascending node index.
/// Idempotent; preserves co-membership.
Decomposition canonicalize(const Decomposition& d);

/// Decompositions with every node in its own component / in one component.
Decomposition all_singletons(std::size_t node_count);
Decomposition all_joined(std::size_t node_count);

}  // namespace jtms
