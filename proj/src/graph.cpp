#include "jtms/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace jtms {

namespace {

// Union-find with path halving; no rank, merges keep the smaller root so
// component representatives are min node ids.
struct DisjointSets {
    std::vector<std::uint32_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
    }

    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent[b] = a;
    }
};

std::uint64_t pair_key(std::uint32_t u, std::uint32_t v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

EdgeClass expected_class(Layer lu, Layer lv) {
    if (lu == Layer::High && lv == Layer::High) return EdgeClass::HighHigh;
    if (lu == Layer::Low && lv == Layer::Low) return EdgeClass::LowLow;
    return EdgeClass::HighLow;
}

}  // namespace

const char* to_string(EdgeClass cls) {
    switch (cls) {
        case EdgeClass::HighHigh: return "HH";
        case EdgeClass::LowLow: return "LL";
        case EdgeClass::HighLow: return "HL";
    }
    return "??";
}

std::size_t Decomposition::component_count() const {
    std::uint32_t max_id = 0;
    if (component_of.empty()) return 0;
    for (std::uint32_t c : component_of) max_id = std::max(max_id, c);
    std::vector<bool> seen(static_cast<std::size_t>(max_id) + 1, false);
    std::size_t count = 0;
    for (std::uint32_t c : component_of) {
        if (!seen[c]) {
            seen[c] = true;
            ++count;
        }
    }
    return count;
}

JointGraph build_graph(std::size_t high_count, std::size_t low_count,
                       std::vector<EdgeRef> edges) {
    const std::size_t n = high_count + low_count;
    std::unordered_set<std::uint64_t> pairs;
    pairs.reserve(edges.size() * 2);

    for (std::size_t i = 0; i < edges.size(); ++i) {
        const EdgeRef& e = edges[i];
        if (e.u >= n || e.v >= n)
            throw std::invalid_argument("edge " + std::to_string(i) +
                                        ": endpoint out of range");
        if (e.u == e.v)
            throw std::invalid_argument("edge " + std::to_string(i) + ": self-loop");
        const Layer lu = e.u < high_count ? Layer::High : Layer::Low;
        const Layer lv = e.v < high_count ? Layer::High : Layer::Low;
        if (e.cls != expected_class(lu, lv))
            throw std::invalid_argument("edge " + std::to_string(i) +
                                        ": class does not match endpoint layers");
        if (!std::isfinite(e.cut_cost))
            throw std::invalid_argument("edge " + std::to_string(i) +
                                        ": non-finite cut cost");
        if (!pairs.insert(pair_key(e.u, e.v)).second)
            throw std::invalid_argument("edge " + std::to_string(i) +
                                        ": duplicate node pair");
    }

    JointGraph g;
    g.high_count_ = high_count;
    g.low_count_ = low_count;
    g.edges_ = std::move(edges);

    std::vector<std::size_t> degree(n + 1, 0);
    for (const EdgeRef& e : g.edges_) {
        ++degree[e.u];
        ++degree[e.v];
    }
    g.adj_offset_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.adj_offset_[i + 1] = g.adj_offset_[i] + degree[i];
    g.adjacency_.resize(g.adj_offset_[n]);
    std::vector<std::size_t> cursor(g.adj_offset_.begin(), g.adj_offset_.end() - 1);
    for (std::size_t i = 0; i < g.edges_.size(); ++i) {
        const EdgeRef& e = g.edges_[i];
        g.adjacency_[cursor[e.u]++] = static_cast<std::uint32_t>(i);
        g.adjacency_[cursor[e.v]++] = static_cast<std::uint32_t>(i);
    }
    return g;
}

double objective(const JointGraph& g, const Decomposition& d) {
    if (d.size() != g.node_count())
        throw std::invalid_argument("decomposition labels " + std::to_string(d.size()) +
                                    " nodes, graph has " + std::to_string(g.node_count()));
    double total = 0.0;
    for (const EdgeRef& e : g.edges())
        if (d.component_of[e.u] != d.component_of[e.v]) total += e.cut_cost;
    return total;
}

bool is_feasible(const JointGraph& g, const EdgeLabeling& y) {
    if (y.size() != g.edge_count())
        throw std::invalid_argument("labeling has " + std::to_string(y.size()) +
                                    " entries, graph has " + std::to_string(g.edge_count()) +
                                    " edges");
    DisjointSets sets(g.node_count());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!y[i]) sets.unite(g.edge(i).u, g.edge(i).v);
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] && sets.find(g.edge(i).u) == sets.find(g.edge(i).v)) return false;
    return true;
}

EdgeLabeling labeling_of(const JointGraph& g, const Decomposition& d) {
    if (d.size() != g.node_count())
        throw std::invalid_argument("decomposition labels " + std::to_string(d.size()) +
                                    " nodes, graph has " + std::to_string(g.node_count()));
    EdgeLabeling y(g.edge_count(), 0);
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        const EdgeRef& e = g.edge(i);
        y[i] = d.component_of[e.u] != d.component_of[e.v] ? 1 : 0;
    }
    return y;
}

Decomposition decomposition_of(const JointGraph& g, const EdgeLabeling& y) {
    if (y.size() != g.edge_count())
        throw std::invalid_argument("labeling has " + std::to_string(y.size()) +
                                    " entries, graph has " + std::to_string(g.edge_count()) +
                                    " edges");
    DisjointSets sets(g.node_count());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (!y[i]) sets.unite(g.edge(i).u, g.edge(i).v);
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] && sets.find(g.edge(i).u) == sets.find(g.edge(i).v))
            throw std::invalid_argument("infeasible labeling: cut edge " + std::to_string(i) +
                                        " lies inside a joined component");
    Decomposition d;
    d.component_of.resize(g.node_count());
    for (std::uint32_t i = 0; i < g.node_count(); ++i) d.component_of[i] = sets.find(i);
    return canonicalize(d);
}

Decomposition canonicalize(const Decomposition& d) {
    Decomposition out;
    out.component_of.resize(d.size());
    std::uint32_t max_id = 0;
    for (std::uint32_t c : d.component_of) max_id = std::max(max_id, c);
    constexpr std::uint32_t kUnset = 0xffffffffu;
    std::vector<std::uint32_t> remap(static_cast<std::size_t>(max_id) + 1, kUnset);
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        std::uint32_t& m = remap[d.component_of[i]];
        if (m == kUnset) m = next++;
        out.component_of[i] = m;
    }
    return out;
}

Decomposition all_singletons(std::size_t node_count) {
    Decomposition d;
    d.component_of.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i)
        d.component_of[i] = static_cast<std::uint32_t>(i);
    return d;
}

Decomposition all_joined(std::size_t node_count) {
    Decomposition d;
    d.component_of.assign(node_count, 0);
    return d;
}

}  // namespace jtms
