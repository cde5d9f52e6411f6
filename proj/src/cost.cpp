#include "fairtree/cost.hpp"

#include <stdexcept>
#include <vector>

#include "fairtree/simd.hpp"

namespace fairtree {

namespace {

void check_leaf_set(const HierarchyTree& t, const WeightedGraph& g) {
    if (t.num_leaves() != g.size()) {
        throw std::invalid_argument("tree has " + std::to_string(t.num_leaves()) + " leaves but graph has " +
                                    std::to_string(g.size()) + " vertices");
    }
}

}  // namespace

double edge_cost(const HierarchyTree& t, const WeightedGraph& g, VertexId u, VertexId v) {
    const NodeId a = t.lca(u, v);
    return g.weight(u, v) * static_cast<double>(t.size(a));
}

double dasgupta_cost(const HierarchyTree& t, const WeightedGraph& g) {
    check_leaf_set(t, g);
    const std::size_t n = g.size();
    if (n < 2) return 0.0;

    const auto order = t.members(t.root());
    std::vector<double> permuted(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto src = g.row(order[i]);
        for (std::size_t j = 0; j < n; ++j) permuted[i * n + j] = src[static_cast<std::size_t>(order[j])];
    }
    const auto root_first = t.members(t.root()).data();
    const auto& k = simd::active();

    double total = 0.0;
    for (NodeId v : t.preorder()) {
        if (t.is_leaf(v)) continue;
        const auto range = t.members(v);
        const std::size_t end = static_cast<std::size_t>(range.data() - root_first) + range.size();
        double cut = 0.0;
        for (NodeId c : t.children(v)) {
            const auto cm = t.members(c);
            const std::size_t lo = static_cast<std::size_t>(cm.data() - root_first);
            const std::size_t hi = lo + cm.size();
            if (hi == end) break;
            for (std::size_t x = lo; x < hi; ++x) cut += k.sum(permuted.data() + x * n + hi, end - hi);
        }
        total += static_cast<double>(range.size()) * cut;
    }
    return total;
}

double dasgupta_cost_by_pairs(const HierarchyTree& t, const WeightedGraph& g) {
    check_leaf_set(t, g);
    double total = 0.0;
    const auto n = static_cast<VertexId>(g.size());
    for (VertexId u = 0; u < n; ++u) {
        for (VertexId v = u + 1; v < n; ++v) {
            if (g.weight(u, v) != 0.0) total += edge_cost(t, g, u, v);
        }
    }
    return total;
}

double ratio_cost(const WeightedGraph& g, const HierarchyTree& before, const HierarchyTree& after) {
    const double base = dasgupta_cost(before, g);
    if (base == 0.0) throw std::domain_error("baseline cost is zero; ratio undefined");
    return dasgupta_cost(after, g) / base;
}

}  // namespace fairtree
