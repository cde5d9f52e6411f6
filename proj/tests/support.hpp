#pragma once

#include <string>
#include <vector>

#include "fairtree/graph.hpp"
#include "fairtree/random.hpp"
#include "fairtree/tree.hpp"
#include "fairtree/tree_io.hpp"

namespace fairtree::testing {

// Random binary tree: recursively split a shuffled label list at a uniform cut.
inline HierarchyTree random_binary_tree(std::size_t n, Rng& rng) {
    std::vector<VertexId> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<VertexId>(i);
    rng.shuffle(std::span<VertexId>(labels));
    TreeBuilder b;
    auto build = [&](auto&& self, std::size_t lo, std::size_t hi) -> NodeId {
        if (hi - lo == 1) return b.add_leaf(labels[lo]);
        const std::size_t cut = lo + 1 + static_cast<std::size_t>(rng.below(hi - lo - 1));
        const NodeId l = self(self, lo, cut);
        const NodeId r = self(self, cut, hi);
        return b.add_internal({l, r});
    };
    b.set_root(build(build, 0, n));
    return std::move(b).finish();
}

// ((((0,1),2),3),...) with n leaves.
inline HierarchyTree caterpillar(std::size_t n) {
    std::string s = "0";
    for (std::size_t i = 1; i < n; ++i) s = "(" + s + "," + std::to_string(i) + ")";
    return parse_nested(s);
}

inline std::string perfect_nested(std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return std::to_string(lo);
    const std::size_t mid = lo + (hi - lo) / 2;
    return "(" + perfect_nested(lo, mid) + "," + perfect_nested(mid, hi) + ")";
}

inline HierarchyTree perfect_tree(std::size_t n) { return parse_nested(perfect_nested(0, n)); }

// Complete graph with weights uniform in (lo, hi].
inline WeightedGraph random_graph(std::size_t n, Rng& rng, double lo = 0.01, double hi = 1.0) {
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double x = lo + (hi - lo) * (1.0 - rng.uniform());
            w[i * n + j] = w[j * n + i] = x;
        }
    }
    return WeightedGraph::from_dense(n, std::move(w));
}

}  // namespace fairtree::testing
