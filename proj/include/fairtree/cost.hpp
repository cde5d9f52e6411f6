#pragma once

#include "fairtree/graph.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

/// cost_T(u, v) = w(u, v) · n_T(u∧v).
double edge_cost(const HierarchyTree& t, const WeightedGraph& g, VertexId u, VertexId v);

/// Dasgupta cost. Sums, over internal nodes, the weight cut between distinct
/// children times the cluster size; rows are reduced with the SIMD kernels.
double dasgupta_cost(const HierarchyTree& t, const WeightedGraph& g);

/// Same quantity as a plain per-pair sum of edge_cost. Quadratic lca walks;
/// kept as an independent reference.
double dasgupta_cost_by_pairs(const HierarchyTree& t, const WeightedGraph& g);

/// cost(after) / cost(before). Throws when the baseline cost is zero.
double ratio_cost(const WeightedGraph& g, const HierarchyTree& before, const HierarchyTree& after);

}  // namespace fairtree
