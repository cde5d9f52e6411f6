#pragma once

#include "fairtree/graph.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

/// Agglomerative average linkage on similarities: repeatedly merges the two
/// clusters with the largest mean inter-cluster weight. Ties go to the pair
/// whose smaller min-vertex-id is smallest, then to the smaller partner.
/// Leaves get node ids 0..n-1; merge i creates node n+i with the lower-id
/// cluster as first child.
HierarchyTree build_average_linkage(const WeightedGraph& g);

}  // namespace fairtree
