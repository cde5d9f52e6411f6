#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fairtree/graph.hpp"
#include "fairtree/ops.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

/// Visits every binary tree on leaves 0..n-1 exactly once ((2n-3)!! trees).
/// Built by inserting leaf i above each node of every tree on i leaves.
void for_each_binary_tree(std::size_t n, const std::function<void(const HierarchyTree&)>& visit);

/// All binary trees on n leaves, 2 <= n <= 8, in enumeration order.
std::vector<HierarchyTree> enumerate_binary_trees(std::size_t n);

/// Cost evaluated straight from the definition: for every pair, the size of
/// the smallest cluster containing both, found by walking parent links.
double brute_force_cost(const HierarchyTree& t, const WeightedGraph& g);

struct OptimalTree {
    double cost = 0.0;
    HierarchyTree tree;
};

/// Minimum cost over all binary trees (n <= 8); the first minimiser in
/// enumeration order wins ties.
OptimalTree optimal_cost(const WeightedGraph& g);

struct LedgerVerification {
    bool ok = true;
    std::size_t entries_checked = 0;
    long first_bad_entry = -1;  // -1 when the discrepancy is not tied to an entry
    std::vector<std::string> discrepancies;
};

/// Replays every entry from `before`, recomputes separated pairs by leaf-set
/// comparison and checks: the ledger's sets, ratio <= declared bound on
/// positive-weight separated pairs, non-separated costs non-increasing, and
/// that the replay starts at `before` and ends at `after`.
LedgerVerification verify_ledger(const HierarchyTree& before, const HierarchyTree& after, const WeightedGraph& g,
                                 const OperationLedger& ledger);

/// Same checks for a ledger read back from text, where only the number of
/// separated pairs per entry is known.
LedgerVerification verify_exported_ledger(const HierarchyTree& before, const HierarchyTree& after,
                                          const WeightedGraph& g, std::span<const LedgerLine> lines);

/// Same arena, node for node (ids, parents, child order, labels).
bool identical_trees(const HierarchyTree& a, const HierarchyTree& b);

}  // namespace fairtree
