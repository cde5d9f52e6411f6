#pragma once

#include "fairtree/ops.hpp"
#include "fairtree/rational.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

struct BalanceParams {
    Fraction eps{1, 8};  // must lie in (0, 1/6)

    /// Smallest cluster size the balance condition applies to: ⌈1/(2ε)⌉.
    std::size_t small_cluster_gate() const;
};

struct BalanceResult {
    HierarchyTree tree;
    OperationLedger ledger;
};

/// Makes a binary tree 1/6-relatively balanced using tree_rebalance only.
/// At each node with size m whose split falls outside [m/3, 2m/3], walks down
/// the larger child until the first node of size <= 2m/3 and hoists it.
BalanceResult rebalance_tree(const HierarchyTree& t);

/// Descends from r into the largest child while the size exceeds m and
/// returns the first node with at most m leaves. Requires 1 <= m < n_T(r).
NodeId subtree_search(const HierarchyTree& t, NodeId r, std::size_t m);

/// Tightens a 1/6-balanced tree to ε-relative balance with del_ins moves:
/// at each gated node, pieces of the larger side are moved next to the
/// smaller child until the larger side is within (1/2 + ε). Pieces whose
/// move would split an already separated pair are avoided while any other
/// piece fits; only when none does is the plain descent used.
BalanceResult refine_rebalance(const HierarchyTree& t, const BalanceParams& p);

}  // namespace fairtree
