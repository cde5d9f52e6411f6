#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairtree/graph.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

enum class OpKind { rebalance, del_ins, abstract, fold };
inline constexpr std::size_t kNumOpKinds = 4;

std::string_view to_string(OpKind k);

/// Operator arguments; only the fields relevant to the kind are meaningful.
struct OpParams {
    NodeId u = kNoNode;
    NodeId v = kNoNode;
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    std::size_t size_threshold = 0;  // abstract by size instead of depth when > 0
    NodeId scope = kNoNode;          // abstract: subtree whose depths are used
    std::vector<NodeId> roots;       // fold
};

using VertexPair = std::pair<VertexId, VertexId>;

struct LedgerEntry {
    OpKind kind = OpKind::rebalance;
    OpParams params;
    std::vector<VertexPair> separated;  // sorted, first < second
    double declared_bound = 1.0;
    // max over separated pairs of n_after(lca') / n_before(lca); this is the
    // edge-cost ratio for every positive weight.
    double observed_max_ratio = 0.0;
    bool skipped = false;  // recorded for bookkeeping, tree unchanged
};

struct Rewrite {
    HierarchyTree tree;
    LedgerEntry entry;
};

/// Hoists T[u] to be a child of v; v's former children go under a new node.
Rewrite tree_rebalance(const HierarchyTree& t, NodeId u, NodeId v);

/// Removes T[u] and re-attaches it next to v under a new parent.
Rewrite del_ins(const HierarchyTree& t, NodeId u, NodeId v);

/// Contracts every internal node of T[scope] whose depth below scope lies in
/// [d1 + 1, d2]. scope defaults to the root.
Rewrite abstract_levels(const HierarchyTree& t, std::size_t d1, std::size_t d2, NodeId scope = kNoNode);

/// Contracts every internal node of T[scope] other than scope with fewer than
/// `threshold` leaves.
Rewrite abstract_below_size(const HierarchyTree& t, std::size_t threshold, NodeId scope = kNoNode);

/// Merges sibling subtrees with equal ordered internal skeletons into the
/// last one. If the parent is left with a single child, that child is
/// contracted into it.
Rewrite fold(const HierarchyTree& t, std::span<const NodeId> roots);

/// True when the internal nodes of T[a] and T[b] (leaf children ignored) have
/// the same ordered shape.
bool same_skeleton(const HierarchyTree& t, NodeId a, NodeId b);

/// Pairs whose before-lca cluster does not contain the after-lca cluster.
std::vector<VertexPair> separated_edges(const HierarchyTree& before, const HierarchyTree& after,
                                        const WeightedGraph& g);

/// Re-applies a recorded entry (used to replay a ledger).
HierarchyTree apply_entry(const HierarchyTree& t, const LedgerEntry& e);

/// Audit trail of one rewriting session: entries in order, per-kind
/// separation counts and the per-pair product of declared bounds.
class OperationLedger {
public:
    OperationLedger() = default;
    explicit OperationLedger(const HierarchyTree& initial);

    /// Appends an entry produced against the current tree and advances to
    /// the rewritten tree. Returns the new current tree.
    const HierarchyTree& record(Rewrite rw);

    /// Records a skipped step (tree unchanged).
    void record_skipped(LedgerEntry e);

    /// Appends a later session whose initial tree is this ledger's current one.
    void append(const OperationLedger& later);

    std::size_t num_vertices() const { return n_; }
    const HierarchyTree& initial() const { return initial_; }
    const HierarchyTree& current() const { return current_; }
    const std::vector<LedgerEntry>& entries() const { return entries_; }

    std::uint16_t separation_count(OpKind k, VertexId u, VertexId v) const;
    std::uint16_t max_separation_count(OpKind k) const;

    /// Product of declared bounds over the entries that separated (u, v).
    double pair_bound(VertexId u, VertexId v) const;

    /// Max pair_bound over positive-weight pairs: the cost ratio of current()
    /// against initial() cannot exceed it.
    double certified_ceiling(const WeightedGraph& g) const;

    std::size_t count(OpKind k, bool include_skipped = false) const;

private:
    std::size_t index(VertexId u, VertexId v) const;
    void tally(const LedgerEntry& e);

    std::size_t n_ = 0;
    HierarchyTree initial_;
    HierarchyTree current_;
    std::vector<LedgerEntry> entries_;
    std::array<std::vector<std::uint16_t>, kNumOpKinds> counts_;
    std::vector<double> bound_;
};

/// One line per entry: index, kind, params, |separated|, declared, observed.
void write_ledger(std::ostream& out, const OperationLedger& ledger);

/// An entry read back from write_ledger output. Only the number of
/// separated pairs is exported, not the pairs themselves.
struct LedgerLine {
    LedgerEntry entry;
    std::size_t separated_count = 0;
};

/// Parses write_ledger output; '#' lines are ignored. Throws ParseError.
std::vector<LedgerLine> read_ledger(std::istream& in);

/// printf("%.6g") for stable report output.
std::string fmt6(double x);

/// printf("%.17g"): round-trips through read_ledger.
std::string fmt_exact(double x);

}  // namespace fairtree
