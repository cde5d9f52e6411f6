#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairtree/graph.hpp"
#include "fairtree/rational.hpp"

namespace fairtree {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;
inline constexpr VertexId kNoVertex = -1;

class TreeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Arena slot. Dead slots keep their id so ids stay stable across rewrites.
struct TreeNode {
    NodeId parent = kNoNode;
    std::vector<NodeId> children;
    VertexId leaf = kNoVertex;
    bool alive = true;
};

/// Immutable rooted dendrogram whose leaves are the vertices 0..n-1.
/// Children are ordered; the first child plays the role of "left".
/// Query caches (sizes, depths, preorder leaf ranges) are built on construction.
class HierarchyTree {
public:
    HierarchyTree() = default;

    /// Validates the arena and builds caches. Throws TreeError on any
    /// structural violation (cycles, unreachable nodes, internal nodes with
    /// fewer than two children, leaf labels not a permutation of 0..n-1).
    HierarchyTree(std::vector<TreeNode> nodes, NodeId root);

    std::size_t num_leaves() const { return leaf_order_.size(); }
    std::size_t capacity() const { return nodes_.size(); }
    std::size_t num_internal() const { return num_internal_; }
    NodeId root() const { return root_; }
    std::size_t height() const { return height_; }

    bool contains(NodeId v) const {
        return v >= 0 && static_cast<std::size_t>(v) < nodes_.size() && nodes_[static_cast<std::size_t>(v)].alive;
    }
    const TreeNode& node(NodeId v) const;
    NodeId parent(NodeId v) const { return node(v).parent; }
    std::span<const NodeId> children(NodeId v) const { return node(v).children; }
    bool is_leaf(NodeId v) const { return node(v).leaf != kNoVertex; }
    VertexId leaf_label(NodeId v) const { return node(v).leaf; }
    NodeId leaf_node(VertexId u) const;

    /// n_T(v): number of leaves below v.
    std::size_t size(NodeId v) const;
    std::size_t depth(NodeId v) const;

    /// Leaves of T[v] in preorder.
    std::span<const VertexId> members(NodeId v) const;

    /// True when a == d or a is an ancestor of d.
    bool is_ancestor(NodeId a, NodeId d) const;

    NodeId lca_nodes(NodeId a, NodeId b) const;

    /// u∧v for two distinct vertices.
    NodeId lca(VertexId u, VertexId v) const;

    /// Live nodes in preorder (root first).
    const std::vector<NodeId>& preorder() const { return preorder_; }

    const std::vector<TreeNode>& arena() const { return nodes_; }

    bool is_binary() const;

private:
    void check_node(NodeId v) const;

    std::vector<TreeNode> nodes_;
    NodeId root_ = kNoNode;
    std::size_t height_ = 0;
    std::size_t num_internal_ = 0;
    std::vector<std::uint32_t> size_;
    std::vector<std::uint32_t> depth_;
    std::vector<std::uint32_t> first_leaf_;  // offset into leaf_order_
    std::vector<NodeId> leaf_node_;
    std::vector<VertexId> leaf_order_;
    std::vector<NodeId> preorder_;
};

/// Mutable arena used to assemble or rewrite trees. finish() validates.
class TreeBuilder {
public:
    TreeBuilder() = default;
    explicit TreeBuilder(const HierarchyTree& t) : nodes_(t.arena()), root_(t.root()) {}

    NodeId add_leaf(VertexId label);
    NodeId add_internal(std::vector<NodeId> children);

    void set_root(NodeId r) { root_ = r; }
    NodeId root() const { return root_; }
    TreeNode& at(NodeId v) { return nodes_.at(static_cast<std::size_t>(v)); }
    const TreeNode& at(NodeId v) const { return nodes_.at(static_cast<std::size_t>(v)); }

    /// Removes child from its parent's child list; the child keeps its subtree.
    void detach(NodeId child);

    /// Puts replacement where old sits in old's parent (or as root).
    void replace_in_parent(NodeId old, NodeId replacement);

    /// Removes an internal non-root node, splicing its children into the
    /// parent's list at its position.
    void contract(NodeId v);

    /// If v has exactly one child, contracts v away (the child takes its place,
    /// or becomes the root). Returns true when something changed.
    bool contract_if_unary(NodeId v);

    void set_children(NodeId v, std::vector<NodeId> children);

    HierarchyTree finish() &&;

private:
    std::vector<TreeNode> nodes_;
    NodeId root_ = kNoNode;
};

/// n_T(v) for a node of t.
inline std::size_t cluster_size(const HierarchyTree& t, NodeId v) { return t.size(v); }

/// Root depth 0; the result is indexed by node id (dead slots hold 0).
std::vector<std::size_t> node_depths(const HierarchyTree& t);

struct BalanceAudit {
    bool passed = true;
    double max_deviation = 0.0;             // max |child/parent - 1/2| over checked binary nodes
    NodeId worst_node = kNoNode;            // node attaining max_deviation
    std::vector<NodeId> violations;         // binary nodes outside the band
    std::vector<NodeId> multiway_nodes;     // gated nodes with more than two children (fail)
};

/// Relative balance: every node C_p with 2ε|C_p| >= 1 must split into two
/// children each within [(1/2-ε)|C_p|, (1/2+ε)|C_p|]. Comparisons are exact.
BalanceAudit relative_balance_audit(const HierarchyTree& t, Fraction eps);

}  // namespace fairtree
