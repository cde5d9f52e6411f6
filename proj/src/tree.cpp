#include "fairtree/tree.hpp"

#include <algorithm>
#include <cmath>

namespace fairtree {

HierarchyTree::HierarchyTree(std::vector<TreeNode> nodes, NodeId root) : nodes_(std::move(nodes)), root_(root) {
    const std::size_t cap = nodes_.size();
    if (!contains(root_)) throw TreeError("root is not a live node");
    if (nodes_[static_cast<std::size_t>(root_)].parent != kNoNode) throw TreeError("root has a parent");

    std::vector<char> seen(cap, 0);
    std::vector<NodeId> stack{root_};
    std::size_t leaves = 0;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        const auto& nv = nodes_[static_cast<std::size_t>(v)];
        if (seen[static_cast<std::size_t>(v)]) throw TreeError("cycle or shared node at " + std::to_string(v));
        seen[static_cast<std::size_t>(v)] = 1;
        preorder_.push_back(v);
        if (nv.leaf != kNoVertex) {
            if (!nv.children.empty()) throw TreeError("leaf node " + std::to_string(v) + " has children");
            ++leaves;
            continue;
        }
        if (nv.children.size() < 2) {
            throw TreeError("internal node " + std::to_string(v) + " has fewer than two children");
        }
        ++num_internal_;
        for (auto it = nv.children.rbegin(); it != nv.children.rend(); ++it) {
            const NodeId c = *it;
            if (!contains(c)) throw TreeError("node " + std::to_string(v) + " has a dead or unknown child");
            if (nodes_[static_cast<std::size_t>(c)].parent != v) {
                throw TreeError("parent link of node " + std::to_string(c) + " is inconsistent");
            }
            stack.push_back(c);
        }
    }
    for (std::size_t v = 0; v < cap; ++v) {
        if (nodes_[v].alive && !seen[v]) throw TreeError("node " + std::to_string(v) + " is unreachable from the root");
    }

    leaf_node_.assign(leaves, kNoNode);
    size_.assign(cap, 0);
    depth_.assign(cap, 0);
    first_leaf_.assign(cap, 0);
    leaf_order_.reserve(leaves);
    for (const NodeId v : preorder_) {
        const auto& nv = nodes_[static_cast<std::size_t>(v)];
        if (nv.parent != kNoNode) depth_[static_cast<std::size_t>(v)] = depth_[static_cast<std::size_t>(nv.parent)] + 1;
        first_leaf_[static_cast<std::size_t>(v)] = static_cast<std::uint32_t>(leaf_order_.size());
        if (nv.leaf != kNoVertex) {
            if (nv.leaf < 0 || static_cast<std::size_t>(nv.leaf) >= leaves) {
                throw TreeError("leaf labels must be exactly 0.." + std::to_string(leaves - 1));
            }
            if (leaf_node_[static_cast<std::size_t>(nv.leaf)] != kNoNode) {
                throw TreeError("leaf label " + std::to_string(nv.leaf) + " appears twice");
            }
            leaf_node_[static_cast<std::size_t>(nv.leaf)] = v;
            leaf_order_.push_back(nv.leaf);
            height_ = std::max<std::size_t>(height_, depth_[static_cast<std::size_t>(v)]);
        }
    }
    for (auto it = preorder_.rbegin(); it != preorder_.rend(); ++it) {
        const auto& nv = nodes_[static_cast<std::size_t>(*it)];
        if (nv.leaf != kNoVertex) {
            size_[static_cast<std::size_t>(*it)] = 1;
        } else {
            std::uint32_t s = 0;
            for (NodeId c : nv.children) s += size_[static_cast<std::size_t>(c)];
            size_[static_cast<std::size_t>(*it)] = s;
        }
    }
}

void HierarchyTree::check_node(NodeId v) const {
    if (!contains(v)) throw std::out_of_range("unknown node id " + std::to_string(v));
}

const TreeNode& HierarchyTree::node(NodeId v) const {
    check_node(v);
    return nodes_[static_cast<std::size_t>(v)];
}

NodeId HierarchyTree::leaf_node(VertexId u) const {
    if (u < 0 || static_cast<std::size_t>(u) >= leaf_node_.size()) {
        throw std::out_of_range("unknown vertex " + std::to_string(u));
    }
    return leaf_node_[static_cast<std::size_t>(u)];
}

std::size_t HierarchyTree::size(NodeId v) const {
    check_node(v);
    return size_[static_cast<std::size_t>(v)];
}

std::size_t HierarchyTree::depth(NodeId v) const {
    check_node(v);
    return depth_[static_cast<std::size_t>(v)];
}

std::span<const VertexId> HierarchyTree::members(NodeId v) const {
    check_node(v);
    return {leaf_order_.data() + first_leaf_[static_cast<std::size_t>(v)], size_[static_cast<std::size_t>(v)]};
}

bool HierarchyTree::is_ancestor(NodeId a, NodeId d) const {
    check_node(a);
    check_node(d);
    const auto fa = first_leaf_[static_cast<std::size_t>(a)];
    const auto fd = first_leaf_[static_cast<std::size_t>(d)];
    return depth_[static_cast<std::size_t>(a)] <= depth_[static_cast<std::size_t>(d)] && fa <= fd &&
           fd + size_[static_cast<std::size_t>(d)] <= fa + size_[static_cast<std::size_t>(a)];
}

NodeId HierarchyTree::lca_nodes(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    while (depth_[static_cast<std::size_t>(a)] > depth_[static_cast<std::size_t>(b)]) a = nodes_[static_cast<std::size_t>(a)].parent;
    while (depth_[static_cast<std::size_t>(b)] > depth_[static_cast<std::size_t>(a)]) b = nodes_[static_cast<std::size_t>(b)].parent;
    while (a != b) {
        a = nodes_[static_cast<std::size_t>(a)].parent;
        b = nodes_[static_cast<std::size_t>(b)].parent;
    }
    return a;
}

NodeId HierarchyTree::lca(VertexId u, VertexId v) const {
    if (u == v) throw std::invalid_argument("lca requires two distinct vertices");
    return lca_nodes(leaf_node(u), leaf_node(v));
}

bool HierarchyTree::is_binary() const {
    for (NodeId v : preorder_) {
        const auto& nv = nodes_[static_cast<std::size_t>(v)];
        if (nv.leaf == kNoVertex && nv.children.size() != 2) return false;
    }
    return true;
}

NodeId TreeBuilder::add_leaf(VertexId label) {
    TreeNode n;
    n.leaf = label;
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId TreeBuilder::add_internal(std::vector<NodeId> children) {
    const auto id = static_cast<NodeId>(nodes_.size());
    TreeNode n;
    n.children = std::move(children);
    nodes_.push_back(std::move(n));
    for (NodeId c : nodes_.back().children) at(c).parent = id;
    return id;
}

void TreeBuilder::detach(NodeId child) {
    const NodeId p = at(child).parent;
    if (p == kNoNode) throw TreeError("cannot detach the root");
    auto& ch = at(p).children;
    ch.erase(std::find(ch.begin(), ch.end(), child));
    at(child).parent = kNoNode;
}

void TreeBuilder::replace_in_parent(NodeId old, NodeId replacement) {
    const NodeId p = at(old).parent;
    at(old).parent = kNoNode;
    if (p == kNoNode) {
        root_ = replacement;
        at(replacement).parent = kNoNode;
        return;
    }
    auto& ch = at(p).children;
    *std::find(ch.begin(), ch.end(), old) = replacement;
    at(replacement).parent = p;
}

void TreeBuilder::contract(NodeId v) {
    const NodeId p = at(v).parent;
    if (p == kNoNode) throw TreeError("cannot contract the root");
    if (at(v).leaf != kNoVertex) throw TreeError("cannot contract a leaf");
    auto kids = std::move(at(v).children);
    at(v).children.clear();
    auto& ch = at(p).children;
    const auto pos = std::find(ch.begin(), ch.end(), v);
    const auto offset = pos - ch.begin();
    ch.erase(pos);
    ch.insert(ch.begin() + offset, kids.begin(), kids.end());
    for (NodeId c : kids) at(c).parent = p;
    at(v).alive = false;
    at(v).parent = kNoNode;
}

bool TreeBuilder::contract_if_unary(NodeId v) {
    auto& nv = at(v);
    if (nv.leaf != kNoVertex || nv.children.size() != 1) return false;
    const NodeId only = nv.children.front();
    nv.children.clear();
    replace_in_parent(v, only);
    at(v).alive = false;
    return true;
}

void TreeBuilder::set_children(NodeId v, std::vector<NodeId> children) {
    for (NodeId c : children) at(c).parent = v;
    at(v).children = std::move(children);
}

HierarchyTree TreeBuilder::finish() && { return HierarchyTree(std::move(nodes_), root_); }

std::vector<std::size_t> node_depths(const HierarchyTree& t) {
    std::vector<std::size_t> d(t.capacity(), 0);
    for (NodeId v : t.preorder()) d[static_cast<std::size_t>(v)] = t.depth(v);
    return d;
}

BalanceAudit relative_balance_audit(const HierarchyTree& t, Fraction eps) {
    if (!(eps < Fraction{1, 2})) throw std::invalid_argument("balance audit needs 0 <= eps < 1/2");
    BalanceAudit audit;
    const std::int64_t num = eps.num;
    const std::int64_t den = eps.den;
    for (NodeId p : t.preorder()) {
        if (t.is_leaf(p)) continue;
        const auto np = static_cast<std::int64_t>(t.size(p));
        if (2 * num * np < den) continue;
        const auto kids = t.children(p);
        if (kids.size() != 2) {
            audit.multiway_nodes.push_back(p);
            audit.passed = false;
            continue;
        }
        bool ok = true;
        for (NodeId c : kids) {
            const auto nc = static_cast<std::int64_t>(t.size(c));
            if (2 * den * nc < (den - 2 * num) * np || 2 * den * nc > (den + 2 * num) * np) ok = false;
            const double dev = std::abs(static_cast<double>(nc) / static_cast<double>(np) - 0.5);
            if (audit.worst_node == kNoNode || dev > audit.max_deviation) {
                audit.max_deviation = dev;
                audit.worst_node = p;
            }
        }
        if (!ok) {
            audit.violations.push_back(p);
            audit.passed = false;
        }
    }
    return audit;
}

}  // namespace fairtree
