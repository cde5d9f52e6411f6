#include "fairtree/ops.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fairtree {

namespace {

struct Separation {
    std::vector<VertexPair> pairs;
    double max_ratio = 0.0;
};

std::vector<NodeId> subtree_nodes(const HierarchyTree& t, NodeId x) {
    std::vector<NodeId> order;
    std::vector<NodeId> stack{x};
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        order.push_back(v);
        const auto kids = t.children(v);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
    }
    return order;
}

// Calls f(w, a, b) for every pair of leaves (a, b) whose lca is the internal node w of T[x].
template <class F>
void for_each_lca_pair(const HierarchyTree& t, const std::vector<NodeId>& nodes, F&& f) {
    for (NodeId w : nodes) {
        if (t.is_leaf(w)) continue;
        const auto kids = t.children(w);
        for (std::size_t i = 0; i < kids.size(); ++i) {
            const auto mi = t.members(kids[i]);
            for (std::size_t j = i + 1; j < kids.size(); ++j) {
                const auto mj = t.members(kids[j]);
                for (VertexId a : mi)
                    for (VertexId b : mj) f(w, a, b);
            }
        }
    }
}

// Pairs inside T_before[x] = T_after[y] (as leaf sets) that the rewrite separated.
// Pairs with an endpoint outside keep their lca, so they never need checking.
Separation separated_within(const HierarchyTree& before, NodeId x, const HierarchyTree& after, NodeId y) {
    const auto scope = before.members(x);
    const std::size_t s = scope.size();
    if (after.size(y) != s) throw std::logic_error("separation scope differs between trees");
    std::vector<std::int32_t> pos(before.num_leaves(), -1);
    for (std::size_t i = 0; i < s; ++i) pos[static_cast<std::size_t>(scope[i])] = static_cast<std::int32_t>(i);
    for (VertexId a : after.members(y)) {
        if (pos[static_cast<std::size_t>(a)] < 0) throw std::logic_error("separation scope differs between trees");
    }

    std::vector<NodeId> lca_before(s * s, kNoNode);
    for_each_lca_pair(before, subtree_nodes(before, x), [&](NodeId w, VertexId a, VertexId b) {
        const auto i = static_cast<std::size_t>(pos[static_cast<std::size_t>(a)]);
        const auto j = static_cast<std::size_t>(pos[static_cast<std::size_t>(b)]);
        lca_before[i * s + j] = w;
        lca_before[j * s + i] = w;
    });

    // hull[w'] = before-lca of the leaves of after-node w'.
    const auto after_nodes = subtree_nodes(after, y);
    std::vector<NodeId> hull(after.capacity(), kNoNode);
    for (auto it = after_nodes.rbegin(); it != after_nodes.rend(); ++it) {
        const NodeId w = *it;
        if (after.is_leaf(w)) {
            hull[static_cast<std::size_t>(w)] = before.leaf_node(after.leaf_label(w));
            continue;
        }
        NodeId h = kNoNode;
        for (NodeId c : after.children(w)) {
            const NodeId hc = hull[static_cast<std::size_t>(c)];
            h = h == kNoNode ? hc : before.lca_nodes(h, hc);
        }
        hull[static_cast<std::size_t>(w)] = h;
    }

    Separation out;
    for_each_lca_pair(after, after_nodes, [&](NodeId w, VertexId a, VertexId b) {
        const auto i = static_cast<std::size_t>(pos[static_cast<std::size_t>(a)]);
        const auto j = static_cast<std::size_t>(pos[static_cast<std::size_t>(b)]);
        const NodeId z = lca_before[i * s + j];
        if (before.is_ancestor(z, hull[static_cast<std::size_t>(w)])) return;
        out.pairs.emplace_back(std::min(a, b), std::max(a, b));
        out.max_ratio = std::max(out.max_ratio, static_cast<double>(after.size(w)) / static_cast<double>(before.size(z)));
    });
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

void require_node(const HierarchyTree& t, NodeId v, const char* what) {
    if (!t.contains(v)) throw TreeError(std::string("unknown node id for ") + what + ": " + std::to_string(v));
}

double ratio(std::size_t a, std::size_t b) { return static_cast<double>(a) / static_cast<double>(b); }

Rewrite finish_rewrite(const HierarchyTree& before, NodeId x, HierarchyTree after, NodeId y, LedgerEntry e) {
    auto sep = separated_within(before, x, after, y);
    e.separated = std::move(sep.pairs);
    e.observed_max_ratio = sep.max_ratio;
    return {std::move(after), std::move(e)};
}

Rewrite identity(const HierarchyTree& t, LedgerEntry e) {
    e.declared_bound = 1.0;
    return {t, std::move(e)};
}

Rewrite contract_marked(const HierarchyTree& t, NodeId scope, const std::vector<char>& mark, LedgerEntry e) {
    const auto nodes = subtree_nodes(t, scope);
    std::vector<NodeId> survivor(t.capacity(), kNoNode);
    double delta = 1.0;
    bool any = false;
    for (NodeId x : nodes) {
        const auto xi = static_cast<std::size_t>(x);
        if (x == scope || !mark[xi]) {
            survivor[xi] = x;
            continue;
        }
        const NodeId up = survivor[static_cast<std::size_t>(t.parent(x))];
        survivor[xi] = up;
        delta = std::max(delta, ratio(t.size(up), t.size(x)));
        any = true;
    }
    if (!any) return identity(t, std::move(e));

    TreeBuilder b(t);
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        if (*it != scope && mark[static_cast<std::size_t>(*it)]) b.contract(*it);
    }
    e.declared_bound = delta;
    return finish_rewrite(t, scope, std::move(b).finish(), scope, std::move(e));
}

bool skeleton_map(const HierarchyTree& t, NodeId a, NodeId b, std::vector<std::pair<NodeId, NodeId>>* out) {
    std::vector<std::pair<NodeId, NodeId>> stack{{a, b}};
    std::vector<NodeId> ia, ib;
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        if (out) out->emplace_back(x, y);
        ia.clear();
        ib.clear();
        for (NodeId c : t.children(x))
            if (!t.is_leaf(c)) ia.push_back(c);
        for (NodeId c : t.children(y))
            if (!t.is_leaf(c)) ib.push_back(c);
        if (ia.size() != ib.size()) return false;
        for (std::size_t i = ia.size(); i-- > 0;) stack.emplace_back(ia[i], ib[i]);
    }
    return true;
}

}  // namespace

std::string_view to_string(OpKind k) {
    switch (k) {
        case OpKind::rebalance: return "rebalance";
        case OpKind::del_ins: return "del_ins";
        case OpKind::abstract: return "abstract";
        case OpKind::fold: return "fold";
    }
    return "?";
}

Rewrite tree_rebalance(const HierarchyTree& t, NodeId u, NodeId v) {
    require_node(t, u, "u");
    require_node(t, v, "v");
    if (t.is_leaf(v) || t.children(v).size() != 2) throw TreeError("tree_rebalance needs v with exactly two children");
    if (u == v || !t.is_ancestor(v, u)) throw TreeError("tree_rebalance needs u strictly below v");
    if (t.parent(u) == v) throw TreeError("u is already a child of v");

    const NodeId q = t.parent(u);
    LedgerEntry e;
    e.kind = OpKind::rebalance;
    e.params.u = u;
    e.params.v = v;
    e.declared_bound = ratio(t.size(v), t.size(q));

    TreeBuilder b(t);
    b.detach(u);
    b.contract_if_unary(q);
    const NodeId c = b.add_internal(b.at(v).children);
    b.set_children(v, {u, c});
    return finish_rewrite(t, v, std::move(b).finish(), v, std::move(e));
}

Rewrite del_ins(const HierarchyTree& t, NodeId u, NodeId v) {
    require_node(t, u, "u");
    require_node(t, v, "v");
    if (u == t.root()) throw TreeError("del_ins cannot move the root");
    if (u == v) throw TreeError("del_ins needs u != v");
    if (t.is_ancestor(v, u)) throw TreeError("del_ins: v is an ancestor of u");
    if (t.is_ancestor(u, v)) throw TreeError("del_ins: v lies inside T[u]");
    if (v == t.root()) throw TreeError("del_ins cannot insert above the root");

    const NodeId q = t.parent(u);
    const NodeId w = t.lca_nodes(u, v);
    const NodeId g = t.parent(v);
    LedgerEntry e;
    e.kind = OpKind::del_ins;
    e.params.u = u;
    e.params.v = v;
    e.declared_bound = ratio(t.size(w), t.size(q));
    // Nodes strictly between v and u∧v gain T[u]; the tightest is v's parent.
    if (g != w) e.declared_bound = std::max(e.declared_bound, ratio(t.size(g) + t.size(u), t.size(g)));

    TreeBuilder b(t);
    b.detach(u);
    // When q disappears its last child takes its place; if q was u∧v that
    // child (or p, when it is v itself) carries the scope's leaves afterwards.
    const NodeId survivor = b.at(q).children.size() == 1 ? b.at(q).children.front() : kNoNode;
    const bool q_gone = b.contract_if_unary(q);
    if (b.at(v).parent == kNoNode) throw TreeError("del_ins: v would become the root");
    const NodeId p = b.add_internal({});
    b.replace_in_parent(v, p);
    b.set_children(p, {v, u});
    NodeId after_scope = w;
    if (q_gone && q == w) after_scope = survivor == v ? p : survivor;
    return finish_rewrite(t, w, std::move(b).finish(), after_scope, std::move(e));
}

Rewrite abstract_levels(const HierarchyTree& t, std::size_t d1, std::size_t d2, NodeId scope) {
    if (d1 >= d2) throw std::invalid_argument("abstract needs d1 < d2");
    if (scope == kNoNode) scope = t.root();
    require_node(t, scope, "scope");
    LedgerEntry e;
    e.kind = OpKind::abstract;
    e.params.d1 = d1;
    e.params.d2 = d2;
    e.params.scope = scope;
    std::vector<char> mark(t.capacity(), 0);
    const std::size_t base = t.depth(scope);
    for (NodeId x : subtree_nodes(t, scope)) {
        const std::size_t d = t.depth(x) - base;
        if (!t.is_leaf(x) && d >= d1 + 1 && d <= d2) mark[static_cast<std::size_t>(x)] = 1;
    }
    return contract_marked(t, scope, mark, std::move(e));
}

Rewrite abstract_below_size(const HierarchyTree& t, std::size_t threshold, NodeId scope) {
    if (threshold == 0) throw std::invalid_argument("size threshold must be positive");
    if (scope == kNoNode) scope = t.root();
    require_node(t, scope, "scope");
    LedgerEntry e;
    e.kind = OpKind::abstract;
    e.params.size_threshold = threshold;
    e.params.scope = scope;
    std::vector<char> mark(t.capacity(), 0);
    for (NodeId x : subtree_nodes(t, scope)) {
        if (!t.is_leaf(x) && t.size(x) < threshold) mark[static_cast<std::size_t>(x)] = 1;
    }
    return contract_marked(t, scope, mark, std::move(e));
}

bool same_skeleton(const HierarchyTree& t, NodeId a, NodeId b) {
    require_node(t, a, "a");
    require_node(t, b, "b");
    if (t.is_leaf(a) || t.is_leaf(b)) return t.is_leaf(a) == t.is_leaf(b);
    return skeleton_map(t, a, b, nullptr);
}

Rewrite fold(const HierarchyTree& t, std::span<const NodeId> roots) {
    if (roots.empty()) throw std::invalid_argument("fold needs at least one root");
    for (NodeId r : roots) {
        require_node(t, r, "fold root");
        if (t.is_leaf(r)) throw TreeError("fold roots must be internal nodes");
    }
    const NodeId p = t.parent(roots.front());
    if (p == kNoNode) throw TreeError("fold roots need a parent");
    for (NodeId r : roots) {
        if (t.parent(r) != p) throw TreeError("fold roots must share one parent");
    }
    {
        std::vector<NodeId> sorted(roots.begin(), roots.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw TreeError("fold roots must be distinct");
    }
    LedgerEntry e;
    e.kind = OpKind::fold;
    e.params.roots.assign(roots.begin(), roots.end());
    const std::size_t k = roots.size();
    if (k == 1) return identity(t, std::move(e));

    const NodeId target = roots.back();
    std::vector<std::vector<std::pair<NodeId, NodeId>>> maps(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        if (!skeleton_map(t, roots[i], target, &maps[i])) throw TreeError("fold roots have different internal topology");
    }

    // Position j of every map refers to the same target node (same traversal).
    double worst = 1.0;
    const std::size_t positions = maps.front().size();
    for (std::size_t j = 0; j < positions; ++j) {
        std::size_t lo = t.size(maps.front()[j].second);
        std::size_t hi = lo;
        for (const auto& m : maps) {
            lo = std::min(lo, t.size(m[j].first));
            hi = std::max(hi, t.size(m[j].first));
        }
        worst = std::max(worst, ratio(hi, lo));
    }
    e.declared_bound = static_cast<double>(k) * worst;

    TreeBuilder b(t);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        b.detach(roots[i]);
        for (const auto& [x, y] : maps[i]) {
            for (NodeId c : t.children(x)) {
                if (!t.is_leaf(c)) continue;
                b.at(y).children.push_back(c);
                b.at(c).parent = y;
            }
            auto& nx = b.at(x);
            nx.children.clear();
            nx.parent = kNoNode;
            nx.alive = false;
        }
    }
    if (b.at(p).children.size() == 1) b.contract(target);
    return finish_rewrite(t, p, std::move(b).finish(), p, std::move(e));
}

std::vector<VertexPair> separated_edges(const HierarchyTree& before, const HierarchyTree& after, const WeightedGraph& g) {
    if (before.num_leaves() != g.size() || after.num_leaves() != g.size()) {
        throw std::invalid_argument("trees and graph disagree on the vertex count");
    }
    return separated_within(before, before.root(), after, after.root()).pairs;
}

HierarchyTree apply_entry(const HierarchyTree& t, const LedgerEntry& e) {
    if (e.skipped) return t;
    const auto& p = e.params;
    switch (e.kind) {
        case OpKind::rebalance: return tree_rebalance(t, p.u, p.v).tree;
        case OpKind::del_ins: return del_ins(t, p.u, p.v).tree;
        case OpKind::abstract:
            return p.size_threshold > 0 ? abstract_below_size(t, p.size_threshold, p.scope).tree
                                        : abstract_levels(t, p.d1, p.d2, p.scope).tree;
        case OpKind::fold: return fold(t, p.roots).tree;
    }
    throw std::logic_error("unknown operator kind");
}

OperationLedger::OperationLedger(const HierarchyTree& initial)
    : n_(initial.num_leaves()), initial_(initial), current_(initial) {
    for (auto& c : counts_) c.assign(n_ * n_, 0);
    bound_.assign(n_ * n_, 1.0);
}

std::size_t OperationLedger::index(VertexId u, VertexId v) const {
    if (u == v) throw std::invalid_argument("pair needs two distinct vertices");
    if (u > v) std::swap(u, v);
    if (u < 0 || static_cast<std::size_t>(v) >= n_) throw std::out_of_range("vertex outside ledger");
    return static_cast<std::size_t>(u) * n_ + static_cast<std::size_t>(v);
}

void OperationLedger::tally(const LedgerEntry& e) {
    auto& counts = counts_[static_cast<std::size_t>(e.kind)];
    for (const auto& [a, b] : e.separated) {
        const auto i = index(a, b);
        if (counts[i] < std::numeric_limits<std::uint16_t>::max()) ++counts[i];
        bound_[i] *= e.declared_bound;
    }
}

const HierarchyTree& OperationLedger::record(Rewrite rw) {
    if (rw.tree.num_leaves() != n_) throw std::invalid_argument("rewrite changes the vertex count");
    tally(rw.entry);
    entries_.push_back(std::move(rw.entry));
    current_ = std::move(rw.tree);
    return current_;
}

void OperationLedger::record_skipped(LedgerEntry e) {
    e.skipped = true;
    e.separated.clear();
    e.declared_bound = 1.0;
    e.observed_max_ratio = 0.0;
    entries_.push_back(std::move(e));
}

void OperationLedger::append(const OperationLedger& later) {
    if (later.n_ != n_) throw std::invalid_argument("ledgers cover different vertex sets");
    for (const auto& e : later.entries_) {
        tally(e);
        entries_.push_back(e);
    }
    current_ = later.current_;
}

std::uint16_t OperationLedger::separation_count(OpKind k, VertexId u, VertexId v) const {
    return counts_[static_cast<std::size_t>(k)][index(u, v)];
}

std::uint16_t OperationLedger::max_separation_count(OpKind k) const {
    const auto& c = counts_[static_cast<std::size_t>(k)];
    return c.empty() ? 0 : *std::max_element(c.begin(), c.end());
}

double OperationLedger::pair_bound(VertexId u, VertexId v) const { return bound_[index(u, v)]; }

double OperationLedger::certified_ceiling(const WeightedGraph& g) const {
    if (g.size() != n_) throw std::invalid_argument("graph and ledger disagree on the vertex count");
    double best = 1.0;
    for (std::size_t u = 0; u < n_; ++u) {
        for (std::size_t v = u + 1; v < n_; ++v) {
            if (g.weight(static_cast<VertexId>(u), static_cast<VertexId>(v)) > 0.0) best = std::max(best, bound_[u * n_ + v]);
        }
    }
    return best;
}

std::size_t OperationLedger::count(OpKind k, bool include_skipped) const {
    return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [&](const LedgerEntry& e) {
        return e.kind == k && (include_skipped || !e.skipped);
    }));
}

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string fmt_exact(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_ledger(std::ostream& out, const OperationLedger& ledger) {
    std::size_t i = 0;
    for (const auto& e : ledger.entries()) {
        out << i++ << ' ' << to_string(e.kind) << ' ';
        const auto& p = e.params;
        switch (e.kind) {
            case OpKind::rebalance:
            case OpKind::del_ins: out << "u=" << p.u << " v=" << p.v; break;
            case OpKind::abstract:
                if (p.size_threshold > 0) out << "size<" << p.size_threshold;
                else out << "d1=" << p.d1 << " d2=" << p.d2;
                out << " scope=" << p.scope;
                break;
            case OpKind::fold:
                out << "roots=";
                for (std::size_t j = 0; j < p.roots.size(); ++j) out << (j ? "," : "") << p.roots[j];
                break;
        }
        out << " separated=" << e.separated.size() << " declared=" << fmt_exact(e.declared_bound)
            << " observed=" << fmt_exact(e.observed_max_ratio);
        if (e.skipped) out << " skipped";
        out << '\n';
    }
}

namespace {

OpKind kind_from(std::string_view word, std::size_t line) {
    for (OpKind k : {OpKind::rebalance, OpKind::del_ins, OpKind::abstract, OpKind::fold}) {
        if (word == to_string(k)) return k;
    }
    throw ParseError("ledger line " + std::to_string(line) + ": unknown operator '" + std::string(word) + "'");
}

template <class T>
T number_from(std::string_view text, std::size_t line) {
    T v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError("ledger line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
    }
    return v;
}

}  // namespace

std::vector<LedgerLine> read_ledger(std::istream& in) {
    std::vector<LedgerLine> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.empty() || text[0] == '#') continue;
        std::istringstream words(text);
        std::string index;
        std::string kind;
        if (!(words >> index >> kind)) throw ParseError("ledger line " + std::to_string(line) + ": truncated");
        if (number_from<std::size_t>(index, line) != out.size()) {
            throw ParseError("ledger line " + std::to_string(line) + ": entries out of order");
        }
        LedgerLine rec;
        rec.entry.kind = kind_from(kind, line);
        auto& p = rec.entry.params;
        bool have_sep = false;
        bool have_declared = false;
        for (std::string w; words >> w;) {
            if (w == "skipped") {
                rec.entry.skipped = true;
                continue;
            }
            if (w.starts_with("size<")) {
                p.size_threshold = number_from<std::size_t>(std::string_view(w).substr(5), line);
                continue;
            }
            const auto eq = w.find('=');
            if (eq == std::string::npos) throw ParseError("ledger line " + std::to_string(line) + ": stray word '" + w + "'");
            const std::string_view key = std::string_view(w).substr(0, eq);
            const std::string_view val = std::string_view(w).substr(eq + 1);
            if (key == "u") p.u = number_from<NodeId>(val, line);
            else if (key == "v") p.v = number_from<NodeId>(val, line);
            else if (key == "d1") p.d1 = number_from<std::size_t>(val, line);
            else if (key == "d2") p.d2 = number_from<std::size_t>(val, line);
            else if (key == "scope") p.scope = number_from<NodeId>(val, line);
            else if (key == "roots") {
                for (std::size_t a = 0; a < val.size();) {
                    auto b = val.find(',', a);
                    if (b == std::string_view::npos) b = val.size();
                    p.roots.push_back(number_from<NodeId>(val.substr(a, b - a), line));
                    a = b + 1;
                }
            } else if (key == "separated") {
                rec.separated_count = number_from<std::size_t>(val, line);
                have_sep = true;
            } else if (key == "declared") {
                rec.entry.declared_bound = number_from<double>(val, line);
                have_declared = true;
            } else if (key == "observed") {
                rec.entry.observed_max_ratio = number_from<double>(val, line);
            } else {
                throw ParseError("ledger line " + std::to_string(line) + ": unknown field '" + std::string(key) + "'");
            }
        }
        if (!have_sep || !have_declared) {
            throw ParseError("ledger line " + std::to_string(line) + ": missing separated= or declared=");
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace fairtree
