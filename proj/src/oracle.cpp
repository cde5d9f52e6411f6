#include "fairtree/oracle.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace fairtree {

namespace {

struct Shape {
    std::size_t n = 0;
    std::vector<NodeId> parent;                  // by node id; leaves are 0..n-1
    std::vector<std::array<NodeId, 2>> kids;     // internal node n+i at index i
    NodeId root = 0;
};

HierarchyTree to_tree(const Shape& s, std::size_t leaves) {
    TreeBuilder b;
    for (std::size_t v = 0; v < leaves; ++v) b.add_leaf(static_cast<VertexId>(v));
    // Internal nodes may reference later internals; create them first, wire after.
    for (std::size_t i = 0; i < s.kids.size(); ++i) b.add_internal({});
    for (std::size_t i = 0; i < s.kids.size(); ++i) {
        b.set_children(static_cast<NodeId>(leaves + i), {s.kids[i][0], s.kids[i][1]});
    }
    b.set_root(s.root);
    return std::move(b).finish();
}

void grow(Shape& s, std::size_t next_leaf, std::size_t n, const std::function<void(const HierarchyTree&)>& visit) {
    if (next_leaf == n) {
        visit(to_tree(s, n));
        return;
    }
    // Current nodes: leaves 0..next_leaf-1 and internals n..n+kids-1.
    std::vector<NodeId> targets;
    for (std::size_t v = 0; v < next_leaf; ++v) targets.push_back(static_cast<NodeId>(v));
    for (std::size_t i = 0; i < s.kids.size(); ++i) targets.push_back(static_cast<NodeId>(n + i));
    const auto leaf = static_cast<NodeId>(next_leaf);
    for (NodeId x : targets) {
        const auto y = static_cast<NodeId>(n + s.kids.size());
        const NodeId px = s.parent[static_cast<std::size_t>(x)];
        const NodeId old_root = s.root;
        s.kids.push_back({x, leaf});
        s.parent[static_cast<std::size_t>(x)] = y;
        s.parent[static_cast<std::size_t>(leaf)] = y;
        s.parent[static_cast<std::size_t>(y)] = px;
        std::size_t slot = 0;
        if (px == kNoNode) {
            s.root = y;
        } else {
            auto& pk = s.kids[static_cast<std::size_t>(px) - n];
            slot = pk[0] == x ? 0 : 1;
            pk[slot] = y;
        }
        grow(s, next_leaf + 1, n, visit);
        if (px == kNoNode) s.root = old_root;
        else s.kids[static_cast<std::size_t>(px) - n][slot] = x;
        s.parent[static_cast<std::size_t>(x)] = px;
        s.parent[static_cast<std::size_t>(leaf)] = kNoNode;
        s.parent[static_cast<std::size_t>(y)] = kNoNode;
        s.kids.pop_back();
    }
}

void check_range(std::size_t n) {
    if (n < 2 || n > 8) throw std::out_of_range("tree enumeration supports 2 <= n <= 8, got " + std::to_string(n));
}

// Smallest cluster containing both leaves, via explicit ancestor lists.
NodeId walk_lca(const HierarchyTree& t, VertexId u, VertexId v) {
    std::vector<NodeId> up;
    for (NodeId x = t.leaf_node(u); x != kNoNode; x = t.parent(x)) up.push_back(x);
    for (NodeId y = t.leaf_node(v); y != kNoNode; y = t.parent(y)) {
        if (std::find(up.begin(), up.end(), y) != up.end()) return y;
    }
    throw std::logic_error("leaves share no ancestor");
}

// Leaf sets of every live node as packed bit rows.
struct MemberBits {
    std::size_t words = 0;
    std::vector<std::uint64_t> bits;

    MemberBits(const HierarchyTree& t) : words((t.num_leaves() + 63) / 64), bits(t.capacity() * words, 0) {
        for (std::size_t i = 0; i < t.capacity(); ++i) {
            const auto v = static_cast<NodeId>(i);
            if (!t.contains(v)) continue;
            for (VertexId x : t.members(v)) {
                bits[i * words + static_cast<std::size_t>(x) / 64] |= std::uint64_t{1} << (static_cast<std::size_t>(x) % 64);
            }
        }
    }
    bool has(NodeId v, std::size_t x) const {
        return (bits[static_cast<std::size_t>(v) * words + x / 64] >> (x % 64)) & 1U;
    }
    const std::uint64_t* row(NodeId v) const { return bits.data() + static_cast<std::size_t>(v) * words; }
};

// lca[u][v] for u < v, climbing from u until the cluster holds v.
std::vector<std::vector<NodeId>> all_lcas(const HierarchyTree& t, const MemberBits& mb) {
    const std::size_t n = t.num_leaves();
    std::vector<std::vector<NodeId>> m(n, std::vector<NodeId>(n, kNoNode));
    for (std::size_t u = 0; u < n; ++u) {
        NodeId x = t.leaf_node(static_cast<VertexId>(u));
        for (std::size_t v = u + 1; v < n; ++v) {
            NodeId y = x;
            while (!mb.has(y, v)) y = t.parent(y);
            m[u][v] = y;
        }
    }
    return m;
}

}  // namespace

void for_each_binary_tree(std::size_t n, const std::function<void(const HierarchyTree&)>& visit) {
    check_range(n);
    Shape s;
    s.n = n;
    s.parent.assign(2 * n - 1, kNoNode);
    s.kids.push_back({0, 1});
    s.parent[0] = static_cast<NodeId>(n);
    s.parent[1] = static_cast<NodeId>(n);
    s.root = static_cast<NodeId>(n);
    grow(s, 2, n, visit);
}

std::vector<HierarchyTree> enumerate_binary_trees(std::size_t n) {
    std::vector<HierarchyTree> out;
    for_each_binary_tree(n, [&](const HierarchyTree& t) { out.push_back(t); });
    return out;
}

double brute_force_cost(const HierarchyTree& t, const WeightedGraph& g) {
    if (t.num_leaves() != g.size()) throw std::invalid_argument("tree and graph disagree on the vertex count");
    double total = 0.0;
    const auto n = static_cast<VertexId>(g.size());
    for (VertexId u = 0; u < n; ++u) {
        for (VertexId v = u + 1; v < n; ++v) {
            const double w = g.weight(u, v);
            if (w != 0.0) total += w * static_cast<double>(t.members(walk_lca(t, u, v)).size());
        }
    }
    return total;
}

OptimalTree optimal_cost(const WeightedGraph& g) {
    if (g.size() == 1) {
        TreeBuilder b;
        b.set_root(b.add_leaf(0));
        return {0.0, std::move(b).finish()};
    }
    OptimalTree best{std::numeric_limits<double>::infinity(), {}};
    for_each_binary_tree(g.size(), [&](const HierarchyTree& t) {
        const double c = brute_force_cost(t, g);
        if (c < best.cost) best = {c, t};
    });
    return best;
}

bool identical_trees(const HierarchyTree& a, const HierarchyTree& b) {
    if (a.root() != b.root() || a.num_leaves() != b.num_leaves()) return false;
    const std::size_t cap = std::max(a.capacity(), b.capacity());
    for (std::size_t i = 0; i < cap; ++i) {
        const auto v = static_cast<NodeId>(i);
        if (a.contains(v) != b.contains(v)) return false;
        if (!a.contains(v)) continue;
        const auto& x = a.node(v);
        const auto& y = b.node(v);
        if (x.parent != y.parent || x.leaf != y.leaf || x.children != y.children) return false;
    }
    return true;
}

namespace {

// One entry to replay. Exported ledgers carry only the number of separated
// pairs, so `pairs` may be null.
struct ReplayStep {
    const LedgerEntry* entry;
    const std::vector<VertexPair>* pairs;
    std::size_t count;
};

LedgerVerification replay(const HierarchyTree& before, const HierarchyTree& after, const WeightedGraph& g,
                          const std::vector<ReplayStep>& steps) {
    LedgerVerification rep;
    const auto fail = [&](long entry, std::string msg) {
        if (rep.ok) rep.first_bad_entry = entry;
        rep.ok = false;
        rep.discrepancies.push_back(std::move(msg));
    };
    const std::size_t n = g.size();
    if (before.num_leaves() != n || after.num_leaves() != n) {
        fail(-1, "trees and graph disagree on the vertex count");
        return rep;
    }
    HierarchyTree cur = before;
    long index = -1;
    for (const auto& step : steps) {
        const LedgerEntry& e = *step.entry;
        ++index;
        if (e.skipped) {
            if (step.count != 0) fail(index, "entry " + std::to_string(index) + " is skipped but lists separated pairs");
            ++rep.entries_checked;
            continue;
        }
        HierarchyTree next;
        try {
            next = apply_entry(cur, e);
        } catch (const std::exception& ex) {
            fail(index, "entry " + std::to_string(index) + " cannot be replayed: " + ex.what());
            return rep;
        }
        const MemberBits bb(cur);
        const MemberBits ba(next);
        const auto lb = all_lcas(cur, bb);
        const auto la = all_lcas(next, ba);
        std::vector<VertexPair> sep;
        double observed = 0.0;
        for (std::size_t u = 0; u < n; ++u) {
            for (std::size_t v = u + 1; v < n; ++v) {
                const NodeId z = lb[u][v];
                const NodeId za = la[u][v];
                const std::uint64_t* outer = bb.row(z);
                const std::uint64_t* inner = ba.row(za);
                bool contained = true;
                for (std::size_t k = 0; k < bb.words && contained; ++k) contained = (inner[k] & ~outer[k]) == 0;
                const auto s0 = static_cast<double>(cur.size(z));
                const auto s1 = static_cast<double>(next.size(za));
                const double w = g.weight(static_cast<VertexId>(u), static_cast<VertexId>(v));
                const double c0 = w * s0;
                const double c1 = w * s1;
                const auto pair = [&] { return "(" + std::to_string(u) + "," + std::to_string(v) + ")"; };
                if (!contained) {
                    sep.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
                    observed = std::max(observed, s1 / s0);
                    if (w > 0.0 && c1 > e.declared_bound * c0 * (1.0 + 1e-12)) {
                        fail(index, "entry " + std::to_string(index) + ": pair " + pair() + " cost ratio " +
                                        std::to_string(c1 / c0) + " exceeds declared " + std::to_string(e.declared_bound));
                    }
                } else if (c1 > c0) {
                    fail(index, "entry " + std::to_string(index) + ": non-separated pair " + pair() + " got costlier");
                }
            }
        }
        if (step.pairs ? sep != *step.pairs : sep.size() != step.count) {
            std::string msg = "entry " + std::to_string(index) + ": separated set differs (ledger " +
                              std::to_string(step.count) + ", recomputed " + std::to_string(sep.size()) + ")";
            if (step.pairs) {
                const auto mismatch = std::mismatch(sep.begin(), sep.end(), step.pairs->begin(), step.pairs->end());
                if (mismatch.first != sep.end()) {
                    msg += ", first recomputed pair not in ledger: (" + std::to_string(mismatch.first->first) + "," +
                           std::to_string(mismatch.first->second) + ")";
                }
            }
            fail(index, msg);
        }
        if (!sep.empty() && std::abs(observed - e.observed_max_ratio) > 1e-12 * observed) {
            fail(index, "entry " + std::to_string(index) + ": observed ratio " + std::to_string(e.observed_max_ratio) +
                            " but replay gives " + std::to_string(observed));
        }
        cur = std::move(next);
        ++rep.entries_checked;
    }
    if (!identical_trees(cur, after)) fail(-1, "replay does not end at the given tree");
    return rep;
}

}  // namespace

LedgerVerification verify_ledger(const HierarchyTree& before, const HierarchyTree& after, const WeightedGraph& g,
                                 const OperationLedger& ledger) {
    std::vector<ReplayStep> steps;
    for (const auto& e : ledger.entries()) steps.push_back({&e, &e.separated, e.separated.size()});
    auto rep = replay(before, after, g, steps);
    const auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.discrepancies.push_back(std::move(msg));
    };
    if (!identical_trees(before, ledger.initial())) fail("ledger does not start from the given tree");
    if (!identical_trees(after, ledger.current())) fail("ledger does not end at the given tree");
    return rep;
}

LedgerVerification verify_exported_ledger(const HierarchyTree& before, const HierarchyTree& after,
                                          const WeightedGraph& g, std::span<const LedgerLine> lines) {
    std::vector<ReplayStep> steps;
    for (const auto& l : lines) steps.push_back({&l.entry, nullptr, l.separated_count});
    return replay(before, after, g, steps);
}


}  // namespace fairtree
