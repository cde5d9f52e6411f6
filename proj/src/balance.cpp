#include "fairtree/balance.hpp"

#include <stdexcept>
#include <vector>

namespace fairtree {

namespace {

NodeId largest_child(const HierarchyTree& t, NodeId v) {
    NodeId best = kNoNode;
    for (NodeId c : t.children(v)) {
        if (best == kNoNode || t.size(c) > t.size(best)) best = c;
    }
    return best;
}

void push_children(std::vector<NodeId>& stack, const HierarchyTree& t, NodeId v) {
    const auto kids = t.children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
}

// Pairs already split apart by an earlier move, one bit row per vertex.
class SeparatedPairs {
public:
    explicit SeparatedPairs(std::size_t n) : words_((n + 63) / 64), bits_(n * words_, 0) {}

    void mark(const std::vector<VertexPair>& pairs) {
        for (const auto& [a, b] : pairs) {
            set(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            set(static_cast<std::size_t>(b), static_cast<std::size_t>(a));
        }
    }

    // True if moving T[s] out of T[r] would split no pair a second time.
    bool clean_cut(const HierarchyTree& t, NodeId r, NodeId s, std::vector<std::uint64_t>& rest) const {
        rest.assign(words_, 0);
        for (VertexId y : t.members(r)) rest[static_cast<std::size_t>(y) / 64] |= std::uint64_t{1} << (y % 64);
        for (VertexId x : t.members(s)) rest[static_cast<std::size_t>(x) / 64] &= ~(std::uint64_t{1} << (x % 64));
        for (VertexId x : t.members(s)) {
            const std::uint64_t* row = bits_.data() + static_cast<std::size_t>(x) * words_;
            for (std::size_t w = 0; w < words_; ++w) {
                if (row[w] & rest[w]) return false;
            }
        }
        return true;
    }

private:
    void set(std::size_t a, std::size_t b) { bits_[a * words_ + b / 64] |= std::uint64_t{1} << (b % 64); }

    std::size_t words_;
    std::vector<std::uint64_t> bits_;
};

// Largest piece of T[r] with at most m leaves whose move splits no pair a
// second time; the plain descent wins ties. kNoNode if nothing qualifies.
NodeId clean_search(const HierarchyTree& t, NodeId r, std::size_t m, const SeparatedPairs& sep,
                    std::vector<std::uint64_t>& scratch) {
    NodeId best = subtree_search(t, r, m);
    if (!sep.clean_cut(t, r, best, scratch)) best = kNoNode;
    std::vector<NodeId> todo(t.children(r).begin(), t.children(r).end());
    while (!todo.empty()) {
        const NodeId x = todo.back();
        todo.pop_back();
        if (best != kNoNode && t.size(x) <= t.size(best)) continue;
        if (t.size(x) <= m && sep.clean_cut(t, r, x, scratch)) {
            best = x;
            continue;
        }
        for (NodeId c : t.children(x)) todo.push_back(c);
    }
    return best;
}

}  // namespace

std::size_t BalanceParams::small_cluster_gate() const {
    const auto twice = 2 * eps.num;
    return static_cast<std::size_t>((eps.den + twice - 1) / twice);
}

BalanceResult rebalance_tree(const HierarchyTree& t) {
    if (!t.is_binary()) throw TreeError("rebalance_tree needs a binary tree");
    OperationLedger ledger(t);
    std::vector<NodeId> stack{t.root()};
    while (!stack.empty()) {
        const HierarchyTree& cur = ledger.current();
        const NodeId r = stack.back();
        stack.pop_back();
        const std::size_t m = cur.size(r);
        if (m <= 2) continue;

        NodeId a = largest_child(cur, r);
        if (3 * cur.size(a) <= 2 * m) {
            push_children(stack, cur, r);
            continue;
        }
        while (3 * cur.size(a) > 2 * m) a = largest_child(cur, a);
        const HierarchyTree& next = ledger.record(tree_rebalance(cur, a, r));
        push_children(stack, next, r);
    }
    return {ledger.current(), std::move(ledger)};
}

NodeId subtree_search(const HierarchyTree& t, NodeId r, std::size_t m) {
    if (!t.contains(r)) throw TreeError("unknown node id for subtree_search: " + std::to_string(r));
    if (m < 1 || m >= t.size(r)) {
        throw std::out_of_range("subtree_search needs 1 <= m < " + std::to_string(t.size(r)) + ", got " + std::to_string(m));
    }
    NodeId x = r;
    while (t.size(x) > m) x = largest_child(t, x);
    return x;
}

BalanceResult refine_rebalance(const HierarchyTree& t, const BalanceParams& p) {
    const Fraction eps = p.eps;
    if (eps.num == 0 || !(eps < Fraction{1, 6})) throw std::invalid_argument("refine_rebalance needs 0 < eps < 1/6");
    const auto audit = relative_balance_audit(t, Fraction{1, 6});
    if (!audit.passed) {
        throw std::invalid_argument("refine_rebalance input fails the 1/6 balance audit (worst node " +
                                    std::to_string(audit.worst_node) + ")");
    }
    const std::int64_t num = eps.num;
    const std::int64_t den = eps.den;

    OperationLedger ledger(t);
    SeparatedPairs sep(t.num_leaves());
    std::vector<std::uint64_t> scratch;
    std::vector<NodeId> stack{t.root()};
    while (!stack.empty()) {
        const NodeId P = stack.back();
        stack.pop_back();
        const auto np = static_cast<std::int64_t>(ledger.current().size(P));
        if (ledger.current().is_leaf(P) || 2 * num * np < den) continue;
        while (true) {
            const HierarchyTree& cur = ledger.current();
            const auto kids = cur.children(P);
            if (kids.size() != 2) throw TreeError("refine_rebalance met a gated node without exactly two children");
            const bool first_larger = cur.size(kids[0]) >= cur.size(kids[1]);
            const NodeId R = first_larger ? kids[0] : kids[1];
            const NodeId L = first_larger ? kids[1] : kids[0];
            const auto nr = static_cast<std::int64_t>(cur.size(R));
            if (2 * den * nr <= (den + 2 * num) * np) break;
            const auto excess = static_cast<std::size_t>(nr - (np + 1) / 2);
            NodeId s = clean_search(cur, R, excess, sep, scratch);
            if (s == kNoNode) {
                // Overshoot is fine as long as the smaller side stays inside the band.
                const auto nl = static_cast<std::int64_t>(cur.size(L));
                const std::int64_t room = ((den + 2 * num) * np) / (2 * den) - nl;
                if (room > static_cast<std::int64_t>(excess)) {
                    s = clean_search(cur, R, static_cast<std::size_t>(room), sep, scratch);
                }
            }
            // No clean piece left: fall back to the plain descent so the node
            // still balances, at the price of splitting some pair twice.
            if (s == kNoNode) s = subtree_search(cur, R, excess);
            auto rw = del_ins(cur, s, L);
            sep.mark(rw.entry.separated);
            ledger.record(std::move(rw));
        }
        push_children(stack, ledger.current(), P);
    }
    return {ledger.current(), std::move(ledger)};
}

}  // namespace fairtree
