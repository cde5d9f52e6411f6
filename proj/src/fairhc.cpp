#include "fairtree/fairhc.hpp"

#include "fairtree/balance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace fairtree {

void FairHCConfig::validate() const {
    if (!(c_bal > 0.0)) throw std::invalid_argument("c_bal must be positive");
    if (h < 2 || !std::has_single_bit(h)) throw std::invalid_argument("h must be a power of two >= 2, got " + std::to_string(h));
    if (k < 1 || k > h) throw std::invalid_argument("k must lie in [1, h]");
    if (!(fold_slack >= 1.0)) throw std::invalid_argument("fold slack must be >= 1");
}

std::size_t FairHCConfig::resolved_stop_size(const ColorAssignment& col) const {
    if (stop_size > 0) return stop_size;
    const double c = col.min_proportion();
    const auto by_color = c > 0.0 ? static_cast<std::size_t>(std::ceil(1.0 / c - 1e-12)) : col.size();
    return std::max(k, by_color);
}

std::size_t frontier_from_exponent(std::size_t n, double delta_exp) {
    if (n < 2) throw std::invalid_argument("frontier exponent needs n >= 2");
    if (!(delta_exp > 0.0 && delta_exp < 1.0)) throw std::invalid_argument("frontier exponent must lie in (0, 1)");
    const double bits = std::round(delta_exp * std::log2(static_cast<double>(n)));
    return std::size_t{1} << static_cast<unsigned>(std::max(1.0, bits));
}

Fraction fairhc_epsilon(double c_bal, std::size_t n) {
    if (n < 2) throw std::invalid_argument("epsilon needs n >= 2");
    const double d = c_bal * std::log2(static_cast<double>(n));
    const double r = std::round(d);
    if (std::abs(d - r) < 1e-9) return {1, static_cast<std::int64_t>(r)};
    constexpr std::int64_t scale = 1'000'000;
    return {scale, static_cast<std::int64_t>(std::ceil(d * static_cast<double>(scale)))};
}

FairnessBound fairness_bound(const FairHCConfig& cfg, std::size_t n, const ColorAssignment& col) {
    if (n < cfg.h) throw std::invalid_argument("fairness bound needs n >= h");
    const double depth = std::log(static_cast<double>(n)) / std::log(static_cast<double>(cfg.h));
    FairnessBound b;
    for (std::size_t l = 0; l < col.num_colors; ++l) {
        const double c = col.proportion(l);
        b.lower.push_back(c / std::exp(2.0 * depth / cfg.c_bal));
        const double base = std::exp(4.0 / cfg.c_bal) / (static_cast<double>(cfg.k) * c) + std::exp(6.0 / cfg.c_bal);
        const double raw = c * std::pow(base, depth);
        b.upper_raw.push_back(raw);
        b.upper.push_back(std::min(1.0, raw));
    }
    return b;
}

FairnessAudit bound_audit(const HierarchyTree& t, const ColorAssignment& col, const FairnessBound& b) {
    return audit_fractions(t, col, b.lower, b.upper);
}

FairHCResult fairhc(const HierarchyTree& t, const ColorAssignment& col, const FairHCConfig& cfg) {
    cfg.validate();
    const std::size_t n = t.num_leaves();
    if (col.size() != n) throw std::invalid_argument("color assignment does not cover the tree's leaves");
    if (n < 2) throw std::invalid_argument("fairhc needs at least two vertices");
    const Fraction eps = fairhc_epsilon(cfg.c_bal, n);
    if (!(eps < Fraction{1, 6})) {
        throw std::invalid_argument("c_bal·log2(n) must exceed 6 so that eps < 1/6 (eps = " + eps.to_string() + ")");
    }
    if (!t.is_binary()) throw TreeError("fairhc needs a binary input tree");
    const auto audit = relative_balance_audit(t, eps);
    if (!audit.passed) {
        throw std::invalid_argument("input fails the " + eps.to_string() + " balance audit (worst node " +
                                    std::to_string(audit.worst_node) + ")");
    }

    FairHCResult res;
    res.eps = eps;
    res.stop_size = cfg.resolved_stop_size(col);
    res.fold_bound = static_cast<double>(cfg.k) * std::exp(4.0 / cfg.c_bal) * cfg.fold_slack;
    res.abstract_bound = std::exp(2.0 / cfg.c_bal) * static_cast<double>(cfg.h);
    const auto band = static_cast<std::size_t>(std::countr_zero(cfg.h));

    // Levels sit at depths 0, band, 2·band, ... of the input. Level L is the
    // last one kept when one of its clusters is already small enough, or when
    // the next level would not consist purely of internal nodes.
    std::size_t min_leaf_depth = t.height();
    std::vector<std::size_t> min_size_at(t.height() + 1, n);
    for (NodeId v : t.preorder()) {
        const std::size_t d = t.depth(v);
        if (t.is_leaf(v)) min_leaf_depth = std::min(min_leaf_depth, d);
        min_size_at[d] = std::min(min_size_at[d], t.size(v));
    }
    // A further level is only formed while every node above it is large
    // enough for the balance condition to have applied.
    const std::size_t gate = BalanceParams{eps}.small_cluster_gate();
    std::size_t levels = 0;
    while (min_size_at[levels * band] > res.stop_size && min_leaf_depth > (levels + 1) * band &&
           min_size_at[(levels + 1) * band - 1] >= gate) {
        ++levels;
    }
    res.levels = levels;

    OperationLedger ledger(t);
    const auto record_if_changed = [&](Rewrite rw) {
        if (rw.entry.separated.empty()) return;
        if (rw.entry.declared_bound > res.abstract_bound) res.abstract_bounds_ok = false;
        ledger.record(std::move(rw));
    };
    const std::size_t bottom = levels * band;
    record_if_changed(abstract_levels(ledger.current(), bottom, std::max(t.height(), bottom + 1)));
    if (band > 1) {
        for (std::size_t L = levels; L-- > 0;) {
            record_if_changed(abstract_levels(ledger.current(), L * band, L * band + band - 1));
        }
    }

    std::vector<std::vector<NodeId>> level_nodes{{ledger.current().root()}};
    for (std::size_t L = 0; L < levels; ++L) {
        std::vector<NodeId> next;
        for (NodeId v : level_nodes.back()) {
            const auto kids = ledger.current().children(v);
            next.insert(next.end(), kids.begin(), kids.end());
        }
        level_nodes.push_back(std::move(next));
    }

    const std::size_t lam = col.num_colors;
    std::vector<std::pair<double, NodeId>> order;
    std::vector<NodeId> group;
    for (std::size_t L = levels; L-- > 0;) {
        for (NodeId v : level_nodes[L]) {
            for (std::size_t l = 0; l < lam; ++l) {
                if (lam == 2 && l == 1) {
                    // With two colors the second ordering is the first reversed.
                    LedgerEntry e;
                    e.kind = OpKind::fold;
                    ledger.record_skipped(std::move(e));
                    continue;
                }
                const HierarchyTree& cur = ledger.current();
                order.clear();
                for (NodeId c : cur.children(v)) {
                    std::size_t cnt = 0;
                    for (VertexId x : cur.members(c)) cnt += col.color[static_cast<std::size_t>(x)] == static_cast<int>(l);
                    order.emplace_back(static_cast<double>(cnt) / static_cast<double>(cur.size(c)), c);
                }
                std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
                    return a.first != b.first ? a.first > b.first : a.second < b.second;
                });
                const std::size_t count = order.size();
                const std::size_t stride = (count + cfg.k - 1) / cfg.k;
                for (std::size_t j = 0; j < stride; ++j) {
                    group.clear();
                    for (std::size_t i = j; i < count; i += stride) group.push_back(order[i].second);
                    if (group.size() < 2) continue;
                    auto rw = fold(ledger.current(), group);
                    if (rw.entry.declared_bound > res.fold_bound) res.fold_bounds_ok = false;
                    ledger.record(std::move(rw));
                }
            }
        }
    }
    res.tree = ledger.current();
    res.ledger = std::move(ledger);
    return res;
}

}  // namespace fairtree
