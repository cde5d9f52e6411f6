#include "fairtree/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairtree/random.hpp"

namespace fairtree {

ColorAssignment ColorAssignment::from_colors(std::span<const int> colors, std::size_t num_colors) {
    if (num_colors == 0) throw std::invalid_argument("need at least one color");
    ColorAssignment c;
    c.num_colors = num_colors;
    c.color.assign(colors.begin(), colors.end());
    c.counts.assign(num_colors, 0);
    for (int x : colors) {
        if (x < 0 || static_cast<std::size_t>(x) >= num_colors) {
            throw std::out_of_range("color index " + std::to_string(x) + " outside [0, " + std::to_string(num_colors) + ")");
        }
        ++c.counts[static_cast<std::size_t>(x)];
    }
    return c;
}

double ColorAssignment::proportion(std::size_t l) const {
    return static_cast<double>(counts.at(l)) / static_cast<double>(size());
}

double ColorAssignment::min_proportion() const {
    double m = 1.0;
    for (std::size_t l = 0; l < num_colors; ++l) m = std::min(m, proportion(l));
    return m;
}

FairnessParams FairnessParams::uniform(std::size_t num_colors, double alpha, double beta) {
    return {std::vector<double>(num_colors, alpha), std::vector<double>(num_colors, beta)};
}

double FairnessParams::a() const {
    if (alpha.empty()) throw std::invalid_argument("fairness parameters are empty");
    return *std::min_element(alpha.begin(), alpha.end());
}

void FairnessParams::validate(std::size_t num_colors) const {
    if (alpha.size() != num_colors || beta.size() != num_colors) {
        throw std::invalid_argument("expected " + std::to_string(num_colors) + " alpha and beta values");
    }
    for (std::size_t l = 0; l < num_colors; ++l) {
        if (!(alpha[l] > 0.0 && alpha[l] <= beta[l] && beta[l] < 1.0)) {
            throw std::invalid_argument("color " + std::to_string(l) + ": need 0 < alpha <= beta < 1");
        }
    }
}

StochasticColorModel StochasticColorModel::uniform(std::size_t n, std::vector<double> probs, double delta) {
    StochasticColorModel m;
    m.n = n;
    m.num_colors = probs.size();
    m.delta = delta;
    m.p.reserve(n * probs.size());
    for (std::size_t v = 0; v < n; ++v) m.p.insert(m.p.end(), probs.begin(), probs.end());
    m.validate();
    return m;
}

void StochasticColorModel::validate() const {
    if (num_colors == 0 || p.size() != n * num_colors) throw std::invalid_argument("color model has the wrong shape");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("Chernoff slack must lie in (0, 1)");
    for (std::size_t v = 0; v < n; ++v) {
        double s = 0.0;
        for (std::size_t l = 0; l < num_colors; ++l) {
            const double x = prob(v, l);
            if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("probability outside [0, 1] at vertex " + std::to_string(v));
            s += x;
        }
        if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("probabilities of vertex " + std::to_string(v) + " do not sum to 1");
    }
}

bool StochasticColorModel::admissible(const FairnessParams& fp) const {
    fp.validate(num_colors);
    for (std::size_t v = 0; v < n; ++v) {
        for (std::size_t l = 0; l < num_colors; ++l) {
            const double x = prob(v, l);
            if (x < fp.alpha[l] / (1.0 - delta) || x > fp.beta[l] / (1.0 + delta)) return false;
        }
    }
    return true;
}

std::vector<std::uint32_t> color_counts(const HierarchyTree& t, const ColorAssignment& col) {
    if (col.size() != t.num_leaves()) throw std::invalid_argument("color assignment does not cover the tree's leaves");
    const std::size_t lam = col.num_colors;
    std::vector<std::uint32_t> counts(t.capacity() * lam, 0);
    const auto& order = t.preorder();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const NodeId v = *it;
        auto* row = counts.data() + static_cast<std::size_t>(v) * lam;
        if (t.is_leaf(v)) {
            ++row[static_cast<std::size_t>(col.color[static_cast<std::size_t>(t.leaf_label(v))])];
            continue;
        }
        for (NodeId c : t.children(v)) {
            const auto* cr = counts.data() + static_cast<std::size_t>(c) * lam;
            for (std::size_t l = 0; l < lam; ++l) row[l] += cr[l];
        }
    }
    return counts;
}

FairnessAudit fairness_audit(const HierarchyTree& t, const ColorAssignment& col, const FairnessParams& fp) {
    fp.validate(col.num_colors);
    return audit_fractions(t, col, fp.alpha, fp.beta);
}

FairnessAudit audit_fractions(const HierarchyTree& t, const ColorAssignment& col, std::span<const double> lower,
                              std::span<const double> upper) {
    if (lower.size() != col.num_colors || upper.size() != col.num_colors) {
        throw std::invalid_argument("need one lower and one upper bound per color");
    }
    const auto counts = color_counts(t, col);
    const std::size_t lam = col.num_colors;
    FairnessAudit audit;
    const auto note = [&](FairnessViolation v, double gap) {
        audit.passed = false;
        if (gap > audit.worst_gap || audit.violations.empty()) {
            audit.worst_gap = gap;
            audit.worst_fraction = v.fraction;
        }
        audit.violations.push_back(v);
    };
    for (NodeId v : t.preorder()) {
        if (t.is_leaf(v)) continue;
        const auto kids = t.children(v);
        const bool some_leaf = std::any_of(kids.begin(), kids.end(), [&](NodeId c) { return t.is_leaf(c); });
        const bool all_leaf = std::all_of(kids.begin(), kids.end(), [&](NodeId c) { return t.is_leaf(c); });
        if (some_leaf && !all_leaf) note({v, -1, FairnessViolation::Kind::leaf_children, 0.0}, 0.0);

        const double size = static_cast<double>(t.size(v));
        for (std::size_t l = 0; l < lam; ++l) {
            const double cnt = counts[static_cast<std::size_t>(v) * lam + l];
            const double frac = cnt / size;
            if (cnt < lower[l] * size) {
                note({v, static_cast<int>(l), FairnessViolation::Kind::lower, frac}, lower[l] - frac);
            } else if (cnt > upper[l] * size) {
                note({v, static_cast<int>(l), FairnessViolation::Kind::upper, frac}, frac - upper[l]);
            }
        }
    }
    return audit;
}

ColorAssignment sample_colors(const StochasticColorModel& m, std::uint64_t seed) {
    m.validate();
    Rng rng(seed);
    std::vector<int> colors(m.n);
    for (std::size_t v = 0; v < m.n; ++v) {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t pick = m.num_colors - 1;
        for (std::size_t l = 0; l + 1 < m.num_colors; ++l) {
            acc += m.prob(v, l);
            if (u < acc) {
                pick = l;
                break;
            }
        }
        // A zero-probability last color must never be drawn through rounding.
        while (m.prob(v, pick) == 0.0 && pick > 0) --pick;
        colors[v] = static_cast<int>(pick);
    }
    return ColorAssignment::from_colors(colors, m.num_colors);
}

ThresholdMode parse_threshold_mode(std::string_view s) {
    if (s == "depth") return ThresholdMode::depth;
    if (s == "size") return ThresholdMode::size;
    throw std::invalid_argument("mode must be 'depth' or 'size', got '" + std::string(s) + "'");
}

std::size_t chernoff_threshold(std::size_t n, std::size_t num_colors, const FairnessParams& fp, double delta,
                               Fraction eps, ThresholdMode mode) {
    if (n == 0 || num_colors == 0) throw std::invalid_argument("need n >= 1 and at least one color");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("Chernoff slack must lie in (0, 1)");
    fp.validate(num_colors);
    const double size_t_raw = 3.0 * (1.0 - delta) / (fp.a() * delta * delta) *
                              std::log(static_cast<double>(num_colors) * static_cast<double>(n));
    if (mode == ThresholdMode::size) {
        const double t = std::ceil(size_t_raw);
        if (t > static_cast<double>(n)) {
            throw std::domain_error("n too small: size threshold " + std::to_string(static_cast<long long>(t)) +
                                    " exceeds n = " + std::to_string(n));
        }
        return static_cast<std::size_t>(t);
    }
    if (!(eps < Fraction{1, 2})) throw std::invalid_argument("depth threshold needs eps < 1/2");
    const double arg = size_t_raw / static_cast<double>(n);
    if (arg >= 1.0) throw std::domain_error("n too small: threshold argument " + std::to_string(arg) + " is not below 1");
    const double t = std::floor(std::log(arg) / std::log(0.5 - eps.value()));
    if (t < 1.0) throw std::domain_error("n too small: depth threshold below 1");
    return static_cast<std::size_t>(t);
}

std::size_t min_internal_size(const HierarchyTree& t) {
    std::size_t m = 0;
    for (NodeId v : t.preorder()) {
        if (t.is_leaf(v)) continue;
        if (m == 0 || t.size(v) < m) m = t.size(v);
    }
    return m;
}

StochasticResult stochastically_fair_hc(const HierarchyTree& t, const StochasticColorModel& m,
                                        const FairnessParams& fp, Fraction eps, ThresholdMode mode) {
    m.validate();
    if (m.n != t.num_leaves()) throw std::invalid_argument("color model and tree disagree on n");
    const auto audit = relative_balance_audit(t, eps);
    if (!audit.passed) {
        throw std::invalid_argument("input fails the " + eps.to_string() + " balance audit (worst node " +
                                    std::to_string(audit.worst_node) + ", deviation " +
                                    std::to_string(audit.max_deviation) + ")");
    }
    const std::size_t th = chernoff_threshold(m.n, m.num_colors, fp, m.delta, eps, mode);
    OperationLedger ledger(t);
    double floor = 0.0;
    if (mode == ThresholdMode::depth) {
        ledger.record(abstract_levels(t, th, std::max(t.height(), th + 1)));
        floor = std::pow(0.5 - eps.value(), static_cast<double>(th)) * static_cast<double>(m.n);
    } else {
        ledger.record(abstract_below_size(t, th));
        floor = static_cast<double>(th);
    }
    return {ledger.current(), std::move(ledger), th, floor};
}

}  // namespace fairtree
