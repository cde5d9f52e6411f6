#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairtree/ops.hpp"
#include "fairtree/rational.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

/// Color of every vertex as a dense index in [0, λ).
struct ColorAssignment {
    std::size_t num_colors = 0;
    std::vector<int> color;
    std::vector<std::size_t> counts;

    static ColorAssignment from_colors(std::span<const int> colors, std::size_t num_colors);

    std::size_t size() const { return color.size(); }
    /// c_ℓ = counts[ℓ] / n.
    double proportion(std::size_t l) const;
    double min_proportion() const;
};

/// Per-color bounds α_ℓ|C| <= ℓ(C) <= β_ℓ|C|.
struct FairnessParams {
    std::vector<double> alpha;
    std::vector<double> beta;

    static FairnessParams uniform(std::size_t num_colors, double alpha, double beta);

    /// a = min_ℓ α_ℓ.
    double a() const;

    /// Throws unless 0 < α_ℓ <= β_ℓ < 1 for each of the λ colors.
    void validate(std::size_t num_colors) const;
};

/// Independent per-vertex color distributions p_ℓ(v) plus the Chernoff slack.
struct StochasticColorModel {
    std::size_t n = 0;
    std::size_t num_colors = 0;
    std::vector<double> p;  // row-major n × λ
    double delta = 0.5;

    static StochasticColorModel uniform(std::size_t n, std::vector<double> probs, double delta);

    double prob(std::size_t v, std::size_t l) const { return p[v * num_colors + l]; }

    /// Rows sum to 1 within 1e-9, entries in [0, 1], 0 < δ < 1.
    void validate() const;

    /// α_ℓ/(1-δ) <= p_ℓ(v) <= β_ℓ/(1+δ) for every vertex and color.
    bool admissible(const FairnessParams& fp) const;
};

struct FairnessViolation {
    enum class Kind { lower, upper, leaf_children };
    NodeId node = kNoNode;
    int color = -1;  // -1 for leaf_children
    Kind kind = Kind::lower;
    double fraction = 0.0;  // ℓ(C)/|C|
};

struct FairnessAudit {
    bool passed = true;
    std::vector<FairnessViolation> violations;
    double worst_fraction = 0.0;  // fraction of the violation furthest outside its bound
    double worst_gap = 0.0;
};

/// Checks every non-singleton cluster against the per-color bounds, and that a
/// node with any leaf child has only leaf children.
FairnessAudit fairness_audit(const HierarchyTree& t, const ColorAssignment& col, const FairnessParams& fp);

/// Same checks with arbitrary per-color brackets (no range validation), so a
/// clamped upper bound of 1 is allowed.
FairnessAudit audit_fractions(const HierarchyTree& t, const ColorAssignment& col, std::span<const double> lower,
                              std::span<const double> upper);

/// Per-node color counts indexed [node * λ + color] (dead slots are zero).
std::vector<std::uint32_t> color_counts(const HierarchyTree& t, const ColorAssignment& col);

/// One categorical draw per vertex.
ColorAssignment sample_colors(const StochasticColorModel& m, std::uint64_t seed);

enum class ThresholdMode { depth, size };

ThresholdMode parse_threshold_mode(std::string_view s);

/// Size mode: ⌈3(1-δ)/(aδ²)·ln(λn)⌉, a minimum cluster size.
/// Depth mode: ⌊log_{1/2-ε}(size-mode value / n)⌋, an abstraction depth.
/// Throws std::domain_error when n is too small for the parameters.
std::size_t chernoff_threshold(std::size_t n, std::size_t num_colors, const FairnessParams& fp, double delta,
                               Fraction eps, ThresholdMode mode);

struct StochasticResult {
    HierarchyTree tree;
    OperationLedger ledger;
    std::size_t threshold = 0;
    /// Guaranteed minimum internal cluster size: (1/2-ε)^t·n or t.
    double size_floor = 0.0;
};

/// One level abstraction: abstract(t, h_max) in depth mode, or contraction of
/// every internal node smaller than t in size mode. Refuses inputs that fail
/// the ε balance audit.
StochasticResult stochastically_fair_hc(const HierarchyTree& t, const StochasticColorModel& m,
                                        const FairnessParams& fp, Fraction eps, ThresholdMode mode);

/// Smallest internal cluster (n for a flat tree, 0 for a single leaf).
std::size_t min_internal_size(const HierarchyTree& t);

}  // namespace fairtree
