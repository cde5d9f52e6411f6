#pragma once

#include <vector>

#include "fairtree/fairness.hpp"
#include "fairtree/ops.hpp"
#include "fairtree/rational.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

struct FairHCConfig {
    double c_bal = 4.0;        // ε = 1/(c_bal·log₂ n)
    std::size_t h = 4;         // frontier width, a power of two
    std::size_t k = 2;         // fold arity
    double fold_slack = 1.25;  // allowance on the per-fold bound k·e^{4/c_bal}
    std::size_t stop_size = 0; // 0: max(k, ⌈1/min c_ℓ⌉)

    /// Throws unless c_bal > 0, h is a power of two >= 2 and 1 <= k <= h.
    void validate() const;

    std::size_t resolved_stop_size(const ColorAssignment& col) const;
};

/// Frontier width from an exponent: n^δ rounded to the nearest power of two (at least 2).
std::size_t frontier_from_exponent(std::size_t n, double delta_exp);

/// ε = 1/(c_bal·log₂ n) as a fraction. When c_bal·log₂ n is not an integer the
/// denominator is rounded up at 1e-6 resolution, so ε errs on the strict side.
Fraction fairhc_epsilon(double c_bal, std::size_t n);

struct FairnessBound {
    std::vector<double> lower;
    std::vector<double> upper;  // clamped to 1
    std::vector<double> upper_raw;

    FairnessParams as_params() const { return {lower, upper}; }
};

/// lower_ℓ = c_ℓ / e^{2·log_h n / c_bal};
/// upper_ℓ = min(1, c_ℓ·(e^{4/c_bal}/(k·c_ℓ) + e^{6/c_bal})^{log_h n}).
FairnessBound fairness_bound(const FairHCConfig& cfg, std::size_t n, const ColorAssignment& col);

/// Fairness check against a bound with the bracket applied inclusively; the
/// leaf-children rule is included.
FairnessAudit bound_audit(const HierarchyTree& t, const ColorAssignment& col, const FairnessBound& b);

struct FairHCResult {
    HierarchyTree tree;
    OperationLedger ledger;
    Fraction eps;
    std::size_t levels = 0;      // number of frontier levels above the flattened clusters
    std::size_t stop_size = 0;
    double fold_bound = 0.0;     // k·e^{4/c_bal}·slack
    double abstract_bound = 0.0; // e^{2/c_bal}·h
    bool fold_bounds_ok = true;  // every fold entry's declared bound <= fold_bound
    // Every abstraction entry's declared bound <= abstract_bound. The bands
    // above the bottom frontier always meet it; flattening below the bottom
    // frontier costs up to (frontier cluster size)/2 and may not.
    bool abstract_bounds_ok = true;
};

/// Frontier abstraction in bands of log₂ h levels down to the first level that
/// reaches stop_size (or would expose a leaf), flattening everything below,
/// followed by color-sorted stride folding from the bottom frontier upward.
FairHCResult fairhc(const HierarchyTree& t, const ColorAssignment& col, const FairHCConfig& cfg);

}  // namespace fairtree
