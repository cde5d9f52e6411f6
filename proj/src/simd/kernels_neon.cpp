#include "fairtree/simd.hpp"

#include <arm_neon.h>

#include <cmath>

namespace fairtree::simd {
namespace {

// Two float64x2 registers per step so the lane layout matches the 4-wide
// partial sums of the scalar reference.

void accumulate_sq_diff_neon(const double* column, double pivot, double* acc, std::size_t n) {
    const float64x2_t p = vdupq_n_f64(pivot);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(column + j), p);
        vst1q_f64(acc + j, vaddq_f64(vld1q_f64(acc + j), vmulq_f64(d, d)));
    }
    for (; j < n; ++j) {
        const double d = column[j] - pivot;
        acc[j] += d * d;
    }
}

void similarity_from_sq_dist_neon(const double* sq_dist, double* out, std::size_t n) {
    const float64x2_t one = vdupq_n_f64(1.0);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t r = vsqrtq_f64(vld1q_f64(sq_dist + j));
        vst1q_f64(out + j, vdivq_f64(one, vaddq_f64(one, r)));
    }
    for (; j < n; ++j) out[j] = 1.0 / (1.0 + std::sqrt(sq_dist[j]));
}

void weighted_mean_neon(const double* a, const double* b, double wa, double wb, double* out,
                        std::size_t n) {
    const double total = wa + wb;
    const float64x2_t va = vdupq_n_f64(wa);
    const float64x2_t vb = vdupq_n_f64(wb);
    const float64x2_t vt = vdupq_n_f64(total);
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t x = vmulq_f64(va, vld1q_f64(a + j));
        const float64x2_t y = vmulq_f64(vb, vld1q_f64(b + j));
        vst1q_f64(out + j, vdivq_f64(vaddq_f64(x, y), vt));
    }
    for (; j < n; ++j) out[j] = (wa * a[j] + wb * b[j]) / total;
}

std::size_t argmax_neon(const double* values, std::size_t n) {
    if (n < 4) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (values[j] > values[best]) best = j;
        }
        return best;
    }
    float64x2_t vmax = vld1q_f64(values);
    std::size_t j = 2;
    for (; j + 2 <= n; j += 2) vmax = vmaxq_f64(vmax, vld1q_f64(values + j));
    double m = vgetq_lane_f64(vmax, 0);
    const double m1 = vgetq_lane_f64(vmax, 1);
    m = m1 > m ? m1 : m;
    for (; j < n; ++j) m = values[j] > m ? values[j] : m;
    for (std::size_t k = 0; k < n; ++k) {
        if (values[k] == m) return k;
    }
    return 0;
}

double sum_neon(const double* values, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0);  // lanes 0, 1
    float64x2_t hi = vdupq_n_f64(0.0);  // lanes 2, 3
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        lo = vaddq_f64(lo, vld1q_f64(values + j));
        hi = vaddq_f64(hi, vld1q_f64(values + j + 2));
    }
    double total = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
                   (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
    for (; j < n; ++j) total += values[j];
    return total;
}

const KernelTable kNeon{
    "neon",
    accumulate_sq_diff_neon,
    similarity_from_sq_dist_neon,
    weighted_mean_neon,
    argmax_neon,
    sum_neon,
};

}  // namespace

const KernelTable* neon_kernels() { return &kNeon; }

}  // namespace fairtree::simd
