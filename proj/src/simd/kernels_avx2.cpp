#include "fairtree/simd.hpp"

#include <immintrin.h>

#include <cmath>

namespace fairtree::simd {
namespace {

void accumulate_sq_diff_avx2(const double* column, double pivot, double* acc, std::size_t n) {
    const __m256d p = _mm256_set1_pd(pivot);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(column + j), p);
        const __m256d sq = _mm256_mul_pd(d, d);
        _mm256_storeu_pd(acc + j, _mm256_add_pd(_mm256_loadu_pd(acc + j), sq));
    }
    for (; j < n; ++j) {
        const double d = column[j] - pivot;
        acc[j] += d * d;
    }
}

void similarity_from_sq_dist_avx2(const double* sq_dist, double* out, std::size_t n) {
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d r = _mm256_sqrt_pd(_mm256_loadu_pd(sq_dist + j));
        _mm256_storeu_pd(out + j, _mm256_div_pd(one, _mm256_add_pd(one, r)));
    }
    for (; j < n; ++j) out[j] = 1.0 / (1.0 + std::sqrt(sq_dist[j]));
}

void weighted_mean_avx2(const double* a, const double* b, double wa, double wb, double* out,
                        std::size_t n) {
    const double total = wa + wb;
    const __m256d va = _mm256_set1_pd(wa);
    const __m256d vb = _mm256_set1_pd(wb);
    const __m256d vt = _mm256_set1_pd(total);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d x = _mm256_mul_pd(va, _mm256_loadu_pd(a + j));
        const __m256d y = _mm256_mul_pd(vb, _mm256_loadu_pd(b + j));
        _mm256_storeu_pd(out + j, _mm256_div_pd(_mm256_add_pd(x, y), vt));
    }
    for (; j < n; ++j) out[j] = (wa * a[j] + wb * b[j]) / total;
}

std::size_t argmax_avx2(const double* values, std::size_t n) {
    if (n < 8) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (values[j] > values[best]) best = j;
        }
        return best;
    }
    __m256d vmax = _mm256_loadu_pd(values);
    std::size_t j = 4;
    for (; j + 4 <= n; j += 4) vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(values + j));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, vmax);
    double m = lanes[0];
    for (int l = 1; l < 4; ++l) m = lanes[l] > m ? lanes[l] : m;
    for (; j < n; ++j) m = values[j] > m ? values[j] : m;

    const __m256d target = _mm256_set1_pd(m);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const int mask =
            _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(values + k), target, _CMP_EQ_OQ));
        if (mask != 0) return k + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
    }
    for (; k < n; ++k) {
        if (values[k] == m) return k;
    }
    return 0;
}

double sum_avx2(const double* values, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(values + j));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; j < n; ++j) total += values[j];
    return total;
}

const KernelTable kAvx2{
    "avx2",
    accumulate_sq_diff_avx2,
    similarity_from_sq_dist_avx2,
    weighted_mean_avx2,
    argmax_avx2,
    sum_avx2,
};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2; }

}  // namespace fairtree::simd
