#include "fairtree/simd.hpp"

#include <cmath>

namespace fairtree::simd {
namespace {

void accumulate_sq_diff_scalar(const double* column, double pivot, double* acc, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double d = column[j] - pivot;
        acc[j] += d * d;
    }
}

void similarity_from_sq_dist_scalar(const double* sq_dist, double* out, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = 1.0 / (1.0 + std::sqrt(sq_dist[j]));
    }
}

void weighted_mean_scalar(const double* a, const double* b, double wa, double wb, double* out,
                          std::size_t n) {
    const double total = wa + wb;
    for (std::size_t j = 0; j < n; ++j) {
        out[j] = (wa * a[j] + wb * b[j]) / total;
    }
}

std::size_t argmax_scalar(const double* values, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < n; ++j) {
        if (values[j] > values[best]) best = j;
    }
    return best;
}

double sum_scalar(const double* values, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        lane[0] += values[j];
        lane[1] += values[j + 1];
        lane[2] += values[j + 2];
        lane[3] += values[j + 3];
    }
    double total = (lane[0] + lane[1]) + (lane[2] + lane[3]);
    for (; j < n; ++j) total += values[j];
    return total;
}

const KernelTable kScalar{
    "scalar",
    accumulate_sq_diff_scalar,
    similarity_from_sq_dist_scalar,
    weighted_mean_scalar,
    argmax_scalar,
    sum_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace fairtree::simd
