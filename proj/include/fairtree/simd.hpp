#pragma once

// Data-parallel inner loops used by the similarity matrix, average linkage and
// cost evaluation. Every kernel has a scalar reference and vector variants that
// produce bit-identical results; the active table is chosen once at startup.

#include <cstddef>
#include <span>
#include <string_view>

namespace fairtree::simd {

struct KernelTable {
    std::string_view name;

    // acc[j] += (column[j] - pivot)^2
    void (*accumulate_sq_diff)(const double* column, double pivot, double* acc, std::size_t n);

    // out[j] = 1 / (1 + sqrt(sq_dist[j]))
    void (*similarity_from_sq_dist)(const double* sq_dist, double* out, std::size_t n);

    // out[j] = (wa * a[j] + wb * b[j]) / (wa + wb)
    void (*weighted_mean)(const double* a, const double* b, double wa, double wb, double* out,
                          std::size_t n);

    // Index of the first maximum; n must be > 0.
    std::size_t (*argmax)(const double* values, std::size_t n);

    // Sum with four interleaved partial sums combined as (s0 + s1) + (s2 + s3),
    // then the tail added in order.
    double (*sum)(const double* values, std::size_t n);
};

const KernelTable& scalar_kernels();
const KernelTable* avx2_kernels();  // nullptr when not compiled in
const KernelTable* neon_kernels();  // nullptr when not compiled in

/// Table in use. Picks the widest variant the CPU supports unless the
/// FAIRTREE_SIMD environment variable is set to "scalar".
const KernelTable& active();

/// Overrides the active table (tests and benchmarks).
void set_active(const KernelTable& table);

inline double sum(std::span<const double> v) { return active().sum(v.data(), v.size()); }

inline std::size_t argmax(std::span<const double> v) { return active().argmax(v.data(), v.size()); }

}  // namespace fairtree::simd
