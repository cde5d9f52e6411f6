#include "fairtree/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace fairtree::simd {

#if !defined(FAIRTREE_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !defined(FAIRTREE_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable* detect() {
    if (const char* forced = std::getenv("FAIRTREE_SIMD"); forced && std::strcmp(forced, "scalar") == 0) {
        return &scalar_kernels();
    }
#if defined(FAIRTREE_HAVE_AVX2)
    __builtin_cpu_init();
    if (__builtin_cpu_supports("avx2")) return avx2_kernels();
#endif
#if defined(FAIRTREE_HAVE_NEON)
    return neon_kernels();
#endif
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{detect()};
    return table;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void set_active(const KernelTable& table) { slot().store(&table, std::memory_order_release); }

}  // namespace fairtree::simd
