#include <cstdlib>
#include <cstring>

#include "cmm/simd/kernels.hpp"

namespace cmm::simd {

#if defined(CMM_HAVE_AVX2_TU)
const KernelTable* avx2_table_impl();
#endif

bool cpu_has_avx2_fma() {
#if defined(CMM_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* avx2_kernels() {
#if defined(CMM_HAVE_AVX2_TU)
    if (cpu_has_avx2_fma()) return avx2_table_impl();
#endif
    return nullptr;
}

const KernelTable& active_kernels() {
    static const KernelTable* chosen = [] {
        const char* env = std::getenv("CMM_SIMD");
        if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
        if (const KernelTable* t = avx2_kernels()) return t;
        return &scalar_kernels();
    }();
    return *chosen;
}

}  // namespace cmm::simd
