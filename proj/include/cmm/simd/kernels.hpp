#pragma once

#include <complex>
#include <cstddef>

// Hot inner loops with a scalar reference and an AVX2+FMA variant chosen at runtime.
// CMM_SIMD=scalar|avx2 in the environment overrides the automatic choice.

namespace cmm::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    const char* name;
    // sum_k r[k] * (gre[k] + i gim[k])
    std::complex<double> (*dot_real_complex)(const double* r, const double* gre, const double* gim, std::size_t n);
    // l[k] = sum_{m<nrows} coef[m] * rows[m][k] for nrows <= 4;
    // out = { sum l*gre, sum l*gim, sum l*u }
    void (*lincomb_dot)(int nrows, const double* coef, const double* const* rows, const double* gre,
                        const double* gim, const double* u, std::size_t n, double out[3]);
};

const KernelTable& scalar_kernels();
// nullptr when the AVX2 translation unit is absent or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();
const KernelTable& active_kernels();

bool cpu_has_avx2_fma();

}  // namespace cmm::simd
