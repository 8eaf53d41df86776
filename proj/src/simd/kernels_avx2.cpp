// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "cmm/simd/kernels.hpp"

namespace cmm::simd {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

std::complex<double> dot_real_complex(const double* r, const double* gre, const double* gim, std::size_t n) {
    __m256d re0 = _mm256_setzero_pd(), im0 = _mm256_setzero_pd();
    __m256d re1 = _mm256_setzero_pd(), im1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        const __m256d r0 = _mm256_loadu_pd(r + k), r1 = _mm256_loadu_pd(r + k + 4);
        re0 = _mm256_fmadd_pd(r0, _mm256_loadu_pd(gre + k), re0);
        im0 = _mm256_fmadd_pd(r0, _mm256_loadu_pd(gim + k), im0);
        re1 = _mm256_fmadd_pd(r1, _mm256_loadu_pd(gre + k + 4), re1);
        im1 = _mm256_fmadd_pd(r1, _mm256_loadu_pd(gim + k + 4), im1);
    }
    double re = hsum(_mm256_add_pd(re0, re1)), im = hsum(_mm256_add_pd(im0, im1));
    for (; k < n; ++k) {
        re += r[k] * gre[k];
        im += r[k] * gim[k];
    }
    return {re, im};
}

void lincomb_dot(int nrows, const double* coef, const double* const* rows, const double* gre, const double* gim,
                 const double* u, std::size_t n, double out[3]) {
    __m256d a = _mm256_setzero_pd(), b = _mm256_setzero_pd(), c = _mm256_setzero_pd();
    __m256d cf[4];
    for (int m = 0; m < nrows; ++m) cf[m] = _mm256_set1_pd(coef[m]);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        __m256d l = _mm256_mul_pd(cf[0], _mm256_loadu_pd(rows[0] + k));
        for (int m = 1; m < nrows; ++m) l = _mm256_fmadd_pd(cf[m], _mm256_loadu_pd(rows[m] + k), l);
        a = _mm256_fmadd_pd(l, _mm256_loadu_pd(gre + k), a);
        b = _mm256_fmadd_pd(l, _mm256_loadu_pd(gim + k), b);
        c = _mm256_fmadd_pd(l, _mm256_loadu_pd(u + k), c);
    }
    double sa = hsum(a), sb = hsum(b), sc = hsum(c);
    for (; k < n; ++k) {
        double l = 0.0;
        for (int m = 0; m < nrows; ++m) l += coef[m] * rows[m][k];
        sa += l * gre[k];
        sb += l * gim[k];
        sc += l * u[k];
    }
    out[0] = sa;
    out[1] = sb;
    out[2] = sc;
}

}  // namespace

const KernelTable* avx2_table_impl() {
    static const KernelTable table{Isa::Avx2, "avx2", &dot_real_complex, &lincomb_dot};
    return &table;
}

}  // namespace cmm::simd
