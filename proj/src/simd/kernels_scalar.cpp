#include "cmm/simd/kernels.hpp"

namespace cmm::simd {

namespace {

std::complex<double> dot_real_complex(const double* r, const double* gre, const double* gim, std::size_t n) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        re += r[k] * gre[k];
        im += r[k] * gim[k];
    }
    return {re, im};
}

void lincomb_dot(int nrows, const double* coef, const double* const* rows, const double* gre, const double* gim,
                 const double* u, std::size_t n, double out[3]) {
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double l = 0.0;
        for (int m = 0; m < nrows; ++m) l += coef[m] * rows[m][k];
        a += l * gre[k];
        b += l * gim[k];
        c += l * u[k];
    }
    out[0] = a;
    out[1] = b;
    out[2] = c;
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{Isa::Scalar, "scalar", &dot_real_complex, &lincomb_dot};
    return table;
}

}  // namespace cmm::simd
