#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "cmm/simd/kernels.hpp"

using namespace cmm::simd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> d(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar kernels compute the documented sums") {
    const KernelTable& s = scalar_kernels();
    CHECK(s.isa == Isa::Scalar);
    const std::vector<double> r{1, 2, 3}, gre{1, 0, -1}, gim{0, 1, 1};
    const auto d = s.dot_real_complex(r.data(), gre.data(), gim.data(), 3);
    CHECK(d.real() == doctest::Approx(-2.0));
    CHECK(d.imag() == doctest::Approx(5.0));

    const std::vector<double> row0{1, 1, 1}, row1{0, 1, 2}, u{1, 1, 1};
    const double* rows[2] = {row0.data(), row1.data()};
    const double coef[2] = {2.0, -1.0};
    double out[3];
    s.lincomb_dot(2, coef, rows, gre.data(), gim.data(), u.data(), 3, out);
    // l = {2, 1, 0}
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == doctest::Approx(1.0));
    CHECK(out[2] == doctest::Approx(3.0));
}

TEST_CASE("AVX2 kernels match the scalar reference") {
    const KernelTable* v = avx2_kernels();
    if (!v) {
        MESSAGE("AVX2/FMA not available; equivalence test skipped");
        return;
    }
    CHECK(v->isa == Isa::Avx2);
    const KernelTable& s = scalar_kernels();
    std::mt19937_64 rng(12345);
    // Lengths cover the vector body, remainders and the empty case.
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 64u, 129u, 1000u}) {
        const auto r = random_vec(rng, n), gre = random_vec(rng, n), gim = random_vec(rng, n), u = random_vec(rng, n);
        double mag = 0;
        for (std::size_t k = 0; k < n; ++k) mag += std::abs(r[k]) * (std::abs(gre[k]) + std::abs(gim[k]));
        const auto a = s.dot_real_complex(r.data(), gre.data(), gim.data(), n);
        const auto b = v->dot_real_complex(r.data(), gre.data(), gim.data(), n);
        CHECK(std::abs(a - b) <= 1e-14 * (1 + mag));

        for (int nrows = 1; nrows <= 4; ++nrows) {
            std::vector<std::vector<double>> rowsv;
            std::vector<const double*> rows;
            for (int m = 0; m < nrows; ++m) rowsv.push_back(random_vec(rng, n));
            for (auto& row : rowsv) rows.push_back(row.data());
            const auto coef = random_vec(rng, 4);
            double x[3], y[3];
            s.lincomb_dot(nrows, coef.data(), rows.data(), gre.data(), gim.data(), u.data(), n, x);
            v->lincomb_dot(nrows, coef.data(), rows.data(), gre.data(), gim.data(), u.data(), n, y);
            for (int c = 0; c < 3; ++c) CHECK(std::abs(x[c] - y[c]) <= 1e-13 * (1 + 4.0 * static_cast<double>(n)));
        }
    }
}

TEST_CASE("active table follows the CPU and is stable") {
    const KernelTable& a = active_kernels();
    CHECK(&a == &active_kernels());
    if (!cpu_has_avx2_fma()) CHECK(a.isa == Isa::Scalar);
    CHECK(a.name != nullptr);
}
