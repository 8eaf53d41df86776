#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/correlators.hpp"
#include "cmm/exact.hpp"

using namespace cmm;

TEST_CASE("exact moments are rational multiples of Z0") {
    const ExactGaussianSystem ex = exact_gaussian_system(ModelSpec::gaussian(0.5), 6);
    // det = 4 a_L a_R - c^2 = 3/4; the covariance is [[1, c], [c, 1]] / (1 - c^2).
    CHECK(ex.det == mpq_class(3, 4));
    CHECK(ex.moments[0][0] == 1);
    CHECK(ex.moments[1][1] == mpq_class(2, 3));  // c / (1 - c^2)
    CHECK(ex.moments[2][0] == mpq_class(4, 3));  // 1 / (1 - c^2)
    CHECK(ex.moments[1][0] == 0);
    CHECK(ex.h_ratio[0] == 1);
    CHECK(ex.prefactor() == doctest::Approx(2 * M_PI / std::sqrt(0.75)));
}

TEST_CASE("exact pivots of the symmetric gaussian model") {
    const ExactGaussianSystem ex = exact_gaussian_system(ModelSpec::gaussian(0.25), 5);
    for (int i = 0; i <= 5; ++i)
        for (int j = 0; j <= 5; ++j) {
            mpq_class g = 0;
            for (int a = 0; a <= i; ++a)
                for (int b = 0; b <= j; ++b) g += ex.p[i][a] * ex.moments[a][b] * ex.q[j][b];
            if (i == j)
                CHECK(g == ex.h_ratio[i]);
            else
                CHECK(g == 0);
        }
}

TEST_CASE("exact charpoly average equals P_n for M = 1") {
    const ExactGaussianSystem ex = exact_gaussian_system(ModelSpec::gaussian(0.5), 6);
    const mpq_class z(3, 7);
    CHECK(exact_charpoly_average(ex, 4, {z}) == exact_eval_P(ex, 4, z));
    // M = 2 is a ratio of a 2x2 determinant and a Vandermonde.
    const mpq_class a(1, 3), b(-2, 5);
    const mpq_class det = exact_eval_P(ex, 3, a) * exact_eval_P(ex, 2, b) - exact_eval_P(ex, 2, a) * exact_eval_P(ex, 3, b);
    CHECK(exact_charpoly_average(ex, 2, {a, b}) == det / (a - b));
}

TEST_CASE("exact determinant") {
    std::vector<std::vector<mpq_class>> m{{mpq_class(1, 2), 1}, {3, mpq_class(2, 3)}};
    CHECK(exact_det(m) == mpq_class(1, 3) - 3);
}

TEST_CASE("sidecar text lists every pivot") {
    const ExactGaussianSystem ex = exact_gaussian_system(ModelSpec::gaussian(0.5), 3);
    const std::string s = exact_sidecar_text(ex);
    for (const char* key : {"\nh 0 1 1\n", "\nh 1 ", "\nh 2 ", "\nh 3 "}) CHECK(s.find(key) != std::string::npos);
}

TEST_CASE("non-gaussian models are rejected") {
    ModelSpec m = ModelSpec::gaussian(0.5);
    m.v_left = PolynomialPotential::from_terms({{4, 1.0}});
    CHECK_THROWS_AS(exact_gaussian_system(m, 3), Error);
}
