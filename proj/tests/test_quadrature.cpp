#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cmm/quadrature.hpp"

using namespace cmm;

namespace {

double sum_weights(const QuadratureRule& r, int power) {
    double s = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) s += r.weights[k] * std::pow(r.nodes[k], power);
    return s;
}

}  // namespace

TEST_CASE("classical Gauss rules integrate polynomials exactly") {
    const GaussRule h = gauss_hermite(20);
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t k = 0; k < h.nodes.size(); ++k) {
        m0 += h.weights[k];
        m2 += h.weights[k] * h.nodes[k] * h.nodes[k];
        m4 += h.weights[k] * std::pow(h.nodes[k], 4);
    }
    const double s2pi = std::sqrt(2 * std::numbers::pi);
    CHECK(m0 == doctest::Approx(s2pi).epsilon(1e-14));
    CHECK(m2 == doctest::Approx(s2pi).epsilon(1e-14));
    CHECK(m4 == doctest::Approx(3 * s2pi).epsilon(1e-14));

    const GaussRule l = gauss_laguerre(15);
    double f3 = 0;
    for (std::size_t k = 0; k < l.nodes.size(); ++k) f3 += l.weights[k] * std::pow(l.nodes[k], 3);
    CHECK(f3 == doctest::Approx(6.0).epsilon(1e-13));

    const GaussRule g = gauss_legendre(7);
    double p12 = 0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) p12 += g.weights[k] * std::pow(g.nodes[k], 12);
    CHECK(p12 == doctest::Approx(2.0 / 13.0).epsilon(1e-14));
}

TEST_CASE("Hermite tail weights stay relatively accurate") {
    const GaussRule h = gauss_hermite(128);
    for (std::size_t k = 0; k < h.nodes.size(); ++k) CHECK(h.weights[k] > 0.0);
    // Symmetric rule: mirrored weights agree to high relative accuracy even far in the tail.
    CHECK(h.weights.front() / h.weights.back() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quadratic real-line rule is exact for shifted Gaussian moments") {
    const PolynomialPotential v({0.3, -0.4, 0.7});
    const QuadratureRule r = build_rule(v, Interval::real_line(), 40);
    CHECK(r.kind == RuleKind::GaussHermite);
    CHECK(rule_exactness_error(r, v, 30) < 1e-13);
}

TEST_CASE("non-quadratic potentials get Gauss rules of their own weight") {
    const auto v = PolynomialPotential::from_terms({{4, 0.25}, {2, -0.5}});
    const QuadratureRule a = build_rule(v, Interval::real_line(), 32);
    const QuadratureRule b = build_rule(v, Interval::real_line(), 128);
    for (std::size_t k = 1; k < a.size(); ++k) CHECK(a.nodes[k] > a.nodes[k - 1]);
    for (int p : {0, 2, 6, 40}) CHECK(sum_weights(a, p) == doctest::Approx(sum_weights(b, p)).epsilon(1e-13));
    // x^2 on the half-line: Gauss rule of the weight itself is exact for low moments.
    const QuadratureRule h = build_rule(PolynomialPotential({0.0, 0.0, 1.0}), Interval::half_line(), 24);
    CHECK(sum_weights(h, 1) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(sum_weights(h, 0) == doctest::Approx(std::sqrt(std::numbers::pi) / 2).epsilon(1e-13));
}

TEST_CASE("half-line and finite rules") {
    const PolynomialPotential lin({0.0, 1.0});
    const QuadratureRule r = build_rule(lin, Interval::half_line(), 30);
    CHECK(sum_weights(r, 0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(sum_weights(r, 4) == doctest::Approx(24.0).epsilon(1e-12));

    const QuadratureRule c = build_rule(lin, Interval::half_line(), 120, Clustering::Endpoint);
    CHECK(sum_weights(c, 0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.nodes.front() < 1e-3);

    const QuadratureRule f = build_rule(PolynomialPotential({0.0}), {-1.0, 2.0}, 10);
    CHECK(sum_weights(f, 2) == doctest::Approx(3.0).epsilon(1e-14));

    // (-inf, 0] with V = -x mirrors the Laguerre case.
    const QuadratureRule m = build_rule(PolynomialPotential({0.0, -1.0}), {-kInf, 0.0}, 30);
    CHECK(sum_weights(m, 1) == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK_THROWS_AS(build_rule(lin, {1.0, 1.0}, 10), Error);
    CHECK_THROWS_AS(build_rule(lin, Interval::half_line(), 1), Error);
}

TEST_CASE("gaussian bimoments against closed forms") {
    // E[x y] under e^{-x^2/2 - y^2/2 + cxy} normalized: c / (1 - c^2).
    const double c = 0.5;
    const BimomentMatrix bm = bimoment_matrix(ModelSpec::gaussian(c), 4, 48);
    const double z0 = 2 * std::numbers::pi / std::sqrt(1 - c * c);
    CHECK(bm.entries(0, 0) == doctest::Approx(z0).epsilon(1e-14));
    CHECK(bm.entries(1, 1) / z0 == doctest::Approx(c / (1 - c * c)).epsilon(1e-13));
    CHECK(bm.entries(2, 0) / z0 == doctest::Approx(1 / (1 - c * c)).epsilon(1e-13));
    CHECK(std::abs(bm.entries(1, 0)) < 1e-14);
    CHECK((bm.entries - bm.entries.transpose()).norm() < 1e-12 * bm.entries.norm());
    CHECK(bm.gram.rows() == 5);
    CHECK_THROWS_AS(bimoment_matrix(ModelSpec::gaussian(c), 60, 48), Error);
}

TEST_CASE("chain kernel reduces to a gaussian coupling") {
    // Integrating a middle Gaussian matrix with e^{xz} e^{zy} e^{-z^2/2} gives sqrt(2pi)/(2pi) e^{(x+y)^2/2}.
    const std::vector<InnerFactor> inner{{PolynomialPotential::quadratic(0.5), Interval::real_line()}};
    const KernelEvaluator k = effective_chain_kernel(inner, Interaction::Exponential, 64);
    for (auto [x, y] : {std::pair{0.1, 0.2}, std::pair{-0.5, 0.3}, std::pair{0.7, 0.4}}) {
        const double expect = std::sqrt(2 * std::numbers::pi) / (2 * std::numbers::pi) * std::exp(0.5 * (x + y) * (x + y));
        CHECK(k(x, y) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("kernel table matches pointwise evaluation") {
    const KernelEvaluator k(CouplingKernel{ExpProduct{0.3}});
    const std::vector<double> xs{-1.0, 0.0, 2.0}, ys{0.5, 1.5};
    const Eigen::MatrixXd t = k.table(xs, ys);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) CHECK(t(i, j) == doctest::Approx(std::exp(0.3 * xs[i] * ys[j])));
    const KernelEvaluator cs(CouplingKernel{CauchyShift{}});
    CHECK(cs(1.0, 3.0) == doctest::Approx(0.25));
}
