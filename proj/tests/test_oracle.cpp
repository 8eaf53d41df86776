#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/oracle.hpp"
#include "cmm/workspace.hpp"

using namespace cmm;

namespace {

OracleOptions opts(int order, int companion) {
    OracleOptions o;
    o.order = order;
    o.companion_order = companion;
    return o;
}

}  // namespace

TEST_CASE("the constant observable averages to one") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const OracleEstimate q = brute_force_expectation(m, 2, observable_one(), opts(32, 40));
    CHECK(std::abs(q.value - 1.0) < 1e-13);
    const OracleEstimate mc = mc_expectation(m, 2, observable_one(), 2000, 7);
    CHECK(std::abs(mc.value - 1.0) < 1e-13);
}

TEST_CASE("brute-force Z equals the product of pivots") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const Workspace ws = Workspace::build(m);
    for (int n : {1, 2}) {
        const OracleEstimate z = brute_force_Z(m, n, opts(64, 80));
        double prod = 1;
        for (int i = 0; i < n; ++i) prod *= ws.system().norm(i);
        CHECK(z.value.real() == doctest::Approx(prod).epsilon(1e-11));
        CHECK(z.error_bound < 1e-9 * prod);
    }
}

TEST_CASE("Monte Carlo agrees with quadrature within its error bar at n=2") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const Observable obs = observable_charpoly(Side::Left, {{1.0, 0.5}});
    const OracleEstimate q = brute_force_expectation(m, 2, obs, opts(48, 64));
    const OracleEstimate mc = mc_expectation(m, 2, obs, 200000, 20240611);
    CHECK(mc.method == OracleMethod::MonteCarlo);
    CHECK(mc.error_bound > 0.0);
    CHECK(std::abs(mc.value - q.value) <= mc.error_bound);
}

TEST_CASE("Monte Carlo is deterministic for a fixed seed") {
    const ModelSpec m = ModelSpec::gaussian(0.3);
    const Observable obs = observable_pair({{0.5, 1.0}}, {{-0.2, 0.7}});
    const OracleEstimate a = mc_expectation(m, 2, obs, 5000, 99);
    const OracleEstimate b = mc_expectation(m, 2, obs, 5000, 99);
    const OracleEstimate c = mc_expectation(m, 2, obs, 5000, 100);
    CHECK(a.value == b.value);
    CHECK(a.error_bound == b.error_bound);
    CHECK(a.value != c.value);
    CHECK(a.seed == 99);
}

TEST_CASE("product and general observables agree") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    Observable general;
    general.name = "general charpoly";
    general.general = [](std::span<const double> xs, std::span<const double>) {
        cplx p = 1;
        for (double x : xs) p *= cplx(1.5, 0.5) - x;
        return p;
    };
    const OracleEstimate a = brute_force_expectation(m, 2, observable_charpoly(Side::Left, {{1.5, 0.5}}), opts(24, 32));
    const OracleEstimate b = brute_force_expectation(m, 2, general, opts(24, 32));
    CHECK(std::abs(a.value - b.value) < 1e-12 * std::abs(a.value));
}

TEST_CASE("Andreief-Heine identity on a discrete rule") {
    // Mixed parities so the determinant of integrals is far from zero.
    std::vector<RealFunction> f{[](double) { return 1.0; }, [](double x) { return x + 0.3; },
                                [](double x) { return std::sin(x) + 0.5 * x * x; }};
    std::vector<RealFunction> g{[](double x) { return std::cos(x) + x; }, [](double x) { return x * x - 0.4 * x; },
                                [](double x) { return std::exp(0.2 * x); }};
    const AhCheck r = ah_identity_check(f, g, PolynomialPotential::quadratic(0.5), Interval::real_line(), 20);
    CHECK(std::abs(r.rhs) > 1e-3);
    CHECK(r.relative < 1e-12);
}

TEST_CASE("oracle preconditions") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    try {
        brute_force_expectation(m, 4, observable_one(), opts(16, 20));
        FAIL("expected GridTooLarge");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::GridTooLarge);
    }
    CHECK_THROWS_AS(mc_expectation(m, 1, observable_one(), 1, 1), Error);
    try {
        brute_force_expectation(m, 1, observable_inverse_charpoly(Side::Left, {{0.0, 0.0}}), opts(17, 21));
        FAIL("expected NonFiniteObservable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteObservable);
    }
}
