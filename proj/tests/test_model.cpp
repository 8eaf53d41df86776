#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "cmm/model.hpp"

using namespace cmm;

namespace {

bool has_code(const std::vector<Violation>& v, ErrorCode code) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == code; });
}

}  // namespace

TEST_CASE("potential trims, sums terms and evaluates") {
    const PolynomialPotential v({1.0, 0.0, 0.5, 0.0, 0.0});
    CHECK(v.degree() == 2);
    CHECK(v.leading() == doctest::Approx(0.5));
    CHECK(v(2.0) == doctest::Approx(3.0));
    CHECK(v.derivative(2.0) == doctest::Approx(2.0));
    CHECK(std::abs(v(cplx(0.0, 1.0)) - cplx(0.5, 0.0)) < 1e-15);

    const auto w = PolynomialPotential::from_terms({{4, 0.25}, {2, 0.5}, {2, 0.5}});
    CHECK(w.degree() == 4);
    CHECK(w.coefficient(2) == doctest::Approx(1.0));
    CHECK(w.coefficient(3) == 0.0);
    CHECK_THROWS_AS(PolynomialPotential::from_terms({{-1, 1.0}}), Error);
}

TEST_CASE("gaussian reference model validates") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    CHECK(check_model(m).empty());
    CHECK_NOTHROW(validate_model(m));
}

TEST_CASE("invariant violations are all reported") {
    ModelSpec m = ModelSpec::gaussian(0.5);
    m.v_left = PolynomialPotential({0.0, 0.0, 0.0, 1.0});  // odd degree on R
    m.v_right = PolynomialPotential({0.0, 0.0, -1.0});     // negative leading coefficient
    const auto v = check_model(m);
    CHECK(v.size() >= 2);
    CHECK(has_code(v, ErrorCode::InvalidPotential));
    try {
        validate_model(m);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.violations().size() == v.size());
    }
}

TEST_CASE("gaussian coupling at or beyond the critical value diverges") {
    CHECK(has_code(check_model(ModelSpec::gaussian(1.0)), ErrorCode::DivergentCoupling));
    CHECK(has_code(check_model(ModelSpec::gaussian(-1.2)), ErrorCode::DivergentCoupling));
    CHECK(check_model(ModelSpec::gaussian(0.99)).empty());
    // A quartic side tames any finite c.
    ModelSpec q = ModelSpec::gaussian(3.0);
    q.v_left = PolynomialPotential::from_terms({{4, 0.25}});
    CHECK(check_model(q).empty());
}

TEST_CASE("cauchy kernel needs non-negative domains") {
    ModelSpec m;
    m.v_left = PolynomialPotential({0.0, 1.0});
    m.v_right = PolynomialPotential({0.0, 1.0});
    m.kernel = CauchyShift{};
    m.domain_left = Interval::half_line();
    m.domain_right = Interval::half_line();
    CHECK(check_model(m).empty());
    m.domain_right = Interval::real_line();
    CHECK(has_code(check_model(m), ErrorCode::DomainPoleOverlap));
}

TEST_CASE("half-line potentials must grow towards the open end") {
    ModelSpec m = ModelSpec::gaussian(0.1);
    m.domain_left = Interval::half_line();
    m.v_left = PolynomialPotential({0.0, -1.0});
    CHECK(has_code(check_model(m), ErrorCode::InvalidPotential));
    m.v_left = PolynomialPotential({0.0, 1.0});
    CHECK(check_model(m).empty());
    m.domain_left = {2.0, 1.0};
    CHECK(has_code(check_model(m), ErrorCode::UnsupportedDomain));
}

TEST_CASE("tabulated kernel interpolates bilinearly and vanishes outside") {
    Tabulated t{{0.0, 1.0}, {0.0, 2.0}, {1.0, 3.0, 5.0, 7.0}};
    CHECK(t(0.0, 0.0) == doctest::Approx(1.0));
    CHECK(t(1.0, 2.0) == doctest::Approx(7.0));
    CHECK(t(0.5, 1.0) == doctest::Approx(4.0));
    CHECK(t(1.5, 1.0) == 0.0);

    ModelSpec m = ModelSpec::gaussian(0.0);
    m.kernel = Tabulated{{0.0, 1.0}, {0.0}, {1.0}};
    CHECK(has_code(check_model(m), ErrorCode::InvalidKernel));
}

TEST_CASE("fingerprints are stable and sensitive") {
    const ModelSpec a = ModelSpec::gaussian(0.5);
    const ModelSpec b = ModelSpec::gaussian(0.5);
    const ModelSpec c = ModelSpec::gaussian(0.5000000000000001);
    CHECK(model_fingerprint(a) == model_fingerprint(b));
    CHECK(model_fingerprint(a) != model_fingerprint(c));
    CHECK(model_fingerprint(a).size() == 16);
    CHECK(hex64(fnv1a64("")) == "cbf29ce484222325");
    CHECK(kernel_name(a.kernel) == "exp_product");
}

TEST_CASE("spectral points must be distinct and finite") {
    CHECK_NOTHROW(SpectralPoints({cplx(1, 1), cplx(2, 1)}));
    CHECK_THROWS_AS(SpectralPoints({cplx(1, 1), cplx(1, 1)}), Error);
    CHECK_THROWS_AS(SpectralPoints({cplx(std::nan(""), 0.0)}), Error);
}
