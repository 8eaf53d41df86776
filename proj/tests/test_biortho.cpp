#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/biortho.hpp"
#include "cmm/exact.hpp"
#include "cmm/workspace.hpp"

using namespace cmm;

TEST_CASE("Stieltjes basis reproduces Hermite recurrence") {
    const GaussRule h = gauss_hermite(40);
    const PolyBasis b = PolyBasis::stieltjes(h.nodes, h.weights, 10);
    for (int k = 0; k < 10; ++k) {
        CHECK(std::abs(b.alpha()[static_cast<std::size_t>(k)]) < 1e-12);
        if (k > 0) CHECK(b.beta()[static_cast<std::size_t>(k)] == doctest::Approx(double(k)).epsilon(1e-12));
    }
    const Eigen::MatrixXd m = b.monomial_matrix();
    // He_3 = x^3 - 3x
    CHECK(m(3, 3) == 1.0);
    CHECK(m(3, 1) == doctest::Approx(-3.0));
    CHECK(PolyBasis::monomial(4).is_monomial());
}

TEST_CASE("factorization is biorthogonal and matches exact pivots") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    WorkspaceOptions o;
    o.degree = 10;
    const Workspace ws = Workspace::build(m, o);
    const BiorthogonalSystem& sys = ws.system();
    CHECK(sys.degree() == 10);
    CHECK(sys.warnings().empty());

    const ExactGaussianSystem ex = exact_gaussian_system(m, 10);
    for (int i = 0; i <= 10; ++i) CHECK(sys.norm(i) == doctest::Approx(ex.h(i)).epsilon(1e-12));

    const SideRules fine = build_side_rules(m, 128);
    const Eigen::MatrixXd g = recomputed_gram(sys, m, fine);
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
            const double scale = std::sqrt(sys.norm(i) * sys.norm(j));
            CHECK(std::abs(g(i, j) - (i == j ? sys.norm(i) : 0.0)) / scale < 1e-11);
        }
}

TEST_CASE("monic polynomials and monomial rows agree") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.3));
    const BiorthogonalSystem& sys = ws.system();
    const Eigen::MatrixXd p = sys.p_coeffs();
    for (int i = 0; i <= sys.degree(); ++i) CHECK(p(i, i) == 1.0);
    const cplx z(0.4, -0.7);
    for (int i : {0, 3, 7}) {
        cplx acc = 0;
        for (int k = i; k >= 0; --k) acc = acc * z + p(i, k);
        CHECK(std::abs(acc - sys.eval_P(i, z)) < 1e-10 * (1 + std::abs(acc)));
    }
    std::vector<double> buf(5);
    sys.eval_Q_upto(5, 1.3, buf.data());
    CHECK(buf[4] == doctest::Approx(sys.eval_Q(4, 1.3)));
}

TEST_CASE("CD kernel reproduces and its trace counts") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const Workspace ws = Workspace::build(m);
    const SideRules r = build_side_rules(m, 96);
    for (int n : {1, 4, 8}) {
        CHECK(kernel_trace(ws.system(), m, r, n) == doctest::Approx(double(n)).epsilon(1e-10));
        CHECK(reproducing_residual(ws.system(), m, r, n) < 1e-9);
    }
    const cplx a = cd_kernel(ws.system(), m, 5, 0.3, -0.2);
    const cplx b = cd_kernel_waves(ws.system(), m, 5, 0.3, -0.2);
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
}

TEST_CASE("singular leading minor is reported with its index") {
    Eigen::MatrixXd e(3, 3);
    e << 1, 2, 3, 2, 4, 5, 3, 5, 7;  // 2x2 minor vanishes
    try {
        factorize(BimomentMatrix::from_monomial(e));
        FAIL("expected SingularMinorError");
    } catch (const SingularMinorError& err) {
        CHECK(err.minor() == 2);
        CHECK(err.code() == ErrorCode::SingularMinor);
    }
}

TEST_CASE("unresolved quadrature near critical coupling is flagged") {
    WorkspaceOptions o;
    o.degree = 12;
    o.order = 64;
    const Workspace hot = Workspace::build(ModelSpec::gaussian(0.99), o);
    CHECK_FALSE(hot.system().warnings().empty());
    bool drift = false;
    for (const auto& w : hot.system().warnings()) drift = drift || w.drift > o.factor.drift_threshold;
    CHECK(drift);
}
