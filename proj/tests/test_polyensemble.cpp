#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/polyensemble.hpp"
#include "cmm/workspace.hpp"

using namespace cmm;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("weighted monomials reduce the ensemble to the coupled model") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const Workspace ws = Workspace::build(m);
    for (Side side : {Side::Left, Side::Right}) {
        const FunctionFamily fam = family_weighted_monomials(side, 8, m);
        const EnsembleMoments mom = pe_mixed_moments(m, fam, 10);
        const EnsembleBiorthogonalSystem es = pe_factorize(mom, fam);
        CHECK(es.size() == 8);
        for (int i = 0; i < 8; ++i) CHECK(es.norm(i) == doctest::Approx(ws.system().norm(i)).epsilon(1e-11));
        const CorrelatorResult z = pe_partition_function(es, 6, &mom);
        CHECK(z.diagnostics.extras.at("rel_diff") < 1e-10);

        // Polynomial partner on the other side is the ordinary P or Q.
        const cplx pt(0.4, 0.9);
        const cplx expect = side == Side::Left ? ws.system().eval_Q(5, pt) : ws.system().eval_P(5, pt);
        CHECK(rel(es.eval_poly(5, pt, 8), expect) < 1e-10);
        CHECK(rel(pe_charpoly_average(es, 5, SpectralPoints{pt}).full(), expect) < 1e-10);

        CHECK(pe_kernel_trace(es, m, 5, 96) == doctest::Approx(5.0).epsilon(1e-9));
    }
}

TEST_CASE("family coefficients are unit lower triangular") {
    const ModelSpec m = ModelSpec::gaussian(0.3);
    const FunctionFamily fam = family_shifted_exponentials(Side::Left, {-1.0, -0.3, 0.4, 1.1}, m);
    const EnsembleMoments mom = pe_mixed_moments(m, fam, 6);
    const EnsembleBiorthogonalSystem es = pe_factorize(mom, fam);
    const Eigen::MatrixXd& c = es.family_coeffs();
    for (int i = 0; i < 4; ++i) {
        CHECK(c(i, i) == 1.0);
        for (int k = i + 1; k < 4; ++k) CHECK(c(i, k) == 0.0);
    }
    const Eigen::MatrixXd p = es.poly_coeffs();
    for (int j = 0; j < 4; ++j) CHECK(p(j, j) == doctest::Approx(1.0));
    // The partner polynomials are biorthogonal to the F_i: recompute on a finer rule.
    const SideRules r = build_side_rules(m, 96);
    const KernelEvaluator k(m.kernel);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double g = 0;
            for (std::size_t a = 0; a < r.left.size(); ++a) {
                const double x = r.left.nodes[a];
                const double fx = es.eval_F(i, x) * r.left.weights[a] * std::exp(m.v_left(x));
                for (std::size_t b = 0; b < r.right.size(); ++b)
                    g += fx * k(x, r.right.nodes[b]) * r.right.weights[b] * es.eval_poly(j, r.right.nodes[b], 4).real();
            }
            const double scale = std::sqrt(std::abs(es.norm(i) * es.norm(j)));
            CHECK(std::abs(g - (i == j ? es.norm(i) : 0.0)) < 1e-9 * scale);
        }
}

TEST_CASE("degenerate and non-finite families are rejected") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    auto one = [](double) { return 1.0; };
    try {
        make_family("dup", Side::Left, {one, one}, m);
        FAIL("expected InvalidFamily");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidFamily);
    }
    CHECK_THROWS_AS(make_family("nan", Side::Left, {[](double) { return std::nan(""); }}, m), Error);
    CHECK_THROWS_AS(family_tabulated(Side::Right, {0.0, 1.0}, {{1.0}}, m), Error);
    CHECK_THROWS_AS(pe_unsupported("pair_average"), Error);
}

TEST_CASE("tabulated family evaluates piecewise linearly") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const std::vector<double> grid{-4.0, 0.0, 4.0};
    const FunctionFamily fam = family_tabulated(Side::Left, grid, {{1.0, 1.0, 1.0}, {-4.0, 0.0, 4.0}}, m);
    CHECK(fam.size() == 2);
    CHECK(fam.functions[1](2.0) == doctest::Approx(2.0));
    CHECK(fam.functions[0](5.0) == 0.0);
    CHECK(fam.certificate > 0.0);
}

TEST_CASE("schur average on the polynomial side") {
    const ModelSpec m = ModelSpec::gaussian(0.5);
    const FunctionFamily fam = family_weighted_monomials(Side::Left, 6, m);
    const EnsembleMoments mom = pe_mixed_moments(m, fam, 8);
    CHECK(rel(pe_schur_average(mom, {}, 3).full(), 1.0) < 1e-12);
    // N = 1: <y> vanishes, <y^2> = 1 / (1 - c^2).
    CHECK(std::abs(pe_schur_average(mom, Partition{1}, 1).full()) < 1e-12);
    CHECK(rel(pe_schur_average(mom, Partition{2}, 1).full(), 1.0 / 0.75) < 1e-12);
}
