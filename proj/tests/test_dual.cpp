#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/dual.hpp"
#include "cmm/workspace.hpp"

using namespace cmm;

namespace {

// Direct tensor sum of (1/(z-x) | w | Q_j) on a plain Gauss rule (fine away from the axis).
cplx direct_P_tilde(const Workspace& ws, int j, cplx z, int order) {
    const SideRules r = build_side_rules(ws.model(), order);
    const KernelEvaluator k(ws.model().kernel);
    cplx s = 0;
    for (std::size_t a = 0; a < r.left.size(); ++a)
        for (std::size_t b = 0; b < r.right.size(); ++b)
            s += r.left.weights[a] * r.right.weights[b] * k(r.left.nodes[a], r.right.nodes[b]) *
                 ws.system().eval_Q(j, r.right.nodes[b]) / (z - r.left.nodes[a]);
    return s;
}

cplx direct_cauchy(const Workspace& ws, cplx z, cplx w, int order) {
    const SideRules r = build_side_rules(ws.model(), order);
    const KernelEvaluator k(ws.model().kernel);
    cplx s = 0;
    for (std::size_t a = 0; a < r.left.size(); ++a)
        for (std::size_t b = 0; b < r.right.size(); ++b)
            s += r.left.weights[a] * r.right.weights[b] * k(r.left.nodes[a], r.right.nodes[b]) /
                 ((z - r.left.nodes[a]) * (w - r.right.nodes[b]));
    return s;
}

}  // namespace

TEST_CASE("Hilbert transforms match direct quadrature off the axis") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    const DualTransforms& d = ws.dual();
    for (cplx z : {cplx(0.3, 2.0), cplx(-1.5, 1.2), cplx(4.0, -3.0)})
        for (int j : {0, 2, 5}) {
            const cplx a = d.P_tilde(j, z), b = direct_P_tilde(ws, j, z, 160);
            CHECK(std::abs(a - b) <= 1e-8 * std::abs(b) + 1e-12 * ws.system().norm(j));
        }
    const cplx z(0.5, 1.5), w(-0.2, -1.1);
    const cplx ref = direct_cauchy(ws, z, w, 160);
    CHECK(std::abs(d.cauchy_bimoment(z, w) - ref) < 1e-9 * std::abs(ref));
}

TEST_CASE("batch and single evaluation agree; far field is continuous") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    const DualTransforms& d = ws.dual();
    std::vector<cplx> buf(6);
    d.Q_tilde_upto(6, cplx(0.7, 1.3), buf.data());
    for (std::size_t j = 0; j < 6; ++j)
        CHECK(std::abs(buf[j] - d.Q_tilde(static_cast<int>(j), cplx(0.7, 1.3))) < 1e-14 * (1 + std::abs(buf[j])));

    // Leading large-|z| behaviour: ~P_0(z) ~ h_0 / z.
    const cplx far(0.0, 1e4);
    CHECK(std::abs(d.P_tilde(0, far) * far / ws.system().norm(0) - 1.0) < 1e-6);
}

TEST_CASE("points on the support are rejected") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    try {
        (void)ws.dual().P_tilde(1, cplx(0.2, 1e-14));
        FAIL("expected PoleOnContour");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PoleOnContour);
    }
    CHECK_THROWS_AS((void)ws.dual().P_tilde(ws.degree() + 1, cplx(0, 2)), Error);
}

TEST_CASE("dual CD kernel truncation reports its tail") {
    const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    const DualEvaluation e = dual_cd_kernel(ws.dual(), ws.system(), ws.model(), 2, cplx(0.5, 3.0), cplx(-0.4, 3.0),
                                            ws.degree(), 1e-3);
    CHECK(e.truncation == ws.degree());
    CHECK(e.tail >= 0.0);
    CHECK(e.tail < 1e-3 * std::abs(e.value));
    CHECK_THROWS_AS(dual_cd_kernel(ws.dual(), ws.system(), ws.model(), 2, cplx(0.1, 0.2), cplx(0.1, 0.25), ws.degree(), 1e-12),
                    Error);
}
