#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/correlators.hpp"
#include "cmm/oracle.hpp"

using namespace cmm;

namespace {

const Workspace& reference() {
    static const Workspace ws = Workspace::build(ModelSpec::gaussian(0.5));
    return ws;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

OracleOptions small_oracle() {
    OracleOptions o;
    o.order = 96;
    o.companion_order = 128;
    return o;
}

}  // namespace

TEST_CASE("partition function matches the bimoment determinant") {
    const Workspace& ws = reference();
    for (int n : {1, 3, 6, 10}) {
        const CorrelatorResult z = partition_function(ws.system(), n, &ws.bimoments());
        CHECK(z.diagnostics.extras.at("rel_diff") < 1e-10);
    }
    const ScaledValue r = partition_ratio(ws.system(), 5, 3);
    CHECK(std::abs(r.value() - ws.system().norm(3) * ws.system().norm(4)) < 1e-12 * std::abs(r.value()));
    CHECK(partition_function(ws.system(), 0).full() == cplx(1.0, 0.0));
}

TEST_CASE("single charpoly average is the biorthogonal polynomial") {
    const Workspace& ws = reference();
    const cplx z(0.7, -0.3);
    CHECK(rel(charpoly_average(ws.system(), Side::Left, 4, SpectralPoints{z}).full(), ws.system().eval_P(4, z)) < 1e-14);
    CHECK(rel(charpoly_average(ws.system(), Side::Right, 4, SpectralPoints{z}).full(), ws.system().eval_Q(4, z)) < 1e-14);
    // Symmetric model: both sides agree.
    const SpectralPoints zs{{1.0, 0.5}, {-0.4, 1.0}};
    CHECK(rel(charpoly_average(ws.system(), Side::Left, 3, zs).full(),
              charpoly_average(ws.system(), Side::Right, 3, zs).full()) < 1e-10);
    // N = 0: the determinant of monic P_{M-beta} over the Vandermonde is 1.
    CHECK(rel(charpoly_average(ws.system(), Side::Left, 0, zs).full(), 1.0) < 1e-12);
    CHECK_THROWS_AS(charpoly_average(ws.system(), Side::Left, ws.degree(), zs), Error);
}

TEST_CASE("charpoly average at N=1 against the tensor oracle") {
    const Workspace& ws = reference();
    const std::vector<cplx> z{{1.5, 0.5}, {-0.5, -1.0}};
    const cplx f = charpoly_average(ws.system(), Side::Left, 1, SpectralPoints(z)).full();
    const OracleEstimate o = brute_force_expectation(ws.model(), 1, observable_charpoly(Side::Left, z), small_oracle());
    CHECK(rel(f, o.value) < 1e-10);
}

TEST_CASE("inverse averages: branches agree and match the oracle at N=1") {
    const Workspace& ws = reference();
    const SpectralPoints z1{{2.0, 1.0}};
    const cplx small = charpoly_inverse_average_small(ws, Side::Left, 1, z1).full();
    const cplx large = charpoly_inverse_average_large(ws, Side::Left, 1, z1).full();
    CHECK(rel(small, large) < 1e-10);
    const OracleEstimate o =
        brute_force_expectation(ws.model(), 1, observable_inverse_charpoly(Side::Left, {{2.0, 1.0}}), small_oracle());
    CHECK(rel(small, o.value) < 1e-8);

    const SpectralPoints z3{{2.0, 1.0}, {-1.0, 1.5}, {0.5, -2.0}};
    const cplx bi = charpoly_inverse_average_large(ws, Side::Right, 1, z3).full();
    const cplx mono = charpoly_inverse_average_large(ws, Side::Right, 1, z3, RowBasis::Monomial).full();
    CHECK(rel(bi, mono) < 1e-10);

    // M > N is outside the small branch; real points on the support are poles.
    CHECK_THROWS_AS(charpoly_inverse_average_small(ws, Side::Left, 1, z3), Error);
    try {
        (void)charpoly_inverse_average_small(ws, Side::Left, 2, SpectralPoints{{0.1, 0.0}});
        FAIL("expected PoleOnContour");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PoleOnContour);
    }
}

TEST_CASE("pair average at N=0 and N=1") {
    const Workspace& ws = reference();
    const cplx z(1.0, 0.5), w(-0.5, 1.0);
    // No eigenvalues: the empty determinants are 1.
    const cplx n0 = pair_charpoly_average(ws.system(), 0, SpectralPoints{z}, SpectralPoints{w}).full();
    CHECK(rel(n0, 1.0) < 1e-12);
    const cplx f = pair_charpoly_average(ws.system(), 1, SpectralPoints{z}, SpectralPoints{w}).full();
    const OracleEstimate o = brute_force_expectation(ws.model(), 1, observable_pair({z}, {w}), small_oracle());
    CHECK(rel(f, o.value) < 1e-10);
}

TEST_CASE("inverse pair branches agree and report a tail") {
    const Workspace& ws = reference();
    const SpectralPoints z{{2.0, 1.0}}, w{{2.0, -1.0}};
    const CorrelatorResult a = pair_inverse_average_small(ws, 1, z, w);
    const CorrelatorResult b = pair_inverse_average_large(ws, 1, z, w);
    CHECK(rel(a.full(), b.full()) < 1e-6);
    CHECK(a.diagnostics.tail >= 0.0);
    CHECK(b.diagnostics.condition >= 1.0);
}

TEST_CASE("mixed pair: closed form, general formula and oracle") {
    const Workspace& ws = reference();
    const cplx z(0.8, 0.0), w(0.5, 1.5);
    for (int n : {1, 2, 3}) {
        const cplx g = mixed_pair_average(ws, n, SpectralPoints{z}, SpectralPoints{w}, Orientation::LeftNumerator).full();
        const cplx c = mixed_pair_m1_closed_form(ws, n, z, w, Orientation::LeftNumerator).full();
        CHECK(rel(g, c) < 1e-10);
        const cplx g2 = mixed_pair_average(ws, n, SpectralPoints{w}, SpectralPoints{z}, Orientation::RightNumerator).full();
        const cplx c2 = mixed_pair_m1_closed_form(ws, n, w, z, Orientation::RightNumerator).full();
        CHECK(rel(g2, c2) < 1e-10);
    }
    const OracleEstimate o =
        brute_force_expectation(ws.model(), 1, observable_mixed({z}, {w}, Orientation::LeftNumerator), small_oracle());
    CHECK(rel(mixed_pair_average(ws, 1, SpectralPoints{z}, SpectralPoints{w}, Orientation::LeftNumerator).full(), o.value) <
          1e-8);
}

TEST_CASE("schur averages") {
    const Workspace& ws = reference();
    CHECK(rel(schur_average(ws.bimoments(), {}, {}, 3).full(), 1.0) < 1e-12);
    // N = 1: <x y> = c / (1 - c^2).
    CHECK(rel(schur_average(ws.bimoments(), Partition{1}, Partition{1}, 1).full(), 0.5 / 0.75) < 1e-12);
    // Odd total degree vanishes by parity.
    CHECK(std::abs(schur_average(ws.bimoments(), Partition{1}, {}, 2).full()) < 1e-12);
    CHECK_THROWS_AS(schur_average(ws.bimoments(), Partition{12}, {}, 2), Error);
}
