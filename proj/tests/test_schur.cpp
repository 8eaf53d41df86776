#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cmm/schur.hpp"

using namespace cmm;

TEST_CASE("partitions normalize and transpose") {
    const Partition p{3, 1, 0, 0};
    CHECK(p.length() == 2);
    CHECK(p.weight() == 4);
    CHECK(p.part(1) == 3);
    CHECK(p.part(5) == 0);
    CHECK(p.transpose() == Partition{2, 1, 1});
    CHECK(p.transpose().transpose() == p);
    CHECK(p.fits_box(3, 2));
    CHECK_FALSE(p.fits_box(2, 2));
    CHECK_THROWS_AS(Partition({1, 2}), Error);
    CHECK_THROWS_AS(Partition({-1}), Error);
}

TEST_CASE("box enumeration and dual partitions") {
    // Partitions inside (m^n) number C(m+n, n).
    CHECK(partitions_in_box(2, 3).size() == 10);
    CHECK(partitions_in_box(0, 4).size() == 1);
    CHECK(partitions_up_to(4, 4).size() == 1 + 1 + 2 + 3 + 5);
    CHECK(dual_partition(Partition{}, 2, 3) == Partition{3, 3});
    CHECK(dual_partition(Partition{2, 2, 2}, 2, 3) == Partition{});
    for (const Partition& lam : partitions_in_box(2, 3)) {
        const Partition v = dual_partition(lam, 2, 3);
        CHECK(v.fits_box(3, 2));
        CHECK(v.weight() == 2 * 3 - lam.weight());
    }
}

TEST_CASE("Jacobi-Trudi and bialternant agree") {
    const std::vector<cplx> xs{{0.3, 0.1}, {-0.7, 0.4}, {1.2, -0.5}, {0.05, 0.9}};
    for (const Partition& lam : partitions_up_to(6, 4)) {
        const cplx a = schur_eval_jt(lam, xs), b = schur_eval_bialternant(lam, xs);
        CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    }
    // s_(1)(x) = e_1, s_(1,1) = e_2
    const std::vector<cplx> ys{1.0, 2.0, 3.0};
    CHECK(std::abs(schur_eval_jt(Partition{1}, ys) - 6.0) < 1e-14);
    CHECK(std::abs(schur_eval_jt(Partition{1, 1}, ys) - 11.0) < 1e-13);
    CHECK(std::abs(schur_eval_jt(Partition{2}, ys) - 25.0) < 1e-13);
    // More parts than variables vanish.
    CHECK(std::abs(schur_eval_jt(Partition{1, 1, 1, 1}, ys)) < 1e-14);
    CHECK(schur_eval_bialternant(Partition{}, ys) == cplx(1.0, 0.0));
    CHECK_THROWS_AS(schur_eval_bialternant(Partition{1}, std::vector<cplx>{1.0, 1.0}), Error);
}

TEST_CASE("finite Cauchy-box expansion reproduces the product") {
    const std::vector<cplx> zs{{2.0, 1.0}, {-1.0, 0.5}};
    const std::vector<cplx> xs{{0.3, 0.0}, {-0.4, 0.0}, {1.1, 0.0}};
    const cplx lhs = charpoly_product(zs, xs);
    CHECK(std::abs(cauchy_box_expansion(zs, xs) - lhs) < 1e-12 * std::abs(lhs));
}

TEST_CASE("inverse expansion converges for small eigenvalues") {
    const std::vector<cplx> zs{{3.0, 1.0}};
    const std::vector<cplx> xs{{0.3, 0.0}, {-0.2, 0.0}};
    const cplx exact = 1.0 / charpoly_product(zs, xs);
    CHECK(std::abs(truncated_inverse_expansion(zs, xs, 30) - exact) < 1e-12 * std::abs(exact));
}
