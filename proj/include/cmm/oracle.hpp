#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cmm/correlators.hpp"
#include "cmm/model.hpp"
#include "cmm/schur.hpp"

namespace cmm {

enum class OracleMethod { TensorQuadrature, MonteCarlo };

struct OracleEstimate {
    cplx value{0.0, 0.0};
    OracleMethod method = OracleMethod::TensorQuadrature;
    double error_bound = 0.0;  // quadrature: |working - companion|; MC: 3 standard errors
    long long samples = 0;
    std::uint64_t seed = 0;
    int order = 0;
    int companion_order = 0;
};

// Eigenvalue observable. Product form O = prod_i f(x_i) prod_j g(y_j) (an unset factor is 1)
// takes the vectorized path; `general` switches to a plain callable on (X_L, X_R).
// Observables must be symmetric under permutations within each side.
struct Observable {
    std::string name;
    std::function<cplx(double)> left_factor;
    std::function<cplx(double)> right_factor;
    std::function<cplx(std::span<const double>, std::span<const double>)> general;

    bool is_product() const { return !general; }
    cplx evaluate(std::span<const double> xs, std::span<const double> ys) const;
};

Observable observable_one();
// prod_alpha det(z_alpha - X_side)
Observable observable_charpoly(Side side, std::vector<cplx> zs);
// prod_alpha 1/det(z_alpha - X_side)
Observable observable_inverse_charpoly(Side side, std::vector<cplx> zs);
// prod_alpha det(z_alpha - X_L) det(w_alpha - X_R)
Observable observable_pair(std::vector<cplx> zs, std::vector<cplx> ws);
// prod_alpha 1/(det(z_alpha - X_L) det(w_alpha - X_R))
Observable observable_inverse_pair(std::vector<cplx> zs, std::vector<cplx> ws);
Observable observable_mixed(std::vector<cplx> zs, std::vector<cplx> ws, Orientation orientation);
// s_lambda(X_L) s_mu(X_R)
Observable observable_schur(Partition lam, Partition mu);

struct OracleOptions {
    int order = 64;
    int companion_order = 0;  // 0: doubled when affordable, else 3/4 of the order
    int threads = 0;          // 0: hardware concurrency
};

// Z_n as the sum over strictly increasing node tuples on each side of
// Delta(X) det w(x_i, y_j) Delta(Y) times the weights; equals the full tensor sum / n!^2.
OracleEstimate brute_force_Z(const ModelSpec& model, int n, const OracleOptions& opts = {});
OracleEstimate brute_force_expectation(const ModelSpec& model, int n, const Observable& obs,
                                       const OracleOptions& opts = {});

// Self-normalized importance sampling with per-eigenvalue Gaussian proposals.
OracleEstimate mc_expectation(const ModelSpec& model, int n, const Observable& obs, long long samples,
                              std::uint64_t seed);

struct AhCheck {
    double lhs = 0.0;  // (1/n!) sum over the n-fold tensor grid of det f_i(x_j) det g_i(x_j)
    double rhs = 0.0;  // det of the pairwise integrals on the same rule
    double relative = 0.0;
};
using RealFunction = std::function<double(double)>;
AhCheck ah_identity_check(const std::vector<RealFunction>& f, const std::vector<RealFunction>& g,
                          const PolynomialPotential& v, const Interval& domain, int order);

}  // namespace cmm
