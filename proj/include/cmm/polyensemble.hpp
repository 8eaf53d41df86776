#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cmm/correlators.hpp"
#include "cmm/model.hpp"
#include "cmm/polynomial.hpp"

namespace cmm {

using RealFunction = std::function<double(double)>;

// f_0..f_{K-1} on one side of the coupled polynomial ensemble. The function side carries
// no e^{-V} weight of its own; built-ins that want one include it explicitly.
struct FunctionFamily {
    std::string name;
    Side side = Side::Left;
    std::vector<RealFunction> functions;
    int order_hint = 64;       // quadrature order used for the mixed moments
    double certificate = 0.0;  // |det f_i(t_k)| / prod_i ||f_i(t)|| at K probe points t_k

    int size() const { return static_cast<int>(functions.size()); }
};

// Validates the family (finite values, nonzero certificate); throws InvalidFamily.
FunctionFamily make_family(std::string name, Side side, std::vector<RealFunction> functions, const ModelSpec& model,
                           int order_hint = 64);
FunctionFamily family_monomials(Side side, int count, const ModelSpec& model);
// x^i e^{-V_side(x)}: reduces the ensemble to the ordinary coupled model.
FunctionFamily family_weighted_monomials(Side side, int count, const ModelSpec& model);
// e^{s_i x - V_side(x)}
FunctionFamily family_shifted_exponentials(Side side, const std::vector<double>& shifts, const ModelSpec& model);
// Piecewise-linear interpolation of values[i] on a strictly increasing grid; zero outside it.
FunctionFamily family_tabulated(Side side, const std::vector<double>& grid, const std::vector<std::vector<double>>& values,
                                const ModelSpec& model);

// Mixed moments between the family (rows) and polynomials of the other side (columns, degree <= d):
//   side L: (f_i | w | y^j) with weight e^{-V_R} on y only,
//   side R: (x^j | w | f_i) with weight e^{-V_L} on x only.
struct EnsembleMoments {
    Side side = Side::Left;
    int degree = 0;
    int order = 0;
    Eigen::MatrixXd monomial;  // K x (d+1), monomial columns
    Eigen::MatrixXd gram;      // K x (d+1), rows g = T f, columns in the stable basis
    Eigen::MatrixXd precondition;  // T, lower triangular: g_i = sum_k T(i,k) f_k
    PolyBasis basis;
};

EnsembleMoments pe_mixed_moments(const ModelSpec& model, const FunctionFamily& family, int d = -1, int order = 0);

class EnsembleBiorthogonalSystem {
public:
    Side side() const { return side_; }
    int size() const { return static_cast<int>(norms_.size()); }
    int degree() const { return degree_; }
    std::span<const double> norms() const { return norms_; }
    double norm(int i) const { return norms_.at(static_cast<std::size_t>(i)); }
    // F_i = sum_{k<=i} family_coeffs(i, k) f_k with unit diagonal.
    const Eigen::MatrixXd& family_coeffs() const { return family_coeffs_; }
    // Row j = monomial coefficients of the monic polynomial partner, j < size().
    Eigen::MatrixXd poly_coeffs() const;

    double eval_F(int i, double x) const;
    // Monic polynomial partner of degree j; for j >= n it is orthogonal to F_0..F_{n-1} only.
    cplx eval_poly(int j, cplx z, int n) const;
    void eval_poly_upto(int count, cplx z, int n, cplx* out) const;

private:
    friend EnsembleBiorthogonalSystem pe_factorize(const EnsembleMoments&, const FunctionFamily&, double);
    Side side_ = Side::Left;
    int degree_ = 0;
    std::vector<RealFunction> functions_;
    Eigen::MatrixXd family_coeffs_;
    PolyBasis basis_;
    Eigen::MatrixXd poly_basis_;  // K x K, rows in the stable basis
    Eigen::MatrixXd reduced_;     // R = (F_i | w | basis_j), K x (d+1)
    std::vector<double> norms_;
};

EnsembleBiorthogonalSystem pe_factorize(const EnsembleMoments& moments, const FunctionFamily& family,
                                        double singular_tolerance = 1e-13);

// prod_{i<n} h_i; with moments, extras "det_block" and "rel_diff" from the monomial moment determinant.
CorrelatorResult pe_partition_function(const EnsembleBiorthogonalSystem& sys, int n,
                                       const EnsembleMoments* moments = nullptr);
// side L: e^{-V_R(x)} sum Q_i(x) F_i(y) / h_i;  side R: e^{-V_L(y)} sum F_i(x) P_i(y) / h_i.
double pe_cd_kernel(const EnsembleBiorthogonalSystem& sys, const ModelSpec& model, int n, double x, double y);
// Discretized int int w(x_L, x_R) K_n(x_R, x_L).
double pe_kernel_trace(const EnsembleBiorthogonalSystem& sys, const ModelSpec& model, int n, int order = 64);
// <prod det(z_alpha - X)> on the polynomial side: det p_{n+M-beta}(z_alpha) / Delta_M(Z).
CorrelatorResult pe_charpoly_average(const EnsembleBiorthogonalSystem& sys, int n, const SpectralPoints& zs);
// <s_mu(X)> on the polynomial side: det(f_{n-i} | w | y^{mu_j+n-j}) / Z_n.
CorrelatorResult pe_schur_average(const EnsembleMoments& moments, const Partition& mu, int n);
// Pair correlators do not generalize to the ensemble; always throws UnsupportedForEnsemble.
[[noreturn]] void pe_unsupported(std::string_view correlator);

}  // namespace cmm
