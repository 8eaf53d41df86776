#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmm/model.hpp"
#include "cmm/polynomial.hpp"
#include "cmm/quadrature.hpp"

namespace cmm {

struct ConditionWarning {
    int degree = 0;
    double cancellation = 0.0;  // |G_kk| + eliminated terms, over |h_k|
    double condition = 0.0;     // 1-norm condition of the Jacobi-scaled leading block
    double drift = 0.0;         // |h_k - h_k(coarser rule)| / |h_k|; 0 when not measured
};

struct FactorizeOptions {
    double singular_tolerance = 1e-13;
    double cancellation_threshold = 1e8;
    double condition_threshold = 1e10;
    // Pivots that move by more than this between the working rule and a 3/4-order rule
    // are flagged: the quadrature does not resolve the coupled measure there.
    double drift_threshold = 1e-8;
};

// Monic biorthogonal P_i, Q_i with <P_i|w|Q_j> = h_i delta_ij.
// Coefficients are held in the per-side recurrence bases of the bimoment matrix;
// monomial rows are derived on request.
class BiorthogonalSystem {
public:
    BiorthogonalSystem() = default;
    BiorthogonalSystem(PolyBasis left, PolyBasis right, Eigen::MatrixXd p_basis, Eigen::MatrixXd q_basis,
                       std::vector<double> norms, std::string fingerprint);

    int degree() const { return static_cast<int>(norms_.size()) - 1; }
    std::span<const double> norms() const { return norms_; }
    double norm(int i) const;
    const std::string& source_fingerprint() const { return fingerprint_; }

    const PolyBasis& left_basis() const { return left_; }
    const PolyBasis& right_basis() const { return right_; }
    const Eigen::MatrixXd& p_basis_coeffs() const { return p_basis_; }
    const Eigen::MatrixXd& q_basis_coeffs() const { return q_basis_; }
    // Row i = monomial coefficients of P_i (lower unitriangular).
    Eigen::MatrixXd p_coeffs() const;
    Eigen::MatrixXd q_coeffs() const;

    cplx eval_P(int i, cplx z) const;
    cplx eval_Q(int j, cplx z) const;
    double eval_P(int i, double x) const;
    double eval_Q(int j, double x) const;
    // out[k] = P_k(z), k < count.
    void eval_P_upto(int count, cplx z, cplx* out) const;
    void eval_Q_upto(int count, cplx z, cplx* out) const;
    void eval_P_upto(int count, double x, double* out) const;
    void eval_Q_upto(int count, double x, double* out) const;

    std::span<const double> cancellation_ratios() const { return cancellation_; }
    double condition() const { return condition_; }
    const std::vector<ConditionWarning>& warnings() const { return warnings_; }
    // Restores factorization diagnostics (used when loading from the cache).
    void set_diagnostics(std::vector<double> cancellation, double condition, std::vector<ConditionWarning> warnings);
    // Merges drift against the pivots of a coarser-rule factorization into the warnings.
    // coarse may be shorter (its elimination broke down); missing pivots count as unresolved.
    void add_drift_warnings(std::span<const double> coarse_norms, double threshold);

private:
    friend BiorthogonalSystem factorize(const BimomentMatrix&, const FactorizeOptions&);
    template <class T>
    void eval_rows(const PolyBasis& basis, const Eigen::MatrixXd& rows, int count, T x, T* out) const;

    PolyBasis left_, right_;
    Eigen::MatrixXd p_basis_, q_basis_;
    std::vector<double> norms_;
    std::string fingerprint_;
    std::vector<double> cancellation_;
    double condition_ = 1.0;
    std::vector<ConditionWarning> warnings_;
};

// LDU factorization of the Gram matrix without pivoting (pivots are the h_i).
BiorthogonalSystem factorize(const BimomentMatrix& bm, const FactorizeOptions& opts = {});

double wave_phi(const BiorthogonalSystem& sys, const ModelSpec& model, int i, double x);
double wave_psi(const BiorthogonalSystem& sys, const ModelSpec& model, int i, double y);

// K_n(x_R, x_L) = e^{-V_L(x_L) - V_R(x_R)} sum_{i<n} Q_i(x_R) P_i(x_L) / h_i.
cplx cd_kernel(const BiorthogonalSystem& sys, const ModelSpec& model, int n, cplx x_r, cplx x_l);
// Same kernel as sum_{i<n} psi_i(x_R) phi_i(x_L).
cplx cd_kernel_waves(const BiorthogonalSystem& sys, const ModelSpec& model, int n, cplx x_r, cplx x_l);
// The polynomial part sum_{i<n} Q_i(x_R) P_i(x_L) / h_i, without the weights.
cplx cd_kernel_reduced(const BiorthogonalSystem& sys, int n, cplx x_r, cplx x_l);

// G(i, j) = <P_i|w|Q_j> recomputed on the given rules.
Eigen::MatrixXd recomputed_gram(const BiorthogonalSystem& sys, const ModelSpec& model, const SideRules& rules);
double reproducing_residual(const BiorthogonalSystem& sys, const ModelSpec& model, const SideRules& rules, int n);
double kernel_trace(const BiorthogonalSystem& sys, const ModelSpec& model, const SideRules& rules, int n);

}  // namespace cmm
