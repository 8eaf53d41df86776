#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cmm/linalg.hpp"
#include "cmm/schur.hpp"
#include "cmm/workspace.hpp"

namespace cmm {

enum class Side { Left, Right };

struct Diagnostics {
    double condition = 0.0;  // 0 when no matrix inverse is involved
    double tail = 0.0;       // absolute truncation bound on the value
    std::vector<std::string> notes;
    std::map<std::string, double> extras;
};

// Reported quantity is value * exp(log_scale). log_scale is nonzero only when the
// folded value would leave the double range.
struct CorrelatorResult {
    cplx value{0.0, 0.0};
    double log_scale = 0.0;
    Diagnostics diagnostics;

    cplx full() const { return value * std::exp(log_scale); }
    static CorrelatorResult from_scaled(const ScaledValue& v);
};

// Z_n = prod_{i<n} h_i. extras: "det_block" (Jacobi-scaled LU determinant of the
// n x n monomial bimoment block) and "rel_diff".
CorrelatorResult partition_function(const BiorthogonalSystem& sys, int n, const BimomentMatrix* bm = nullptr);
// Z_{hi} / Z_{lo} from the pivots.
ScaledValue partition_ratio(const BiorthogonalSystem& sys, int hi, int lo);

// <s_lambda(X_L) s_mu(X_R)> = det(x^{lambda_i+n-i} | w | y^{mu_j+n-j}) / Z_n.
CorrelatorResult schur_average(const BimomentMatrix& bm, const Partition& lam, const Partition& mu, int n);

// <prod_alpha det(z_alpha - X_side)> = det P_{n+M-beta}(z_alpha) / Delta_M(Z).
CorrelatorResult charpoly_average(const BiorthogonalSystem& sys, Side side, int n, const SpectralPoints& zs);

// Evaluator of a monic family: out[k] = p_k(z) for k < count.
using FamilyEval = std::function<void(int count, cplx z, cplx* out)>;
// det p_{n+M-beta}(z_alpha) / Delta_M(Z) for any monic family with degrees up to max_degree.
CorrelatorResult charpoly_determinant(const FamilyEval& family, int max_degree, int n, const SpectralPoints& zs);

// <prod 1/det(z_alpha - X_side)>, M <= n:
// (-1)^{M(M-1)/2} (Z_{n-M}/Z_n) det ~P_{n-beta}(z_alpha) / Delta_M(Z).
CorrelatorResult charpoly_inverse_average_small(const Workspace& ws, Side side, int n, const SpectralPoints& zs);

enum class RowBasis { Biorthogonal, Monomial };
// M >= n >= 1: (-1)^{M(M-1)/2} / (Z_n Delta_M(Z)) times the M x M determinant with rows
// ~P_{n-i}(z_alpha), i = 1..n, followed by p_{a-1}(z_alpha), a = 1..M-n.
CorrelatorResult charpoly_inverse_average_large(const Workspace& ws, Side side, int n, const SpectralPoints& zs,
                                                RowBasis rows = RowBasis::Biorthogonal);

// <prod det(z_alpha - X_L) det(w_alpha - X_R)> =
// (Z_{n+M}/Z_n) det[sum_{i<n+M} Q_i(w_alpha) P_i(z_beta)/h_i] / (Delta_M(Z) Delta_M(W)).
// The e^{trV} prefactors cancel against the weights of K_{n+M} and are never formed.
CorrelatorResult pair_charpoly_average(const BiorthogonalSystem& sys, int n, const SpectralPoints& zs,
                                       const SpectralPoints& ws);

// <prod 1/(det(z_alpha - X_L) det(w_alpha - X_R))>, M <= n, through the dual CD kernel.
// diagnostics.tail bounds the truncation error of the value (first order in the entry tails).
CorrelatorResult pair_inverse_average_small(const Workspace& ws, int n, const SpectralPoints& zs,
                                            const SpectralPoints& wpts, int kmax = -1);
// M >= n >= 1: det C det D / (Z_n Delta_M(Z) Delta_M(W)), C the double-Cauchy bimoments,
// D_ab = sum P_a(z_alpha) (C^{-1})_{beta alpha} Q_b(w_beta), a, b < M - n.
CorrelatorResult pair_inverse_average_large(const Workspace& ws, int n, const SpectralPoints& zs,
                                            const SpectralPoints& wpts);

// LeftNumerator: <prod det(z_alpha - X_L) / det(w_alpha - X_R)>.
// RightNumerator: <prod det(w_alpha - X_R) / det(z_alpha - X_L)>.
enum class Orientation { LeftNumerator, RightNumerator };
CorrelatorResult mixed_pair_average(const Workspace& ws, int n, const SpectralPoints& zs, const SpectralPoints& wpts,
                                    Orientation orientation);
// M = 1 closed forms:
//   LeftNumerator   (P_n(z) ~Q_{n-1}(w) - P_{n-1}(z) ~Q_n(w)) / h_{n-1}
//   RightNumerator  (~P_{n-1}(z) Q_n(w) - ~P_n(z) Q_{n-1}(w)) / h_{n-1}
CorrelatorResult mixed_pair_m1_closed_form(const Workspace& ws, int n, cplx z, cplx w, Orientation orientation);

}  // namespace cmm
