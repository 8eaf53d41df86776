#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cmm/biortho.hpp"
#include "cmm/model.hpp"
#include "cmm/quadrature.hpp"

namespace cmm {

struct DualOptions {
    double panel_width = 0.5;
    int panel_nodes = 16;
    double support_threshold = 1e-22;  // relative envelope cut-off of the fine rule
    double pole_factor = 10.0;         // pole tolerance = pole_factor * fine node spacing
    double series_factor = 4.0;        // moment series used when |z| >= series_factor * support radius
};

// Hilbert transforms of the biorthogonal system,
//   ~P_j(z) = (1/(z-x) | w | Q_j),  ~Q_j(w) = (P_j | w | 1/(w-y)),
// and the double-Cauchy bimoment C(z, w) = (1/(z-x) | w | 1/(w-y)).
// Evaluated on a composite Gauss-Legendre rule over the numerical support of each side.
class DualTransforms {
public:
    DualTransforms(const ModelSpec& model, const BiorthogonalSystem& sys, const SideRules& rules,
                   const DualOptions& opts = {});

    int degree() const { return degree_; }
    cplx P_tilde(int j, cplx z) const;
    cplx Q_tilde(int j, cplx w) const;
    // out[k] for k < count.
    void P_tilde_upto(int count, cplx z, cplx* out) const;
    void Q_tilde_upto(int count, cplx w, cplx* out) const;
    cplx cauchy_bimoment(cplx z, cplx w) const;

    double pole_tolerance_left() const { return left_.tol; }
    double pole_tolerance_right() const { return right_.tol; }
    Interval support_left() const { return {left_.lo, left_.hi}; }
    Interval support_right() const { return {right_.lo, right_.hi}; }
    std::size_t fine_size_left() const { return left_.nodes.size(); }
    std::size_t fine_size_right() const { return right_.nodes.size(); }

private:
    struct Side {
        std::vector<double> nodes, weights;  // fine rule, weights include e^{-V}
        Eigen::MatrixXd g;                   // g(k, j): other-side integral of w * polynomial_j at nodes[k]
        Eigen::MatrixXd moments;             // moments(j, r) = (x^r | w | poly_j) on the standard rules
        double lo = 0, hi = 0, tol = 0, radius = 0;
    };
    void check_pole(const Side& s, cplx z, const char* label) const;
    void transform_upto(const Side& s, int count, cplx z, cplx* out) const;

    int degree_ = 0;
    DualOptions opts_;
    Side left_, right_;
    Eigen::MatrixXd omega_fine_;  // w(x_k, y_l) on the two fine rules
};

struct DualEvaluation {
    cplx value{0.0, 0.0};
    int truncation = -1;  // last included degree K (-1 for an empty sum)
    double tail = 0.0;
};

// sum_{i=n}^{kmax} ~Q_i(w) ~P_i(z) / h_i without the e^{V_L(z) + V_R(w)} factor.
DualEvaluation dual_cd_sum(const DualTransforms& dual, const BiorthogonalSystem& sys, int n, cplx w, cplx z,
                           int kmax, double tolerance);
// ~K_n(w, z) = sum_{i>=n} ~psi_i(w) ~phi_i(z), truncated at kmax.
// Throws TruncationNotConverged when kmax reaches the degree bound and tail > tolerance * |value|.
DualEvaluation dual_cd_kernel(const DualTransforms& dual, const BiorthogonalSystem& sys, const ModelSpec& model,
                              int n, cplx w, cplx z, int kmax, double tolerance = 1e-3);

}  // namespace cmm
