#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>

namespace cmm {

using cplx = std::complex<double>;

// value = mantissa * exp(log_scale); keeps products of huge and tiny factors representable.
struct ScaledValue {
    cplx mantissa{1.0, 0.0};
    double log_scale = 0.0;

    static ScaledValue of(cplx v);
    ScaledValue& operator*=(const ScaledValue& o);
    ScaledValue& operator/=(const ScaledValue& o);
    ScaledValue& operator*=(cplx v) { return *this *= of(v); }
    ScaledValue& operator/=(cplx v) { return *this /= of(v); }
    // Moves the magnitude of the mantissa into log_scale.
    void normalize();
    bool is_zero() const { return mantissa == cplx(0.0, 0.0); }
    cplx value() const;
};

// Pivoted LU determinant with per-pivot log accumulation.
ScaledValue scaled_det(const Eigen::MatrixXcd& a);
double det_real(const Eigen::MatrixXd& a);
// Determinant after row and column max-scaling: det(A) = det(S) prod r_i prod c_j.
ScaledValue balanced_det(Eigen::MatrixXd a);

// prod_{i<j} (z_i - z_j).
ScaledValue scaled_vandermonde(std::span<const cplx> z);

// ||A||_1 ||A^{-1}||_1 from an explicit inverse.
double cond1(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& inv);

}  // namespace cmm
