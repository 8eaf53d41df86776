#include "cmm/linalg.hpp"

#include <cmath>

namespace cmm {

ScaledValue ScaledValue::of(cplx v) {
    ScaledValue s;
    s.mantissa = v;
    s.normalize();
    return s;
}

void ScaledValue::normalize() {
    const double m = std::abs(mantissa);
    if (m == 0.0 || !std::isfinite(m)) return;
    log_scale += std::log(m);
    mantissa /= m;
}

ScaledValue& ScaledValue::operator*=(const ScaledValue& o) {
    mantissa *= o.mantissa;
    log_scale += o.log_scale;
    normalize();
    return *this;
}

ScaledValue& ScaledValue::operator/=(const ScaledValue& o) {
    mantissa /= o.mantissa;
    log_scale -= o.log_scale;
    normalize();
    return *this;
}

cplx ScaledValue::value() const { return mantissa * std::exp(log_scale); }

ScaledValue scaled_det(const Eigen::MatrixXcd& a) {
    ScaledValue s;
    if (a.rows() == 0) return s;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
    const Eigen::MatrixXcd& m = lu.matrixLU();
    s.mantissa = static_cast<double>(lu.permutationP().determinant());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const cplx p = m(i, i);
        if (p == cplx(0.0, 0.0)) {
            s.mantissa = 0.0;
            s.log_scale = 0.0;
            return s;
        }
        s *= p;
    }
    return s;
}

double det_real(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return 1.0;
    return Eigen::PartialPivLU<Eigen::MatrixXd>(a).determinant();
}

ScaledValue balanced_det(Eigen::MatrixXd a) {
    ScaledValue acc;
    const Eigen::Index n = a.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = a.row(i).cwiseAbs().maxCoeff();
        if (r == 0.0) return ScaledValue::of(0.0);
        a.row(i) /= r;
        acc *= r;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        const double c = a.col(j).cwiseAbs().maxCoeff();
        if (c == 0.0) return ScaledValue::of(0.0);
        a.col(j) /= c;
        acc *= c;
    }
    acc *= ScaledValue::of(det_real(a));
    return acc;
}

ScaledValue scaled_vandermonde(std::span<const cplx> z) {
    ScaledValue s;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) s *= (z[i] - z[j]);
    return s;
}

double cond1(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& inv) {
    auto norm1 = [](const Eigen::MatrixXcd& m) {
        double best = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
        return best;
    };
    return norm1(a) * norm1(inv);
}

}  // namespace cmm
