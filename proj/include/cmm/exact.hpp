#pragma once

#include <string>
#include <vector>

#include <gmpxx.h>

#include "cmm/model.hpp"

namespace cmm {

// Roundoff-free biorthogonal system of the Gaussian model V_L = a_L x^2, V_R = a_R y^2,
// w = e^{cxy} on the real line. With det = 4 a_L a_R - c^2, every bimoment is a rational
// multiple of Z0 = 2 pi / sqrt(det), and so is every pivot h_i.
struct ExactGaussianSystem {
    mpq_class a_left, a_right, c;
    mpq_class det;
    std::vector<std::vector<mpq_class>> moments;  // E[x^i y^j] (bimoment / Z0)
    std::vector<mpq_class> h_ratio;               // h_i / Z0
    std::vector<std::vector<mpq_class>> p, q;      // monomial coefficient rows (monic)
    std::string fingerprint;

    int degree() const { return static_cast<int>(h_ratio.size()) - 1; }
    double prefactor() const;  // Z0
    double h(int i) const;
};

// Exact doubles (a, c) are converted to rationals without rounding.
ExactGaussianSystem exact_gaussian_system(const ModelSpec& model, int d);

mpq_class exact_eval_P(const ExactGaussianSystem& sys, int i, const mpq_class& x);
mpq_class exact_eval_Q(const ExactGaussianSystem& sys, int i, const mpq_class& x);
mpq_class exact_det(std::vector<std::vector<mpq_class>> m);
// det P_{n+M-beta}(z_alpha) / Delta_M(Z) at rational real points.
mpq_class exact_charpoly_average(const ExactGaussianSystem& sys, int n, const std::vector<mpq_class>& zs);

// Sidecar text: h_i as numerator/denominator decimal strings times 2 pi / sqrt(det).
std::string exact_sidecar_text(const ExactGaussianSystem& sys);
void write_exact_sidecar(const std::string& path, const ExactGaussianSystem& sys);

}  // namespace cmm
