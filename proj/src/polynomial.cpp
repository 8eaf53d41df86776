#include "cmm/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmm {

PolyBasis::PolyBasis(std::vector<double> alpha, std::vector<double> beta)
    : alpha_(std::move(alpha)), beta_(std::move(beta)) {
    if (alpha_.size() != beta_.size()) throw std::invalid_argument("PolyBasis: alpha/beta size mismatch");
}

PolyBasis PolyBasis::monomial(int d) {
    return PolyBasis(std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 0.0),
                     std::vector<double>(static_cast<std::size_t>(std::max(d, 0)), 0.0));
}

bool PolyBasis::is_monomial() const {
    return std::all_of(alpha_.begin(), alpha_.end(), [](double a) { return a == 0.0; }) &&
           std::all_of(beta_.begin(), beta_.end(), [](double b) { return b == 0.0; });
}

PolyBasis PolyBasis::stieltjes(std::span<const double> nodes, std::span<const double> weights, int d) {
    const std::size_t n = nodes.size();
    if (d < 0 || static_cast<std::size_t>(d) >= n)
        throw std::invalid_argument("PolyBasis::stieltjes: degree must be below the node count");
    // Work with orthonormal vectors q_k = pi_k / ||pi_k|| sampled at the nodes.
    std::vector<double> prev(n, 0.0), cur(n), next(n);
    double norm0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm0 += weights[i];
    for (std::size_t i = 0; i < n; ++i) cur[i] = 1.0 / std::sqrt(norm0);
    std::vector<double> alpha(static_cast<std::size_t>(d)), beta(static_cast<std::size_t>(d), 0.0);
    double sqrt_b = 0.0;
    for (int k = 0; k < d; ++k) {
        double a = 0.0;
        for (std::size_t i = 0; i < n; ++i) a += weights[i] * nodes[i] * cur[i] * cur[i];
        for (std::size_t i = 0; i < n; ++i) next[i] = (nodes[i] - a) * cur[i] - sqrt_b * prev[i];
        double nn = 0.0;
        for (std::size_t i = 0; i < n; ++i) nn += weights[i] * next[i] * next[i];
        alpha[static_cast<std::size_t>(k)] = a;
        if (k + 1 < d) beta[static_cast<std::size_t>(k + 1)] = nn;
        sqrt_b = std::sqrt(nn);
        for (std::size_t i = 0; i < n; ++i) {
            prev[i] = cur[i];
            cur[i] = next[i] / sqrt_b;
        }
    }
    return PolyBasis(std::move(alpha), std::move(beta));
}

Eigen::MatrixXd PolyBasis::monomial_matrix() const {
    const int d = max_degree();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(d + 1, d + 1);
    t(0, 0) = 1.0;
    for (int k = 0; k < d; ++k) {
        for (int m = 0; m <= k; ++m) {
            t(k + 1, m + 1) += t(k, m);
            t(k + 1, m) -= alpha_[static_cast<std::size_t>(k)] * t(k, m);
            if (k > 0) t(k + 1, m) -= beta_[static_cast<std::size_t>(k)] * t(k - 1, m);
        }
    }
    return t;
}

}  // namespace cmm
