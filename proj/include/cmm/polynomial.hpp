#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cmm {

// Monic polynomial basis defined by a three-term recurrence
//   pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k pi_{k-1}(x),  pi_0 = 1.
// The monomial basis is the special case alpha = beta = 0.
class PolyBasis {
public:
    PolyBasis() = default;
    PolyBasis(std::vector<double> alpha, std::vector<double> beta);

    static PolyBasis monomial(int d);
    // Monic orthogonal polynomials of the discrete measure sum_k w_k delta(x - x_k), w_k > 0.
    static PolyBasis stieltjes(std::span<const double> nodes, std::span<const double> weights, int d);

    int max_degree() const { return static_cast<int>(alpha_.size()); }
    std::span<const double> alpha() const { return alpha_; }
    std::span<const double> beta() const { return beta_; }
    bool is_monomial() const;

    // out[k] = pi_k(x) for k = 0..count-1 (count <= max_degree()+1).
    template <class T>
    void evaluate(T x, T* out, int count) const {
        if (count <= 0) return;
        out[0] = T(1);
        if (count == 1) return;
        out[1] = x - alpha_[0];
        for (int k = 1; k + 1 < count; ++k)
            out[k + 1] = (x - alpha_[k]) * out[k] - beta_[k] * out[k - 1];
    }

    // Row k holds the monomial coefficients of pi_k (lower unitriangular).
    Eigen::MatrixXd monomial_matrix() const;

    bool operator==(const PolyBasis&) const = default;

private:
    // alpha_[k], beta_[k] for k = 0..d-1 produce pi_1..pi_d; beta_[0] is unused.
    std::vector<double> alpha_;
    std::vector<double> beta_;
};

// Horner evaluation of sum_k c[k] x^k.
template <class T>
T horner(std::span<const double> c, T x) {
    T acc(0);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace cmm
