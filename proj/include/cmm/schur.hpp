#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cmm/errors.hpp"

namespace cmm {

using cplx = std::complex<double>;

// Non-increasing parts with trailing zeros trimmed.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::vector<int> parts);
    Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

    int length() const { return static_cast<int>(parts_.size()); }
    int weight() const;
    // lambda_i for i >= 1; zero past the length.
    int part(int i) const { return i >= 1 && i <= length() ? parts_[static_cast<std::size_t>(i - 1)] : 0; }
    const std::vector<int>& parts() const { return parts_; }
    Partition transpose() const;
    bool fits_box(int width, int height) const { return length() <= height && part(1) <= width; }

    bool operator==(const Partition&) const = default;

private:
    std::vector<int> parts_;
};

// lambda^v_alpha = n - lambda^T_{m - alpha + 1}, alpha = 1..m, for lambda inside (m^n).
Partition dual_partition(const Partition& lam, int m, int n);

// Every partition inside the box with at most `height` parts each at most `width`.
std::vector<Partition> partitions_in_box(int width, int height);
// Every partition of weight <= max_weight with at most max_length parts.
std::vector<Partition> partitions_up_to(int max_weight, int max_length);

// Jacobi-Trudi: det h_{lambda_i - i + j}, with h_k from the generating recurrence.
cplx schur_eval_jt(const Partition& lam, std::span<const cplx> xs);
// det x_i^{lambda_j + N - j} / Delta_N(X).
cplx schur_eval_bialternant(const Partition& lam, std::span<const cplx> xs);

// prod_alpha prod_i (z_alpha - x_i) and its finite Schur expansion
// sum_{lambda in (M^N)} (-1)^{|lambda|} s_{lambda^v}(Z) s_lambda(X).
cplx charpoly_product(std::span<const cplx> zs, std::span<const cplx> xs);
cplx cauchy_box_expansion(std::span<const cplx> zs, std::span<const cplx> xs);

// Test utility: det Z^{-N} sum_{|lambda| <= max_weight} s_lambda(Z^{-1}) s_lambda(X), the truncated
// expansion of prod 1/det(z_alpha - X) for |x| < |z|.
cplx truncated_inverse_expansion(std::span<const cplx> zs, std::span<const cplx> xs, int max_weight = 20);

}  // namespace cmm
