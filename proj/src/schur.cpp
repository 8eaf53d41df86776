#include "cmm/schur.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "cmm/linalg.hpp"

namespace cmm {

Partition::Partition(std::vector<int> parts) : parts_(std::move(parts)) {
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (parts_[i] < 0) throw Error(ErrorCode::PreconditionViolated, "partition parts must be nonnegative");
        if (i > 0 && parts_[i] > parts_[i - 1])
            throw Error(ErrorCode::PreconditionViolated, "partition parts must be non-increasing");
    }
    while (!parts_.empty() && parts_.back() == 0) parts_.pop_back();
}

int Partition::weight() const {
    int w = 0;
    for (int p : parts_) w += p;
    return w;
}

Partition Partition::transpose() const {
    std::vector<int> t(static_cast<std::size_t>(part(1)), 0);
    for (int p : parts_)
        for (int k = 0; k < p; ++k) ++t[static_cast<std::size_t>(k)];
    return Partition(std::move(t));
}

Partition dual_partition(const Partition& lam, int m, int n) {
    if (m < 0 || n < 0 || !lam.fits_box(m, n))
        throw Error(ErrorCode::PartitionOutsideBox, "partition does not fit the " + std::to_string(m) + "x" +
                                                        std::to_string(n) + " box");
    const Partition t = lam.transpose();
    std::vector<int> parts(static_cast<std::size_t>(m));
    for (int a = 1; a <= m; ++a) parts[static_cast<std::size_t>(a - 1)] = n - t.part(m - a + 1);
    return Partition(std::move(parts));
}

namespace {
void enumerate(int max_weight, int max_length, int max_part, std::vector<int>& cur, int weight,
               std::vector<Partition>& out) {
    out.emplace_back(cur);
    if (static_cast<int>(cur.size()) == max_length) return;
    for (int p = 1; p <= max_part && weight + p <= max_weight; ++p) {
        cur.push_back(p);
        enumerate(max_weight, max_length, p, cur, weight + p, out);
        cur.pop_back();
    }
}
}  // namespace

std::vector<Partition> partitions_in_box(int width, int height) {
    std::vector<Partition> out;
    std::vector<int> cur;
    enumerate(width * height, height, width, cur, 0, out);
    return out;
}

std::vector<Partition> partitions_up_to(int max_weight, int max_length) {
    std::vector<Partition> out;
    std::vector<int> cur;
    enumerate(max_weight, max_length, max_weight, cur, 0, out);
    return out;
}

cplx schur_eval_jt(const Partition& lam, std::span<const cplx> xs) {
    const int n = static_cast<int>(xs.size());
    const int l = lam.length();
    if (l == 0) return 1.0;
    if (l > n) return 0.0;
    // h_k(x_1..x_n) by adding one variable at a time: h_k^{(m)} = h_k^{(m-1)} + x_m h_{k-1}^{(m)}.
    const int kmax = lam.part(1) + l;
    std::vector<cplx> h(static_cast<std::size_t>(kmax) + 1, 0.0);
    h[0] = 1.0;
    for (const cplx& x : xs)
        for (int k = 1; k <= kmax; ++k) h[static_cast<std::size_t>(k)] += x * h[static_cast<std::size_t>(k - 1)];
    Eigen::MatrixXcd a(l, l);
    for (int i = 1; i <= l; ++i)
        for (int j = 1; j <= l; ++j) {
            const int k = lam.part(i) - i + j;
            a(i - 1, j - 1) = k < 0 ? cplx(0.0) : h[static_cast<std::size_t>(k)];
        }
    return scaled_det(a).value();
}

cplx schur_eval_bialternant(const Partition& lam, std::span<const cplx> xs) {
    const int n = static_cast<int>(xs.size());
    if (lam.length() > n) return 0.0;
    double scale = 0.0;
    for (const cplx& x : xs) scale = std::max(scale, std::abs(x));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)]) <= 1e-14 * std::max(scale, 1.0))
                throw Error(ErrorCode::CoincidingVariables, "bialternant needs pairwise distinct variables");
    // Numerator and denominator are the same alternant; skip the rounded division.
    if (lam.length() == 0) return 1.0;
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 1; j <= n; ++j)
            a(i, j - 1) = std::pow(xs[static_cast<std::size_t>(i)], lam.part(j) + n - j);
    ScaledValue v = scaled_det(a);
    v /= scaled_vandermonde(xs);
    return v.value();
}

cplx charpoly_product(std::span<const cplx> zs, std::span<const cplx> xs) {
    cplx p = 1.0;
    for (const cplx& z : zs)
        for (const cplx& x : xs) p *= z - x;
    return p;
}

cplx cauchy_box_expansion(std::span<const cplx> zs, std::span<const cplx> xs) {
    const int m = static_cast<int>(zs.size());
    const int n = static_cast<int>(xs.size());
    cplx acc = 0.0;
    for (const Partition& lam : partitions_in_box(m, n)) {
        const cplx term = schur_eval_jt(dual_partition(lam, m, n), zs) * schur_eval_jt(lam, xs);
        acc += (lam.weight() % 2 == 0) ? term : -term;
    }
    return acc;
}

cplx truncated_inverse_expansion(std::span<const cplx> zs, std::span<const cplx> xs, int max_weight) {
    const int m = static_cast<int>(zs.size());
    const int n = static_cast<int>(xs.size());
    std::vector<cplx> inv(zs.size());
    cplx pref = 1.0;
    for (std::size_t a = 0; a < zs.size(); ++a) {
        inv[a] = 1.0 / zs[a];
        pref *= std::pow(inv[a], n);
    }
    cplx acc = 0.0;
    for (const Partition& lam : partitions_up_to(max_weight, std::min(m, n)))
        acc += schur_eval_jt(lam, inv) * schur_eval_jt(lam, xs);
    return pref * acc;
}

}  // namespace cmm
