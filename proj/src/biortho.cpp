#include "cmm/biortho.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmm {

void BiorthogonalSystem::set_diagnostics(std::vector<double> cancellation, double condition,
                                         std::vector<ConditionWarning> warnings) {
    cancellation_ = std::move(cancellation);
    condition_ = condition;
    warnings_ = std::move(warnings);
}

BiorthogonalSystem::BiorthogonalSystem(PolyBasis left, PolyBasis right, Eigen::MatrixXd p_basis,
                                       Eigen::MatrixXd q_basis, std::vector<double> norms, std::string fingerprint)
    : left_(std::move(left)),
      right_(std::move(right)),
      p_basis_(std::move(p_basis)),
      q_basis_(std::move(q_basis)),
      norms_(std::move(norms)),
      fingerprint_(std::move(fingerprint)) {}

double BiorthogonalSystem::norm(int i) const {
    if (i < 0 || i > degree()) throw Error(ErrorCode::DegreeOutOfRange, "norm index " + std::to_string(i));
    return norms_[static_cast<std::size_t>(i)];
}

Eigen::MatrixXd BiorthogonalSystem::p_coeffs() const { return p_basis_ * left_.monomial_matrix(); }
Eigen::MatrixXd BiorthogonalSystem::q_coeffs() const { return q_basis_ * right_.monomial_matrix(); }

template <class T>
void BiorthogonalSystem::eval_rows(const PolyBasis& basis, const Eigen::MatrixXd& rows, int count, T x,
                                   T* out) const {
    if (count < 0 || count > degree() + 1)
        throw Error(ErrorCode::DegreeOutOfRange, "degree " + std::to_string(count - 1) + " exceeds bound " +
                                                     std::to_string(degree()));
    T buf[64];
    std::vector<T> heap;
    T* pi = buf;
    if (count > 64) {
        heap.resize(static_cast<std::size_t>(count));
        pi = heap.data();
    }
    basis.evaluate(x, pi, count);
    for (int i = 0; i < count; ++i) {
        T acc = pi[i];  // unit diagonal
        for (int k = i - 1; k >= 0; --k) acc += rows(i, k) * pi[k];
        out[i] = acc;
    }
}

void BiorthogonalSystem::eval_P_upto(int count, cplx z, cplx* out) const { eval_rows(left_, p_basis_, count, z, out); }
void BiorthogonalSystem::eval_Q_upto(int count, cplx z, cplx* out) const { eval_rows(right_, q_basis_, count, z, out); }
void BiorthogonalSystem::eval_P_upto(int count, double x, double* out) const { eval_rows(left_, p_basis_, count, x, out); }
void BiorthogonalSystem::eval_Q_upto(int count, double x, double* out) const { eval_rows(right_, q_basis_, count, x, out); }

cplx BiorthogonalSystem::eval_P(int i, cplx z) const {
    std::vector<cplx> v(static_cast<std::size_t>(std::max(i + 1, 1)));
    if (i < 0) throw Error(ErrorCode::DegreeOutOfRange, "negative degree");
    eval_P_upto(i + 1, z, v.data());
    return v.back();
}

cplx BiorthogonalSystem::eval_Q(int j, cplx z) const {
    if (j < 0) throw Error(ErrorCode::DegreeOutOfRange, "negative degree");
    std::vector<cplx> v(static_cast<std::size_t>(j + 1));
    eval_Q_upto(j + 1, z, v.data());
    return v.back();
}

double BiorthogonalSystem::eval_P(int i, double x) const {
    if (i < 0) throw Error(ErrorCode::DegreeOutOfRange, "negative degree");
    std::vector<double> v(static_cast<std::size_t>(i + 1));
    eval_P_upto(i + 1, x, v.data());
    return v.back();
}

double BiorthogonalSystem::eval_Q(int j, double x) const {
    if (j < 0) throw Error(ErrorCode::DegreeOutOfRange, "negative degree");
    std::vector<double> v(static_cast<std::size_t>(j + 1));
    eval_Q_upto(j + 1, x, v.data());
    return v.back();
}

namespace {

double scaled_condition(const Eigen::MatrixXd& g, int k) {
    Eigen::MatrixXd b = g.topLeftCorner(k, k);
    Eigen::VectorXd s(k);
    for (int i = 0; i < k; ++i) s(i) = 1.0 / std::sqrt(std::max(std::abs(b(i, i)), 1e-300));
    b = s.asDiagonal() * b * s.asDiagonal();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    const Eigen::MatrixXd inv = lu.inverse();
    auto norm1 = [](const Eigen::MatrixXd& m) {
        double best = 0.0;
        for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, m.col(j).cwiseAbs().sum());
        return best;
    };
    const double c = norm1(b) * norm1(inv);
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
}

}  // namespace

BiorthogonalSystem factorize(const BimomentMatrix& bm, const FactorizeOptions& opts) {
    const Eigen::MatrixXd& g = bm.gram;
    const int n = static_cast<int>(g.rows());
    if (n == 0 || g.cols() != n) throw Error(ErrorCode::PreconditionViolated, "bimoment matrix must be square");
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n), u = Eigen::MatrixXd::Identity(n, n);
    std::vector<double> h(static_cast<std::size_t>(n));
    std::vector<double> cancel(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        // Row k of U and column k of L from the Doolittle recurrences.
        double scale = std::abs(g(k, k));
        double piv = g(k, k);
        for (int j = 0; j < k; ++j) {
            const double t = l(k, j) * h[static_cast<std::size_t>(j)] * u(j, k);
            piv -= t;
            scale += std::abs(t);
        }
        if (!(std::abs(piv) > opts.singular_tolerance * scale) || !std::isfinite(piv))
            throw SingularMinorError(k + 1, "pivot " + std::to_string(piv) + " vanishes relative to " +
                                                std::to_string(scale));
        h[static_cast<std::size_t>(k)] = piv;
        cancel[static_cast<std::size_t>(k)] = scale / std::abs(piv);
        for (int m = k + 1; m < n; ++m) {
            double ukm = g(k, m), lmk = g(m, k);
            for (int j = 0; j < k; ++j) {
                ukm -= l(k, j) * h[static_cast<std::size_t>(j)] * u(j, m);
                lmk -= l(m, j) * h[static_cast<std::size_t>(j)] * u(j, k);
            }
            u(k, m) = ukm / piv;
            l(m, k) = lmk / piv;
        }
    }
    // P rows = L^{-1}, Q rows = U^{-T}: then P G Q^T = D.
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd pb = l.triangularView<Eigen::UnitLower>().solve(id);
    Eigen::MatrixXd qb = u.transpose().triangularView<Eigen::UnitLower>().solve(id);
    pb.triangularView<Eigen::StrictlyUpper>().setZero();
    qb.triangularView<Eigen::StrictlyUpper>().setZero();

    BiorthogonalSystem sys(bm.left_basis, bm.right_basis, std::move(pb), std::move(qb), std::move(h), bm.fingerprint);
    sys.cancellation_ = std::move(cancel);
    sys.condition_ = 1.0;
    bool cond_warned = false;
    for (int k = 1; k <= n; ++k) {
        const double c = scaled_condition(g, k);
        sys.condition_ = std::max(sys.condition_, c);
        const double ca = sys.cancellation_[static_cast<std::size_t>(k - 1)];
        const bool bad_cond = c > opts.condition_threshold && !cond_warned;
        if (bad_cond || ca > opts.cancellation_threshold) {
            sys.warnings_.push_back({k - 1, ca, c});
            cond_warned = cond_warned || bad_cond;
        }
    }
    return sys;
}

void BiorthogonalSystem::add_drift_warnings(std::span<const double> coarse_norms, double threshold) {
    for (int k = 0; k < static_cast<int>(norms_.size()); ++k) {
        const double h = norms_[static_cast<std::size_t>(k)];
        const double drift = k < static_cast<int>(coarse_norms.size())
                                 ? std::abs(h - coarse_norms[static_cast<std::size_t>(k)]) / std::abs(h)
                                 : std::numeric_limits<double>::infinity();
        if (!(drift > threshold)) continue;
        auto it = std::find_if(warnings_.begin(), warnings_.end(), [k](const ConditionWarning& w) { return w.degree == k; });
        if (it == warnings_.end()) {
            warnings_.push_back({k, cancellation_[static_cast<std::size_t>(k)], condition_, drift});
        } else {
            it->drift = drift;
        }
    }
    std::sort(warnings_.begin(), warnings_.end(), [](const auto& a, const auto& b) { return a.degree < b.degree; });
}

namespace {

double sqrt_abs(double h) { return std::sqrt(std::abs(h)); }
double sign_of(double h) { return h < 0 ? -1.0 : 1.0; }

}  // namespace

double wave_phi(const BiorthogonalSystem& sys, const ModelSpec& model, int i, double x) {
    return std::exp(-model.v_left(x)) * sys.eval_P(i, x) / sqrt_abs(sys.norm(i));
}

double wave_psi(const BiorthogonalSystem& sys, const ModelSpec& model, int i, double y) {
    const double h = sys.norm(i);
    return sign_of(h) * std::exp(-model.v_right(y)) * sys.eval_Q(i, y) / sqrt_abs(h);
}

cplx cd_kernel_reduced(const BiorthogonalSystem& sys, int n, cplx x_r, cplx x_l) {
    if (n < 0 || n > sys.degree() + 1)
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(n) + " exceeds degree bound + 1");
    if (n == 0) return 0.0;
    std::vector<cplx> p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    sys.eval_P_upto(n, x_l, p.data());
    sys.eval_Q_upto(n, x_r, q.data());
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) acc += q[static_cast<std::size_t>(i)] * p[static_cast<std::size_t>(i)] / sys.norm(i);
    return acc;
}

cplx cd_kernel(const BiorthogonalSystem& sys, const ModelSpec& model, int n, cplx x_r, cplx x_l) {
    const cplx red = cd_kernel_reduced(sys, n, x_r, x_l);
    if (n == 0) return 0.0;
    return std::exp(-model.v_left(x_l) - model.v_right(x_r)) * red;
}

cplx cd_kernel_waves(const BiorthogonalSystem& sys, const ModelSpec& model, int n, cplx x_r, cplx x_l) {
    if (n < 0 || n > sys.degree() + 1)
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(n) + " exceeds degree bound + 1");
    if (n == 0) return 0.0;
    std::vector<cplx> p(static_cast<std::size_t>(n)), q(static_cast<std::size_t>(n));
    sys.eval_P_upto(n, x_l, p.data());
    sys.eval_Q_upto(n, x_r, q.data());
    const cplx el = std::exp(-model.v_left(x_l)), er = std::exp(-model.v_right(x_r));
    cplx acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double h = sys.norm(i);
        const cplx phi = el * p[static_cast<std::size_t>(i)] / sqrt_abs(h);
        const cplx psi = sign_of(h) * er * q[static_cast<std::size_t>(i)] / sqrt_abs(h);
        acc += psi * phi;
    }
    return acc;
}

namespace {

// Rows: nodes; columns: weight * polynomial value.
Eigen::MatrixXd weighted_values(const BiorthogonalSystem& sys, const QuadratureRule& r, int count, bool left) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), count);
    std::vector<double> buf(static_cast<std::size_t>(count));
    for (std::size_t a = 0; a < r.size(); ++a) {
        if (left)
            sys.eval_P_upto(count, r.nodes[a], buf.data());
        else
            sys.eval_Q_upto(count, r.nodes[a], buf.data());
        for (int i = 0; i < count; ++i) m(static_cast<Eigen::Index>(a), i) = r.weights[a] * buf[static_cast<std::size_t>(i)];
    }
    return m;
}

}  // namespace

Eigen::MatrixXd recomputed_gram(const BiorthogonalSystem& sys, const ModelSpec& model, const SideRules& rules) {
    const int count = sys.degree() + 1;
    const Eigen::MatrixXd om = KernelEvaluator(model.kernel).table(rules.left.nodes, rules.right.nodes);
    return weighted_values(sys, rules.left, count, true).transpose() * om *
           weighted_values(sys, rules.right, count, false);
}

double reproducing_residual(const BiorthogonalSystem& sys, const ModelSpec& model, const SideRules& rules, int n) {
    if (n < 0 || n > sys.degree() + 1) throw Error(ErrorCode::RankOutOfRange, "rank out of range");
    if (n == 0) return 0.0;
    const Eigen::MatrixXd om = KernelEvaluator(model.kernel).table(rules.left.nodes, rules.right.nodes);
    const Eigen::MatrixXd wp = weighted_values(sys, rules.left, n, true);
    const Eigen::MatrixXd wq = weighted_values(sys, rules.right, n, false);
    const Eigen::MatrixXd gq = wp.transpose() * om * wq;
    Eigen::VectorXd hinv(n);
    for (int i = 0; i < n; ++i) hinv(i) = 1.0 / sys.norm(i);
    // Kernel and its composition on the node grid, both in the form Q M P^T with weights e^{-V}.
    const Eigen::MatrixXd m_k = hinv.asDiagonal();
    const Eigen::MatrixXd m_kwk = hinv.asDiagonal() * gq * hinv.asDiagonal();
    Eigen::MatrixXd pv(static_cast<Eigen::Index>(rules.left.size()), n), qv(static_cast<Eigen::Index>(rules.right.size()), n);
    std::vector<double> buf(static_cast<std::size_t>(n));
    for (std::size_t a = 0; a < rules.left.size(); ++a) {
        sys.eval_P_upto(n, rules.left.nodes[a], buf.data());
        const double e = std::exp(-model.v_left(rules.left.nodes[a]));
        for (int i = 0; i < n; ++i) pv(static_cast<Eigen::Index>(a), i) = e * buf[static_cast<std::size_t>(i)];
    }
    for (std::size_t b = 0; b < rules.right.size(); ++b) {
        sys.eval_Q_upto(n, rules.right.nodes[b], buf.data());
        const double e = std::exp(-model.v_right(rules.right.nodes[b]));
        for (int i = 0; i < n; ++i) qv(static_cast<Eigen::Index>(b), i) = e * buf[static_cast<std::size_t>(i)];
    }
    const Eigen::MatrixXd k = qv * m_k * pv.transpose();
    const Eigen::MatrixXd kwk = qv * m_kwk * pv.transpose();
    const double kmax = k.cwiseAbs().maxCoeff();
    if (kmax == 0.0) return 0.0;
    return (kwk - k).cwiseAbs().maxCoeff() / kmax;
}

double kernel_trace(const BiorthogonalSystem& sys, const ModelSpec& model, const SideRules& rules, int n) {
    if (n < 0 || n > sys.degree() + 1) throw Error(ErrorCode::RankOutOfRange, "rank out of range");
    if (n == 0) return 0.0;
    const Eigen::MatrixXd om = KernelEvaluator(model.kernel).table(rules.left.nodes, rules.right.nodes);
    const Eigen::MatrixXd gq =
        weighted_values(sys, rules.left, n, true).transpose() * om * weighted_values(sys, rules.right, n, false);
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += gq(i, i) / sys.norm(i);
    return t;
}

}  // namespace cmm
