#include "cmm/dual.hpp"

#include <algorithm>
#include <cmath>

#include "cmm/simd/kernels.hpp"

namespace cmm {

namespace {

constexpr int kSeriesExtra = 60;

double log_envelope(const PolynomialPotential& v, double x, const QuadratureRule& other, const KernelEvaluator& k,
                    int d, bool x_is_left) {
    double s = 0.0;
    for (std::size_t b = 0; b < other.size(); ++b) {
        const double y = other.nodes[b];
        const double om = x_is_left ? k(x, y) : k(y, x);
        s += other.weights[b] * std::abs(om) * std::pow(1.0 + std::abs(y), d);
    }
    if (!(s > 0.0)) return -kInf;
    return -v(x) + std::log(s);
}

struct FineRule {
    std::vector<double> nodes, weights;
    double lo = 0, hi = 0;
};

FineRule fine_rule(const PolynomialPotential& v, const Interval& domain, const QuadratureRule& own,
                   const QuadratureRule& other, const KernelEvaluator& k, int d, bool is_left,
                   const DualOptions& opts) {
    // Envelope maximum over the standard nodes, then walk outward until the envelope is negligible.
    double lmax = -kInf, center = 0.0;
    for (double x : own.nodes) {
        const double l = log_envelope(v, x, other, k, d, is_left);
        if (l > lmax) {
            lmax = l;
            center = x;
        }
    }
    const double cut = lmax + std::log(opts.support_threshold);
    const double step = 0.5 * opts.panel_width;
    auto walk = [&](double dir, double bound) {
        double x = center;
        int below = 0;
        for (int it = 0; it < 4000; ++it) {
            const double nx = x + dir * step;
            if ((dir < 0 && nx <= bound) || (dir > 0 && nx >= bound)) return bound;
            x = nx;
            below = log_envelope(v, x, other, k, d, is_left) < cut ? below + 1 : 0;
            if (below >= 3) return x;
        }
        return x;
    };
    FineRule fr;
    fr.lo = walk(-1.0, domain.lower);
    fr.hi = walk(+1.0, domain.upper);
    const bool grade_lo = domain.lower_finite() && fr.lo == domain.lower;
    const bool grade_hi = domain.upper_finite() && fr.hi == domain.upper;

    const int panels = std::max(1, static_cast<int>(std::ceil((fr.hi - fr.lo) / opts.panel_width)));
    const double w = (fr.hi - fr.lo) / panels;
    std::vector<std::pair<double, double>> edges;
    for (int p = 0; p < panels; ++p) {
        const double a = fr.lo + p * w, b = (p + 1 == panels) ? fr.hi : fr.lo + (p + 1) * w;
        const bool first = p == 0, last = p + 1 == panels;
        if ((first && grade_lo) || (last && grade_hi)) {
            // Dyadic refinement toward a finite endpoint of the domain.
            const int levels = 20;
            std::vector<double> cuts;
            if (first && grade_lo) {
                cuts.push_back(a);
                for (int l = levels; l >= 1; --l) cuts.push_back(a + (b - a) * std::ldexp(1.0, -l));
                cuts.push_back(b);
            } else {
                cuts.push_back(a);
                for (int l = 1; l <= levels; ++l) cuts.push_back(b - (b - a) * std::ldexp(1.0, -l));
                cuts.push_back(b);
            }
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) edges.emplace_back(cuts[i], cuts[i + 1]);
        } else {
            edges.emplace_back(a, b);
        }
    }
    const GaussRule gl = gauss_legendre(opts.panel_nodes);
    for (const auto& [a, b] : edges) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
            const double x = mid + half * gl.nodes[q];
            const double wt = half * gl.weights[q] * std::exp(-v(x));
            fr.nodes.push_back(x);
            fr.weights.push_back(wt);
        }
    }
    return fr;
}

}  // namespace

DualTransforms::DualTransforms(const ModelSpec& model, const BiorthogonalSystem& sys, const SideRules& rules,
                               const DualOptions& opts)
    : degree_(sys.degree()), opts_(opts) {
    const KernelEvaluator k(model.kernel);
    const int d = degree_;
    const int count = d + 1;

    FineRule fl = fine_rule(model.v_left, model.domain_left, rules.left, rules.right, k, d, true, opts);
    FineRule fr = fine_rule(model.v_right, model.domain_right, rules.right, rules.left, k, d, false, opts);

    // Weighted polynomial values on the standard rules.
    Eigen::MatrixXd wp(static_cast<Eigen::Index>(rules.left.size()), count);
    Eigen::MatrixXd wq(static_cast<Eigen::Index>(rules.right.size()), count);
    std::vector<double> buf(static_cast<std::size_t>(count));
    for (std::size_t a = 0; a < rules.left.size(); ++a) {
        sys.eval_P_upto(count, rules.left.nodes[a], buf.data());
        for (int j = 0; j < count; ++j) wp(static_cast<Eigen::Index>(a), j) = rules.left.weights[a] * buf[static_cast<std::size_t>(j)];
    }
    for (std::size_t b = 0; b < rules.right.size(); ++b) {
        sys.eval_Q_upto(count, rules.right.nodes[b], buf.data());
        for (int j = 0; j < count; ++j) wq(static_cast<Eigen::Index>(b), j) = rules.right.weights[b] * buf[static_cast<std::size_t>(j)];
    }

    auto finish = [&](Side& s, FineRule&& f, Eigen::MatrixXd g, const Eigen::MatrixXd& gstd,
                      const QuadratureRule& own) {
        s.nodes = std::move(f.nodes);
        s.weights = std::move(f.weights);
        s.lo = f.lo;
        s.hi = f.hi;
        s.tol = opts.pole_factor * (s.hi - s.lo) / static_cast<double>(s.nodes.size());
        s.radius = std::max(std::abs(s.lo), std::abs(s.hi));
        s.g = std::move(g);
        const int rmax = d + kSeriesExtra;
        s.moments = Eigen::MatrixXd::Zero(count, rmax + 1);
        for (std::size_t a = 0; a < own.size(); ++a) {
            double p = own.weights[a];
            for (int r = 0; r <= rmax; ++r) {
                for (int j = 0; j < count; ++j) s.moments(j, r) += p * gstd(static_cast<Eigen::Index>(a), j);
                p *= own.nodes[a];
            }
        }
        if (!s.g.allFinite() || !s.moments.allFinite())
            throw Error(ErrorCode::NonFiniteIntegrand, "Hilbert transform tables are not finite");
    };

    const Eigen::MatrixXd om_ss = k.table(rules.left.nodes, rules.right.nodes);
    {
        const Eigen::MatrixXd om_fs = k.table(fl.nodes, rules.right.nodes);
        finish(left_, std::move(fl), om_fs * wq, om_ss * wq, rules.left);
    }
    {
        const Eigen::MatrixXd om_sf = k.table(rules.left.nodes, fr.nodes);
        finish(right_, std::move(fr), om_sf.transpose() * wp, om_ss.transpose() * wp, rules.right);
    }
    omega_fine_ = k.table(left_.nodes, right_.nodes);
    if (!omega_fine_.allFinite()) throw Error(ErrorCode::NonFiniteIntegrand, "kernel not finite on the fine grid");
}

void DualTransforms::check_pole(const Side& s, cplx z, const char* label) const {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw Error(ErrorCode::PreconditionViolated, "spectral parameter must be finite");
    if (std::abs(z.imag()) < s.tol && z.real() > s.lo - s.tol && z.real() < s.hi + s.tol)
        throw Error(ErrorCode::PoleOnContour, std::string(label) + " point (" + std::to_string(z.real()) + ", " +
                                                  std::to_string(z.imag()) + ") is within " + std::to_string(s.tol) +
                                                  " of the integration support");
}

void DualTransforms::transform_upto(const Side& s, int count, cplx z, cplx* out) const {
    if (count < 0 || count > degree_ + 1)
        throw Error(ErrorCode::DegreeOutOfRange, "Hilbert transform degree exceeds the bound");
    if (std::abs(z) >= opts_.series_factor * s.radius) {
        // 1/(z-x) = sum_r x^r / z^{r+1}; moments below degree j vanish by biorthogonality.
        const int rmax = static_cast<int>(s.moments.cols()) - 1;
        const cplx iz = 1.0 / z;
        for (int j = 0; j < count; ++j) {
            cplx zp = std::pow(iz, j + 1);
            cplx sum = 0.0;
            for (int r = j; r <= rmax; ++r) {
                const cplx term = s.moments(j, r) * zp;
                sum += term;
                if (r > j + 1 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
                zp *= iz;
            }
            out[j] = sum;
        }
        return;
    }
    const std::size_t n = s.nodes.size();
    std::vector<double> cre(n), cim(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx c = s.weights[k] / (z - s.nodes[k]);
        cre[k] = c.real();
        cim[k] = c.imag();
    }
    const auto& kern = simd::active_kernels();
    for (int j = 0; j < count; ++j) out[j] = kern.dot_real_complex(s.g.col(j).data(), cre.data(), cim.data(), n);
}

void DualTransforms::P_tilde_upto(int count, cplx z, cplx* out) const {
    check_pole(left_, z, "z");
    transform_upto(left_, count, z, out);
}

void DualTransforms::Q_tilde_upto(int count, cplx w, cplx* out) const {
    check_pole(right_, w, "w");
    transform_upto(right_, count, w, out);
}

cplx DualTransforms::P_tilde(int j, cplx z) const {
    if (j < 0 || j > degree_) throw Error(ErrorCode::DegreeOutOfRange, "Hilbert transform degree out of range");
    std::vector<cplx> v(static_cast<std::size_t>(j + 1));
    P_tilde_upto(j + 1, z, v.data());
    return v.back();
}

cplx DualTransforms::Q_tilde(int j, cplx w) const {
    if (j < 0 || j > degree_) throw Error(ErrorCode::DegreeOutOfRange, "Hilbert transform degree out of range");
    std::vector<cplx> v(static_cast<std::size_t>(j + 1));
    Q_tilde_upto(j + 1, w, v.data());
    return v.back();
}

cplx DualTransforms::cauchy_bimoment(cplx z, cplx w) const {
    check_pole(left_, z, "z");
    check_pole(right_, w, "w");
    const std::size_t nl = left_.nodes.size(), nr = right_.nodes.size();
    Eigen::VectorXd dre(static_cast<Eigen::Index>(nr)), dim(static_cast<Eigen::Index>(nr));
    for (std::size_t l = 0; l < nr; ++l) {
        const cplx d = right_.weights[l] / (w - right_.nodes[l]);
        dre(static_cast<Eigen::Index>(l)) = d.real();
        dim(static_cast<Eigen::Index>(l)) = d.imag();
    }
    const Eigen::VectorXd tre = omega_fine_ * dre, tim = omega_fine_ * dim;
    std::vector<double> cre(nl), cim(nl);
    for (std::size_t k = 0; k < nl; ++k) {
        const cplx c = left_.weights[k] / (z - left_.nodes[k]);
        cre[k] = c.real();
        cim[k] = c.imag();
    }
    const auto& kern = simd::active_kernels();
    // sum_k c_k t_k with c, t complex: (cre + i cim)(tre + i tim)
    const cplx a = kern.dot_real_complex(tre.data(), cre.data(), cim.data(), nl);
    const cplx b = kern.dot_real_complex(tim.data(), cre.data(), cim.data(), nl);
    return a + cplx(0.0, 1.0) * b;
}

DualEvaluation dual_cd_sum(const DualTransforms& dual, const BiorthogonalSystem& sys, int n, cplx w, cplx z,
                           int kmax, double tolerance) {
    DualEvaluation out;
    if (n < 0) throw Error(ErrorCode::RankOutOfRange, "negative rank");
    if (kmax > sys.degree()) throw Error(ErrorCode::DegreeOutOfRange, "kmax exceeds the degree bound");
    out.truncation = kmax;
    if (n > kmax) return out;
    const int count = kmax + 1;
    std::vector<cplx> pt(static_cast<std::size_t>(count)), qt(static_cast<std::size_t>(count));
    dual.P_tilde_upto(count, z, pt.data());
    dual.Q_tilde_upto(count, w, qt.data());
    std::vector<double> mag;
    for (int i = n; i <= kmax; ++i) {
        const cplx t = qt[static_cast<std::size_t>(i)] * pt[static_cast<std::size_t>(i)] / sys.norm(i);
        out.value += t;
        mag.push_back(std::abs(t));
    }
    // Geometric extrapolation from the worst of the last three term ratios.
    double r = -1.0;
    const std::size_t m = mag.size();
    for (std::size_t i = (m > 3 ? m - 3 : 1); i < m; ++i)
        if (mag[i - 1] > 0.0) r = std::max(r, mag[i] / mag[i - 1]);
    if (m < 2 || r < 0.0 || r >= 1.0 || !std::isfinite(r)) {
        out.tail = (m >= 2 && mag.back() == 0.0 && mag[m - 2] == 0.0) ? 0.0 : kInf;
    } else {
        const double last = std::max(mag.back(), m >= 2 ? mag[m - 2] * r : 0.0);
        out.tail = last / (1.0 - r);
    }
    if (kmax >= sys.degree() && out.tail > tolerance * std::abs(out.value))
        throw Error(ErrorCode::TruncationNotConverged,
                    "dual CD tail " + std::to_string(out.tail) + " exceeds tolerance " + std::to_string(tolerance) +
                        " x |value| " + std::to_string(std::abs(out.value)) + " at kmax = " + std::to_string(kmax));
    return out;
}

DualEvaluation dual_cd_kernel(const DualTransforms& dual, const BiorthogonalSystem& sys, const ModelSpec& model,
                              int n, cplx w, cplx z, int kmax, double tolerance) {
    DualEvaluation e = dual_cd_sum(dual, sys, n, w, z, kmax, tolerance);
    const cplx f = std::exp(model.v_left(z) + model.v_right(w));
    e.value *= f;
    e.tail *= std::abs(f);
    return e;
}

}  // namespace cmm
