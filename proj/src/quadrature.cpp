#include "cmm/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace cmm {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Scaled recurrence value at x of the degree-n polynomial and its derivative.
// Scaling keeps magnitudes bounded; Newton only needs the ratio p/p'.
void scaled_poly(std::span<const double> alpha, std::span<const double> beta, int n, double x,
                 double& p, double& dp) {
    double p0 = 0.0, p1 = 1.0, d0 = 0.0, d1 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double sb = k > 0 ? std::sqrt(beta[static_cast<std::size_t>(k)]) : 0.0;
        const double scale = (k + 1 < n) ? 1.0 / std::sqrt(beta[static_cast<std::size_t>(k + 1)]) : 1.0;
        const double a = alpha[static_cast<std::size_t>(k)];
        const double p2 = ((x - a) * p1 - sb * p0) * scale;
        const double d2 = (p1 + (x - a) * d1 - sb * d0) * scale;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    p = p1;
    dp = d1;
}

double christoffel_weight(std::span<const double> alpha, std::span<const double> beta, double mu0, int n,
                          double x) {
    double p0 = 0.0, p1 = 1.0 / std::sqrt(mu0);
    double sum = p1 * p1;
    for (int k = 0; k + 1 < n; ++k) {
        const double sb = k > 0 ? std::sqrt(beta[static_cast<std::size_t>(k)]) : 0.0;
        const double p2 =
            ((x - alpha[static_cast<std::size_t>(k)]) * p1 - sb * p0) / std::sqrt(beta[static_cast<std::size_t>(k + 1)]);
        p0 = p1;
        p1 = p2;
        sum += p1 * p1;
    }
    return 1.0 / sum;
}

struct Support {
    double xmin;   // location of the minimum of V on the domain
    double vmin;   // V(xmin)
    double lo;     // V - vmin exceeds the threshold beyond [lo, hi]
    double hi;
};

// Scan for the minimum of V on [a, b] (finite bounds only) and the region where V - vmin < thr.
Support find_support(const PolynomialPotential& v, double a, double b, double thr) {
    const int samples = 4001;
    double xmin = a, vmin = v(a);
    for (int i = 0; i <= samples; ++i) {
        const double x = a + (b - a) * i / samples;
        const double val = v(x);
        if (val < vmin) {
            vmin = val;
            xmin = x;
        }
    }
    const double h = (b - a) / samples;
    double lo = xmin, hi = xmin;
    while (lo > a && v(lo) - vmin < thr) lo = std::max(a, lo - h);
    while (hi < b && v(hi) - vmin < thr) hi = std::min(b, hi + h);
    return {xmin, vmin, lo, hi};
}

// Radius containing every critical point of V (Cauchy bound on the roots of V').
double critical_radius(const PolynomialPotential& v) {
    const int n = v.degree();
    double r = 0.0;
    for (int k = 1; k < n; ++k) r = std::max(r, std::abs(k * v.coefficient(k)) / std::abs(n * v.leading()));
    return 1.0 + r;
}

// Extends [lo, hi] outward (within [a, b]) until V - vmin exceeds thr at both ends.
Support grow_support(const PolynomialPotential& v, double a, double b, double thr) {
    double r = critical_radius(v);
    double lo = std::max(a, -r), hi = std::min(b, r);
    if (!(lo < hi)) {
        lo = std::isfinite(a) ? a : b - 1.0;
        hi = std::isfinite(b) ? b : a + 1.0;
    }
    Support s = find_support(v, lo, hi, thr);
    for (int iter = 0; iter < 60; ++iter) {
        bool grew = false;
        if (s.lo <= lo && lo > a) {
            lo = std::max(a, lo - 2.0 * (hi - lo));
            grew = true;
        }
        if (s.hi >= hi && hi < b) {
            hi = std::min(b, hi + 2.0 * (hi - lo));
            grew = true;
        }
        if (!grew) break;
        s = find_support(v, lo, hi, thr);
    }
    return s;
}

// Gauss rule for the weight e^{-V} itself: recurrence coefficients by discretized Stieltjes on a
// composite Gauss-Legendre rule over the region where V - vmin < 745 (beyond it e^{-V} underflows).
QuadratureRule weight_gauss_rule(const PolynomialPotential& v, double a, double b, int order, RuleKind kind) {
    const Support sup = grow_support(v, a, b, 745.0);
    const double lo = std::isfinite(a) ? a : sup.lo;
    const double hi = std::isfinite(b) ? b : sup.hi;
    const int panels = std::max(64, order);
    const GaussRule gl = gauss_legendre(24);
    const double width = (hi - lo) / panels;
    std::vector<double> xs, ws;
    xs.reserve(static_cast<std::size_t>(panels) * gl.nodes.size());
    ws.reserve(xs.capacity());
    for (int p = 0; p < panels; ++p) {
        const double mid = lo + (p + 0.5) * width;
        for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            const double x = mid + 0.5 * width * gl.nodes[k];
            const double w = 0.5 * width * gl.weights[k] * std::exp(-(v(x) - sup.vmin));
            if (w > 0.0) {
                xs.push_back(x);
                ws.push_back(w);
            }
        }
    }
    double mu0 = 0.0;
    for (double w : ws) mu0 += w;
    const PolyBasis rec = PolyBasis::stieltjes(xs, ws, order);
    const GaussRule g = gauss_from_recurrence(rec.alpha(), rec.beta(), mu0);
    QuadratureRule r;
    r.kind = kind;
    r.order = order;
    const double scale = std::exp(-sup.vmin);
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        const double w = g.weights[k] * scale;
        if (w > 0.0 && std::isfinite(w)) {
            r.nodes.push_back(g.nodes[k]);
            r.weights.push_back(w);
        }
    }
    return r;
}

QuadratureRule real_line_rule(const PolynomialPotential& v, int order) {
    if (v.degree() != 2) return weight_gauss_rule(v, -kInf, kInf, order, RuleKind::GaussHermite);
    QuadratureRule r;
    r.kind = RuleKind::GaussHermite;
    r.order = order;
    const GaussRule g = gauss_hermite(order);
    r.nodes.resize(g.nodes.size());
    r.weights.resize(g.nodes.size());
    {
        const double c0 = v.coefficient(0), c1 = v.coefficient(1), c2 = v.coefficient(2);
        const double mu = -c1 / (2 * c2), s = 1.0 / std::sqrt(2 * c2);
        const double resid = std::exp(-(c0 - c1 * c1 / (4 * c2)));
        for (std::size_t k = 0; k < g.nodes.size(); ++k) {
            r.nodes[k] = mu + s * g.nodes[k];
            r.weights[k] = s * g.weights[k] * resid;
        }
    }
    return r;
}

QuadratureRule finite_rule(const PolynomialPotential& v, double a, double b, int order) {
    QuadratureRule r;
    r.kind = RuleKind::GaussLegendre;
    r.order = order;
    const GaussRule g = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        const double x = mid + half * g.nodes[k];
        r.nodes.push_back(x);
        r.weights.push_back(half * g.weights[k] * std::exp(-v(x)));
    }
    return r;
}

// Rule on [a, inf).
QuadratureRule half_line_rule(const PolynomialPotential& v, double a, int order, Clustering clustering) {
    QuadratureRule r;
    r.kind = RuleKind::MappedSemiInfinite;
    r.order = order;
    if (clustering == Clustering::Endpoint) {
        // x = a + u^2 with Gauss-Legendre in u on [0, U]: nodes cluster quadratically at a.
        const Support sup = grow_support(v, a, kInf, 90.0);
        const double umax = std::sqrt(std::max(sup.hi - a, 1e-3));
        const GaussRule g = gauss_legendre(order);
        for (std::size_t k = 0; k < g.nodes.size(); ++k) {
            const double u = 0.5 * umax * (g.nodes[k] + 1.0);
            const double x = a + u * u;
            const double w = 0.5 * umax * g.weights[k] * 2.0 * u * std::exp(-v(x));
            if (w > 0.0 && std::isfinite(w)) {
                r.nodes.push_back(x);
                r.weights.push_back(w);
            }
        }
        return r;
    }
    if (v.degree() != 1) return weight_gauss_rule(v, a, kInf, order, RuleKind::MappedSemiInfinite);
    const GaussRule g = gauss_laguerre(order);
    const double ell = 1.0 / v.coefficient(1);
    const double resid_const = std::exp(-v(a));
    for (std::size_t k = 0; k < g.nodes.size(); ++k) {
        const double x = a + ell * g.nodes[k];
        const double w = ell * g.weights[k] * resid_const;
        if (w > 0.0 && std::isfinite(w)) {
            r.nodes.push_back(x);
            r.weights.push_back(w);
        }
    }
    return r;
}

}  // namespace

GaussRule gauss_from_recurrence(std::span<const double> alpha, std::span<const double> beta, double mu0) {
    const int n = static_cast<int>(alpha.size());
    GaussRule g;
    if (n == 0) return g;
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) diag(k) = alpha[static_cast<std::size_t>(k)];
    for (int k = 1; k < n; ++k) sub(k - 1) = std::sqrt(beta[static_cast<std::size_t>(k)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    g.nodes.resize(static_cast<std::size_t>(n));
    g.weights.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double x = es.eigenvalues()(k);
        for (int it = 0; it < 4; ++it) {
            double p, dp;
            scaled_poly(alpha, beta, n, x, p, dp);
            if (dp == 0.0) break;
            const double step = p / dp;
            x -= step;
            if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
        }
        g.nodes[static_cast<std::size_t>(k)] = x;
        g.weights[static_cast<std::size_t>(k)] = christoffel_weight(alpha, beta, mu0, n, x);
    }
    return g;
}

GaussRule gauss_hermite(int n) {
    std::vector<double> a(static_cast<std::size_t>(n), 0.0), b(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) b[static_cast<std::size_t>(k)] = k;
    GaussRule g = gauss_from_recurrence(a, b, std::sqrt(kTwoPi));
    // Exact symmetry of the nodes avoids spurious odd moments.
    for (int k = 0; k < n / 2; ++k) {
        const std::size_t i = static_cast<std::size_t>(k), j = static_cast<std::size_t>(n - 1 - k);
        const double x = 0.5 * (g.nodes[j] - g.nodes[i]);
        const double w = 0.5 * (g.weights[i] + g.weights[j]);
        g.nodes[i] = -x;
        g.nodes[j] = x;
        g.weights[i] = g.weights[j] = w;
    }
    if (n % 2 == 1) g.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return g;
}

GaussRule gauss_laguerre(int n) {
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) a[static_cast<std::size_t>(k)] = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) b[static_cast<std::size_t>(k)] = static_cast<double>(k) * k;
    return gauss_from_recurrence(a, b, 1.0);
}

GaussRule gauss_legendre(int n) {
    std::vector<double> a(static_cast<std::size_t>(n), 0.0), b(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k) * k;
        b[static_cast<std::size_t>(k)] = kk / (4.0 * kk - 1.0);
    }
    GaussRule g = gauss_from_recurrence(a, b, 2.0);
    for (int k = 0; k < n / 2; ++k) {
        const std::size_t i = static_cast<std::size_t>(k), j = static_cast<std::size_t>(n - 1 - k);
        const double x = 0.5 * (g.nodes[j] - g.nodes[i]);
        const double w = 0.5 * (g.weights[i] + g.weights[j]);
        g.nodes[i] = -x;
        g.nodes[j] = x;
        g.weights[i] = g.weights[j] = w;
    }
    if (n % 2 == 1) g.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return g;
}

QuadratureRule build_rule(const PolynomialPotential& v, const Interval& domain, int order, Clustering clustering) {
    if (order < 2) throw Error(ErrorCode::PreconditionViolated, "quadrature order must be >= 2");
    if (!(domain.lower < domain.upper)) throw Error(ErrorCode::UnsupportedDomain, "empty integration interval");
    if (domain.is_real_line()) return real_line_rule(v, order);
    if (domain.lower_finite() && domain.upper_finite()) return finite_rule(v, domain.lower, domain.upper, order);
    if (domain.lower_finite()) return half_line_rule(v, domain.lower, order, clustering);
    // (-inf, b]: reflect x -> -x onto [-b, inf).
    std::vector<double> c(v.coefficients().begin(), v.coefficients().end());
    for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
    QuadratureRule r = half_line_rule(PolynomialPotential(std::move(c)), -domain.upper, order, clustering);
    std::reverse(r.nodes.begin(), r.nodes.end());
    std::reverse(r.weights.begin(), r.weights.end());
    for (auto& x : r.nodes) x = -x;
    return r;
}

double rule_exactness_error(const QuadratureRule& rule, const PolynomialPotential& v, int kmax) {
    if (v.degree() != 2 || rule.kind != RuleKind::GaussHermite) return std::nan("");
    const double c0 = v.coefficient(0), c1 = v.coefficient(1), c2 = v.coefficient(2);
    const double mu = -c1 / (2 * c2), s = 1.0 / std::sqrt(2 * c2);
    const double pref = std::exp(-(c0 - c2 * mu * mu)) * s * std::sqrt(kTwoPi);
    double worst = 0.0;
    for (int k = 0; k <= kmax; ++k) {
        // closed form: pref * sum_m C(k,m) mu^{k-m} s^m E[t^m], E[t^m] = (m-1)!! for even m
        double exact = 0.0, binom = 1.0, dfact = 1.0;
        for (int m = 0; m <= k; ++m) {
            if (m > 0) binom = binom * (k - m + 1) / m;
            if (m % 2 == 0) {
                if (m >= 2) dfact *= (m - 1);
                exact += binom * std::pow(mu, k - m) * std::pow(s, m) * dfact;
            }
        }
        exact *= pref;
        double sum = 0.0, abs_sum = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double t = rule.weights[i] * std::pow(rule.nodes[i], k);
            sum += t;
            abs_sum += std::abs(t);
        }
        worst = std::max(worst, std::abs(sum - exact) / std::max(std::abs(exact), abs_sum));
    }
    return worst;
}

bool kernel_needs_clustering(const CouplingKernel& kernel) {
    if (std::holds_alternative<CauchyShift>(kernel)) return true;
    if (const auto* ch = std::get_if<ChainEffective>(&kernel)) return ch->interaction == Interaction::Cauchy;
    return false;
}

SideRules build_side_rules(const ModelSpec& model, int order) {
    const Clustering cl = kernel_needs_clustering(model.kernel) ? Clustering::Endpoint : Clustering::None;
    return {build_rule(model.v_left, model.domain_left, order, cl),
            build_rule(model.v_right, model.domain_right, order, cl)};
}

struct KernelEvaluator::Chain {
    Interaction interaction;
    std::vector<QuadratureRule> rules;
    std::vector<Eigen::MatrixXd> transfer;  // transfer[k](a, b) = I(t^k_a, t^{k+1}_b) w^{k+1}_b / 2pi

    double bare(double a, double b) const {
        return interaction == Interaction::Exponential ? std::exp(a * b) : 1.0 / (a + b);
    }

    // Row vector over the last inner rule's nodes, for each x.
    Eigen::MatrixXd propagate(std::span<const double> xs) const {
        const QuadratureRule& r0 = rules.front();
        Eigen::MatrixXd v(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(r0.size()));
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t a = 0; a < r0.size(); ++a)
                v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) =
                    r0.weights[a] / kTwoPi * bare(xs[i], r0.nodes[a]);
        for (const auto& t : transfer) v = v * t;
        return v;
    }
};

KernelEvaluator::KernelEvaluator(const CouplingKernel& kernel) : kernel_(kernel) {
    const auto* ch = std::get_if<ChainEffective>(&kernel_);
    if (!ch || ch->inner.empty()) return;
    auto chain = std::make_shared<Chain>();
    chain->interaction = ch->interaction;
    const Clustering cl = ch->interaction == Interaction::Cauchy ? Clustering::Endpoint : Clustering::None;
    for (const auto& f : ch->inner) chain->rules.push_back(build_rule(f.potential, f.domain, ch->order, cl));
    for (std::size_t k = 0; k + 1 < chain->rules.size(); ++k) {
        const auto& ra = chain->rules[k];
        const auto& rb = chain->rules[k + 1];
        Eigen::MatrixXd t(static_cast<Eigen::Index>(ra.size()), static_cast<Eigen::Index>(rb.size()));
        for (std::size_t a = 0; a < ra.size(); ++a)
            for (std::size_t b = 0; b < rb.size(); ++b)
                t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    chain->bare(ra.nodes[a], rb.nodes[b]) * rb.weights[b] / kTwoPi;
        if (!t.allFinite()) throw Error(ErrorCode::DivergentChain, "non-finite inner transfer integral");
        chain->transfer.push_back(std::move(t));
    }
    chain_ = std::move(chain);
}

double KernelEvaluator::operator()(double x, double y) const {
    const double xs[1] = {x}, ys[1] = {y};
    return table(xs, ys)(0, 0);
}

Eigen::MatrixXd KernelEvaluator::table(std::span<const double> xs, std::span<const double> ys) const {
    const auto nx = static_cast<Eigen::Index>(xs.size()), ny = static_cast<Eigen::Index>(ys.size());
    Eigen::MatrixXd out(nx, ny);
    if (const auto* e = std::get_if<ExpProduct>(&kernel_)) {
        for (Eigen::Index i = 0; i < nx; ++i)
            for (Eigen::Index j = 0; j < ny; ++j)
                out(i, j) = std::exp(e->c * xs[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(j)]);
    } else if (std::holds_alternative<CauchyShift>(kernel_)) {
        for (Eigen::Index i = 0; i < nx; ++i)
            for (Eigen::Index j = 0; j < ny; ++j)
                out(i, j) = 1.0 / (xs[static_cast<std::size_t>(i)] + ys[static_cast<std::size_t>(j)]);
    } else if (const auto* t = std::get_if<Tabulated>(&kernel_)) {
        for (Eigen::Index i = 0; i < nx; ++i)
            for (Eigen::Index j = 0; j < ny; ++j)
                out(i, j) = (*t)(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
    } else {
        const auto& ch = std::get<ChainEffective>(kernel_);
        if (!chain_) {
            for (Eigen::Index i = 0; i < nx; ++i)
                for (Eigen::Index j = 0; j < ny; ++j) {
                    const double a = xs[static_cast<std::size_t>(i)], b = ys[static_cast<std::size_t>(j)];
                    out(i, j) = ch.interaction == Interaction::Exponential ? std::exp(a * b) : 1.0 / (a + b);
                }
        } else {
            const Eigen::MatrixXd v = chain_->propagate(xs);
            const QuadratureRule& rl = chain_->rules.back();
            Eigen::MatrixXd last(static_cast<Eigen::Index>(rl.size()), ny);
            for (std::size_t a = 0; a < rl.size(); ++a)
                for (Eigen::Index j = 0; j < ny; ++j)
                    last(static_cast<Eigen::Index>(a), j) = chain_->bare(rl.nodes[a], ys[static_cast<std::size_t>(j)]);
            out = v * last;
            if (!out.allFinite()) throw Error(ErrorCode::DivergentChain, "nested chain integral is not finite");
        }
    }
    return out;
}

KernelEvaluator effective_chain_kernel(const std::vector<InnerFactor>& inner, Interaction interaction, int order) {
    ChainEffective ch{inner, interaction, order};
    ModelSpec probe;
    probe.v_left = PolynomialPotential::quadratic(0.5);
    probe.v_right = probe.v_left;
    probe.kernel = ch;
    if (interaction == Interaction::Cauchy) probe.domain_left = probe.domain_right = Interval::half_line();
    std::vector<Violation> bad;
    for (const auto& v : check_model(probe))
        if (v.code != ErrorCode::DivergentCoupling) bad.push_back(v);
    if (!bad.empty()) throw ValidationError(std::move(bad));
    return KernelEvaluator(ch);
}

BimomentMatrix BimomentMatrix::from_monomial(const Eigen::MatrixXd& entries) {
    BimomentMatrix bm;
    bm.degree = static_cast<int>(entries.rows()) - 1;
    bm.entries = entries;
    bm.gram = entries;
    bm.left_basis = PolyBasis::monomial(bm.degree);
    bm.right_basis = PolyBasis::monomial(bm.degree);
    return bm;
}

namespace {

Eigen::MatrixXd weighted_powers(const QuadratureRule& r, int d) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), d + 1);
    for (std::size_t a = 0; a < r.size(); ++a) {
        double p = r.weights[a];
        for (int i = 0; i <= d; ++i) {
            m(static_cast<Eigen::Index>(a), i) = p;
            p *= r.nodes[a];
        }
    }
    return m;
}

Eigen::MatrixXd weighted_basis(const QuadratureRule& r, const PolyBasis& basis, int d) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r.size()), d + 1);
    std::vector<double> buf(static_cast<std::size_t>(d) + 1);
    for (std::size_t a = 0; a < r.size(); ++a) {
        basis.evaluate(r.nodes[a], buf.data(), d + 1);
        for (int i = 0; i <= d; ++i) m(static_cast<Eigen::Index>(a), i) = r.weights[a] * buf[static_cast<std::size_t>(i)];
    }
    return m;
}

}  // namespace

double bimoment(const ModelSpec& model, int i, int j, const SideRules& rules) {
    if (i < 0 || j < 0) throw Error(ErrorCode::DegreeOutOfRange, "negative bimoment degree");
    const KernelEvaluator k(model.kernel);
    const Eigen::MatrixXd om = k.table(rules.left.nodes, rules.right.nodes);
    double acc = 0.0;
    for (std::size_t a = 0; a < rules.left.size(); ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < rules.right.size(); ++b)
            row += om(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * rules.right.weights[b] *
                   std::pow(rules.right.nodes[b], j);
        acc += rules.left.weights[a] * std::pow(rules.left.nodes[a], i) * row;
    }
    if (!std::isfinite(acc)) throw Error(ErrorCode::NonFiniteIntegrand, "bimoment is not finite");
    return acc;
}

BimomentMatrix bimoment_matrix(const ModelSpec& model, int d, const SideRules& rules) {
    if (d < 0) throw Error(ErrorCode::DegreeOutOfRange, "degree bound must be >= 0");
    if (static_cast<std::size_t>(d) >= std::min(rules.left.size(), rules.right.size()))
        throw Error(ErrorCode::DegreeOutOfRange, "degree bound must be below the quadrature order");
    const KernelEvaluator k(model.kernel);
    const Eigen::MatrixXd om = k.table(rules.left.nodes, rules.right.nodes);
    if (!om.allFinite()) throw Error(ErrorCode::NonFiniteIntegrand, "coupling kernel is not finite on the grid");

    BimomentMatrix bm;
    bm.degree = d;
    bm.order = rules.left.order;
    bm.left_basis = PolyBasis::stieltjes(rules.left.nodes, rules.left.weights, d);
    bm.right_basis = PolyBasis::stieltjes(rules.right.nodes, rules.right.weights, d);
    const Eigen::MatrixXd vl = weighted_powers(rules.left, d), vr = weighted_powers(rules.right, d);
    bm.entries = vl.transpose() * om * vr;
    const Eigen::MatrixXd bl = weighted_basis(rules.left, bm.left_basis, d);
    const Eigen::MatrixXd br = weighted_basis(rules.right, bm.right_basis, d);
    bm.gram = bl.transpose() * om * br;
    if (!bm.entries.allFinite() || !bm.gram.allFinite())
        throw Error(ErrorCode::NonFiniteIntegrand, "bimoment matrix is not finite");
    bm.fingerprint = model_fingerprint(model);
    return bm;
}

BimomentMatrix bimoment_matrix(const ModelSpec& model, int d, int order) {
    return bimoment_matrix(model, d, build_side_rules(model, order));
}

}  // namespace cmm
