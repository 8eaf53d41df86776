#include "cmm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include <Eigen/Dense>

#include "cmm/quadrature.hpp"
#include "cmm/simd/kernels.hpp"

namespace cmm {

cplx Observable::evaluate(std::span<const double> xs, std::span<const double> ys) const {
    if (general) return general(xs, ys);
    cplx v = 1.0;
    if (left_factor)
        for (double x : xs) v *= left_factor(x);
    if (right_factor)
        for (double y : ys) v *= right_factor(y);
    return v;
}

namespace {

std::function<cplx(double)> char_factor(std::vector<cplx> zs, bool inverse) {
    return [zs = std::move(zs), inverse](double x) {
        cplx p = 1.0;
        for (const cplx& z : zs) p *= z - x;
        return inverse ? 1.0 / p : p;
    };
}

}  // namespace

Observable observable_one() { return Observable{"one", {}, {}, {}}; }

Observable observable_charpoly(Side side, std::vector<cplx> zs) {
    Observable o;
    o.name = "charpoly";
    (side == Side::Left ? o.left_factor : o.right_factor) = char_factor(std::move(zs), false);
    return o;
}

Observable observable_inverse_charpoly(Side side, std::vector<cplx> zs) {
    Observable o;
    o.name = "inverse_charpoly";
    (side == Side::Left ? o.left_factor : o.right_factor) = char_factor(std::move(zs), true);
    return o;
}

Observable observable_pair(std::vector<cplx> zs, std::vector<cplx> ws) {
    return Observable{"pair", char_factor(std::move(zs), false), char_factor(std::move(ws), false), {}};
}

Observable observable_inverse_pair(std::vector<cplx> zs, std::vector<cplx> ws) {
    return Observable{"inverse_pair", char_factor(std::move(zs), true), char_factor(std::move(ws), true), {}};
}

Observable observable_mixed(std::vector<cplx> zs, std::vector<cplx> ws, Orientation orientation) {
    const bool left_num = orientation == Orientation::LeftNumerator;
    return Observable{"mixed", char_factor(std::move(zs), !left_num), char_factor(std::move(ws), left_num), {}};
}

Observable observable_schur(Partition lam, Partition mu) {
    Observable o;
    o.name = "schur";
    o.general = [lam = std::move(lam), mu = std::move(mu)](std::span<const double> xs, std::span<const double> ys) {
        std::vector<cplx> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
        return schur_eval_jt(lam, a) * schur_eval_jt(mu, b);
    };
    return o;
}

namespace {

struct Compensated {
    cplx sum{0.0, 0.0}, comp{0.0, 0.0};
    void add(cplx v) {
        // Neumaier summation, per component.
        auto step = [](double& s, double& c, double x) {
            const double t = s + x;
            c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
            s = t;
        };
        double sr = sum.real(), si = sum.imag(), cr = comp.real(), ci = comp.imag();
        step(sr, cr, v.real());
        step(si, ci, v.imag());
        sum = {sr, si};
        comp = {cr, ci};
    }
    cplx value() const { return sum + comp; }
};

cplx pairwise_sum(std::span<const cplx> v) {
    if (v.size() <= 8) {
        cplx s = 0.0;
        for (const cplx& x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Element operations of the vectorized ordered-tuple sum.
double product_work(int order, int n) { return binom(order, n) * binom(order, n - 1) * order * n / std::max(n, 1); }
double general_pairs(int order, int n) { return binom(order, n) * binom(order, n); }

constexpr double kProductBudget = 1.2e10;
constexpr double kCompanionBudget = 2.5e9;
constexpr double kGeneralBudget = 1.2e8;

void enumerate_tuples(int order, int n, std::vector<int>& flat) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == n) {
            flat.insert(flat.end(), idx.begin(), idx.end());
            return;
        }
        for (int i = start; i < order; ++i) {
            idx[static_cast<std::size_t>(pos)] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
}

double det_small(const double* m, int n) {  // row-major n x n, n <= 3
    switch (n) {
        case 0: return 1.0;
        case 1: return m[0];
        case 2: return m[0] * m[3] - m[1] * m[2];
        default:
            return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                   m[2] * (m[3] * m[7] - m[4] * m[6]);
    }
}

struct TupleSums {
    cplx numerator{0.0, 0.0};
    cplx denominator{0.0, 0.0};
};

TupleSums tuple_sums(const ModelSpec& model, int n, const Observable& obs, int order, int threads) {
    const SideRules rules = build_side_rules(model, order);
    const auto& xl = rules.left.nodes;
    const auto& wl = rules.left.weights;
    const auto& yr = rules.right.nodes;
    const auto& wr = rules.right.weights;
    const int nl = static_cast<int>(xl.size()), nr = static_cast<int>(yr.size());
    // Both weights are folded into the kernel table: det[w_i w(x_i, y_j) w_j] carries prod w over the tuple.
    // For e^{cxy} the product is formed in log space; far nodes would overflow the bare kernel.
    std::vector<double> om(static_cast<std::size_t>(nl) * static_cast<std::size_t>(nr));
    if (const auto* e = std::get_if<ExpProduct>(&model.kernel)) {
        for (int i = 0; i < nl; ++i)
            for (int k = 0; k < nr; ++k) {
                const double wl_i = wl[static_cast<std::size_t>(i)], wr_k = wr[static_cast<std::size_t>(k)];
                om[static_cast<std::size_t>(i) * nr + k] =
                    (wl_i > 0.0 && wr_k > 0.0)
                        ? std::exp(e->c * xl[static_cast<std::size_t>(i)] * yr[static_cast<std::size_t>(k)] +
                                   std::log(wl_i) + std::log(wr_k))
                        : 0.0;
            }
    } else {
        const Eigen::MatrixXd tab = KernelEvaluator(model.kernel).table(xl, yr);
        for (int i = 0; i < nl; ++i)
            for (int k = 0; k < nr; ++k)
                om[static_cast<std::size_t>(i) * nr + k] =
                    wl[static_cast<std::size_t>(i)] * tab(i, k) * wr[static_cast<std::size_t>(k)];
    }
    for (double v : om)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteIntegrand, "kernel is not finite on the oracle grid");

    const bool product = obs.is_product();
    std::vector<cplx> fl(static_cast<std::size_t>(nl), 1.0), gr(static_cast<std::size_t>(nr), 1.0);
    if (product) {
        if (obs.left_factor)
            for (int i = 0; i < nl; ++i) fl[static_cast<std::size_t>(i)] = obs.left_factor(xl[static_cast<std::size_t>(i)]);
        if (obs.right_factor)
            for (int k = 0; k < nr; ++k) gr[static_cast<std::size_t>(k)] = obs.right_factor(yr[static_cast<std::size_t>(k)]);
        for (const cplx& v : fl)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw Error(ErrorCode::NonFiniteObservable, "observable is not finite on the oracle grid");
        for (const cplx& v : gr)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw Error(ErrorCode::NonFiniteObservable, "observable is not finite on the oracle grid");
    }

    // Left tuples with their weight, Vandermonde and observable factor.
    std::vector<int> ltup;
    enumerate_tuples(nl, n, ltup);
    const std::size_t nlt = n == 0 ? 1 : ltup.size() / static_cast<std::size_t>(n);
    std::vector<double> a0(nlt);
    std::vector<cplx> a(nlt);
    for (std::size_t t = 0; t < nlt; ++t) {
        const int* I = ltup.data() + t * static_cast<std::size_t>(n);
        double v = 1.0;
        cplx f = 1.0;
        for (int i = 0; i < n; ++i) {
            f *= fl[static_cast<std::size_t>(I[i])];
            for (int j = i + 1; j < n; ++j) v *= xl[static_cast<std::size_t>(I[i])] - xl[static_cast<std::size_t>(I[j])];
        }
        a0[t] = v;
        a[t] = v * f;
    }
    // Right prefixes (all but the last index).
    std::vector<int> rpre;
    enumerate_tuples(nr, n - 1, rpre);
    const std::size_t npre = n <= 1 ? 1 : rpre.size() / static_cast<std::size_t>(n - 1);

    std::vector<cplx> part_num(npre), part_den(npre);
    const simd::KernelTable& kt = simd::active_kernels();
    auto work = [&](std::size_t begin, std::size_t end) {
        std::vector<double> gre(static_cast<std::size_t>(nr)), gim(static_cast<std::size_t>(nr)),
            u(static_cast<std::size_t>(nr));
        std::vector<double> minor(9), coef(4);
        std::vector<double> ys(static_cast<std::size_t>(n)), xs(static_cast<std::size_t>(n));
        for (std::size_t p = begin; p < end; ++p) {
            const int* J = n <= 1 ? nullptr : rpre.data() + p * static_cast<std::size_t>(n - 1);
            const int k0 = n <= 1 ? 0 : J[n - 2] + 1;
            if (k0 >= nr) continue;
            double pref0 = 1.0;
            cplx pref = 1.0;
            for (int i = 0; i < n - 1; ++i) {
                pref *= gr[static_cast<std::size_t>(J[i])];
                for (int j = i + 1; j < n - 1; ++j) pref0 *= yr[static_cast<std::size_t>(J[i])] - yr[static_cast<std::size_t>(J[j])];
            }
            pref *= pref0;
            for (int k = k0; k < nr; ++k) {
                double v = 1.0;
                for (int i = 0; i < n - 1; ++i) v *= yr[static_cast<std::size_t>(J[i])] - yr[static_cast<std::size_t>(k)];
                u[static_cast<std::size_t>(k)] = v;
                gre[static_cast<std::size_t>(k)] = v * gr[static_cast<std::size_t>(k)].real();
                gim[static_cast<std::size_t>(k)] = v * gr[static_cast<std::size_t>(k)].imag();
            }
            const std::size_t len = static_cast<std::size_t>(nr - k0);
            Compensated num, den;
            for (std::size_t t = 0; t < nlt; ++t) {
                const int* I = ltup.data() + t * static_cast<std::size_t>(n);
                // Cofactors of det w(x_I, y_J) along the last column.
                for (int m = 0; m < n; ++m) {
                    int r = 0;
                    for (int i = 0; i < n; ++i) {
                        if (i == m) continue;
                        for (int c = 0; c < n - 1; ++c)
                            minor[static_cast<std::size_t>(r * (n - 1) + c)] =
                                om[static_cast<std::size_t>(I[i]) * nr + J[c]];
                        ++r;
                    }
                    const double s = ((m + n - 1) % 2 == 0) ? 1.0 : -1.0;
                    coef[static_cast<std::size_t>(m)] = s * det_small(minor.data(), n - 1);
                }
                if (product) {
                    const double* rows[4];
                    for (int m = 0; m < n; ++m) rows[m] = om.data() + static_cast<std::size_t>(I[m]) * nr + k0;
                    double out[3];
                    kt.lincomb_dot(n, coef.data(), rows, gre.data() + k0, gim.data() + k0, u.data() + k0, len, out);
                    num.add(a[t] * pref * cplx(out[0], out[1]));
                    den.add(a0[t] * pref0 * out[2]);
                } else {
                    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = xl[static_cast<std::size_t>(I[i])];
                    for (int i = 0; i < n - 1; ++i) ys[static_cast<std::size_t>(i)] = yr[static_cast<std::size_t>(J[i])];
                    for (int k = k0; k < nr; ++k) {
                        double l = 0.0;
                        for (int m = 0; m < n; ++m)
                            l += coef[static_cast<std::size_t>(m)] * om[static_cast<std::size_t>(I[m]) * nr + k];
                        ys[static_cast<std::size_t>(n - 1)] = yr[static_cast<std::size_t>(k)];
                        const cplx o = obs.general(xs, ys);
                        if (!std::isfinite(o.real()) || !std::isfinite(o.imag()))
                            throw Error(ErrorCode::NonFiniteObservable, "observable is not finite on the oracle grid");
                        const double base = a0[t] * pref0 * l * u[static_cast<std::size_t>(k)];
                        num.add(base * o);
                        den.add(base);
                    }
                }
            }
            part_num[p] = num.value();
            part_den[p] = den.value();
        }
    };
    int nt = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nt = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(nt), npre));
    if (nt <= 1 || !product) {
        work(0, npre);
    } else {
        // Interleaved blocks balance the shrinking inner ranges; partial sums land in fixed slots.
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(static_cast<std::size_t>(nt));
        const std::size_t block = 16;
        for (int w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t b = static_cast<std::size_t>(w) * block; b < npre; b += block * static_cast<std::size_t>(nt))
                        work(b, std::min(npre, b + block));
                } catch (...) {
                    errs[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    return {pairwise_sum(part_num), pairwise_sum(part_den)};
}

void check_grid(int n, int order, bool product) {
    if (n < 1 || n > 3) throw Error(ErrorCode::GridTooLarge, "tensor oracle supports 1 <= n <= 3");
    if (order < 2) throw Error(ErrorCode::PreconditionViolated, "oracle order must be >= 2");
    const double cost = product ? product_work(order, n) : general_pairs(order, n);
    if (cost > (product ? kProductBudget : kGeneralBudget))
        throw Error(ErrorCode::GridTooLarge, "oracle grid too large for n = " + std::to_string(n) + " at order " +
                                                 std::to_string(order));
}

int pick_companion(int n, int order, bool product, int requested) {
    if (requested > 0) return requested;
    const double cost = product ? product_work(2 * order, n) : general_pairs(2 * order, n);
    if (cost <= (product ? kCompanionBudget : kGeneralBudget / 4)) return 2 * order;
    return std::max(2, (3 * order) / 4);
}

}  // namespace

OracleEstimate brute_force_Z(const ModelSpec& model, int n, const OracleOptions& opts) {
    check_grid(n, opts.order, true);
    const int comp = pick_companion(n, opts.order, true, opts.companion_order);
    const TupleSums s = tuple_sums(model, n, observable_one(), opts.order, opts.threads);
    const TupleSums c = tuple_sums(model, n, observable_one(), comp, opts.threads);
    OracleEstimate e;
    e.value = s.denominator;
    e.error_bound = std::abs(s.denominator - c.denominator);
    e.order = opts.order;
    e.companion_order = comp;
    return e;
}

OracleEstimate brute_force_expectation(const ModelSpec& model, int n, const Observable& obs,
                                       const OracleOptions& opts) {
    check_grid(n, opts.order, obs.is_product());
    const int comp = pick_companion(n, opts.order, obs.is_product(), opts.companion_order);
    const TupleSums s = tuple_sums(model, n, obs, opts.order, opts.threads);
    const TupleSums c = tuple_sums(model, n, obs, comp, opts.threads);
    if (s.denominator == 0.0 || c.denominator == 0.0)
        throw Error(ErrorCode::NonFiniteIntegrand, "oracle partition function vanishes on the grid");
    OracleEstimate e;
    e.value = s.numerator / s.denominator;
    e.error_bound = std::abs(e.value - c.numerator / c.denominator);
    e.order = opts.order;
    e.companion_order = comp;
    return e;
}

OracleEstimate mc_expectation(const ModelSpec& model, int n, const Observable& obs, long long samples,
                              std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::PreconditionViolated, "Monte Carlo oracle needs n >= 1");
    if (samples < 2) throw Error(ErrorCode::PreconditionViolated, "Monte Carlo oracle needs at least two samples");
    const KernelEvaluator kernel(model.kernel);
    // One-point marginals of the n = 1 model fix each proposal's center and width.
    const SideRules rules = build_side_rules(model, 64);
    const Eigen::MatrixXd tab = kernel.table(rules.left.nodes, rules.right.nodes);
    auto moments = [&](bool left) {
        const auto& own = left ? rules.left : rules.right;
        const auto& oth = left ? rules.right : rules.left;
        double m0 = 0, m1 = 0, m2 = 0;
        for (std::size_t k = 0; k < own.size(); ++k) {
            double s = 0.0;
            for (std::size_t l = 0; l < oth.size(); ++l)
                s += oth.weights[l] * std::abs(left ? tab(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l))
                                                    : tab(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(k)));
            const double p = own.weights[k] * s;
            m0 += p;
            m1 += p * own.nodes[k];
            m2 += p * own.nodes[k] * own.nodes[k];
        }
        const double mean = m1 / m0;
        const double var = std::max(m2 / m0 - mean * mean, 1e-6);
        return std::pair<double, double>(mean, std::sqrt(var * (1.5 + 0.5 * (n - 1))));
    };
    const auto [mu_l, sd_l] = moments(true);
    const auto [mu_r, sd_r] = moments(false);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nl(mu_l, sd_l), nr(mu_r, sd_r);
    auto log_q = [](double x, double mu, double sd) {
        const double t = (x - mu) / sd;
        return -0.5 * t * t - std::log(sd);
    };
    auto inside = [](const Interval& d, double x) { return x > d.lower && x < d.upper; };
    std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
    Eigen::MatrixXd om(n, n);
    std::vector<double> w(static_cast<std::size_t>(samples));
    std::vector<cplx> o(static_cast<std::size_t>(samples));
    for (long long s = 0; s < samples; ++s) {
        double logw = 0.0;
        bool ok = true;
        for (int i = 0; i < n; ++i) {
            xs[static_cast<std::size_t>(i)] = nl(rng);
            ys[static_cast<std::size_t>(i)] = nr(rng);
        }
        double sign = 1.0;
        for (int i = 0; i < n; ++i) {
            const double x = xs[static_cast<std::size_t>(i)], y = ys[static_cast<std::size_t>(i)];
            ok = ok && inside(model.domain_left, x) && inside(model.domain_right, y);
            logw += -model.v_left(x) - model.v_right(y) - log_q(x, mu_l, sd_l) - log_q(y, mu_r, sd_r);
            for (int j = i + 1; j < n; ++j) {
                const double dx = x - xs[static_cast<std::size_t>(j)], dy = y - ys[static_cast<std::size_t>(j)];
                logw += std::log(std::abs(dx)) + std::log(std::abs(dy));
                if (dx * dy < 0) sign = -sign;
            }
        }
        double wt = 0.0;
        if (ok) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) om(i, j) = kernel(xs[static_cast<std::size_t>(i)], ys[static_cast<std::size_t>(j)]);
            const double d = n == 1 ? om(0, 0) : om.partialPivLu().determinant();
            wt = sign * d * std::exp(logw);
        }
        const std::size_t si = static_cast<std::size_t>(s);
        w[si] = std::isfinite(wt) ? wt : 0.0;
        o[si] = w[si] != 0.0 ? obs.evaluate(xs, ys) : cplx(0.0);
        if (!std::isfinite(o[si].real()) || !std::isfinite(o[si].imag()))
            throw Error(ErrorCode::NonFiniteObservable, "observable is not finite at a Monte Carlo sample");
    }
    double sw = 0.0, sw2 = 0.0;
    cplx swo = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) {
        sw += w[s];
        sw2 += w[s] * w[s];
        swo += w[s] * o[s];
    }
    const double ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
    if (!(ess >= 0.01 * static_cast<double>(samples)))
        throw Error(ErrorCode::DegenerateProposal, "effective sample size " + std::to_string(ess) + " below 1% of " +
                                                       std::to_string(samples));
    OracleEstimate e;
    e.method = OracleMethod::MonteCarlo;
    e.value = swo / sw;
    double var = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) var += w[s] * w[s] * std::norm(o[s] - e.value);
    e.error_bound = 3.0 * std::sqrt(var) / std::abs(sw);
    e.samples = samples;
    e.seed = seed;
    return e;
}

AhCheck ah_identity_check(const std::vector<RealFunction>& f, const std::vector<RealFunction>& g,
                          const PolynomialPotential& v, const Interval& domain, int order) {
    const int n = static_cast<int>(f.size());
    if (n < 1 || n > 4 || static_cast<int>(g.size()) != n)
        throw Error(ErrorCode::PreconditionViolated, "AH check needs two families of equal size 1..4");
    const QuadratureRule rule = build_rule(v, domain, order);
    const int q = static_cast<int>(rule.size());
    Eigen::MatrixXd fv(n, q), gv(n, q);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < q; ++k) {
            fv(i, k) = f[static_cast<std::size_t>(i)](rule.nodes[static_cast<std::size_t>(k)]);
            gv(i, k) = g[static_cast<std::size_t>(i)](rule.nodes[static_cast<std::size_t>(k)]);
        }
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::pair<std::vector<int>, double>> perms;
    do {
        int inv = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) inv += perm[static_cast<std::size_t>(i)] > perm[static_cast<std::size_t>(j)];
        perms.emplace_back(perm, inv % 2 ? -1.0 : 1.0);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto perm_det = [&](const Eigen::MatrixXd& m, const int* cols) {
        double s = 0.0;
        for (const auto& [p, sg] : perms) {
            double t = sg;
            for (int i = 0; i < n; ++i) t *= m(i, cols[p[static_cast<std::size_t>(i)]]);
            s += t;
        }
        return s;
    };
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    std::vector<cplx> partial;
    Compensated acc;
    for (;;) {
        bool distinct = true;
        for (int i = 0; i < n && distinct; ++i)
            for (int j = i + 1; j < n; ++j)
                if (idx[static_cast<std::size_t>(i)] == idx[static_cast<std::size_t>(j)]) distinct = false;
        if (distinct) {
            double w = 1.0;
            for (int i = 0; i < n; ++i) w *= rule.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
            acc.add(w * perm_det(fv, idx.data()) * perm_det(gv, idx.data()));
        }
        int p = n - 1;
        while (p >= 0 && ++idx[static_cast<std::size_t>(p)] == q) idx[static_cast<std::size_t>(p--)] = 0;
        if (p < 0) break;
    }
    double fact = 1.0;
    for (int i = 2; i <= n; ++i) fact *= i;
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < q; ++k) s += rule.weights[static_cast<std::size_t>(k)] * fv(i, k) * gv(j, k);
            m(i, j) = s;
        }
    AhCheck r;
    r.lhs = acc.value().real() / fact;
    r.rhs = det_real(m);
    r.relative = std::abs(r.lhs - r.rhs) / std::max(std::abs(r.rhs), 1e-300);
    return r;
}

}  // namespace cmm
