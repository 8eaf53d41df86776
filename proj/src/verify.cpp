#include "cmm/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "cmm/biortho.hpp"
#include "cmm/correlators.hpp"
#include "cmm/exact.hpp"
#include "cmm/oracle.hpp"
#include "cmm/polyensemble.hpp"
#include "cmm/quadrature.hpp"
#include "cmm/schur.hpp"
#include "cmm/workspace.hpp"

namespace cmm {

VerifyLevel parse_verify_level(const std::string& s) {
    if (s == "quick") return VerifyLevel::Quick;
    if (s == "full") return VerifyLevel::Full;
    throw Error(ErrorCode::ConfigError, "unknown verification level '" + s + "' (expected quick or full)");
}

std::string to_string(VerifyLevel level) { return level == VerifyLevel::Quick ? "quick" : "full"; }

bool VerifyReport::all_pass() const {
    return !criteria.empty() && std::all_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.pass; });
}

double tolerance_scale_from_env() {
    const char* raw = std::getenv("CMM_VERIFY_TOL_SCALE");
    if (!raw || !*raw) return 1.0;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (end == raw || *end != '\0' || !std::isfinite(v) || v < 0.0)
        throw Error(ErrorCode::ConfigError, std::string("CMM_VERIFY_TOL_SCALE must be a non-negative number, got '") + raw + "'");
    return v;
}

const std::string& criterion_title(int criterion) {
    static const std::vector<std::string> titles = {
        "",
        "biorthogonality of the factorized system",
        "partition function: product of pivots vs bimoment determinant",
        "floating pivots vs exact-rational Gaussian pipeline",
        "Andreief-Heine identity",
        "Schur evaluators: Jacobi-Trudi vs bialternant",
        "finite Cauchy-box expansion",
        "Schur polynomial average vs tensor oracle",
        "characteristic polynomial average vs oracle",
        "inverse characteristic polynomial average vs oracle",
        "pair correlation vs oracle",
        "inverse pair correlation vs oracle",
        "mixed pair correlation",
        "kernel trace and reproducing property",
        "polynomial ensemble reduction to the coupled model",
        "verification runtime",
    };
    static const std::string none = "unknown criterion";
    return criterion >= 1 && criterion < static_cast<int>(titles.size()) ? titles[static_cast<std::size_t>(criterion)] : none;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(cplx a, cplx b) {
    const double d = std::abs(a - b);
    const double s = std::abs(b);
    return s == 0.0 ? d : d / s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

std::string pts(const std::vector<cplx>& zs) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (i) os << ";";
        os << zs[i].real() << (zs[i].imag() < 0 ? "" : "+") << zs[i].imag() << "i";
    }
    os << ")";
    return os.str();
}

// Oracle orders per level and rank. n=3 grids cost order^6 / 36, so they stay at 64.
OracleOptions oracle_opts(VerifyLevel level, int n) {
    OracleOptions o;
    if (n == 1) {
        o.order = 128;
        o.companion_order = 192;
    } else if (n == 2) {
        o.order = level == VerifyLevel::Full ? 96 : 64;
        o.companion_order = level == VerifyLevel::Full ? 128 : 96;
    } else {
        o.order = 64;
        o.companion_order = 48;
    }
    return o;
}

// Non-product observables (Schur) go through the slow pairwise path; their integrands are
// polynomial times the weight, so lower orders already converge to roundoff.
OracleOptions general_opts(VerifyLevel level) {
    OracleOptions o;
    o.order = level == VerifyLevel::Full ? 64 : 40;
    o.companion_order = level == VerifyLevel::Full ? 96 : 56;
    return o;
}

class Runner {
public:
    explicit Runner(const VerifyOptions& opts, double scale) : opts_(opts), scale_(scale), rng_(opts.seed) {}

    VerifyLevel level() const { return opts_.level; }
    bool full() const { return opts_.level == VerifyLevel::Full; }
    std::mt19937_64& rng() { return rng_; }

    CheckRow& add(CheckRow row, bool extra_ok = true) {
        row.tolerance *= scale_;
        row.pass = extra_ok && std::isfinite(row.error) && row.error <= row.tolerance;
        row.seconds = seconds_since(mark_);
        mark_ = Clock::now();
        rows_.push_back(std::move(row));
        if (opts_.on_row) opts_.on_row(rows_.back());
        return rows_.back();
    }

    void fail(int criterion, const std::string& id, const std::string& what) {
        CheckRow r;
        r.id = id;
        r.criterion = criterion;
        r.description = "check raised an error";
        r.error = std::numeric_limits<double>::infinity();
        r.note = what;
        add(std::move(r), false);
    }

    // Runs one criterion body; an escaping error becomes a failing row.
    template <class F>
    void criterion(int c, F&& body) {
        mark_ = Clock::now();
        try {
            body();
        } catch (const std::exception& e) {
            fail(c, "c" + std::to_string(c) + ".error", e.what());
        }
    }

    // Formula vs oracle, relative to |oracle|.
    CheckRow& versus_oracle(int c, std::string id, std::string desc, const CorrelatorResult& f, const OracleEstimate& o,
                            double tol, std::string note = {}, bool extra_ok = true) {
        CheckRow r;
        r.id = std::move(id);
        r.criterion = c;
        r.description = std::move(desc);
        r.formula = f.full();
        r.oracle = o.value;
        r.oracle_bound = std::abs(o.value) > 0 ? o.error_bound / std::abs(o.value) : o.error_bound;
        r.error = rel(r.formula, r.oracle);
        r.tolerance = tol;
        r.note = "oracle order " + std::to_string(o.order) + "/" + std::to_string(o.companion_order);
        if (!note.empty()) r.note += "; " + note;
        return add(std::move(r), extra_ok);
    }

    CheckRow& compare(int c, std::string id, std::string desc, cplx formula, cplx reference, double error, double tol,
                      std::string note = {}) {
        CheckRow r;
        r.id = std::move(id);
        r.criterion = c;
        r.description = std::move(desc);
        r.formula = formula;
        r.oracle = reference;
        r.error = error;
        r.tolerance = tol;
        r.note = std::move(note);
        return add(std::move(r));
    }

    std::vector<CheckRow> take() { return std::move(rows_); }

private:
    const VerifyOptions& opts_;
    double scale_;
    std::mt19937_64 rng_;
    std::vector<CheckRow> rows_;
    Clock::time_point mark_ = Clock::now();
};

void c1_biorthogonality(Runner& run, const ModelSpec& model, double build_seconds, const Workspace& ws) {
    const BiorthogonalSystem& sys = ws.system();
    const SideRules fine = build_side_rules(model, 2 * ws.options().order);
    const Eigen::MatrixXd g = recomputed_gram(sys, model, fine);
    double hmax = 0.0;
    for (double h : sys.norms()) hmax = std::max(hmax, std::abs(h));
    double off = 0.0, diag = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            if (i == j) diag = std::max(diag, std::abs(g(i, i) / sys.norm(static_cast<int>(i)) - 1.0));
            else off = std::max(off, std::abs(g(i, j)));
        }
    run.compare(1, "c1.offdiag", "max |G_ij|, i != j, relative to max |h_i| (d=12, rule order 128)", off / hmax, 0.0,
                off / hmax, 1e-9);
    run.compare(1, "c1.diag", "max |G_ii / h_i - 1| (d=12, rule order 128)", diag, 0.0, diag, 1e-10);
    run.compare(1, "c1.runtime", "workspace build seconds (bimoments, factorization, transforms)", build_seconds, 5.0,
                build_seconds, 5.0, "tolerance in seconds");
}

void c2_partition(Runner& run, const Workspace& ws) {
    for (int n = 1; n <= 8; ++n) {
        const CorrelatorResult z = partition_function(ws.system(), n, &ws.bimoments());
        const double d = z.diagnostics.extras.at("rel_diff");
        run.compare(2, "c2.N" + std::to_string(n), "prod h_i vs det of the bimoment block, N=" + std::to_string(n), z.full(),
                    z.diagnostics.extras.at("det_block"), d, 1e-10);
    }
}

void c3_exact(Runner& run, const Workspace& ws) {
    const ExactGaussianSystem ex = exact_gaussian_system(ws.model(), 8);
    for (int i = 0; i <= 8; ++i) {
        const double h = ws.system().norm(i), e = ex.h(i);
        run.compare(3, "c3.h" + std::to_string(i), "float h_" + std::to_string(i) + " vs exact rational", h, e,
                    std::abs(h - e) / std::abs(e), 1e-11);
    }
}

void c4_ah(Runner& run) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const PolynomialPotential v({0.0, 0.0, 0.5});
    auto random_poly = [&](int deg) {
        std::vector<double> c(static_cast<std::size_t>(deg) + 1);
        for (double& x : c) x = u(run.rng());
        return RealFunction([c](double x) {
            double acc = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
            return acc;
        });
    };
    for (int n = 1; n <= 4; ++n) {
        const int trials = run.full() ? 3 : 1;
        for (int t = 0; t < trials; ++t) {
            std::vector<RealFunction> f, g;
            for (int i = 0; i < n; ++i) {
                f.push_back(random_poly(3));
                g.push_back(random_poly(3));
            }
            const AhCheck r = ah_identity_check(f, g, v, Interval::real_line(), 16);
            run.compare(4, "c4.N" + std::to_string(n) + "." + std::to_string(t),
                        "permutation sum vs det of integrals, random cubic families, N=" + std::to_string(n), r.lhs, r.rhs,
                        r.relative, 1e-9);
        }
    }
}

void c5_schur_evaluators(Runner& run) {
    std::uniform_int_distribution<int> len(0, 4), part(1, 4), nvar(1, 4);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    double worst = 0.0;
    std::string worst_case;
    for (int t = 0; t < 200; ++t) {
        const int n = nvar(run.rng());
        const int l = std::min(len(run.rng()), n);
        std::vector<int> parts(static_cast<std::size_t>(l));
        for (int& p : parts) p = part(run.rng());
        std::sort(parts.rbegin(), parts.rend());
        const Partition lam(parts);
        std::vector<cplx> xs;
        // Spread points so the bialternant's Vandermonde is not near-singular.
        while (static_cast<int>(xs.size()) < n) {
            const cplx x(u(run.rng()), u(run.rng()));
            bool ok = true;
            for (cplx y : xs) ok = ok && std::abs(x - y) > 0.25;
            if (ok) xs.push_back(x);
        }
        const cplx a = schur_eval_jt(lam, xs), b = schur_eval_bialternant(lam, xs);
        const double e = rel(a, b);
        if (e > worst) {
            worst = e;
            worst_case = "lambda size " + std::to_string(lam.weight()) + ", N=" + std::to_string(n);
        }
    }
    run.compare(5, "c5.random200", "max relative JT vs bialternant over 200 random cases", worst, 0.0, worst, 1e-10,
                worst_case.empty() ? std::string{} : "worst: " + worst_case);
    const std::vector<cplx> xs = {{0.3, 0.1}, {-0.7, 0.4}, {1.1, -0.2}};
    const cplx e1 = schur_eval_jt(Partition{}, xs), e2 = schur_eval_bialternant(Partition{}, xs);
    run.compare(5, "c5.empty", "s_empty = 1 exactly (both evaluators)", e1, e2, std::abs(e1 - 1.0) + std::abs(e2 - 1.0), 0.0);
    const Partition long_lam{2, 1, 1, 1};
    const cplx z1 = schur_eval_jt(long_lam, xs), z2 = schur_eval_bialternant(long_lam, xs);
    run.compare(5, "c5.long", "l(lambda) > N gives exactly 0 (both evaluators)", z1, z2, std::abs(z1) + std::abs(z2), 0.0);
}

void c6_cauchy(Runner& run) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
        const std::vector<cplx> zs = {cplx(u(run.rng()), u(run.rng()))};
        const std::vector<cplx> xs = {cplx(u(run.rng()), 0.0), cplx(u(run.rng()), 0.0)};
        const cplx a = charpoly_product(zs, xs), b = cauchy_box_expansion(zs, xs);
        const double e = rel(b, a);
        worst = std::max(worst, e);
        run.compare(6, "c6.p" + std::to_string(t), "prod det(z - X) vs signed Schur box sum, N=2 M=1", b, a, e, 1e-12);
    }
}

Observable abs_observable(Observable o) {
    auto g = o.general;
    o.name = "abs " + o.name;
    o.general = [g](std::span<const double> xs, std::span<const double> ys) { return cplx(std::abs(g(xs, ys)), 0.0); };
    return o;
}

void c7_schur_average(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    const Partition lam{2, 1}, mu{1};
    const CorrelatorResult f = schur_average(ws.bimoments(), lam, mu, 2);
    const OracleOptions oo = general_opts(run.level());
    const OracleEstimate o = brute_force_expectation(model, 2, observable_schur(lam, mu), oo);
    // On the reference model every entry of the Lemma matrix pairs an odd power with an even one,
    // so the average vanishes; measure the residual on the scale of <|s_lambda s_mu|>.
    OracleOptions rough;
    rough.order = 32;
    rough.companion_order = 40;
    const OracleEstimate scale = brute_force_expectation(model, 2, abs_observable(observable_schur(lam, mu)), rough);
    CheckRow& r = run.compare(7, "c7.ref", "<s_(2,1)(X_L) s_(1)(X_R)>, N=2, reference model (exact value 0)", f.full(),
                              o.value, std::abs(f.full() - o.value) / std::abs(scale.value), 1e-6,
                              "error relative to <|s_lambda s_mu|> = " + fmt(scale.value.real()));
    r.oracle_bound = o.error_bound / std::abs(scale.value);

    ModelSpec skew = model;
    skew.v_left = PolynomialPotential({0.0, 0.3, 0.5});
    WorkspaceOptions wo;
    const Workspace ws2 = Workspace::build(skew, wo);
    const CorrelatorResult f2 = schur_average(ws2.bimoments(), lam, mu, 2);
    const OracleEstimate o2 = brute_force_expectation(skew, 2, observable_schur(lam, mu), oo);
    run.versus_oracle(7, "c7.skew", "<s_(2,1)(X_L) s_(1)(X_R)>, N=2, V_L = x^2/2 + 0.3x", f2, o2, 1e-6);

    const CorrelatorResult one = schur_average(ws.bimoments(), Partition{}, Partition{}, 2);
    run.compare(7, "c7.empty", "lambda = mu = empty gives exactly 1", one.full(), 1.0, std::abs(one.full() - 1.0), 0.0);
}

void c8_charpoly(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    const OracleOptions oo = oracle_opts(run.level(), 2);
    const std::vector<cplx> points = {{2, 1}, {-1, 0.5}, {0.3, -1.2}, {1.5, 0}, {-2, -2}};
    for (std::size_t i = 0; i < points.size(); ++i) {
        const CorrelatorResult f = charpoly_average(ws.system(), Side::Left, 2, SpectralPoints{points[i]});
        const OracleEstimate o = brute_force_expectation(model, 2, observable_charpoly(Side::Left, {points[i]}), oo);
        run.versus_oracle(8, "c8.M1.p" + std::to_string(i), "<det(z - X_L)> = P_2(z), N=2, z=" + pts({points[i]}), f, o, 1e-6);
    }
    std::vector<std::vector<cplx>> pairs = {{{2, 1}, {-1, 0.5}}};
    if (run.full()) pairs.push_back({{0.5, -1}, {1.5, 2}});
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const CorrelatorResult f = charpoly_average(ws.system(), Side::Left, 2, SpectralPoints(pairs[i]));
        const OracleEstimate o = brute_force_expectation(model, 2, observable_charpoly(Side::Left, pairs[i]), oo);
        run.versus_oracle(8, "c8.M2.p" + std::to_string(i), "M=2, N=2 determinant formula, Z=" + pts(pairs[i]), f, o, 1e-5);
    }
    if (run.full()) {
        const std::vector<cplx> z = {{1, 1}, {-0.5, 2}};
        const CorrelatorResult f = charpoly_average(ws.system(), Side::Right, 2, SpectralPoints(z));
        const OracleEstimate o = brute_force_expectation(model, 2, observable_charpoly(Side::Right, z), oo);
        run.versus_oracle(8, "c8.M2.right", "M=2, N=2 on X_R, Z=" + pts(z), f, o, 1e-5);
    }
}

void c9_inverse(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    {
        const std::vector<cplx> z = {{2, 1}};
        const CorrelatorResult f = charpoly_inverse_average_small(ws, Side::Left, 3, SpectralPoints(z));
        const OracleEstimate o = brute_force_expectation(model, 3, observable_inverse_charpoly(Side::Left, z), oracle_opts(run.level(), 3));
        run.versus_oracle(9, "c9.small.M1N3", "<1/det(z - X_L)> = (Z_2/Z_3) ~P_2(z), N=3, z=2+i", f, o, 1e-5);
    }
    {
        const std::vector<cplx> z = {{2, 1}, {3, 2}};
        const CorrelatorResult f = charpoly_inverse_average_large(ws, Side::Left, 1, SpectralPoints(z));
        const OracleEstimate o = brute_force_expectation(model, 1, observable_inverse_charpoly(Side::Left, z), oracle_opts(run.level(), 1));
        run.versus_oracle(9, "c9.large.M2N1", "M=2 >= N=1 branch, Z=" + pts(z), f, o, 1e-6);
    }
    {
        const std::vector<cplx> z = {{2, 1}, {3, 2}};
        const cplx a = charpoly_inverse_average_small(ws, Side::Left, 2, SpectralPoints(z)).full();
        const cplx b = charpoly_inverse_average_large(ws, Side::Left, 2, SpectralPoints(z)).full();
        run.compare(9, "c9.consistency.M2N2", "M=N=2: small-M branch vs large-M branch", a, b, rel(a, b), 1e-8);
    }
    if (run.full()) {
        const std::vector<cplx> z = {{2, 1}, {-1, 2}};
        const CorrelatorResult f = charpoly_inverse_average_small(ws, Side::Right, 2, SpectralPoints(z));
        const OracleEstimate o = brute_force_expectation(model, 2, observable_inverse_charpoly(Side::Right, z), oracle_opts(run.level(), 2));
        run.versus_oracle(9, "c9.small.M2N2.right", "M=N=2 on X_R, Z=" + pts(z), f, o, 1e-5);
    }
}

void c10_pair(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    const std::vector<cplx> z = {{2, 1}}, w = {{2, -1}};
    for (int n = 1; n <= 2; ++n) {
        const CorrelatorResult f = pair_charpoly_average(ws.system(), n, SpectralPoints(z), SpectralPoints(w));
        const OracleEstimate o = brute_force_expectation(model, n, observable_pair(z, w), oracle_opts(run.level(), n));
        run.versus_oracle(10, "c10.M1N" + std::to_string(n), "<det(z - X_L) det(w - X_R)>, N=" + std::to_string(n), f, o,
                          n == 1 ? 1e-7 : 1e-6);
    }
    if (run.full()) {
        const std::vector<cplx> z2 = {{2, 1}, {0.3, -1}}, w2 = {{2, -1}, {1, 1}};
        const CorrelatorResult f = pair_charpoly_average(ws.system(), 2, SpectralPoints(z2), SpectralPoints(w2));
        const OracleEstimate o = brute_force_expectation(model, 2, observable_pair(z2, w2), oracle_opts(run.level(), 2));
        run.versus_oracle(10, "c10.M2N2", "M=2, N=2 pair correlation", f, o, 1e-6);
    }
}

void c11_inverse_pair(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    {
        const std::vector<cplx> z = {{2, 1}}, w = {{2, -1}};
        const CorrelatorResult f = pair_inverse_average_small(ws, 2, SpectralPoints(z), SpectralPoints(w));
        const OracleEstimate o = brute_force_expectation(model, 2, observable_inverse_pair(z, w), oracle_opts(run.level(), 2));
        const double residual = std::abs(f.full() - o.value);
        const double tail = f.diagnostics.tail;
        run.versus_oracle(11, "c11.small.M1N2", "<1/(det(z - X_L) det(w - X_R))>, dual CD sum, N=2, z=2+i, w=2-i", f, o,
                          1e-4, "tail " + fmt(tail) + (tail >= residual ? " covers" : " does not cover") + " residual " + fmt(residual),
                          tail >= residual);
    }
    {
        const std::vector<cplx> z = {{2, 1}, {3, 2}}, w = {{2, -1}, {-1, -1.5}};
        const CorrelatorResult f = pair_inverse_average_large(ws, 1, SpectralPoints(z), SpectralPoints(w));
        const OracleEstimate o = brute_force_expectation(model, 1, observable_inverse_pair(z, w), oracle_opts(run.level(), 1));
        run.versus_oracle(11, "c11.large.M2N1", "M=2 >= N=1 double-Cauchy branch", f, o, 1e-5,
                          "cond " + fmt(f.diagnostics.condition));
    }
    {
        const SpectralPoints z{{2, 1}}, w{{2, -1}};
        const cplx a = pair_inverse_average_small(ws, 1, z, w).full();
        const cplx b = pair_inverse_average_large(ws, 1, z, w).full();
        run.compare(11, "c11.consistency.M1N1", "M=N=1: dual CD branch vs double-Cauchy branch", a, b, rel(a, b), 1e-6);
    }
    if (run.full()) {
        const std::vector<cplx> z = {{2, 1}, {-1, 1.5}}, w = {{2, -1}, {0.5, -2}};
        const CorrelatorResult f = pair_inverse_average_large(ws, 2, SpectralPoints(z), SpectralPoints(w));
        const OracleEstimate o = brute_force_expectation(model, 2, observable_inverse_pair(z, w), oracle_opts(run.level(), 2));
        run.versus_oracle(11, "c11.large.M2N2", "M=N=2 double-Cauchy branch", f, o, 1e-5);
    }
}

void c12_mixed(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    const cplx z(1.5, 1.0), w(-0.5, 1.2);
    for (Orientation or_ : {Orientation::LeftNumerator, Orientation::RightNumerator}) {
        const std::string tag = or_ == Orientation::LeftNumerator ? "L" : "R";
        for (int n = 1; n <= 3; ++n) {
            const cplx a = mixed_pair_average(ws, n, SpectralPoints{z}, SpectralPoints{w}, or_).full();
            const cplx b = mixed_pair_m1_closed_form(ws, n, z, w, or_).full();
            run.compare(12, "c12.closed." + tag + ".N" + std::to_string(n),
                        "general M=1 determinant vs closed form, " + tag + " numerator, N=" + std::to_string(n), a, b, rel(a, b),
                        1e-10);
        }
        const CorrelatorResult f = mixed_pair_average(ws, 2, SpectralPoints{z}, SpectralPoints{w}, or_);
        const OracleEstimate o = brute_force_expectation(model, 2, observable_mixed({z}, {w}, or_), oracle_opts(run.level(), 2));
        run.versus_oracle(12, "c12.oracle." + tag + ".M1N2", "mixed pair, " + tag + " numerator, M=1, N=2", f, o, 1e-5);
    }
    if (run.full()) {
        const std::vector<cplx> zs = {{1.5, 1}, {-1, -1.2}}, wsp = {{-0.5, 1.2}, {1, -1.5}};
        for (Orientation or_ : {Orientation::LeftNumerator, Orientation::RightNumerator}) {
            const std::string tag = or_ == Orientation::LeftNumerator ? "L" : "R";
            const CorrelatorResult f = mixed_pair_average(ws, 2, SpectralPoints(zs), SpectralPoints(wsp), or_);
            const OracleEstimate o = brute_force_expectation(model, 2, observable_mixed(zs, wsp, or_), oracle_opts(run.level(), 2));
            run.versus_oracle(12, "c12.oracle." + tag + ".M2N2", "mixed pair, " + tag + " numerator, M=2, N=2", f, o, 1e-5);
        }
    }
}

void c13_kernel(Runner& run, const Workspace& ws) {
    for (int n = 1; n <= 8; ++n) {
        const double t = kernel_trace(ws.system(), ws.model(), ws.rules(), n);
        run.compare(13, "c13.trace.N" + std::to_string(n), "tr(w K_N) = N, N=" + std::to_string(n), t, n, std::abs(t - n), 1e-8);
        const double r = reproducing_residual(ws.system(), ws.model(), ws.rules(), n);
        run.compare(13, "c13.repro.N" + std::to_string(n), "max |K w K - K| / max |K|, N=" + std::to_string(n), r, 0.0, r, 1e-8);
    }
}

void c14_ensemble(Runner& run, const Workspace& ws) {
    const ModelSpec& model = ws.model();
    const BiorthogonalSystem& sys = ws.system();
    const std::vector<std::pair<double, double>> kpts = {{0.3, -0.7}, {1.2, 0.4}, {-1.5, -0.2}};
    const std::vector<cplx> z1 = {{2, 1}}, z2 = {{2, 1}, {-1, 0.5}};
    for (Side side : {Side::Left, Side::Right}) {
        const std::string tag = side == Side::Left ? "L" : "R";
        const Side poly_side = side == Side::Left ? Side::Right : Side::Left;
        const FunctionFamily fam = family_weighted_monomials(side, 9, model);
        const EnsembleMoments mo = pe_mixed_moments(model, fam, sys.degree(), ws.options().order);
        const EnsembleBiorthogonalSystem es = pe_factorize(mo, fam);
        double wz = 0.0, wk = 0.0, wc = 0.0;
        for (int n = 1; n <= 8; ++n) {
            wz = std::max(wz, rel(pe_partition_function(es, n).full(), partition_function(sys, n).full()));
            for (auto [x, y] : kpts) {
                // Family on the left: F_i(y) pairs with x_L = y, the polynomial with x_R = x.
                const cplx ref = side == Side::Left ? cd_kernel(sys, model, n, x, y) : cd_kernel(sys, model, n, y, x);
                const double pe = side == Side::Left ? pe_cd_kernel(es, model, n, x, y) : pe_cd_kernel(es, model, n, y, x);
                wk = std::max(wk, rel(pe, ref));
            }
            for (const auto& z : {z1, z2}) {
                const cplx a = pe_charpoly_average(es, n, SpectralPoints(z)).full();
                const cplx b = charpoly_average(sys, poly_side, n, SpectralPoints(z)).full();
                wc = std::max(wc, rel(a, b));
            }
        }
        const std::string fam_desc = "x^i e^{-V} family on X_" + tag + ", N <= 8";
        run.compare(14, "c14.Z." + tag, "Z_N, " + fam_desc, wz, 0.0, wz, 1e-10);
        run.compare(14, "c14.kernel." + tag, "CD kernel at 3 points, " + fam_desc, wk, 0.0, wk, 1e-10);
        run.compare(14, "c14.charpoly." + tag, "charpoly averages M=1,2, " + fam_desc, wc, 0.0, wc, 1e-10);
    }
}

}  // namespace

VerifyReport run_verification(const VerifyOptions& opts) {
    const auto t0 = Clock::now();
    VerifyReport rep;
    rep.level = opts.level;
    rep.tolerance_scale = opts.tolerance_scale < 0 ? tolerance_scale_from_env() : opts.tolerance_scale;
    Runner run(opts, rep.tolerance_scale);

    const ModelSpec model = ModelSpec::gaussian(0.5);
    std::unique_ptr<Workspace> ws;
    double build_seconds = 0.0;
    run.criterion(1, [&] {
        const auto tb = Clock::now();
        ws = std::make_unique<Workspace>(Workspace::build(model));
        build_seconds = seconds_since(tb);
        c1_biorthogonality(run, model, build_seconds, *ws);
    });
    if (ws) {
        run.criterion(2, [&] { c2_partition(run, *ws); });
        run.criterion(3, [&] { c3_exact(run, *ws); });
    }
    run.criterion(4, [&] { c4_ah(run); });
    run.criterion(5, [&] { c5_schur_evaluators(run); });
    run.criterion(6, [&] { c6_cauchy(run); });
    if (ws) {
        run.criterion(7, [&] { c7_schur_average(run, *ws); });
        run.criterion(8, [&] { c8_charpoly(run, *ws); });
        run.criterion(9, [&] { c9_inverse(run, *ws); });
        run.criterion(10, [&] { c10_pair(run, *ws); });
        run.criterion(11, [&] { c11_inverse_pair(run, *ws); });
        run.criterion(12, [&] { c12_mixed(run, *ws); });
        run.criterion(13, [&] { c13_kernel(run, *ws); });
        run.criterion(14, [&] { c14_ensemble(run, *ws); });
    }
    run.criterion(15, [&] {
        const double s = seconds_since(t0);
        const double budget = opts.level == VerifyLevel::Full ? 300.0 : 60.0;
        run.compare(15, "c15." + to_string(opts.level), to_string(opts.level) + " run seconds (criteria 1-14)", s, budget, s,
                    budget, "tolerance in seconds");
    });

    rep.rows = run.take();
    for (int c = 1; c <= 15; ++c) {
        CriterionSummary s;
        s.criterion = c;
        s.title = criterion_title(c);
        for (const CheckRow& r : rep.rows)
            if (r.criterion == c) {
                ++s.rows;
                if (!r.pass) ++s.failed;
            }
        // A criterion with no rows never ran (its workspace failed to build).
        s.pass = s.rows > 0 && s.failed == 0;
        rep.criteria.push_back(s);
    }
    rep.seconds = seconds_since(t0);
    return rep;
}

}  // namespace cmm
