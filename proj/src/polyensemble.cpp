#include "cmm/polyensemble.hpp"

#include <algorithm>
#include <cmath>

#include "cmm/linalg.hpp"
#include "cmm/quadrature.hpp"

namespace cmm {

namespace {

const QuadratureRule& side_rule(const SideRules& r, Side s) { return s == Side::Left ? r.left : r.right; }
const PolynomialPotential& side_potential(const ModelSpec& m, Side s) { return s == Side::Left ? m.v_left : m.v_right; }
Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

}  // namespace

FunctionFamily make_family(std::string name, Side side, std::vector<RealFunction> functions, const ModelSpec& model,
                           int order_hint) {
    FunctionFamily fam;
    fam.name = std::move(name);
    fam.side = side;
    fam.functions = std::move(functions);
    fam.order_hint = std::max(order_hint, 8);
    const int k = fam.size();
    if (k == 0) throw Error(ErrorCode::InvalidFamily, "function family is empty");
    const SideRules rules = build_side_rules(model, std::max(fam.order_hint, k));
    const QuadratureRule& rule = side_rule(rules, side);
    const int q = static_cast<int>(rule.size());
    // Probes at weight quantiles of the side's rule, forced distinct.
    std::vector<int> probe(static_cast<std::size_t>(k));
    {
        double total = 0.0;
        for (double w : rule.weights) total += w;
        double cum = 0.0;
        int a = 0;
        for (int j = 0; j < k; ++j) {
            const double target = (j + 0.5) / k * total;
            while (a < q - 1 && cum + rule.weights[static_cast<std::size_t>(a)] < target) cum += rule.weights[static_cast<std::size_t>(a++)];
            probe[static_cast<std::size_t>(j)] = j == 0 ? a : std::max(a, probe[static_cast<std::size_t>(j - 1)] + 1);
        }
        const int shift = std::max(0, probe.back() - (q - 1));
        for (int& p : probe) p -= shift;
        if (probe.front() < 0) throw Error(ErrorCode::InvalidFamily, "family is larger than the quadrature order");
    }
    Eigen::MatrixXd e(k, k);
    for (int j = 0; j < k; ++j) {
        const double t = rule.nodes[static_cast<std::size_t>(probe[static_cast<std::size_t>(j)])];
        for (int i = 0; i < k; ++i) {
            const double v = fam.functions[static_cast<std::size_t>(i)](t);
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidFamily, "family function " + std::to_string(i) + " is not finite");
            e(i, j) = v;
        }
    }
    double hadamard = 1.0;
    for (int i = 0; i < k; ++i) {
        const double nrm = e.row(i).norm();
        if (nrm == 0.0) throw Error(ErrorCode::InvalidFamily, "family function " + std::to_string(i) + " vanishes at every probe");
        e.row(i) /= nrm;
    }
    fam.certificate = std::abs(det_real(e)) / hadamard;
    for (int j = 0; j < k; ++j) {
        const double c = e.col(j).norm();
        if (c > 0.0) e.col(j) /= c;
    }
    // The determinant of well-separated but polynomial-like rows is legitimately tiny; rank decides.
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    const auto sv = svd.singularValues();
    if (!(fam.certificate > 0.0) || !(sv(k - 1) > 1e-13 * sv(0)))
        throw Error(ErrorCode::InvalidFamily, "family is numerically linearly dependent at the probe points");
    return fam;
}

FunctionFamily family_monomials(Side side, int count, const ModelSpec& model) {
    std::vector<RealFunction> f;
    for (int i = 0; i < count; ++i) f.emplace_back([i](double x) { return std::pow(x, i); });
    return make_family("monomials", side, std::move(f), model);
}

FunctionFamily family_weighted_monomials(Side side, int count, const ModelSpec& model) {
    const PolynomialPotential v = side_potential(model, side);
    std::vector<RealFunction> f;
    for (int i = 0; i < count; ++i) f.emplace_back([i, v](double x) { return std::pow(x, i) * std::exp(-v(x)); });
    return make_family("weighted_monomials", side, std::move(f), model);
}

FunctionFamily family_shifted_exponentials(Side side, const std::vector<double>& shifts, const ModelSpec& model) {
    const PolynomialPotential v = side_potential(model, side);
    std::vector<RealFunction> f;
    for (double s : shifts) f.emplace_back([s, v](double x) { return std::exp(s * x - v(x)); });
    return make_family("shifted_exponentials", side, std::move(f), model);
}

FunctionFamily family_tabulated(Side side, const std::vector<double>& grid, const std::vector<std::vector<double>>& values,
                                const ModelSpec& model) {
    if (grid.size() < 2) throw Error(ErrorCode::InvalidFamily, "tabulated family needs at least two grid points");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i] < grid[i + 1])) throw Error(ErrorCode::InvalidFamily, "tabulated grid must be strictly increasing");
    std::vector<RealFunction> f;
    for (const auto& vals : values) {
        if (vals.size() != grid.size()) throw Error(ErrorCode::InvalidFamily, "tabulated values do not match the grid");
        for (double v : vals)
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidFamily, "tabulated values must be finite");
        f.emplace_back([grid, vals](double x) {
            if (x < grid.front() || x > grid.back()) return 0.0;
            auto it = std::upper_bound(grid.begin(), grid.end(), x);
            if (it == grid.end()) return vals.back();
            const std::size_t hi = static_cast<std::size_t>(it - grid.begin()), lo = hi - 1;
            const double t = (x - grid[lo]) / (grid[hi] - grid[lo]);
            return (1.0 - t) * vals[lo] + t * vals[hi];
        });
    }
    return make_family("tabulated", side, std::move(f), model);
}

EnsembleMoments pe_mixed_moments(const ModelSpec& model, const FunctionFamily& family, int d, int order) {
    const int k = family.size();
    if (d < 0) d = k - 1;
    if (d < k - 1) throw Error(ErrorCode::DegreeOutOfRange, "degree bound must cover the family size");
    if (order <= 0) order = family.order_hint;
    order = std::max(order, d + 2);
    const SideRules rules = build_side_rules(model, order);
    const Side fs = family.side, ps = other(fs);
    const QuadratureRule& fr = side_rule(rules, fs);
    const QuadratureRule& pr = side_rule(rules, ps);
    const PolynomialPotential& vf = side_potential(model, fs);
    const int nf = static_cast<int>(fr.size()), np = static_cast<int>(pr.size());

    // The function side is integrated without e^{-V}: undo it in the rule weights.
    std::vector<double> plain(static_cast<std::size_t>(nf));
    for (int a = 0; a < nf; ++a)
        plain[static_cast<std::size_t>(a)] = fr.weights[static_cast<std::size_t>(a)] * std::exp(vf(fr.nodes[static_cast<std::size_t>(a)]));

    EnsembleMoments mo;
    mo.side = fs;
    mo.degree = d;
    mo.order = order;
    mo.basis = PolyBasis::stieltjes(pr.nodes, pr.weights, d);

    // Weighted Gram-Schmidt (twice) on the family values; T tracks the triangular change of basis.
    Eigen::MatrixXd s(k, nf);
    for (int i = 0; i < k; ++i)
        for (int a = 0; a < nf; ++a) {
            const double v = family.functions[static_cast<std::size_t>(i)](fr.nodes[static_cast<std::size_t>(a)]);
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteIntegrand, "family function is not finite on the rule");
            s(i, a) = v * std::sqrt(plain[static_cast<std::size_t>(a)]);
        }
    Eigen::MatrixXd g = s;
    Eigen::MatrixXd t = Eigen::MatrixXd::Identity(k, k);
    for (int i = 0; i < k; ++i) {
        const double before = g.row(i).norm();
        for (int pass = 0; pass < 2; ++pass)
            for (int m = 0; m < i; ++m) {
                const double r = g.row(m).dot(g.row(i));
                g.row(i) -= r * g.row(m);
                t.row(i) -= r * t.row(m);
            }
        const double nrm = g.row(i).norm();
        if (!(nrm > 1e-13 * before))
            throw Error(ErrorCode::InvalidFamily, "family is linearly dependent on the quadrature grid at index " +
                                                      std::to_string(i));
        g.row(i) /= nrm;
        t.row(i) /= nrm;
    }
    mo.precondition = t;

    // Node values with the plain weight (function side) and rule weight (polynomial side).
    Eigen::MatrixXd gv(k, nf), fv(k, nf);
    for (int a = 0; a < nf; ++a) {
        const double sw = std::sqrt(plain[static_cast<std::size_t>(a)]);
        for (int i = 0; i < k; ++i) {
            gv(i, a) = g(i, a) * sw;
            fv(i, a) = s(i, a) * sw;
        }
    }
    Eigen::MatrixXd pb(d + 1, np), pm(d + 1, np);
    std::vector<double> buf(static_cast<std::size_t>(d) + 1);
    for (int b = 0; b < np; ++b) {
        const double y = pr.nodes[static_cast<std::size_t>(b)], w = pr.weights[static_cast<std::size_t>(b)];
        mo.basis.evaluate(y, buf.data(), d + 1);
        double p = 1.0;
        for (int j = 0; j <= d; ++j, p *= y) {
            pb(j, b) = buf[static_cast<std::size_t>(j)] * w;
            pm(j, b) = p * w;
        }
    }
    const KernelEvaluator kern(model.kernel);
    // omega(f-node, p-node), whatever side each lives on.
    const Eigen::MatrixXd om = fs == Side::Left ? kern.table(fr.nodes, pr.nodes) : Eigen::MatrixXd(kern.table(pr.nodes, fr.nodes).transpose());
    if (!om.allFinite()) throw Error(ErrorCode::NonFiniteIntegrand, "kernel is not finite on the quadrature grid");
    mo.gram = gv * om * pb.transpose();
    mo.monomial = fv * om * pm.transpose();
    if (!mo.gram.allFinite() || !mo.monomial.allFinite())
        throw Error(ErrorCode::NonFiniteIntegrand, "mixed moments are not finite");
    return mo;
}

Eigen::MatrixXd EnsembleBiorthogonalSystem::poly_coeffs() const { return poly_basis_ * basis_.monomial_matrix().topLeftCorner(size(), size()); }

double EnsembleBiorthogonalSystem::eval_F(int i, double x) const {
    if (i < 0 || i >= size()) throw Error(ErrorCode::DegreeOutOfRange, "ensemble function index out of range");
    double s = 0.0;
    for (int k = 0; k <= i; ++k) s += family_coeffs_(i, k) * functions_[static_cast<std::size_t>(k)](x);
    return s;
}

void EnsembleBiorthogonalSystem::eval_poly_upto(int count, cplx z, int n, cplx* out) const {
    if (count > degree_ + 1) throw Error(ErrorCode::DegreeOutOfRange, "ensemble polynomial degree out of range");
    if (n < 0 || n > size()) throw Error(ErrorCode::RankOutOfRange, "ensemble rank out of range");
    std::vector<cplx> pi(static_cast<std::size_t>(std::max(count, 1)));
    basis_.evaluate(z, pi.data(), count);
    const int head = std::min(n, count);
    for (int j = 0; j < head; ++j) {
        cplx s = 0.0;
        for (int m = 0; m <= j; ++m) s += poly_basis_(j, m) * pi[static_cast<std::size_t>(m)];
        out[j] = s;
    }
    for (int j = head; j < count; ++j) {
        cplx s = pi[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i) s -= reduced_(i, j) / norms_[static_cast<std::size_t>(i)] * out[i];
        out[j] = s;
    }
}

cplx EnsembleBiorthogonalSystem::eval_poly(int j, cplx z, int n) const {
    std::vector<cplx> out(static_cast<std::size_t>(j) + 1);
    eval_poly_upto(j + 1, z, std::min(n, j + 1), out.data());
    if (n <= j) {
        // The head only fills min(n, j+1) entries; recompute with the requested rank.
        std::vector<cplx> full(static_cast<std::size_t>(std::max(j + 1, n)));
        eval_poly_upto(j + 1, z, n, full.data());
        return full[static_cast<std::size_t>(j)];
    }
    return out[static_cast<std::size_t>(j)];
}

EnsembleBiorthogonalSystem pe_factorize(const EnsembleMoments& moments, const FunctionFamily& family,
                                        double singular_tolerance) {
    const int k = static_cast<int>(moments.gram.rows());
    const int cols = static_cast<int>(moments.gram.cols());
    if (k != family.size()) throw Error(ErrorCode::PreconditionViolated, "moments were built for a different family");
    Eigen::MatrixXd r = moments.gram;
    Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(k, k);
    const double scale = std::max(moments.gram.topLeftCorner(k, k).cwiseAbs().maxCoeff(), 1e-300);
    for (int p = 0; p < k; ++p) {
        const double piv = r(p, p);
        if (!(std::abs(piv) > singular_tolerance * scale))
            throw SingularMinorError(p + 1, "leading minor " + std::to_string(p + 1) + " of the mixed moments vanishes");
        for (int row = p + 1; row < k; ++row) {
            const double l = r(row, p) / piv;
            if (l == 0.0) continue;
            r.row(row) -= l * r.row(p);
            r(row, p) = 0.0;
            linv.row(row) -= l * linv.row(p);
        }
    }
    EnsembleBiorthogonalSystem sys;
    sys.side_ = family.side;
    sys.degree_ = cols - 1;
    sys.functions_ = family.functions;
    sys.basis_ = moments.basis;
    const Eigen::MatrixXd lt = linv * moments.precondition;
    sys.family_coeffs_.resize(k, k);
    sys.reduced_.resize(k, cols);
    sys.norms_.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double d = lt(i, i);  // F_i must carry f_i with unit coefficient
        sys.family_coeffs_.row(i) = lt.row(i) / d;
        sys.reduced_.row(i) = r.row(i) / d;
        sys.norms_[static_cast<std::size_t>(i)] = r(i, i) / d;
    }
    sys.poly_basis_ = Eigen::MatrixXd::Zero(k, k);
    for (int j = 0; j < k; ++j) {
        sys.poly_basis_(j, j) = 1.0;
        for (int i = 0; i < j; ++i)
            sys.poly_basis_.row(j) -= sys.reduced_(i, j) / sys.norms_[static_cast<std::size_t>(i)] * sys.poly_basis_.row(i);
    }
    return sys;
}

CorrelatorResult pe_partition_function(const EnsembleBiorthogonalSystem& sys, int n, const EnsembleMoments* moments) {
    if (n < 0 || n > sys.size())
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(n) + " outside 0.." + std::to_string(sys.size()));
    ScaledValue z;
    for (int i = 0; i < n; ++i) z *= sys.norm(i);
    CorrelatorResult r = CorrelatorResult::from_scaled(z);
    if (moments) {
        const ScaledValue d = balanced_det(moments->monomial.topLeftCorner(n, n));
        r.diagnostics.extras["det_block"] = d.value().real();
        ScaledValue ratio = d;
        ratio /= z;
        r.diagnostics.extras["rel_diff"] = std::abs(ratio.value() - 1.0);
    }
    return r;
}

double pe_cd_kernel(const EnsembleBiorthogonalSystem& sys, const ModelSpec& model, int n, double x, double y) {
    if (n < 0 || n > sys.size()) throw Error(ErrorCode::RankOutOfRange, "ensemble kernel rank out of range");
    if (n == 0) return 0.0;
    const double poly_arg = sys.side() == Side::Left ? x : y;
    const double fam_arg = sys.side() == Side::Left ? y : x;
    std::vector<cplx> p(static_cast<std::size_t>(n));
    sys.eval_poly_upto(n, poly_arg, n, p.data());
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += p[static_cast<std::size_t>(i)].real() * sys.eval_F(i, fam_arg) / sys.norm(i);
    const double weight = sys.side() == Side::Left ? std::exp(-model.v_right(x)) : std::exp(-model.v_left(y));
    return weight * s;
}

double pe_kernel_trace(const EnsembleBiorthogonalSystem& sys, const ModelSpec& model, int n, int order) {
    if (n < 0 || n > sys.size()) throw Error(ErrorCode::RankOutOfRange, "ensemble kernel rank out of range");
    if (n == 0) return 0.0;
    const SideRules rules = build_side_rules(model, order);
    const Side fs = sys.side(), ps = other(fs);
    const QuadratureRule& fr = side_rule(rules, fs);
    const QuadratureRule& pr = side_rule(rules, ps);
    const PolynomialPotential& vf = side_potential(model, fs);
    const KernelEvaluator kern(model.kernel);
    // sum_i (F_i | w | poly_i) / h_i on the grid, with the function side unweighted.
    Eigen::MatrixXd fvals(n, static_cast<Eigen::Index>(fr.size())), pvals(n, static_cast<Eigen::Index>(pr.size()));
    std::vector<cplx> buf(static_cast<std::size_t>(n));
    for (std::size_t a = 0; a < fr.size(); ++a) {
        const double wplain = fr.weights[a] * std::exp(vf(fr.nodes[a]));
        for (int i = 0; i < n; ++i) fvals(i, static_cast<Eigen::Index>(a)) = sys.eval_F(i, fr.nodes[a]) * wplain;
    }
    for (std::size_t b = 0; b < pr.size(); ++b) {
        sys.eval_poly_upto(n, pr.nodes[b], n, buf.data());
        for (int i = 0; i < n; ++i) pvals(i, static_cast<Eigen::Index>(b)) = buf[static_cast<std::size_t>(i)].real() * pr.weights[b];
    }
    const Eigen::MatrixXd om = fs == Side::Left ? kern.table(fr.nodes, pr.nodes) : Eigen::MatrixXd(kern.table(pr.nodes, fr.nodes).transpose());
    const Eigen::MatrixXd g = fvals * om * pvals.transpose();
    double tr = 0.0;
    for (int i = 0; i < n; ++i) tr += g(i, i) / sys.norm(i);
    return tr;
}

CorrelatorResult pe_charpoly_average(const EnsembleBiorthogonalSystem& sys, int n, const SpectralPoints& zs) {
    if (n < 0 || n > sys.size()) throw Error(ErrorCode::RankOutOfRange, "ensemble rank out of range");
    return charpoly_determinant([&](int count, cplx z, cplx* out) { sys.eval_poly_upto(count, z, n, out); },
                                sys.degree(), n, zs);
}

CorrelatorResult pe_schur_average(const EnsembleMoments& moments, const Partition& mu, int n) {
    const int k = static_cast<int>(moments.monomial.rows());
    if (n < 0 || n > k) throw Error(ErrorCode::RankOutOfRange, "ensemble rank out of range");
    if (mu.length() > n) {
        CorrelatorResult r;
        r.diagnostics.notes.push_back("partition longer than N: the Schur polynomial vanishes identically");
        return r;
    }
    if (mu.part(1) + n - 1 > moments.degree)
        throw InsufficientDegreeError(mu.part(1) + n - 1, moments.degree, "ensemble Schur average");
    auto block = [&](const Partition& p) {
        Eigen::MatrixXd m(n, n);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) m(i - 1, j - 1) = moments.monomial(n - i, p.part(j) + n - j);
        return balanced_det(m);
    };
    ScaledValue v = block(mu);
    v /= block(Partition{});
    return CorrelatorResult::from_scaled(v);
}

void pe_unsupported(std::string_view correlator) {
    throw Error(ErrorCode::UnsupportedForEnsemble,
                std::string(correlator) + " is not available for the coupled polynomial ensemble");
}

}  // namespace cmm
