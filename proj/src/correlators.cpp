#include "cmm/correlators.hpp"

#include <algorithm>
#include <cmath>

namespace cmm {

namespace {

using Mat = Eigen::MatrixXcd;

void require_degree(int required, int available, const char* what) {
    if (required > available) throw InsufficientDegreeError(required, available, what);
}

void require_same_size(const SpectralPoints& a, const SpectralPoints& b) {
    if (a.size() != b.size())
        throw Error(ErrorCode::PreconditionViolated, "z and w point lists must have the same length");
}

int signature(int m) { return ((m * (m - 1) / 2) % 2 == 0) ? 1 : -1; }

void require_small(int m, int n, const char* what) {
    if (m > n)
        throw Error(ErrorCode::PreconditionViolated, std::string(what) + " needs M <= N (got M = " +
                                                         std::to_string(m) + ", N = " + std::to_string(n) + ")");
}

void require_large(int m, int n, const char* what) {
    if (n < 1) throw Error(ErrorCode::PreconditionViolated, std::string(what) + " needs N >= 1");
    if (m < n)
        throw Error(ErrorCode::PreconditionViolated, std::string(what) + " needs M >= N (got M = " +
                                                         std::to_string(m) + ", N = " + std::to_string(n) + ")");
}

void eval_side(const BiorthogonalSystem& sys, Side side, int count, cplx z, cplx* out) {
    if (side == Side::Left)
        sys.eval_P_upto(count, z, out);
    else
        sys.eval_Q_upto(count, z, out);
}

void eval_dual(const DualTransforms& dual, Side side, int count, cplx z, cplx* out) {
    if (side == Side::Left)
        dual.P_tilde_upto(count, z, out);
    else
        dual.Q_tilde_upto(count, z, out);
}

double norm_product_log(const BiorthogonalSystem& sys, int lo, int hi, double& sign) {
    double l = 0.0;
    sign = 1.0;
    for (int i = lo; i < hi; ++i) {
        const double h = sys.norm(i);
        l += std::log(std::abs(h));
        if (h < 0) sign = -sign;
    }
    return l;
}

}  // namespace

CorrelatorResult CorrelatorResult::from_scaled(const ScaledValue& v) {
    CorrelatorResult r;
    if (v.is_zero()) return r;
    if (std::abs(v.log_scale) < 600.0) {
        r.value = v.value();
    } else {
        r.value = v.mantissa;
        r.log_scale = v.log_scale;
    }
    return r;
}

ScaledValue partition_ratio(const BiorthogonalSystem& sys, int hi, int lo) {
    ScaledValue s;
    double sign = 1.0;
    if (hi >= lo) {
        s.log_scale = norm_product_log(sys, lo, hi, sign);
    } else {
        s.log_scale = -norm_product_log(sys, hi, lo, sign);
    }
    s.mantissa = sign;
    return s;
}

CorrelatorResult partition_function(const BiorthogonalSystem& sys, int n, const BimomentMatrix* bm) {
    if (n < 0 || n > sys.degree() + 1)
        throw Error(ErrorCode::RankOutOfRange, "rank " + std::to_string(n) + " outside 0.." +
                                                   std::to_string(sys.degree() + 1));
    CorrelatorResult r = CorrelatorResult::from_scaled(partition_ratio(sys, n, 0));
    if (bm && n <= bm->entries.rows()) {
        const ScaledValue d = balanced_det(bm->entries.topLeftCorner(n, n));
        const cplx dv = d.value();
        r.diagnostics.extras["det_block"] = dv.real();
        ScaledValue ratio = d;
        ratio /= partition_ratio(sys, n, 0);
        r.diagnostics.extras["rel_diff"] = std::abs(ratio.value() - 1.0);
    }
    return r;
}

CorrelatorResult schur_average(const BimomentMatrix& bm, const Partition& lam, const Partition& mu, int n) {
    if (n < 0) throw Error(ErrorCode::RankOutOfRange, "negative rank");
    if (lam.length() > n || mu.length() > n) {
        CorrelatorResult r;
        r.diagnostics.notes.push_back("partition longer than N: the Schur polynomial vanishes identically");
        return r;
    }
    require_degree(std::max(lam.part(1), mu.part(1)) + n - 1, bm.degree, "Schur average");
    auto block = [&](const Partition& a, const Partition& b) {
        Eigen::MatrixXd m(n, n);
        for (int i = 1; i <= n; ++i)
            for (int j = 1; j <= n; ++j) m(i - 1, j - 1) = bm.entries(a.part(i) + n - i, b.part(j) + n - j);
        return balanced_det(m);
    };
    ScaledValue num = block(lam, mu);
    num /= block(Partition{}, Partition{});
    return CorrelatorResult::from_scaled(num);
}

CorrelatorResult charpoly_determinant(const FamilyEval& family, int max_degree, int n, const SpectralPoints& zs) {
    const int m = static_cast<int>(zs.size());
    if (n < 0) throw Error(ErrorCode::RankOutOfRange, "negative rank");
    if (m == 0) return CorrelatorResult::from_scaled(ScaledValue{});
    require_degree(n + m - 1, max_degree, "characteristic polynomial average");
    std::vector<cplx> buf(static_cast<std::size_t>(n + m));
    if (m == 1) {
        family(n + 1, zs[0], buf.data());
        CorrelatorResult r;
        r.value = buf[static_cast<std::size_t>(n)];
        return r;
    }
    Mat a(m, m);
    for (int al = 0; al < m; ++al) {
        family(n + m, zs[static_cast<std::size_t>(al)], buf.data());
        for (int be = 1; be <= m; ++be) a(al, be - 1) = buf[static_cast<std::size_t>(n + m - be)];
    }
    ScaledValue v = scaled_det(a);
    v /= scaled_vandermonde(zs.view());
    return CorrelatorResult::from_scaled(v);
}

CorrelatorResult charpoly_average(const BiorthogonalSystem& sys, Side side, int n, const SpectralPoints& zs) {
    return charpoly_determinant([&](int count, cplx z, cplx* out) { eval_side(sys, side, count, z, out); },
                                sys.degree(), n, zs);
}

CorrelatorResult charpoly_inverse_average_small(const Workspace& ws, Side side, int n, const SpectralPoints& zs) {
    const int m = static_cast<int>(zs.size());
    require_small(m, n, "inverse characteristic polynomial average (small branch)");
    if (m == 0) return CorrelatorResult::from_scaled(ScaledValue{});
    const auto& sys = ws.system();
    require_degree(n - 1, sys.degree(), "inverse characteristic polynomial average");
    std::vector<cplx> buf(static_cast<std::size_t>(n));
    Mat a(m, m);
    for (int al = 0; al < m; ++al) {
        eval_dual(ws.dual(), side, n, zs[static_cast<std::size_t>(al)], buf.data());
        for (int be = 1; be <= m; ++be) a(al, be - 1) = buf[static_cast<std::size_t>(n - be)];
    }
    ScaledValue v = scaled_det(a);
    v *= partition_ratio(sys, n - m, n);
    v /= scaled_vandermonde(zs.view());
    v *= static_cast<double>(signature(m));
    return CorrelatorResult::from_scaled(v);
}

CorrelatorResult charpoly_inverse_average_large(const Workspace& ws, Side side, int n, const SpectralPoints& zs,
                                                RowBasis rows) {
    const int m = static_cast<int>(zs.size());
    require_large(m, n, "inverse characteristic polynomial average (large branch)");
    const auto& sys = ws.system();
    require_degree(n - 1, sys.degree(), "inverse characteristic polynomial average");
    if (rows == RowBasis::Biorthogonal) require_degree(m - n - 1, sys.degree(), "inverse average polynomial rows");
    std::vector<cplx> hb(static_cast<std::size_t>(n)), pb(static_cast<std::size_t>(std::max(m - n, 1)));
    Mat a(m, m);
    for (int al = 0; al < m; ++al) {
        const cplx z = zs[static_cast<std::size_t>(al)];
        eval_dual(ws.dual(), side, n, z, hb.data());
        for (int i = 1; i <= n; ++i) a(al, i - 1) = hb[static_cast<std::size_t>(n - i)];
        if (m > n) {
            if (rows == RowBasis::Biorthogonal) {
                eval_side(sys, side, m - n, z, pb.data());
            } else {
                cplx p = 1.0;
                for (int k = 0; k < m - n; ++k, p *= z) pb[static_cast<std::size_t>(k)] = p;
            }
            for (int k = 0; k < m - n; ++k) a(al, n + k) = pb[static_cast<std::size_t>(k)];
        }
    }
    ScaledValue v = scaled_det(a);
    v /= partition_ratio(sys, n, 0);
    v /= scaled_vandermonde(zs.view());
    v *= static_cast<double>(signature(m));
    return CorrelatorResult::from_scaled(v);
}

CorrelatorResult pair_charpoly_average(const BiorthogonalSystem& sys, int n, const SpectralPoints& zs,
                                       const SpectralPoints& ws) {
    require_same_size(zs, ws);
    const int m = static_cast<int>(zs.size());
    if (n < 0) throw Error(ErrorCode::RankOutOfRange, "negative rank");
    if (m == 0) return CorrelatorResult::from_scaled(ScaledValue{});
    const int r = n + m;
    require_degree(r - 1, sys.degree(), "pair correlation");
    Mat pz(r, m), qw(r, m);
    std::vector<cplx> buf(static_cast<std::size_t>(r));
    for (int a = 0; a < m; ++a) {
        sys.eval_P_upto(r, zs[static_cast<std::size_t>(a)], buf.data());
        for (int i = 0; i < r; ++i) pz(i, a) = buf[static_cast<std::size_t>(i)] / sys.norm(i);
        sys.eval_Q_upto(r, ws[static_cast<std::size_t>(a)], buf.data());
        for (int i = 0; i < r; ++i) qw(i, a) = buf[static_cast<std::size_t>(i)];
    }
    const Mat k = qw.transpose() * pz;  // k(alpha, beta) = sum_i Q_i(w_alpha) P_i(z_beta) / h_i
    ScaledValue v = scaled_det(k);
    v *= partition_ratio(sys, r, n);
    v /= scaled_vandermonde(zs.view());
    v /= scaled_vandermonde(ws.view());
    CorrelatorResult res = CorrelatorResult::from_scaled(v);
    res.diagnostics.notes.push_back("exponential prefactors cancel against the kernel weights");
    return res;
}

CorrelatorResult pair_inverse_average_small(const Workspace& ws, int n, const SpectralPoints& zs,
                                            const SpectralPoints& wpts, int kmax) {
    require_same_size(zs, wpts);
    const int m = static_cast<int>(zs.size());
    require_small(m, n, "inverse pair correlation (small branch)");
    if (m == 0) return CorrelatorResult::from_scaled(ScaledValue{});
    const auto& sys = ws.system();
    if (kmax < 0) kmax = ws.kmax();
    Mat s(m, m);
    Eigen::MatrixXd tails(m, m);
    int trunc = -1;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            const DualEvaluation e = dual_cd_sum(ws.dual(), sys, n - m, wpts[static_cast<std::size_t>(b)],
                                                 zs[static_cast<std::size_t>(a)], kmax, ws.options().tail_tolerance);
            s(a, b) = e.value;
            tails(a, b) = e.tail;
            trunc = e.truncation;
        }
    ScaledValue det = scaled_det(s);
    ScaledValue pref = partition_ratio(sys, n - m, n);
    pref /= scaled_vandermonde(zs.view());
    pref /= scaled_vandermonde(wpts.view());
    ScaledValue v = det;
    v *= pref;
    CorrelatorResult res = CorrelatorResult::from_scaled(v);

    // First-order propagation: |d det| <= sum |cofactor_ab| tail_ab.
    double spread = 0.0;
    if (m == 1) {
        spread = tails(0, 0);
    } else {
        Eigen::FullPivLU<Mat> lu(s);
        if (lu.isInvertible()) {
            const Mat inv = lu.inverse();
            const cplx d = det.value();
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) spread += std::abs(d * inv(b, a)) * tails(a, b);
        } else {
            spread = kInf;
        }
    }
    ScaledValue t = ScaledValue::of(spread);
    t *= pref;
    res.diagnostics.tail = std::abs(t.value());
    res.diagnostics.extras["truncation"] = trunc;
    res.diagnostics.extras["max_entry_tail"] = tails.maxCoeff();
    return res;
}

CorrelatorResult pair_inverse_average_large(const Workspace& ws, int n, const SpectralPoints& zs,
                                            const SpectralPoints& wpts) {
    require_same_size(zs, wpts);
    const int m = static_cast<int>(zs.size());
    require_large(m, n, "inverse pair correlation (large branch)");
    const auto& sys = ws.system();
    require_degree(m - n - 1, sys.degree(), "inverse pair correlation polynomial block");
    Mat c(m, m);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
            c(a, b) = ws.dual().cauchy_bimoment(zs[static_cast<std::size_t>(a)], wpts[static_cast<std::size_t>(b)]);
    Eigen::FullPivLU<Mat> lu(c);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularCauchyMatrix, "double-Cauchy bimoment matrix is singular");
    const Mat cinv = lu.inverse();
    const double cond = cond1(c, cinv);
    if (!std::isfinite(cond) || cond * 1e-16 >= 1.0)
        throw Error(ErrorCode::SingularCauchyMatrix,
                    "double-Cauchy bimoment matrix is numerically singular (cond " + std::to_string(cond) + ")");
    ScaledValue v = scaled_det(c);
    const int k = m - n;
    if (k > 0) {
        Mat pm(k, m), qm(k, m);
        std::vector<cplx> buf(static_cast<std::size_t>(k));
        for (int a = 0; a < m; ++a) {
            sys.eval_P_upto(k, zs[static_cast<std::size_t>(a)], buf.data());
            for (int i = 0; i < k; ++i) pm(i, a) = buf[static_cast<std::size_t>(i)];
            sys.eval_Q_upto(k, wpts[static_cast<std::size_t>(a)], buf.data());
            for (int i = 0; i < k; ++i) qm(i, a) = buf[static_cast<std::size_t>(i)];
        }
        const Mat d = pm * cinv.transpose() * qm.transpose();
        v *= scaled_det(d);
    }
    v /= partition_ratio(sys, n, 0);
    v /= scaled_vandermonde(zs.view());
    v /= scaled_vandermonde(wpts.view());
    CorrelatorResult res = CorrelatorResult::from_scaled(v);
    res.diagnostics.condition = cond;
    return res;
}

CorrelatorResult mixed_pair_average(const Workspace& ws, int n, const SpectralPoints& zs, const SpectralPoints& wpts,
                                    Orientation orientation) {
    require_same_size(zs, wpts);
    const int m = static_cast<int>(zs.size());
    require_small(m, n, "mixed pair correlation");
    if (m == 0) return CorrelatorResult::from_scaled(ScaledValue{});
    const auto& sys = ws.system();
    const int r = n + m;
    require_degree(r - 1, sys.degree(), "mixed pair correlation");
    const bool left_num = orientation == Orientation::LeftNumerator;
    Mat a(2 * m, 2 * m);
    std::vector<cplx> buf(static_cast<std::size_t>(r));
    for (int al = 0; al < m; ++al) {
        const cplx z = zs[static_cast<std::size_t>(al)], w = wpts[static_cast<std::size_t>(al)];
        if (left_num)
            sys.eval_P_upto(r, z, buf.data());
        else
            ws.dual().P_tilde_upto(r, z, buf.data());
        for (int be = 1; be <= 2 * m; ++be) a(al, be - 1) = buf[static_cast<std::size_t>(r - be)];
        if (left_num)
            ws.dual().Q_tilde_upto(r, w, buf.data());
        else
            sys.eval_Q_upto(r, w, buf.data());
        for (int be = 1; be <= 2 * m; ++be) a(m + al, be - 1) = buf[static_cast<std::size_t>(r - be)];
    }
    ScaledValue v = scaled_det(a);
    v *= partition_ratio(sys, n - m, n);
    v /= scaled_vandermonde(zs.view());
    v /= scaled_vandermonde(wpts.view());
    // The right-numerator orientation carries an extra (-1)^M relative to the left one.
    v *= static_cast<double>(signature(m) * (left_num || m % 2 == 0 ? 1 : -1));
    return CorrelatorResult::from_scaled(v);
}

CorrelatorResult mixed_pair_m1_closed_form(const Workspace& ws, int n, cplx z, cplx w, Orientation orientation) {
    if (n < 1) throw Error(ErrorCode::PreconditionViolated, "mixed pair closed form needs N >= 1");
    const auto& sys = ws.system();
    require_degree(n, sys.degree(), "mixed pair closed form");
    CorrelatorResult r;
    if (orientation == Orientation::LeftNumerator)
        r.value = (sys.eval_P(n, z) * ws.dual().Q_tilde(n - 1, w) - sys.eval_P(n - 1, z) * ws.dual().Q_tilde(n, w)) /
                  sys.norm(n - 1);
    else
        r.value = (ws.dual().P_tilde(n - 1, z) * sys.eval_Q(n, w) - ws.dual().P_tilde(n, z) * sys.eval_Q(n - 1, w)) /
                  sys.norm(n - 1);
    return r;
}

}  // namespace cmm
