#include "cmm/exact.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "cmm/cache.hpp"

namespace cmm {

double ExactGaussianSystem::prefactor() const { return 2.0 * std::numbers::pi / std::sqrt(det.get_d()); }

double ExactGaussianSystem::h(int i) const {
    if (i < 0 || i > degree()) throw Error(ErrorCode::DegreeOutOfRange, "exact h index out of range");
    return h_ratio[static_cast<std::size_t>(i)].get_d() * prefactor();
}

ExactGaussianSystem exact_gaussian_system(const ModelSpec& model, int d) {
    const auto* e = std::get_if<ExpProduct>(&model.kernel);
    auto pure_quadratic = [](const PolynomialPotential& v) {
        return v.degree() == 2 && v.coefficient(0) == 0.0 && v.coefficient(1) == 0.0 && v.leading() > 0.0;
    };
    if (!e || !pure_quadratic(model.v_left) || !pure_quadratic(model.v_right) || !model.domain_left.is_real_line() ||
        !model.domain_right.is_real_line())
        throw Error(ErrorCode::PreconditionViolated,
                    "exact path needs V = a x^2 on the real line with an exponential coupling");
    if (d < 0) throw Error(ErrorCode::DegreeOutOfRange, "degree bound must be >= 0");
    ExactGaussianSystem s;
    s.a_left = mpq_class(model.v_left.leading());
    s.a_right = mpq_class(model.v_right.leading());
    s.c = mpq_class(e->c);
    s.det = 4 * s.a_left * s.a_right - s.c * s.c;
    if (sgn(s.det) <= 0) throw Error(ErrorCode::DivergentCoupling, "4 a_L a_R - c^2 must be positive");
    s.fingerprint = model_fingerprint(model);

    // Covariance of the Gaussian e^{-a_L x^2 - a_R y^2 + cxy}.
    const mpq_class sxx = 2 * s.a_right / s.det, syy = 2 * s.a_left / s.det, sxy = s.c / s.det;
    const std::size_t n = static_cast<std::size_t>(d) + 1;
    auto& m = s.moments;
    m.assign(n, std::vector<mpq_class>(n, 0));
    // Gaussian integration by parts:
    //   E[x^i y^j] = (i-1) Sxx E[x^{i-2} y^j] + j Sxy E[x^{i-1} y^{j-1}]
    //   E[y^j]     = (j-1) Syy E[y^{j-2}]
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == 0 && j == 0) {
                m[0][0] = 1;
            } else if (i == 0) {
                m[0][j] = j >= 2 ? mpq_class((j - 1) * syy * m[0][j - 2]) : mpq_class(0);
            } else {
                mpq_class v = 0;
                if (i >= 2) v += mpq_class(static_cast<long>(i - 1)) * sxx * m[i - 2][j];
                if (j >= 1) v += mpq_class(static_cast<long>(j)) * sxy * m[i - 1][j - 1];
                m[i][j] = v;
            }
        }

    // Exact LDU without pivoting.
    std::vector<std::vector<mpq_class>> l(n, std::vector<mpq_class>(n, 0)), u(n, std::vector<mpq_class>(n, 0));
    s.h_ratio.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        mpq_class piv = m[k][k];
        for (std::size_t j = 0; j < k; ++j) piv -= l[k][j] * s.h_ratio[j] * u[j][k];
        if (sgn(piv) == 0) throw SingularMinorError(static_cast<int>(k) + 1, "exact pivot vanishes");
        s.h_ratio[k] = piv;
        l[k][k] = u[k][k] = 1;
        for (std::size_t r = k + 1; r < n; ++r) {
            mpq_class ukr = m[k][r], lrk = m[r][k];
            for (std::size_t j = 0; j < k; ++j) {
                ukr -= l[k][j] * s.h_ratio[j] * u[j][r];
                lrk -= l[r][j] * s.h_ratio[j] * u[j][k];
            }
            u[k][r] = ukr / piv;
            l[r][k] = lrk / piv;
        }
    }
    // P = L^{-1}, Q = U^{-T} (both unit lower triangular), by forward substitution.
    auto unit_lower_inverse = [n](const std::vector<std::vector<mpq_class>>& t) {
        std::vector<std::vector<mpq_class>> inv(n, std::vector<mpq_class>(n, 0));
        for (std::size_t i = 0; i < n; ++i) {
            inv[i][i] = 1;
            for (std::size_t j = 0; j < i; ++j) {
                mpq_class acc = 0;
                for (std::size_t k = j; k < i; ++k) acc += t[i][k] * inv[k][j];
                inv[i][j] = -acc;
            }
        }
        return inv;
    };
    std::vector<std::vector<mpq_class>> ut(n, std::vector<mpq_class>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ut[i][j] = u[j][i];
    s.p = unit_lower_inverse(l);
    s.q = unit_lower_inverse(ut);
    return s;
}

namespace {
mpq_class eval_row(const std::vector<mpq_class>& row, int i, const mpq_class& x) {
    mpq_class acc = 0;
    for (int k = i; k >= 0; --k) acc = acc * x + row[static_cast<std::size_t>(k)];
    return acc;
}
}  // namespace

mpq_class exact_eval_P(const ExactGaussianSystem& sys, int i, const mpq_class& x) {
    if (i < 0 || i > sys.degree()) throw Error(ErrorCode::DegreeOutOfRange, "exact P degree out of range");
    return eval_row(sys.p[static_cast<std::size_t>(i)], i, x);
}

mpq_class exact_eval_Q(const ExactGaussianSystem& sys, int i, const mpq_class& x) {
    if (i < 0 || i > sys.degree()) throw Error(ErrorCode::DegreeOutOfRange, "exact Q degree out of range");
    return eval_row(sys.q[static_cast<std::size_t>(i)], i, x);
}

mpq_class exact_det(std::vector<std::vector<mpq_class>> m) {
    const std::size_t n = m.size();
    mpq_class det = 1;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && sgn(m[p][k]) == 0) ++p;
        if (p == n) return 0;
        if (p != k) {
            std::swap(m[p], m[k]);
            det = -det;
        }
        det *= m[k][k];
        for (std::size_t r = k + 1; r < n; ++r) {
            if (sgn(m[r][k]) == 0) continue;
            const mpq_class f = m[r][k] / m[k][k];
            for (std::size_t c = k; c < n; ++c) m[r][c] -= f * m[k][c];
        }
    }
    return det;
}

mpq_class exact_charpoly_average(const ExactGaussianSystem& sys, int n, const std::vector<mpq_class>& zs) {
    const int mm = static_cast<int>(zs.size());
    if (n + mm - 1 > sys.degree())
        throw InsufficientDegreeError(n + mm - 1, sys.degree(), "exact characteristic polynomial average");
    std::vector<std::vector<mpq_class>> a(zs.size(), std::vector<mpq_class>(zs.size()));
    mpq_class vdm = 1;
    for (int al = 0; al < mm; ++al) {
        for (int be = 1; be <= mm; ++be)
            a[static_cast<std::size_t>(al)][static_cast<std::size_t>(be - 1)] = exact_eval_P(sys, n + mm - be, zs[static_cast<std::size_t>(al)]);
        for (int b2 = al + 1; b2 < mm; ++b2) vdm *= zs[static_cast<std::size_t>(al)] - zs[static_cast<std::size_t>(b2)];
    }
    if (sgn(vdm) == 0) throw Error(ErrorCode::CoincidingPoints, "exact points coincide");
    return exact_det(std::move(a)) / vdm;
}

std::string exact_sidecar_text(const ExactGaussianSystem& sys) {
    std::ostringstream os;
    os << "# cmm exact-rational sidecar v1\n";
    os << "# h_i = (numerator / denominator) * 2*pi / sqrt(det)\n";
    os << "fingerprint " << sys.fingerprint << "\n";
    os << "a_left " << sys.a_left.get_num() << " " << sys.a_left.get_den() << "\n";
    os << "a_right " << sys.a_right.get_num() << " " << sys.a_right.get_den() << "\n";
    os << "c " << sys.c.get_num() << " " << sys.c.get_den() << "\n";
    os << "det " << sys.det.get_num() << " " << sys.det.get_den() << "\n";
    for (std::size_t i = 0; i < sys.h_ratio.size(); ++i)
        os << "h " << i << " " << sys.h_ratio[i].get_num() << " " << sys.h_ratio[i].get_den() << "\n";
    return os.str();
}

void write_exact_sidecar(const std::string& path, const ExactGaussianSystem& sys) {
    atomic_write(path, exact_sidecar_text(sys));
}

}  // namespace cmm
