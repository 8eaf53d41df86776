#include "cmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace cmm {

PolynomialPotential::PolynomialPotential(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
    for (auto& c : coeffs_)
        if (c == 0.0) c = 0.0;  // drop the sign of -0
}

PolynomialPotential PolynomialPotential::from_terms(const std::vector<std::pair<int, double>>& terms) {
    int top = 0;
    for (const auto& [k, v] : terms) {
        if (k < 0) throw Error(ErrorCode::InvalidPotential, "negative power in potential term");
        top = std::max(top, k);
    }
    std::vector<double> c(static_cast<std::size_t>(top) + 1, 0.0);
    for (const auto& [k, v] : terms) c[static_cast<std::size_t>(k)] += v;
    return PolynomialPotential(std::move(c));
}

double PolynomialPotential::coefficient(int k) const {
    if (k < 0 || k >= static_cast<int>(coeffs_.size())) return 0.0;
    return coeffs_[static_cast<std::size_t>(k)];
}

double PolynomialPotential::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

cplx PolynomialPotential::operator()(cplx z) const {
    cplx acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

double PolynomialPotential::derivative(double x) const {
    double acc = 0.0;
    for (int k = degree(); k >= 1; --k) acc = acc * x + k * coeffs_[static_cast<std::size_t>(k)];
    return acc;
}

double Tabulated::operator()(double xv, double yv) const {
    if (x.size() < 2 || y.size() < 2) return 0.0;
    if (xv < x.front() || xv > x.back() || yv < y.front() || yv > y.back()) return 0.0;
    auto cell = [](const std::vector<double>& g, double v) {
        auto it = std::upper_bound(g.begin(), g.end(), v);
        std::size_t i = static_cast<std::size_t>(std::distance(g.begin(), it));
        return std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
    };
    const std::size_t i = cell(x, xv), j = cell(y, yv);
    const double tx = (xv - x[i]) / (x[i + 1] - x[i]);
    const double ty = (yv - y[j]) / (y[j + 1] - y[j]);
    const std::size_t ny = y.size();
    const double v00 = values[i * ny + j], v01 = values[i * ny + j + 1];
    const double v10 = values[(i + 1) * ny + j], v11 = values[(i + 1) * ny + j + 1];
    return (1 - tx) * ((1 - ty) * v00 + ty * v01) + tx * ((1 - ty) * v10 + ty * v11);
}

std::string_view kernel_name(const CouplingKernel& kernel) {
    struct V {
        std::string_view operator()(const ExpProduct&) const { return "exp_product"; }
        std::string_view operator()(const CauchyShift&) const { return "cauchy"; }
        std::string_view operator()(const ChainEffective&) const { return "chain"; }
        std::string_view operator()(const Tabulated&) const { return "tabulated"; }
    };
    return std::visit(V{}, kernel);
}

ModelSpec ModelSpec::gaussian(double c) {
    ModelSpec m;
    m.v_left = PolynomialPotential::quadratic(0.5);
    m.v_right = PolynomialPotential::quadratic(0.5);
    m.kernel = ExpProduct{c};
    return m;
}

namespace {

void check_interval(const Interval& d, const std::string& label, std::vector<Violation>& out) {
    if (std::isnan(d.lower) || std::isnan(d.upper) || !(d.lower < d.upper))
        out.push_back({ErrorCode::UnsupportedDomain, label + " domain must satisfy lower < upper"});
    if (d.lower == kInf || d.upper == -kInf)
        out.push_back({ErrorCode::UnsupportedDomain, label + " domain is empty"});
}

void check_potential(const PolynomialPotential& v, const Interval& d, const std::string& label,
                     std::vector<Violation>& out) {
    for (double c : v.coefficients())
        if (!std::isfinite(c)) {
            out.push_back({ErrorCode::InvalidPotential, label + " potential has a non-finite coefficient"});
            return;
        }
    const int deg = v.degree();
    const double lead = v.leading();
    if (d.is_real_line()) {
        if (deg < 2 || deg % 2 != 0)
            out.push_back({ErrorCode::InvalidPotential,
                           label + " potential must have even degree >= 2 on the real line (degree " +
                               std::to_string(deg) + ")"});
        else if (!(lead > 0))
            out.push_back({ErrorCode::InvalidPotential, label + " potential needs a positive leading coefficient"});
    } else if (!d.upper_finite()) {
        if (deg < 1 || !(lead > 0))
            out.push_back({ErrorCode::InvalidPotential,
                           label + " potential must grow towards +infinity on a half-line"});
    } else if (!d.lower_finite()) {
        const double sign = (deg % 2 == 0) ? 1.0 : -1.0;
        if (deg < 1 || !(sign * lead > 0))
            out.push_back({ErrorCode::InvalidPotential,
                           label + " potential must grow towards -infinity on a half-line"});
    }
}

bool quadratic_on_unbounded(const PolynomialPotential& v, const Interval& d) {
    return v.degree() == 2 && (!d.lower_finite() || !d.upper_finite());
}

}  // namespace

std::vector<Violation> check_model(const ModelSpec& spec) {
    std::vector<Violation> out;
    check_interval(spec.domain_left, "left", out);
    check_interval(spec.domain_right, "right", out);
    check_potential(spec.v_left, spec.domain_left, "left", out);
    check_potential(spec.v_right, spec.domain_right, "right", out);

    auto need_positive = [&](const Interval& d, const std::string& label) {
        if (d.lower < 0.0)
            out.push_back({ErrorCode::DomainPoleOverlap,
                           label + " domain must lie in [0, inf) for a Cauchy interaction"});
    };

    if (const auto* e = std::get_if<ExpProduct>(&spec.kernel)) {
        if (!std::isfinite(e->c)) {
            out.push_back({ErrorCode::InvalidKernel, "coupling constant must be finite"});
        } else if (quadratic_on_unbounded(spec.v_left, spec.domain_left) &&
                   quadratic_on_unbounded(spec.v_right, spec.domain_right)) {
            const double aL = spec.v_left.leading(), aR = spec.v_right.leading();
            if (e->c * e->c >= 4.0 * aL * aR)
                out.push_back({ErrorCode::DivergentCoupling,
                               "c^2 >= 4 a_L a_R: the Gaussian double integral diverges"});
        }
    } else if (std::holds_alternative<CauchyShift>(spec.kernel)) {
        need_positive(spec.domain_left, "left");
        need_positive(spec.domain_right, "right");
    } else if (const auto* ch = std::get_if<ChainEffective>(&spec.kernel)) {
        if (ch->order < 2) out.push_back({ErrorCode::InvalidKernel, "chain quadrature order must be >= 2"});
        for (std::size_t k = 0; k < ch->inner.size(); ++k) {
            const std::string label = "inner[" + std::to_string(k) + "]";
            check_interval(ch->inner[k].domain, label, out);
            check_potential(ch->inner[k].potential, ch->inner[k].domain, label, out);
            if (ch->interaction == Interaction::Cauchy) need_positive(ch->inner[k].domain, label);
        }
        if (ch->interaction == Interaction::Cauchy) {
            need_positive(spec.domain_left, "left");
            need_positive(spec.domain_right, "right");
        }
    } else if (const auto* t = std::get_if<Tabulated>(&spec.kernel)) {
        if (t->x.size() < 2 || t->y.size() < 2)
            out.push_back({ErrorCode::InvalidKernel, "tabulated grid needs at least 2 points per axis"});
        if (t->values.size() != t->x.size() * t->y.size())
            out.push_back({ErrorCode::InvalidKernel, "tabulated values size must be |x|*|y|"});
        auto increasing = [](const std::vector<double>& g) {
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (!std::isfinite(g[i])) return false;
                if (i > 0 && !(g[i] > g[i - 1])) return false;
            }
            return true;
        };
        if (!increasing(t->x) || !increasing(t->y))
            out.push_back({ErrorCode::InvalidKernel, "tabulated grid axes must be finite and strictly increasing"});
        if (std::any_of(t->values.begin(), t->values.end(), [](double v) { return !std::isfinite(v); }))
            out.push_back({ErrorCode::InvalidKernel, "tabulated values must be finite"});
    }
    return out;
}

ModelSpec validate_model(ModelSpec spec) {
    auto v = check_model(spec);
    if (!v.empty()) throw ValidationError(std::move(v));
    return spec;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
    for (unsigned char ch : bytes) {
        state ^= ch;
        state *= 0x100000001b3ULL;
    }
    return state;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string hexfloat(double v) {
    if (v == 0.0) v = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

namespace {

void put_potential(std::string& s, const PolynomialPotential& v) {
    s += '[';
    for (std::size_t k = 0; k < v.coefficients().size(); ++k) {
        if (k) s += ',';
        s += hexfloat(v.coefficients()[k]);
    }
    s += ']';
}

void put_interval(std::string& s, const Interval& d) {
    s += '(' + hexfloat(d.lower) + ',' + hexfloat(d.upper) + ')';
}

void put_vector(std::string& s, const std::vector<double>& v) {
    s += '[';
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s += ',';
        s += hexfloat(v[k]);
    }
    s += ']';
}

}  // namespace

std::string canonical_text(const ModelSpec& spec) {
    std::string s = "cmm-model-v1;VL=";
    put_potential(s, spec.v_left);
    s += ";DL=";
    put_interval(s, spec.domain_left);
    s += ";VR=";
    put_potential(s, spec.v_right);
    s += ";DR=";
    put_interval(s, spec.domain_right);
    s += ";K=";
    s += kernel_name(spec.kernel);
    if (const auto* e = std::get_if<ExpProduct>(&spec.kernel)) {
        s += '(' + hexfloat(e->c) + ')';
    } else if (const auto* ch = std::get_if<ChainEffective>(&spec.kernel)) {
        s += ch->interaction == Interaction::Exponential ? "(exp," : "(cauchy,";
        s += std::to_string(ch->order);
        for (const auto& f : ch->inner) {
            s += ';';
            put_potential(s, f.potential);
            put_interval(s, f.domain);
        }
        s += ')';
    } else if (const auto* t = std::get_if<Tabulated>(&spec.kernel)) {
        put_vector(s, t->x);
        put_vector(s, t->y);
        put_vector(s, t->values);
    }
    return s;
}

std::string model_fingerprint(const ModelSpec& spec) { return hex64(fnv1a64(canonical_text(spec))); }

SpectralPoints::SpectralPoints(std::vector<cplx> points) : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!std::isfinite(points_[i].real()) || !std::isfinite(points_[i].imag()))
            throw Error(ErrorCode::PreconditionViolated, "spectral point must be finite");
        for (std::size_t j = 0; j < i; ++j) {
            const double scale = std::max({1.0, std::abs(points_[i]), std::abs(points_[j])});
            if (std::abs(points_[i] - points_[j]) <= 1e-14 * scale)
                throw Error(ErrorCode::CoincidingPoints,
                            "points " + std::to_string(j) + " and " + std::to_string(i) + " coincide");
        }
    }
}

}  // namespace cmm
