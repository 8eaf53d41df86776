#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "cmm/errors.hpp"

namespace cmm {

using cplx = std::complex<double>;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
    double lower = -kInf;
    double upper = kInf;

    static Interval real_line() { return {}; }
    static Interval half_line(double a = 0.0) { return {a, kInf}; }

    bool lower_finite() const { return lower > -kInf; }
    bool upper_finite() const { return upper < kInf; }
    bool is_real_line() const { return !lower_finite() && !upper_finite(); }
    bool operator==(const Interval&) const = default;
};

// V(x) = sum_k coeffs[k] x^k. Trailing zero coefficients are trimmed on construction.
class PolynomialPotential {
public:
    PolynomialPotential() = default;
    explicit PolynomialPotential(std::vector<double> coeffs);
    // Terms may come in any order; repeated powers are summed.
    static PolynomialPotential from_terms(const std::vector<std::pair<int, double>>& terms);
    static PolynomialPotential quadratic(double a) { return PolynomialPotential({0.0, 0.0, a}); }

    int degree() const { return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1; }
    double leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }
    double coefficient(int k) const;
    std::span<const double> coefficients() const { return coeffs_; }

    double operator()(double x) const;
    cplx operator()(cplx z) const;
    double derivative(double x) const;

    bool operator==(const PolynomialPotential&) const = default;

private:
    std::vector<double> coeffs_;
};

struct ExpProduct {
    double c = 0.0;
    bool operator==(const ExpProduct&) const = default;
};

struct CauchyShift {
    bool operator==(const CauchyShift&) const = default;
};

enum class Interaction { Exponential, Cauchy };

struct InnerFactor {
    PolynomialPotential potential;
    Interval domain;
    bool operator==(const InnerFactor&) const = default;
};

// Kernel obtained by integrating out the middle matrices of a chain. The overall
// constant c_N/(2pi)^N of the chain is dropped; only 1/(2pi) per inner variable is kept.
struct ChainEffective {
    std::vector<InnerFactor> inner;
    Interaction interaction = Interaction::Exponential;
    int order = 64;
    bool operator==(const ChainEffective&) const = default;
};

// Bilinear interpolation on a rectangular grid; zero outside it.
// values are row-major: values[i * y.size() + j] = w(x[i], y[j]).
struct Tabulated {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> values;
    bool operator==(const Tabulated&) const = default;
    double operator()(double xv, double yv) const;
};

using CouplingKernel = std::variant<ExpProduct, CauchyShift, ChainEffective, Tabulated>;

std::string_view kernel_name(const CouplingKernel& kernel);

struct ModelSpec {
    PolynomialPotential v_left;
    PolynomialPotential v_right;
    CouplingKernel kernel;
    Interval domain_left;
    Interval domain_right;

    // V_L = V_R = x^2/2 on the real line with w = e^{cxy}.
    static ModelSpec gaussian(double c);
    bool operator==(const ModelSpec&) const = default;
};

std::vector<Violation> check_model(const ModelSpec& spec);
// Returns the spec unchanged when every invariant holds, else throws ValidationError.
ModelSpec validate_model(ModelSpec spec);

std::string canonical_text(const ModelSpec& spec);
std::string model_fingerprint(const ModelSpec& spec);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::string hexfloat(double v);

// Pairwise-distinct spectral parameters (z_alpha or w_alpha).
class SpectralPoints {
public:
    SpectralPoints() = default;
    explicit SpectralPoints(std::vector<cplx> points);
    SpectralPoints(std::initializer_list<cplx> points) : SpectralPoints(std::vector<cplx>(points)) {}

    std::size_t size() const { return points_.size(); }
    const cplx& operator[](std::size_t i) const { return points_[i]; }
    std::span<const cplx> view() const { return points_; }

private:
    std::vector<cplx> points_;
};

}  // namespace cmm
