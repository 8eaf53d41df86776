#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmm/model.hpp"
#include "cmm/polynomial.hpp"

namespace cmm {

enum class RuleKind { GaussHermite, GaussLegendre, MappedSemiInfinite };

// sum_k weights[k] f(nodes[k]) approximates the integral of e^{-V(x)} f(x) over the domain.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    RuleKind kind = RuleKind::GaussHermite;
    int order = 0;

    std::size_t size() const { return nodes.size(); }
};

// Gauss rule for a classical weight (no potential attached).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch nodes polished by Newton steps; weights from the Christoffel function,
// which keeps tiny tail weights relatively accurate.
GaussRule gauss_from_recurrence(std::span<const double> alpha, std::span<const double> beta, double mu0);
GaussRule gauss_hermite(int n);   // weight e^{-x^2/2} on R
GaussRule gauss_laguerre(int n);  // weight e^{-x} on (0, inf)
GaussRule gauss_legendre(int n);  // weight 1 on [-1, 1]

enum class Clustering { None, Endpoint };

QuadratureRule build_rule(const PolynomialPotential& v, const Interval& domain, int order,
                          Clustering clustering = Clustering::None);

// Largest relative error of sum w x^k against the closed-form Gaussian moments, k <= kmax.
// Only defined for quadratic potentials on the real line; returns NaN otherwise.
double rule_exactness_error(const QuadratureRule& rule, const PolynomialPotential& v, int kmax);

struct SideRules {
    QuadratureRule left;
    QuadratureRule right;
};

bool kernel_needs_clustering(const CouplingKernel& kernel);
SideRules build_side_rules(const ModelSpec& model, int order);

// Evaluates w(x, y) for any kernel variant; chain kernels are integrated by nested quadrature.
class KernelEvaluator {
public:
    explicit KernelEvaluator(const CouplingKernel& kernel);

    double operator()(double x, double y) const;
    // out(i, j) = w(xs[i], ys[j]).
    Eigen::MatrixXd table(std::span<const double> xs, std::span<const double> ys) const;

private:
    struct Chain;
    CouplingKernel kernel_;
    std::shared_ptr<const Chain> chain_;
};

// Reduced kernel of a matrix chain with the inner matrices integrated out.
KernelEvaluator effective_chain_kernel(const std::vector<InnerFactor>& inner, Interaction interaction, int order);

// entries(i, j) = (x^i | w | y^j); gram(i, j) = (pi^L_i | w | pi^R_j) in the per-side
// orthogonal bases, which is what the factorization actually uses.
struct BimomentMatrix {
    int degree = 0;
    int order = 0;
    Eigen::MatrixXd entries;
    PolyBasis left_basis;
    PolyBasis right_basis;
    Eigen::MatrixXd gram;
    std::string fingerprint;

    // Wraps a plain monomial matrix (bases are monomial, gram == entries).
    static BimomentMatrix from_monomial(const Eigen::MatrixXd& entries);
};

double bimoment(const ModelSpec& model, int i, int j, const SideRules& rules);
BimomentMatrix bimoment_matrix(const ModelSpec& model, int d, const SideRules& rules);
BimomentMatrix bimoment_matrix(const ModelSpec& model, int d, int order);

}  // namespace cmm
