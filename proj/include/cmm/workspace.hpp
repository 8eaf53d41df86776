#pragma once

#include <exception>
#include <memory>

#include "cmm/biortho.hpp"
#include "cmm/dual.hpp"
#include "cmm/model.hpp"
#include "cmm/quadrature.hpp"

namespace cmm {

struct WorkspaceOptions {
    int degree = 12;
    int order = 64;
    int kmax = -1;  // dual CD truncation; -1 means the degree bound
    double tail_tolerance = 1e-3;
    FactorizeOptions factor;
    DualOptions dual;
};

// Everything the correlators need for one validated model: rules, bimoments,
// the biorthogonal system and its Hilbert transforms. Immutable once built.
class Workspace {
public:
    static Workspace build(const ModelSpec& model, const WorkspaceOptions& opts = {});
    // Reuses a bimoment matrix and factorization (e.g. from the cache).
    static Workspace assemble(const ModelSpec& model, const WorkspaceOptions& opts, BimomentMatrix bm,
                              BiorthogonalSystem sys);

    const ModelSpec& model() const { return state_->model; }
    const WorkspaceOptions& options() const { return state_->opts; }
    const SideRules& rules() const { return state_->rules; }
    const BimomentMatrix& bimoments() const { return state_->bm; }
    const BiorthogonalSystem& system() const { return state_->sys; }
    // Rethrows the construction error (e.g. NonFiniteIntegrand) if the Hilbert tables could not be built;
    // the direct correlators do not need them.
    const DualTransforms& dual() const;
    bool has_dual() const { return state_->dual != nullptr; }
    int degree() const { return state_->sys.degree(); }
    int kmax() const { return state_->opts.kmax < 0 ? degree() : state_->opts.kmax; }

private:
    struct State {
        ModelSpec model;
        WorkspaceOptions opts;
        SideRules rules;
        BimomentMatrix bm;
        BiorthogonalSystem sys;
        std::unique_ptr<DualTransforms> dual;
        std::exception_ptr dual_error;
    };
    std::shared_ptr<const State> state_;
};

// factorize() plus the drift diagnostic against a 3/4-order rule (ConditionWarning::drift).
BiorthogonalSystem factorize_resolved(const ModelSpec& model, const BimomentMatrix& bm, const WorkspaceOptions& opts);

}  // namespace cmm
