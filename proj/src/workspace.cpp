#include "cmm/workspace.hpp"

#include <algorithm>

namespace cmm {

BiorthogonalSystem factorize_resolved(const ModelSpec& model, const BimomentMatrix& bm, const WorkspaceOptions& opts) {
    BiorthogonalSystem sys = factorize(bm, opts.factor);
    const int coarse_order = std::max(opts.degree + 2, (3 * opts.order) / 4);
    std::vector<double> coarse;
    try {
        const BiorthogonalSystem c = factorize(bimoment_matrix(model, opts.degree, build_side_rules(model, coarse_order)), opts.factor);
        coarse.assign(c.norms().begin(), c.norms().end());
    } catch (const SingularMinorError& e) {
        // Pivots before the broken minor are still comparable; redo the elimination up to there.
        const int keep = e.minor() - 1;
        if (keep > 0) {
            const BiorthogonalSystem c =
                factorize(bimoment_matrix(model, keep - 1, build_side_rules(model, coarse_order)), opts.factor);
            coarse.assign(c.norms().begin(), c.norms().end());
        }
    }
    sys.add_drift_warnings(coarse, opts.factor.drift_threshold);
    return sys;
}

Workspace Workspace::build(const ModelSpec& model, const WorkspaceOptions& opts) {
    const ModelSpec valid = validate_model(model);
    SideRules rules = build_side_rules(valid, opts.order);
    BimomentMatrix bm = bimoment_matrix(valid, opts.degree, rules);
    BiorthogonalSystem sys = factorize_resolved(valid, bm, opts);
    return assemble(valid, opts, std::move(bm), std::move(sys));
}

Workspace Workspace::assemble(const ModelSpec& model, const WorkspaceOptions& opts, BimomentMatrix bm,
                              BiorthogonalSystem sys) {
    auto st = std::make_shared<State>();
    st->model = validate_model(model);
    st->opts = opts;
    st->rules = build_side_rules(st->model, opts.order);
    st->bm = std::move(bm);
    st->sys = std::move(sys);
    try {
        st->dual = std::make_unique<DualTransforms>(st->model, st->sys, st->rules, opts.dual);
    } catch (const Error&) {
        st->dual_error = std::current_exception();
    }
    Workspace w;
    w.state_ = std::move(st);
    return w;
}

const DualTransforms& Workspace::dual() const {
    if (!state_->dual) std::rethrow_exception(state_->dual_error);
    return *state_->dual;
}

}  // namespace cmm
