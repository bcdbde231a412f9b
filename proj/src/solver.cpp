#include "cgdg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgdg/error.hpp"

namespace cgdg {

namespace {

void axpy(double a, const DGField& x, DGField& y) {
    for (size_t i = 0; i < y.a.size(); ++i) y.a[i] += a * x.a[i];
}

void axpy(double a, const CGField& x, CGField& y) {
    for (size_t i = 0; i < y.a.size(); ++i) y.a[i] += a * x.a[i];
}

// u + a * div-of(f); the update route used by every stage so that state
// changes are always divergences of continuous fields.
DGField advanced(const OperatorSet& ops, const DGField& u, double a, const CGField& f) {
    DGField out = u;
    const DGField d = primary_div_tensor(ops, f);
    axpy(a, d, out);
    return out;
}

}  // namespace

CGDGSolver::CGDGSolver(const SystemDescriptor& sys, const OperatorSet& ops, SolverOptions opt)
    : sys_(&sys), ops_(&ops), opt_(opt) {
    if (ops.dg->degree + 1 != ops.cg->degree)
        throw Error("solver: flux space degree must exceed the state degree by one");
}

EvolutionState CGDGSolver::make_state(DGField u0) const {
    if (u0.m != sys_->m || u0.cells != ops_->mesh->n_cells() || u0.L != ops_->L())
        throw Error("solver: initial state shape mismatch");
    EvolutionState s;
    s.u = std::move(u0);
    s.integrated_flux = CGField(ops_->cg->n_dofs, 2 * sys_->m);
    return s;
}

CGField CGDGSolver::reconstruct(const DGField& u, EvolutionState* state) const {
    SolveStats stats;
    CGField what;
    if (opt_.reconstruction == Reconstruction::Projection) {
        const CGField* guess =
            (state && state->what.n == ops_->cg->n_dofs && state->what.m == sys_->m)
                ? &state->what
                : nullptr;
        what = project_dg_to_cg(*ops_, u, opt_.projection_tol, /*stencil_warm_start=*/guess == nullptr,
                                &stats, guess);
    } else {
        const SystemDescriptor* sys = sys_;
        what = nscheme_reconstruct(
            *ops_, u,
            [sys](Vec2 n, const double* q, double* K) { sys->kplus(n, q, K); },
            opt_.nscheme_eps, opt_.nscheme_eps_half_volume);
    }
    if (state) {
        state->what = what;
        state->pcg_iterations += stats.iterations;
    }
    return what;
}

StageEval CGDGSolver::evaluate(const DGField& u, EvolutionState* state) const {
    for (double v : u.a)
        if (!std::isfinite(v)) throw Error("solver: non-finite state");
    StageEval ev;
    ev.what = reconstruct(u, state);
    SolveStats stats;
    std::vector<double> eps;
    if (opt_.viscosity && opt_.chi != 0.0) eps = av_coefficients(*sys_, *ops_, u, opt_.chi);
    CGField* aux = state ? &state->aux : nullptr;
    nodal_flux_field(*sys_, *ops_, u, ev.what, eps, ev.fhat, aux, &stats);
    if (state) state->pcg_iterations += stats.iterations;
    ev.dudt = primary_div_tensor(*ops_, ev.fhat);
    for (double& v : ev.dudt.a) v = -v;
    for (double v : ev.dudt.a)
        if (!std::isfinite(v)) throw Error("solver: non-finite rate");
    return ev;
}

DGField CGDGSolver::rhs(const DGField& u, EvolutionState* state) const {
    return evaluate(u, state).dudt;
}

double CGDGSolver::stable_dt(const DGField& u) const {
    const int nc = ops_->mesh->n_cells(), L = ops_->L(), m = sys_->m;
    const int N = ops_->dg->degree;
    double dt = std::numeric_limits<double>::infinity();
    for (int c = 0; c < nc; ++c) {
        double s = 0.0;
        for (int a = 0; a < L; ++a) s = std::max(s, sys_->speed_bound(&u.a[(static_cast<size_t>(c) * L + a) * m]));
        if (s > 0.0) dt = std::min(dt, ops_->mesh->cell_h[c] / ((2.0 * N + 1.0) * s));
    }
    if (!std::isfinite(dt)) throw Error("solver: stability estimate needs a positive wave speed");
    return opt_.cfl * dt;
}

TimeScheme CGDGSolver::effective_scheme() const {
    if (opt_.scheme != TimeScheme::Auto) return opt_.scheme;
    return ops_->dg->degree <= 2 ? TimeScheme::SSPRK3 : TimeScheme::RK4;
}

void CGDGSolver::step(EvolutionState& state, double dt, const StageHook& hook) const {
    if (dt <= 0.0) dt = opt_.fixed_dt > 0.0 ? opt_.fixed_dt : stable_dt(state.u);
    const double t = state.t;
    auto observe = [&](int stage, double ts, const DGField& u, const StageEval& ev) {
        if (hook) {
            StageRecord rec;
            rec.stage = stage;
            rec.t_stage = ts;
            rec.dt = dt;
            rec.u = &u;
            rec.eval = &ev;
            hook(rec);
        }
    };

    // Stage states are written directly as u plus the divergence of a flux
    // combination; the final combination accumulates into integrated_flux.
    CGField combo(ops_->cg->n_dofs, 2 * sys_->m);
    if (effective_scheme() == TimeScheme::SSPRK3) {
        const StageEval e1 = evaluate(state.u, &state);
        observe(0, t, state.u, e1);
        const DGField u1 = advanced(*ops_, state.u, -dt, e1.fhat);
        const StageEval e2 = evaluate(u1, &state);
        observe(1, t + dt, u1, e2);
        axpy(1.0, e1.fhat, combo);
        axpy(1.0, e2.fhat, combo);
        const DGField u2 = advanced(*ops_, state.u, -0.25 * dt, combo);
        const StageEval e3 = evaluate(u2, &state);
        observe(2, t + 0.5 * dt, u2, e3);
        // Final weights 1/6, 1/6, 2/3.
        for (double& v : combo.a) v /= 6.0;
        axpy(2.0 / 3.0, e3.fhat, combo);
    } else {
        const StageEval e1 = evaluate(state.u, &state);
        observe(0, t, state.u, e1);
        const DGField u2 = advanced(*ops_, state.u, -0.5 * dt, e1.fhat);
        const StageEval e2 = evaluate(u2, &state);
        observe(1, t + 0.5 * dt, u2, e2);
        const DGField u3 = advanced(*ops_, state.u, -0.5 * dt, e2.fhat);
        const StageEval e3 = evaluate(u3, &state);
        observe(2, t + 0.5 * dt, u3, e3);
        const DGField u4 = advanced(*ops_, state.u, -dt, e3.fhat);
        const StageEval e4 = evaluate(u4, &state);
        observe(3, t + dt, u4, e4);
        axpy(1.0 / 6.0, e1.fhat, combo);
        axpy(1.0 / 3.0, e2.fhat, combo);
        axpy(1.0 / 3.0, e3.fhat, combo);
        axpy(1.0 / 6.0, e4.fhat, combo);
    }
    state.u = advanced(*ops_, state.u, -dt, combo);
    axpy(dt, combo, state.integrated_flux);
    state.t = t + dt;
    state.steps += 1;
}

void CGDGSolver::run(EvolutionState& state, double t_end, const StageHook& hook) const {
    while (state.t < t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
        double dt = opt_.fixed_dt > 0.0 ? opt_.fixed_dt : stable_dt(state.u);
        if (state.t + dt > t_end) dt = t_end - state.t;
        if (!(dt > 1e-15 * std::max(1.0, std::abs(t_end))))
            throw Error("solver: time step underflow");
        step(state, dt, hook);
    }
    state.t = t_end;
}

}  // namespace cgdg
