// Semi-discrete evolution with a globally continuous flux reconstruction:
// element states advance by the exact pointwise divergence of a continuous
// flux field, so every Runge-Kutta update is itself the divergence of a
// single accumulated flux combination.
#pragma once

#include <functional>

#include "cgdg/operators.hpp"
#include "cgdg/systems.hpp"

namespace cgdg {

enum class Reconstruction {
    Projection,      // global least-squares fit of the element states
    Characteristic,  // upwinding nodal combination of per-cell candidates
};

enum class TimeScheme { Auto, SSPRK3, RK4 };

struct SolverOptions {
    Reconstruction reconstruction = Reconstruction::Projection;
    TimeScheme scheme = TimeScheme::Auto;  // Auto: SSPRK3 up to degree 2, then RK4
    bool viscosity = false;                // nodal flux dissipation
    double chi = 1.0;                      // dissipation strength
    double cfl = 0.4;
    double fixed_dt = 0.0;                 // > 0 overrides the stability estimate
    double projection_tol = 1e-12;
    double nscheme_eps = 1e-12;
    bool nscheme_eps_half_volume = false;
};

// Evolution state. `what`/`aux` persist across steps as warm starts for the
// iterative solves; `integrated_flux` accumulates dt times the Runge-Kutta
// weighted combination of stage flux fields, so at any time
//   u - u0 + div(integrated_flux) = 0
// holds pointwise up to roundoff.
struct EvolutionState {
    double t = 0.0;
    DGField u;
    CGField what;
    CGField aux;
    CGField integrated_flux;
    long steps = 0;
    long pcg_iterations = 0;
};

// One flux evaluation: the continuous reconstruction, its nodal flux, and
// the resulting semi-discrete rate.
struct StageEval {
    CGField what;
    CGField fhat;
    DGField dudt;
};

struct StageRecord {
    int stage = 0;
    double t_stage = 0.0;
    double dt = 0.0;     // step size of the enclosing step
    const DGField* u = nullptr;
    const StageEval* eval = nullptr;
};
using StageHook = std::function<void(const StageRecord&)>;

class CGDGSolver {
  public:
    CGDGSolver(const SystemDescriptor& sys, const OperatorSet& ops, SolverOptions opt = {});

    EvolutionState make_state(DGField u0) const;

    // Continuous reconstruction of the element states (per options), warm
    // started from and cached into `state` when given.
    CGField reconstruct(const DGField& u, EvolutionState* state = nullptr) const;
    // Full stage evaluation; throws on non-finite rates.
    StageEval evaluate(const DGField& u, EvolutionState* state = nullptr) const;
    DGField rhs(const DGField& u, EvolutionState* state = nullptr) const;

    // cfl * min over cells of h / ((2N+1) s) with s the per-cell speed bound.
    double stable_dt(const DGField& u) const;
    TimeScheme effective_scheme() const;

    // One step (dt <= 0 takes the stability estimate); `hook` observes every
    // stage after its evaluation.
    void step(EvolutionState& state, double dt = 0.0, const StageHook& hook = {}) const;
    // Advance to exactly t_end, shrinking the final step.
    void run(EvolutionState& state, double t_end, const StageHook& hook = {}) const;

    const SystemDescriptor& system() const { return *sys_; }
    const OperatorSet& operators() const { return *ops_; }
    const SolverOptions& options() const { return opt_; }

  private:
    const SystemDescriptor* sys_;
    const OperatorSet* ops_;
    SolverOptions opt_;
};

}  // namespace cgdg
