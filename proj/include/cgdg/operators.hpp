// Discrete calculus connecting the two spaces: the mixed stiffness tensor,
// element mass inverses, the global continuous mass operator, primary
// (cellwise, exact) and dual (mass-solved) derivative operators, the global
// L2 projection with a stencil warm start, the nodal characteristic-weighted
// reconstruction, and a pure-Neumann Poisson solver used for sanity checks.
//
// All element integrals reduce to reference-element blocks times affine
// factors, so every operator is quadrature-exact for its polynomial degree.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgdg/spaces.hpp"

namespace cgdg {

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
};

struct OperatorSet {
    const TriMesh* mesh = nullptr;
    const DGSpace* dg = nullptr;
    const CGSpace* cg = nullptr;
    std::vector<CellGeom> geom;
    CornerNormalSet corners;
    QuadratureRule rule;  // exact to degree 2(N+1)+1

    // Reference blocks; the per-cell matrices are detJ (or Jinv) multiples.
    MatD dref, dref_inv;   // L x L element mass on the reference triangle
    MatD mref;             // P x P continuous-space mass
    MatD bref;             // P x L mixed mass (rows continuous space)
    MatD kref[2];          // L x P, d/d(ref axis) of the continuous basis
    MatD pref[2];          // dref_inv * kref[e]
    MatD rest;             // L x P continuous basis at element nodes

    std::vector<double> mass_diag;   // global mass diagonal (Jacobi)
    std::vector<double> dof_volume;  // global mass row sums
    // Test fixture: negates the y-axis dual derivative, which silently breaks
    // the grad/curl compositions; used to demonstrate failure detection.
    bool debug_flip_dual_sign = false;

    // Basis tables at `rule` (vals[q * n + i]) for reuse by callers.
    std::vector<double> dg_vals, cg_vals;
    std::vector<Vec2> dg_grads, cg_grads;

    int L() const { return dg->L(); }
    int P() const { return cg->P(); }
};

// Throws on M != N + 1.
OperatorSet assemble_operators(const TriMesh& mesh, const DGSpace& dg, const CGSpace& cg);

// --- primary operators (element-local, exact on the continuous space) ---
// Jacobian layout: out(c, a, k*2 + d) = d/dx_d of component k at node a.
DGField primary_jacobian(const OperatorSet& ops, const CGField& w);
DGField primary_grad(const OperatorSet& ops, const CGField& w);    // 1 comp -> 2
DGField primary_div2(const OperatorSet& ops, const CGField& v);    // 2 comp -> 1
DGField primary_curl2(const OperatorSet& ops, const CGField& v);   // 2 comp -> 1
DGField primary_curl3(const OperatorSet& ops, const CGField& v);   // 3 comp -> 3
// Divergence of a flux bundle with pair layout (k, d) -> k*2 + d: 2m comps
// in, m comps out, out_k = d/dx f_{k,x} + d/dy f_{k,y} at every node.
DGField primary_div_tensor(const OperatorSet& ops, const CGField& f);

// Continuous field sampled at the element nodes (exact restriction).
DGField restrict_cg_to_dg(const OperatorSet& ops, const CGField& w);

// --- global mass solve (Jacobi-preconditioned conjugate gradients) ---
void apply_cg_mass(const OperatorSet& ops, const CGField& x, CGField& y);
CGField mass_solve(const OperatorSet& ops, const CGField& rhs, double tol = 1e-12,
                   SolveStats* stats = nullptr, const CGField* guess = nullptr);

// --- dual operators (adjoint stiffness + mass solve; periodic meshes) ---
// Accumulates -d~/dx_axis of component `comp` of u, times `scale`, into
// component `rhs_comp` of the coefficient-level right-hand side.
void add_dual_rhs_axis(const OperatorSet& ops, const DGField& u, int comp, int axis,
                       double scale, CGField& rhs, int rhs_comp);
CGField dual_solve(const OperatorSet& ops, const CGField& rhs, double tol = 1e-12,
                   SolveStats* stats = nullptr, const CGField* guess = nullptr);
CGField dual_jacobian(const OperatorSet& ops, const DGField& u, double tol = 1e-12);
CGField dual_grad(const OperatorSet& ops, const DGField& u, double tol = 1e-12);   // 1 -> 2
CGField dual_div2(const OperatorSet& ops, const DGField& v, double tol = 1e-12);   // 2 -> 1
CGField dual_curl2(const OperatorSet& ops, const DGField& v, double tol = 1e-12);  // 2 -> 1
CGField dual_curl3(const OperatorSet& ops, const DGField& v, double tol = 1e-12);  // 3 -> 3

// --- projection of element data onto the continuous space ---
// Stencil-local least-squares candidates around every cell: for cell k the
// local problem spans the cells sharing a dof with k, and the harvested
// values at k's own nodes land in cand[(k * P + p) * m + comp].
std::vector<double> stencil_candidates(const OperatorSet& ops, const DGField& u);
CGField average_candidates(const OperatorSet& ops, const std::vector<double>& cand, int m);

CGField project_dg_to_cg(const OperatorSet& ops, const DGField& u, double tol = 1e-12,
                         bool stencil_warm_start = true, SolveStats* stats = nullptr,
                         const CGField* initial_guess = nullptr);

// Characteristic-weighted nodal combination. The callback fills the m-by-m
// positive part R max(Lambda, 0) R^{-1} of the normal flux Jacobian for a
// scaled normal (its length multiplies the result) at the given state; the
// caller adds eps on the diagonal and inverts the accumulated sum.
using KPlusFn = std::function<void(Vec2 scaled_normal, const double* state, double* kplus)>;
CGField nscheme_combine(const OperatorSet& ops, const std::vector<double>& cand, int m,
                        const KPlusFn& kplus, double eps = 1e-12,
                        bool eps_half_volume = false);
CGField nscheme_reconstruct(const OperatorSet& ops, const DGField& u, const KPlusFn& kplus,
                            double eps = 1e-12, bool eps_half_volume = false);

// --- pure-Neumann Poisson sanity solver on the continuous space ---
// Solves -laplace(u) = -f weakly: grad-grad stiffness against test functions
// equals the moment of -f; compatibility requires a zero-mean source and the
// answer is pinned to zero mean. Throws on incompatible sources.
CGField poisson_solve(const ScalarFn& f, const TriMesh& mesh, const CGSpace& cg,
                      double tol = 1e-10, SolveStats* stats = nullptr);

// Coordinate-format text dumps ("row col value" per line) for external
// cross-validation. The stiffness flattens rows as cell*L + a and columns as
// 2*dof + axis.
void dump_cg_mass_matrix(const OperatorSet& ops, const std::string& path);
void dump_stiffness_tensor(const OperatorSet& ops, const std::string& path);

}  // namespace cgdg
