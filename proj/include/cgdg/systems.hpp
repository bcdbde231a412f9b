// The three hyperbolic systems solved by the library: linear acoustics,
// vacuum Maxwell (2.5D, z-derivatives zero), and the compressible Euler
// equations. Each descriptor bundles the flux map, signal speeds, the
// normal-Jacobian eigenstructure used by the characteristic reconstruction,
// differential constraints preserved by the evolution, and the
// constraint-compatible artificial-viscosity flux modification.
#pragma once

#include <string>
#include <vector>

#include "cgdg/operators.hpp"

namespace cgdg {

enum class SystemKind { Acoustics, Maxwell, Euler };

/// One differential constraint (curl- or divergence-free pair of in-plane
/// components) that the scheme preserves and the diagnostics monitor.
struct InvolutionSpec {
    std::string label;
    enum class Type { Curl2, Div2 } type = Type::Curl2;
    int comp0 = 0, comp1 = 1;  // in-plane component indices within q
    double scale = 1.0;        // factor mapping stored components to the constrained field
};

struct SystemDescriptor {
    SystemKind kind = SystemKind::Acoustics;
    std::string name;
    int m = 0;            // number of conserved components
    double rho = 1.0;     // acoustics: constant background density
    double c = 1.0;       // acoustics: sound speed
    double gamma = 1.4;   // euler: ratio of specific heats
    std::vector<InvolutionSpec> involutions;

    /// Flux tensor, row-major m x 2: f[k*2 + d] = d-direction flux of component k.
    void flux(const double* q, double* f) const;
    /// Largest |eigenvalue| of the normal Jacobian in direction nhat (unit).
    double max_speed(const double* q, const Vec2& nhat) const;
    /// Upper bound of max_speed over all unit normals.
    double speed_bound(const double* q) const;
    /// Normal Jacobian A_n = d(f . n)/dq, row-major m x m, for unit nhat.
    void normal_jacobian(const double* q, const Vec2& nhat, double* A) const;
    /// Eigendecomposition A_n = R diag(lambda) Rinv (columns of R are right
    /// eigenvectors). Requires an admissible state for Euler.
    void eigensystem(const double* q, const Vec2& nhat, double* lambda, double* R,
                     double* Rinv) const;
    /// Positive part |n| R max(lambda, 0) Rinv for a scaled normal n; the
    /// regularization epsilon is added by the caller.
    void kplus(const Vec2& scaled_normal, const double* q, double* out) const;
    /// Conserved energy density (the extra conservation law's density for the
    /// linear systems; total energy for Euler).
    double energy(const double* q) const;
    /// For linear symmetric systems, fills the diagonal weights Sigma with
    /// E(q) = q' diag(Sigma) q / 2 and returns true; false for Euler.
    bool quadratic_energy_weights(std::vector<double>& sigma) const;
    bool is_linear() const { return kind != SystemKind::Euler; }
    /// Physical admissibility (Euler: rho > 0 and p > 0; always true otherwise).
    bool admissible(const double* q) const;
    /// Euler pressure from conserved variables.
    double pressure(const double* q) const;
};

SystemDescriptor acoustics_descriptor(double rho = 1.0, double c = 1.0);
SystemDescriptor maxwell_descriptor();
SystemDescriptor euler_descriptor(double gamma = 1.4);

/// Per-dof viscosity coefficients eps_j = (1/2) chi h_j / (2N+1) * s_j, where
/// s_j is the largest signal-speed bound among the one-sided evaluations of
/// u at dof j and h_j is the dof's local mesh size. chi = 0 disables.
std::vector<double> av_coefficients(const SystemDescriptor& sys, const OperatorSet& ops,
                                    const DGField& u, double chi);

/// Nodal flux dofs of the continuous flux field: fhat(j, k*2+d) = flux of the
/// nodal state what(j, .). With a nonzero eps vector the system's
/// constraint-compatible viscosity modifies the result (state-level
/// corrections for acoustics/Maxwell, gradient viscosity for Euler); an empty
/// or all-zero eps yields the plain flux evaluation. `aux` optionally carries
/// the viscosity's auxiliary continuous field between calls as a warm start.
/// Throws on non-physical Euler nodal states, reporting the dof location.
void nodal_flux_field(const SystemDescriptor& sys, const OperatorSet& ops, const DGField& u,
                      const CGField& what, const std::vector<double>& eps, CGField& fhat,
                      CGField* aux = nullptr, SolveStats* stats = nullptr);

/// Curl-free initial vector field: the cellwise gradient of the interpolant
/// of Z in the continuous space. Its dual curl vanishes to solver precision.
DGField init_from_scalar_potential(const OperatorSet& ops, const ScalarFn& Z);

/// Divergence-free initial field: the cellwise curl of the interpolated
/// 3-component potential. Components 0,1 have vanishing dual divergence.
DGField init_from_vector_potential(const OperatorSet& ops, const VectorFn& A3);

/// Stationary vortex of the compressible Euler equations centered at (5,5)
/// on [0,10]^2; writes the 4 conserved components.
void isentropic_vortex(const Vec2& x, double gamma, double* q);

/// Concave entropy machinery for Euler used by the node-based finite volume
/// scheme: E = rho * s with s = ln(p rho^-gamma), its flux, the entropic
/// variables p = dE/dq, the inverse Hessian H = (d2E/dq2)^-1, and the
/// potentials phi(p), psi(p) entering the entropy-stable nodal flux.
struct EulerEntropyPair {
    double gamma = 1.4;

    double entropy(const double* q) const;
    void entropy_flux(const double* q, double* F2) const;
    void entropic(const double* q, double* p4) const;
    void hessian(const double* q, double* He) const;           // 4x4 row-major
    void inverse_hessian(const double* q, double* H) const;    // 4x4 row-major
    void state_from_entropic(const double* p4, double* q) const;
    double potential(const double* p4) const;                  // phi
    void flux_potential(const double* p4, double* psi2) const; // psi_x, psi_y
};

EulerEntropyPair euler_entropy_pair(double gamma = 1.4);

}  // namespace cgdg
