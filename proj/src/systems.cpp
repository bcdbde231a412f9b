#include "cgdg/systems.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cgdg/error.hpp"

namespace cgdg {

namespace {

void mat_zero(double* a, int n) { std::fill(a, a + n * n, 0.0); }

// out = A * B for row-major n x n matrices.
void mat_mul(const double* A, const double* B, double* out, int n) {
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += A[i * n + k] * B[k * n + j];
            out[i * n + j] = s;
        }
}

double euler_pressure(const double* q, double gamma) {
    return (gamma - 1.0) * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) / q[0]);
}

}  // namespace

// ---------------------------------------------------------------------------
// Flux maps
// ---------------------------------------------------------------------------

void SystemDescriptor::flux(const double* q, double* f) const {
    switch (kind) {
        case SystemKind::Acoustics: {
            // q = (rho v_x, rho v_y, p): momentum fluxes carry the pressure on
            // the diagonal, the pressure flux carries rho c^2 v = c^2 q_{0,1}.
            f[0] = q[2];
            f[1] = 0.0;
            f[2] = 0.0;
            f[3] = q[2];
            f[4] = c * c * q[0];
            f[5] = c * c * q[1];
            return;
        }
        case SystemKind::Maxwell: {
            // q = (B, E); unit light speed, z-derivatives zero.
            const double Bx = q[0], By = q[1], Bz = q[2];
            const double Ex = q[3], Ey = q[4], Ez = q[5];
            f[0 * 2 + 0] = 0.0;
            f[0 * 2 + 1] = Ez;
            f[1 * 2 + 0] = -Ez;
            f[1 * 2 + 1] = 0.0;
            f[2 * 2 + 0] = Ey;
            f[2 * 2 + 1] = -Ex;
            f[3 * 2 + 0] = 0.0;
            f[3 * 2 + 1] = -Bz;
            f[4 * 2 + 0] = Bz;
            f[4 * 2 + 1] = 0.0;
            f[5 * 2 + 0] = -By;
            f[5 * 2 + 1] = Bx;
            return;
        }
        case SystemKind::Euler: {
            const double rho = q[0], vx = q[1] / rho, vy = q[2] / rho;
            const double p = euler_pressure(q, gamma);
            const double Hq = q[3] + p;
            f[0 * 2 + 0] = q[1];
            f[0 * 2 + 1] = q[2];
            f[1 * 2 + 0] = q[1] * vx + p;
            f[1 * 2 + 1] = q[1] * vy;
            f[2 * 2 + 0] = q[2] * vx;
            f[2 * 2 + 1] = q[2] * vy + p;
            f[3 * 2 + 0] = Hq * vx;
            f[3 * 2 + 1] = Hq * vy;
            return;
        }
    }
}

double SystemDescriptor::max_speed(const double* q, const Vec2& nhat) const {
    switch (kind) {
        case SystemKind::Acoustics:
            return c;
        case SystemKind::Maxwell:
            return 1.0;
        case SystemKind::Euler: {
            const double rho = q[0];
            const double un = (q[1] * nhat.x + q[2] * nhat.y) / rho;
            return std::abs(un) + std::sqrt(gamma * euler_pressure(q, gamma) / rho);
        }
    }
    return 0.0;
}

double SystemDescriptor::speed_bound(const double* q) const {
    switch (kind) {
        case SystemKind::Acoustics:
            return c;
        case SystemKind::Maxwell:
            return 1.0;
        case SystemKind::Euler: {
            const double rho = q[0];
            const double v = std::sqrt(q[1] * q[1] + q[2] * q[2]) / rho;
            return v + std::sqrt(gamma * euler_pressure(q, gamma) / rho);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Normal Jacobians and eigenstructure
// ---------------------------------------------------------------------------

void SystemDescriptor::normal_jacobian(const double* q, const Vec2& nhat, double* A) const {
    const double nx = nhat.x, ny = nhat.y;
    switch (kind) {
        case SystemKind::Acoustics: {
            mat_zero(A, 3);
            A[0 * 3 + 2] = nx;
            A[1 * 3 + 2] = ny;
            A[2 * 3 + 0] = c * c * nx;
            A[2 * 3 + 1] = c * c * ny;
            return;
        }
        case SystemKind::Maxwell: {
            mat_zero(A, 6);
            A[0 * 6 + 5] = ny;
            A[1 * 6 + 5] = -nx;
            A[2 * 6 + 4] = nx;
            A[2 * 6 + 3] = -ny;
            A[3 * 6 + 2] = -ny;
            A[4 * 6 + 2] = nx;
            A[5 * 6 + 1] = -nx;
            A[5 * 6 + 0] = ny;
            return;
        }
        case SystemKind::Euler: {
            const double rho = q[0], vx = q[1] / rho, vy = q[2] / rho;
            const double k = 0.5 * (vx * vx + vy * vy);
            const double un = vx * nx + vy * ny;
            const double p = euler_pressure(q, gamma);
            const double H = (q[3] + p) / rho;
            const double g1 = gamma - 1.0;
            A[0 * 4 + 0] = 0.0;
            A[0 * 4 + 1] = nx;
            A[0 * 4 + 2] = ny;
            A[0 * 4 + 3] = 0.0;
            A[1 * 4 + 0] = -vx * un + g1 * k * nx;
            A[1 * 4 + 1] = un + vx * nx - g1 * vx * nx;
            A[1 * 4 + 2] = vx * ny - g1 * vy * nx;
            A[1 * 4 + 3] = g1 * nx;
            A[2 * 4 + 0] = -vy * un + g1 * k * ny;
            A[2 * 4 + 1] = vy * nx - g1 * vx * ny;
            A[2 * 4 + 2] = un + vy * ny - g1 * vy * ny;
            A[2 * 4 + 3] = g1 * ny;
            A[3 * 4 + 0] = un * (g1 * k - H);
            A[3 * 4 + 1] = H * nx - g1 * vx * un;
            A[3 * 4 + 2] = H * ny - g1 * vy * un;
            A[3 * 4 + 3] = gamma * un;
            return;
        }
    }
}

void SystemDescriptor::eigensystem(const double* q, const Vec2& nhat, double* lambda, double* R,
                                   double* Rinv) const {
    const double nx = nhat.x, ny = nhat.y;
    switch (kind) {
        case SystemKind::Acoustics: {
            lambda[0] = -c;
            lambda[1] = 0.0;
            lambda[2] = c;
            const double Rc[9] = {nx, -ny, nx, ny, nx, ny, -c, 0.0, c};
            const double Li[9] = {0.5 * nx, 0.5 * ny, -0.5 / c, -ny,      nx,
                                  0.0,      0.5 * nx, 0.5 * ny, 0.5 / c};
            std::copy(Rc, Rc + 9, R);
            std::copy(Li, Li + 9, Rinv);
            return;
        }
        case SystemKind::Maxwell: {
            // Orthonormal eigenbasis: two transverse waves per signature and
            // two non-propagating longitudinal modes. Columns of R; Rinv = R'.
            const double tx = -ny, ty = nx;
            const double s = 1.0 / std::sqrt(2.0);
            lambda[0] = -1.0;
            lambda[1] = -1.0;
            lambda[2] = 0.0;
            lambda[3] = 0.0;
            lambda[4] = 1.0;
            lambda[5] = 1.0;
            mat_zero(R, 6);
            auto set_col = [&](int j, double a0, double a1, double a2, double a3, double a4,
                               double a5) {
                R[0 * 6 + j] = a0;
                R[1 * 6 + j] = a1;
                R[2 * 6 + j] = a2;
                R[3 * 6 + j] = a3;
                R[4 * 6 + j] = a4;
                R[5 * 6 + j] = a5;
            };
            set_col(0, s * tx, s * ty, 0, 0, 0, s);
            set_col(1, 0, 0, s, -s * tx, -s * ty, 0);
            set_col(2, nx, ny, 0, 0, 0, 0);
            set_col(3, 0, 0, 0, nx, ny, 0);
            set_col(4, s * tx, s * ty, 0, 0, 0, -s);
            set_col(5, 0, 0, s, s * tx, s * ty, 0);
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j) Rinv[i * 6 + j] = R[j * 6 + i];
            return;
        }
        case SystemKind::Euler: {
            if (!admissible(q)) throw Error("euler: eigensystem at a non-physical state");
            const double rho = q[0], vx = q[1] / rho, vy = q[2] / rho;
            const double k = 0.5 * (vx * vx + vy * vy);
            const double p = euler_pressure(q, gamma);
            const double cs = std::sqrt(gamma * p / rho);
            const double H = (q[3] + p) / rho;
            const double tx = -ny, ty = nx;
            const double un = vx * nx + vy * ny, ut = vx * tx + vy * ty;
            lambda[0] = un - cs;
            lambda[1] = un;
            lambda[2] = un;
            lambda[3] = un + cs;
            auto set_col = [&](double* M, int j, double a0, double a1, double a2, double a3) {
                M[0 * 4 + j] = a0;
                M[1 * 4 + j] = a1;
                M[2 * 4 + j] = a2;
                M[3 * 4 + j] = a3;
            };
            set_col(R, 0, 1.0, vx - cs * nx, vy - cs * ny, H - cs * un);
            set_col(R, 1, 1.0, vx, vy, k);
            set_col(R, 2, 0.0, tx, ty, ut);
            set_col(R, 3, 1.0, vx + cs * nx, vy + cs * ny, H + cs * un);
            const double b1 = (gamma - 1.0) / (cs * cs);
            const double b2 = b1 * k;
            auto set_row = [&](double* M, int i, double a0, double a1, double a2, double a3) {
                M[i * 4 + 0] = a0;
                M[i * 4 + 1] = a1;
                M[i * 4 + 2] = a2;
                M[i * 4 + 3] = a3;
            };
            set_row(Rinv, 0, 0.5 * (b2 + un / cs), 0.5 * (-b1 * vx - nx / cs),
                    0.5 * (-b1 * vy - ny / cs), 0.5 * b1);
            set_row(Rinv, 1, 1.0 - b2, b1 * vx, b1 * vy, -b1);
            set_row(Rinv, 2, -ut, tx, ty, 0.0);
            set_row(Rinv, 3, 0.5 * (b2 - un / cs), 0.5 * (-b1 * vx + nx / cs),
                    0.5 * (-b1 * vy + ny / cs), 0.5 * b1);
            return;
        }
    }
}

void SystemDescriptor::kplus(const Vec2& scaled_normal, const double* q, double* out) const {
    const double len = norm(scaled_normal);
    if (len < 1e-300) {
        mat_zero(out, m);
        return;
    }
    const Vec2 nhat = scaled_normal / len;
    switch (kind) {
        case SystemKind::Acoustics: {
            // K+ = |n| c P_{+c} with the rank-one projector onto the outgoing
            // acoustic mode.
            const double nx = nhat.x, ny = nhat.y;
            const double r[3] = {nx, ny, c};
            const double l[3] = {0.5 * nx, 0.5 * ny, 0.5 / c};
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) out[i * 3 + j] = len * c * r[i] * l[j];
            return;
        }
        case SystemKind::Maxwell: {
            // Eigenvalues lie in {-1,0,1}, so the positive-part projector is
            // (A^2 + A)/2 with A the unit-normal Jacobian.
            double A[36], A2[36];
            normal_jacobian(q, nhat, A);
            mat_mul(A, A, A2, 6);
            for (int i = 0; i < 36; ++i) out[i] = 0.5 * len * (A2[i] + A[i]);
            return;
        }
        case SystemKind::Euler: {
            if (!admissible(q))
                throw Error("euler: characteristic splitting at a non-physical state");
            double lambda[4], R[16], Rinv[16], T[16];
            eigensystem(q, nhat, lambda, R, Rinv);
            for (int i = 0; i < 4; ++i) {
                const double lp = std::max(lambda[i], 0.0);
                for (int j = 0; j < 4; ++j) T[i * 4 + j] = lp * Rinv[i * 4 + j];
            }
            mat_mul(R, T, out, 4);
            for (int i = 0; i < 16; ++i) out[i] *= len;
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Energy and admissibility
// ---------------------------------------------------------------------------

double SystemDescriptor::energy(const double* q) const {
    switch (kind) {
        case SystemKind::Acoustics:
            return 0.5 * (q[0] * q[0] + q[1] * q[1]) / rho +
                   0.5 * q[2] * q[2] / (rho * c * c);
        case SystemKind::Maxwell: {
            double s = 0.0;
            for (int k = 0; k < 6; ++k) s += q[k] * q[k];
            return 0.5 * s;
        }
        case SystemKind::Euler:
            return q[3];
    }
    return 0.0;
}

bool SystemDescriptor::quadratic_energy_weights(std::vector<double>& sigma) const {
    switch (kind) {
        case SystemKind::Acoustics:
            sigma = {1.0 / rho, 1.0 / rho, 1.0 / (rho * c * c)};
            return true;
        case SystemKind::Maxwell:
            sigma.assign(6, 1.0);
            return true;
        case SystemKind::Euler:
            return false;
    }
    return false;
}

bool SystemDescriptor::admissible(const double* q) const {
    if (kind != SystemKind::Euler) return true;
    return q[0] > 0.0 && euler_pressure(q, gamma) > 0.0;
}

double SystemDescriptor::pressure(const double* q) const {
    if (kind != SystemKind::Euler) throw Error("pressure: defined for the euler system only");
    return euler_pressure(q, gamma);
}

// ---------------------------------------------------------------------------
// Descriptor factories
// ---------------------------------------------------------------------------

SystemDescriptor acoustics_descriptor(double rho, double c) {
    if (rho <= 0.0 || c <= 0.0) throw Error("acoustics: rho and c must be positive");
    SystemDescriptor s;
    s.kind = SystemKind::Acoustics;
    s.name = "acoustics";
    s.m = 3;
    s.rho = rho;
    s.c = c;
    s.involutions = {{"curl(v)", InvolutionSpec::Type::Curl2, 0, 1, 1.0 / rho}};
    return s;
}

SystemDescriptor maxwell_descriptor() {
    SystemDescriptor s;
    s.kind = SystemKind::Maxwell;
    s.name = "maxwell";
    s.m = 6;
    s.involutions = {{"div(B)", InvolutionSpec::Type::Div2, 0, 1, 1.0},
                     {"div(E)", InvolutionSpec::Type::Div2, 3, 4, 1.0}};
    return s;
}

SystemDescriptor euler_descriptor(double gamma) {
    if (gamma <= 1.0) throw Error("euler: gamma must exceed 1");
    SystemDescriptor s;
    s.kind = SystemKind::Euler;
    s.name = "euler";
    s.m = 4;
    s.gamma = gamma;
    return s;
}

// ---------------------------------------------------------------------------
// Artificial viscosity
// ---------------------------------------------------------------------------

std::vector<double> av_coefficients(const SystemDescriptor& sys, const OperatorSet& ops,
                                    const DGField& u, double chi) {
    const CGSpace& cg = *ops.cg;
    const int P = cg.P(), L = ops.L(), m = sys.m, N = ops.dg->degree;
    std::vector<double> eps(cg.n_dofs, 0.0);
    if (chi == 0.0) return eps;
    // DG basis values at the continuous-space node positions.
    MatD E(P, L);
    for (int p = 0; p < P; ++p) ops.dg->basis.eval(cg.basis.nodes()[p], &E(p, 0));
    std::vector<double> smax(cg.n_dofs, 0.0);
    std::vector<double> q(m);
    for (int c = 0; c < ops.mesh->n_cells(); ++c)
        for (int p = 0; p < P; ++p) {
            for (int k = 0; k < m; ++k) {
                double s = 0.0;
                for (int a = 0; a < L; ++a) s += E(p, a) * u.at(c, a, k);
                q[k] = s;
            }
            const int g = cg.global(c, p);
            smax[g] = std::max(smax[g], sys.speed_bound(q.data()));
        }
    const double factor = 0.5 * chi / (2.0 * N + 1.0);
    for (int g = 0; g < cg.n_dofs; ++g) eps[g] = factor * cg.dof_h[g] * smax[g];
    return eps;
}

namespace {

[[noreturn]] void throw_bad_state(const SystemDescriptor& sys, const double* q, Vec2 pos) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "euler: non-physical state (rho=%.6g, p=%.6g) at (%.6g, %.6g)", q[0],
                  euler_pressure(q, sys.gamma), pos.x, pos.y);
    throw Error(buf);
}

// Dual-field right-hand side for the viscosity of each system; layout of the
// auxiliary field documented beside each case.
CGField av_aux_field(const SystemDescriptor& sys, const OperatorSet& ops, const DGField& u,
                     CGField* aux, SolveStats* stats) {
    const int n = ops.cg->n_dofs;
    int naux = 0;
    CGField rhs;
    switch (sys.kind) {
        case SystemKind::Acoustics: {
            // aux = (d_x p, d_y p, div v)
            naux = 3;
            rhs = CGField(n, naux);
            add_dual_rhs_axis(ops, u, 2, 0, 1.0, rhs, 0);
            add_dual_rhs_axis(ops, u, 2, 1, 1.0, rhs, 1);
            add_dual_rhs_axis(ops, u, 0, 0, 1.0 / sys.rho, rhs, 2);
            add_dual_rhs_axis(ops, u, 1, 1, 1.0 / sys.rho, rhs, 2);
            break;
        }
        case SystemKind::Maxwell: {
            // aux = (curl B, curl E), three components each
            naux = 6;
            rhs = CGField(n, naux);
            add_dual_rhs_axis(ops, u, 2, 1, 1.0, rhs, 0);
            add_dual_rhs_axis(ops, u, 2, 0, -1.0, rhs, 1);
            add_dual_rhs_axis(ops, u, 1, 0, 1.0, rhs, 2);
            add_dual_rhs_axis(ops, u, 0, 1, -1.0, rhs, 2);
            add_dual_rhs_axis(ops, u, 5, 1, 1.0, rhs, 3);
            add_dual_rhs_axis(ops, u, 5, 0, -1.0, rhs, 4);
            add_dual_rhs_axis(ops, u, 4, 0, 1.0, rhs, 5);
            add_dual_rhs_axis(ops, u, 3, 1, -1.0, rhs, 5);
            break;
        }
        case SystemKind::Euler: {
            // aux = full gradient tensor, component k direction d at k*2+d
            naux = 2 * sys.m;
            rhs = CGField(n, naux);
            for (int k = 0; k < sys.m; ++k)
                for (int d = 0; d < 2; ++d) add_dual_rhs_axis(ops, u, k, d, 1.0, rhs, k * 2 + d);
            break;
        }
    }
    const CGField* guess = (aux && aux->n == n && aux->m == naux) ? aux : nullptr;
    CGField out = dual_solve(ops, rhs, 1e-12, stats, guess);
    if (aux) *aux = out;
    return out;
}

}  // namespace

void nodal_flux_field(const SystemDescriptor& sys, const OperatorSet& ops, const DGField& u,
                      const CGField& what, const std::vector<double>& eps, CGField& fhat,
                      CGField* aux, SolveStats* stats) {
    const CGSpace& cg = *ops.cg;
    const int n = cg.n_dofs, m = sys.m;
    if (what.n != n || what.m != m) throw Error("nodal_flux_field: state field shape mismatch");
    if (fhat.n != n || fhat.m != 2 * m) fhat = CGField(n, 2 * m);
    const bool viscous =
        !eps.empty() && std::any_of(eps.begin(), eps.end(), [](double e) { return e != 0.0; });
    if (!eps.empty() && static_cast<int>(eps.size()) != n)
        throw Error("nodal_flux_field: eps size mismatch");

    if (!viscous) {
        for (int j = 0; j < n; ++j) {
            const double* q = &what.a[static_cast<size_t>(j) * m];
            if (sys.kind == SystemKind::Euler && !sys.admissible(q))
                throw_bad_state(sys, q, cg.dof_position[j]);
            sys.flux(q, &fhat.a[static_cast<size_t>(j) * 2 * m]);
        }
        return;
    }

    const CGField g = av_aux_field(sys, ops, u, aux, stats);
    std::vector<double> qm(m);
    for (int j = 0; j < n; ++j) {
        const double* q = &what.a[static_cast<size_t>(j) * m];
        const double e = eps[j];
        double* f = &fhat.a[static_cast<size_t>(j) * 2 * m];
        switch (sys.kind) {
            case SystemKind::Acoustics: {
                // Modified velocity and pressure keep the flux curl-compatible.
                qm[0] = q[0] - sys.rho * e * g.at(j, 0);
                qm[1] = q[1] - sys.rho * e * g.at(j, 1);
                qm[2] = q[2] - e * g.at(j, 2);
                sys.flux(qm.data(), f);
                break;
            }
            case SystemKind::Maxwell: {
                for (int k = 0; k < 3; ++k) qm[k] = q[k] - e * g.at(j, 3 + k);
                for (int k = 0; k < 3; ++k) qm[3 + k] = q[3 + k] + e * g.at(j, k);
                sys.flux(qm.data(), f);
                break;
            }
            case SystemKind::Euler: {
                if (!sys.admissible(q)) throw_bad_state(sys, q, cg.dof_position[j]);
                sys.flux(q, f);
                for (int k = 0; k < 2 * m; ++k) f[k] -= e * g.at(j, k);
                break;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Constraint-respecting initializers and reference states
// ---------------------------------------------------------------------------

DGField init_from_scalar_potential(const OperatorSet& ops, const ScalarFn& Z) {
    const CGField zh = interpolate_cg(*ops.cg, 1, scalar_fn(Z));
    return primary_grad(ops, zh);
}

DGField init_from_vector_potential(const OperatorSet& ops, const VectorFn& A3) {
    const CGField ah = interpolate_cg(*ops.cg, 3, A3);
    return primary_curl3(ops, ah);
}

void isentropic_vortex(const Vec2& x, double gamma, double* q) {
    const double eps = 5.0;
    const double dx = x.x - 5.0, dy = x.y - 5.0;
    const double r2 = dx * dx + dy * dy;
    const double dT = -(gamma - 1.0) * eps * eps / (8.0 * gamma * M_PI * M_PI) * std::exp(1.0 - r2);
    const double rho = std::pow(1.0 + dT, 1.0 / (gamma - 1.0));
    const double p = std::pow(1.0 + dT, gamma / (gamma - 1.0));
    const double fac = eps / (2.0 * M_PI) * std::exp(0.5 * (1.0 - r2));
    const double vx = fac * (5.0 - x.y), vy = fac * (x.x - 5.0);
    q[0] = rho;
    q[1] = rho * vx;
    q[2] = rho * vy;
    q[3] = p / (gamma - 1.0) + 0.5 * rho * (vx * vx + vy * vy);
}

// ---------------------------------------------------------------------------
// Euler entropy machinery
// ---------------------------------------------------------------------------

double EulerEntropyPair::entropy(const double* q) const {
    const double p = euler_pressure(q, gamma);
    return q[0] * (std::log(p) - gamma * std::log(q[0]));
}

void EulerEntropyPair::entropy_flux(const double* q, double* F2) const {
    const double s = entropy(q) / q[0];
    F2[0] = q[1] * s;
    F2[1] = q[2] * s;
}

void EulerEntropyPair::entropic(const double* q, double* p4) const {
    const double rho = q[0], vx = q[1] / rho, vy = q[2] / rho;
    const double p = euler_pressure(q, gamma);
    const double beta = (gamma - 1.0) * rho / p;
    const double s = std::log(p) - gamma * std::log(rho);
    const double k = 0.5 * (vx * vx + vy * vy);
    p4[0] = s - gamma + beta * k;
    p4[1] = -beta * vx;
    p4[2] = -beta * vy;
    p4[3] = beta;
}

void EulerEntropyPair::hessian(const double* q, double* He) const {
    const double rho = q[0], vx = q[1] / rho, vy = q[2] / rho;
    const double p = euler_pressure(q, gamma);
    const double beta = (gamma - 1.0) * rho / p;
    const double k = 0.5 * (vx * vx + vy * vy);
    const double g1 = gamma - 1.0;
    // Gradients of the primitive ingredients with respect to q.
    const double drho[4] = {1, 0, 0, 0};
    const double dp[4] = {g1 * k, -g1 * vx, -g1 * vy, g1};
    const double dvx[4] = {-vx / rho, 1.0 / rho, 0, 0};
    const double dvy[4] = {-vy / rho, 0, 1.0 / rho, 0};
    double dk[4], ds[4], dbeta[4];
    for (int i = 0; i < 4; ++i) {
        dk[i] = vx * dvx[i] + vy * dvy[i];
        ds[i] = dp[i] / p - gamma * drho[i] / rho;
        dbeta[i] = beta * (drho[i] / rho - dp[i] / p);
    }
    for (int i = 0; i < 4; ++i) {
        He[0 * 4 + i] = ds[i] + k * dbeta[i] + beta * dk[i];
        He[1 * 4 + i] = -vx * dbeta[i] - beta * dvx[i];
        He[2 * 4 + i] = -vy * dbeta[i] - beta * dvy[i];
        He[3 * 4 + i] = dbeta[i];
    }
}

void EulerEntropyPair::inverse_hessian(const double* q, double* H) const {
    double He[16];
    hessian(q, He);
    MatD m(4, 4);
    std::copy(He, He + 16, m.a.begin());
    const MatD inv = mat_inverse(m);
    std::copy(inv.a.begin(), inv.a.end(), H);
}

void EulerEntropyPair::state_from_entropic(const double* p4, double* q) const {
    const double beta = p4[3];
    const double vx = -p4[1] / beta, vy = -p4[2] / beta;
    const double k = 0.5 * (vx * vx + vy * vy);
    const double s = p4[0] + gamma - beta * k;
    const double lrho = (std::log((gamma - 1.0) / beta) - s) / (gamma - 1.0);
    const double rho = std::exp(lrho);
    const double p = (gamma - 1.0) * rho / beta;
    q[0] = rho;
    q[1] = rho * vx;
    q[2] = rho * vy;
    q[3] = p / (gamma - 1.0) + rho * k;
}

double EulerEntropyPair::potential(const double* p4) const {
    double q[4];
    state_from_entropic(p4, q);
    return (1.0 - gamma) * q[0];
}

void EulerEntropyPair::flux_potential(const double* p4, double* psi2) const {
    double q[4];
    state_from_entropic(p4, q);
    psi2[0] = (1.0 - gamma) * q[1];
    psi2[1] = (1.0 - gamma) * q[2];
}

EulerEntropyPair euler_entropy_pair(double gamma) {
    if (gamma <= 1.0) throw Error("euler: gamma must exceed 1");
    return EulerEntropyPair{gamma};
}

}  // namespace cgdg
