#include "cgdg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cgdg/error.hpp"

namespace cgdg {

namespace {

MatD matmul(const MatD& A, const MatD& B) {
    MatD C(A.nr, B.nc);
    for (int i = 0; i < A.nr; ++i)
        for (int k = 0; k < B.nr; ++k) {
            const double a = A(i, k);
            if (a == 0.0) continue;
            for (int j = 0; j < B.nc; ++j) C(i, j) += a * B(k, j);
        }
    return C;
}

double dot_n(int n, const double* a, const double* b) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

// Jacobi-preconditioned conjugate gradients on an SPD apply; x holds the
// initial guess on entry. Converges when |b - Ax| <= tol * |b|.
bool pcg(int n, const std::function<void(const double*, double*)>& apply, const double* diag,
         const double* b, double* x, double tol, int maxit, SolveStats* stats) {
    const double normb = std::sqrt(dot_n(n, b, b));
    if (stats) *stats = {};
    if (normb == 0.0) {
        std::fill(x, x + n, 0.0);
        return true;
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    p = z;
    double rz = dot_n(n, r.data(), z.data());
    double normr = std::sqrt(dot_n(n, r.data(), r.data()));
    int it = 0;
    while (normr > tol * normb && it < maxit) {
        apply(p.data(), ap.data());
        const double alpha = rz / dot_n(n, p.data(), ap.data());
        for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        normr = std::sqrt(dot_n(n, r.data(), r.data()));
        for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        const double rz_next = dot_n(n, r.data(), z.data());
        for (int i = 0; i < n; ++i) p[i] = z[i] + (rz_next / rz) * p[i];
        rz = rz_next;
        ++it;
    }
    if (stats) {
        stats->iterations = it;
        stats->rel_residual = normr / normb;
    }
    return normr <= tol * normb;
}

void apply_mass_component(const OperatorSet& ops, const double* x, double* y) {
    const int nc = ops.mesh->n_cells(), P = ops.P();
    std::fill(y, y + ops.cg->n_dofs, 0.0);
    static thread_local std::vector<double> xl, yl;
    xl.resize(P);
    yl.resize(P);
    for (int c = 0; c < nc; ++c) {
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int i = 0; i < P; ++i) xl[i] = x[map[i]];
        for (int i = 0; i < P; ++i) {
            double s = 0.0;
            for (int j = 0; j < P; ++j) s += ops.mref(i, j) * xl[j];
            yl[i] = s * ops.geom[c].detJ;
        }
        for (int i = 0; i < P; ++i) y[map[i]] += yl[i];
    }
}

CGField mass_solve_impl(const OperatorSet& ops, const CGField& rhs, double tol,
                        SolveStats* stats, const CGField* guess) {
    const int n = ops.cg->n_dofs, m = rhs.m;
    CGField out(n, m);
    std::vector<double> b(n), x(n);
    SolveStats total;
    auto apply = [&ops](const double* in, double* outv) { apply_mass_component(ops, in, outv); };
    for (int k = 0; k < m; ++k) {
        for (int i = 0; i < n; ++i) b[i] = rhs.at(i, k);
        for (int i = 0; i < n; ++i) x[i] = guess ? guess->at(i, k) : 0.0;
        SolveStats s;
        if (!pcg(n, apply, ops.mass_diag.data(), b.data(), x.data(), tol, 10 * n, &s))
            throw Error("operators: global mass solve did not converge");
        total.iterations += s.iterations;
        total.rel_residual = std::max(total.rel_residual, s.rel_residual);
        for (int i = 0; i < n; ++i) out.at(i, k) = x[i];
    }
    if (stats) *stats = total;
    return out;
}

}  // namespace

OperatorSet assemble_operators(const TriMesh& mesh, const DGSpace& dg, const CGSpace& cg) {
    if (cg.degree != dg.degree + 1)
        throw Error("assemble_operators: continuous degree must exceed the element degree by one");
    OperatorSet ops;
    ops.mesh = &mesh;
    ops.dg = &dg;
    ops.cg = &cg;
    ops.geom = build_cell_geometry(mesh);
    ops.corners = corner_normals(mesh);
    ops.rule = triangle_rule(2 * (dg.degree + 1) + 1);
    dg.basis.tabulate(ops.rule, ops.dg_vals, ops.dg_grads);
    cg.basis.tabulate(ops.rule, ops.cg_vals, ops.cg_grads);

    const int L = dg.L(), P = cg.P(), Q = ops.rule.size();
    ops.dref = MatD(L, L);
    ops.mref = MatD(P, P);
    ops.bref = MatD(P, L);
    ops.kref[0] = MatD(L, P);
    ops.kref[1] = MatD(L, P);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            Accum s;
            for (int q = 0; q < Q; ++q)
                s.add(ops.rule.weights[q] * ops.dg_vals[q * L + i] * ops.dg_vals[q * L + j]);
            ops.dref(i, j) = s.value();
        }
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j) {
            Accum s;
            for (int q = 0; q < Q; ++q)
                s.add(ops.rule.weights[q] * ops.cg_vals[q * P + i] * ops.cg_vals[q * P + j]);
            ops.mref(i, j) = s.value();
        }
    for (int i = 0; i < P; ++i)
        for (int a = 0; a < L; ++a) {
            Accum s;
            for (int q = 0; q < Q; ++q)
                s.add(ops.rule.weights[q] * ops.cg_vals[q * P + i] * ops.dg_vals[q * L + a]);
            ops.bref(i, a) = s.value();
        }
    for (int e = 0; e < 2; ++e)
        for (int a = 0; a < L; ++a)
            for (int p = 0; p < P; ++p) {
                Accum s;
                for (int q = 0; q < Q; ++q) {
                    const Vec2 g = ops.cg_grads[q * P + p];
                    s.add(ops.rule.weights[q] * ops.dg_vals[q * L + a] * (e == 0 ? g.x : g.y));
                }
                ops.kref[e](a, p) = s.value();
            }
    ops.dref_inv = mat_inverse(ops.dref);
    ops.pref[0] = matmul(ops.dref_inv, ops.kref[0]);
    ops.pref[1] = matmul(ops.dref_inv, ops.kref[1]);

    ops.rest = MatD(L, P);
    for (int a = 0; a < L; ++a) {
        const auto psi = cg.basis.eval(dg.basis.nodes()[a]);
        for (int p = 0; p < P; ++p) ops.rest(a, p) = psi[p];
    }

    ops.mass_diag.assign(cg.n_dofs, 0.0);
    ops.dof_volume.assign(cg.n_dofs, 0.0);
    std::vector<double> row_sum(P, 0.0);
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j) row_sum[i] += ops.mref(i, j);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double dj = ops.geom[c].detJ;
        for (int i = 0; i < P; ++i) {
            const int g = cg.global(c, i);
            ops.mass_diag[g] += dj * ops.mref(i, i);
            ops.dof_volume[g] += dj * row_sum[i];
        }
    }
    return ops;
}

DGField primary_jacobian(const OperatorSet& ops, const CGField& w) {
    const int nc = ops.mesh->n_cells(), L = ops.L(), P = ops.P(), m = w.m;
    DGField out(nc, L, 2 * m);
    std::vector<double> wl(static_cast<size_t>(P) * m);
    std::vector<double> t0(static_cast<size_t>(L) * m), t1(t0.size());
    for (int c = 0; c < nc; ++c) {
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int p = 0; p < P; ++p)
            for (int k = 0; k < m; ++k) wl[p * m + k] = w.at(map[p], k);
        for (int a = 0; a < L; ++a)
            for (int k = 0; k < m; ++k) {
                double s0 = 0.0, s1 = 0.0;
                for (int p = 0; p < P; ++p) {
                    s0 += ops.pref[0](a, p) * wl[p * m + k];
                    s1 += ops.pref[1](a, p) * wl[p * m + k];
                }
                t0[a * m + k] = s0;
                t1[a * m + k] = s1;
            }
        const auto& Ji = ops.geom[c].Jinv;
        for (int a = 0; a < L; ++a)
            for (int k = 0; k < m; ++k)
                for (int d = 0; d < 2; ++d)
                    out.at(c, a, k * 2 + d) =
                        Ji[0][d] * t0[a * m + k] + Ji[1][d] * t1[a * m + k];
    }
    return out;
}

DGField primary_grad(const OperatorSet& ops, const CGField& w) {
    if (w.m != 1) throw Error("primary_grad: expected a scalar field");
    return primary_jacobian(ops, w);
}

DGField primary_div2(const OperatorSet& ops, const CGField& v) {
    if (v.m != 2) throw Error("primary_div2: expected a 2-component field");
    const DGField jac = primary_jacobian(ops, v);
    DGField out(jac.cells, jac.L, 1);
    for (int c = 0; c < jac.cells; ++c)
        for (int a = 0; a < jac.L; ++a)
            out.at(c, a, 0) = jac.at(c, a, 0 * 2 + 0) + jac.at(c, a, 1 * 2 + 1);
    return out;
}

DGField primary_curl2(const OperatorSet& ops, const CGField& v) {
    if (v.m != 2) throw Error("primary_curl2: expected a 2-component field");
    const DGField jac = primary_jacobian(ops, v);
    DGField out(jac.cells, jac.L, 1);
    for (int c = 0; c < jac.cells; ++c)
        for (int a = 0; a < jac.L; ++a)
            out.at(c, a, 0) = jac.at(c, a, 1 * 2 + 0) - jac.at(c, a, 0 * 2 + 1);
    return out;
}

DGField primary_curl3(const OperatorSet& ops, const CGField& v) {
    if (v.m != 3) throw Error("primary_curl3: expected a 3-component field");
    const DGField jac = primary_jacobian(ops, v);
    DGField out(jac.cells, jac.L, 3);
    for (int c = 0; c < jac.cells; ++c)
        for (int a = 0; a < jac.L; ++a) {
            out.at(c, a, 0) = jac.at(c, a, 2 * 2 + 1);
            out.at(c, a, 1) = -jac.at(c, a, 2 * 2 + 0);
            out.at(c, a, 2) = jac.at(c, a, 1 * 2 + 0) - jac.at(c, a, 0 * 2 + 1);
        }
    return out;
}

DGField primary_div_tensor(const OperatorSet& ops, const CGField& f) {
    if (f.m % 2 != 0) throw Error("primary_div_tensor: expected (k, d) component pairs");
    const int nc = ops.mesh->n_cells(), L = ops.L(), P = ops.P(), m = f.m / 2;
    DGField out(nc, L, m);
    std::vector<double> fl(static_cast<size_t>(P) * f.m);
    std::vector<double> t0(static_cast<size_t>(L) * f.m), t1(t0.size());
    for (int c = 0; c < nc; ++c) {
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int p = 0; p < P; ++p)
            for (int k = 0; k < f.m; ++k) fl[p * f.m + k] = f.at(map[p], k);
        for (int a = 0; a < L; ++a)
            for (int k = 0; k < f.m; ++k) {
                double s0 = 0.0, s1 = 0.0;
                for (int p = 0; p < P; ++p) {
                    s0 += ops.pref[0](a, p) * fl[p * f.m + k];
                    s1 += ops.pref[1](a, p) * fl[p * f.m + k];
                }
                t0[a * f.m + k] = s0;
                t1[a * f.m + k] = s1;
            }
        const auto& Ji = ops.geom[c].Jinv;
        for (int a = 0; a < L; ++a)
            for (int k = 0; k < m; ++k) {
                const double dx = Ji[0][0] * t0[a * f.m + k * 2] + Ji[1][0] * t1[a * f.m + k * 2];
                const double dy = Ji[0][1] * t0[a * f.m + k * 2 + 1] +
                                  Ji[1][1] * t1[a * f.m + k * 2 + 1];
                out.at(c, a, k) = dx + dy;
            }
    }
    return out;
}

DGField restrict_cg_to_dg(const OperatorSet& ops, const CGField& w) {
    const int nc = ops.mesh->n_cells(), L = ops.L(), P = ops.P(), m = w.m;
    DGField out(nc, L, m);
    for (int c = 0; c < nc; ++c) {
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int a = 0; a < L; ++a)
            for (int k = 0; k < m; ++k) {
                double s = 0.0;
                for (int p = 0; p < P; ++p) s += ops.rest(a, p) * w.at(map[p], k);
                out.at(c, a, k) = s;
            }
    }
    return out;
}

void apply_cg_mass(const OperatorSet& ops, const CGField& x, CGField& y) {
    if (y.n != x.n || y.m != x.m) y = CGField(x.n, x.m);
    std::vector<double> xc(x.n), yc(x.n);
    for (int k = 0; k < x.m; ++k) {
        for (int i = 0; i < x.n; ++i) xc[i] = x.at(i, k);
        apply_mass_component(ops, xc.data(), yc.data());
        for (int i = 0; i < x.n; ++i) y.at(i, k) = yc[i];
    }
}

CGField mass_solve(const OperatorSet& ops, const CGField& rhs, double tol, SolveStats* stats,
                   const CGField* guess) {
    return mass_solve_impl(ops, rhs, tol, stats, guess);
}

void add_dual_rhs_axis(const OperatorSet& ops, const DGField& u, int comp, int axis,
                       double scale, CGField& rhs, int rhs_comp) {
    const int nc = ops.mesh->n_cells(), L = ops.L(), P = ops.P();
    const double sign = (ops.debug_flip_dual_sign && axis == 1) ? scale : -scale;
    std::vector<double> s0(P), s1(P);
    for (int c = 0; c < nc; ++c) {
        for (int p = 0; p < P; ++p) {
            double a0 = 0.0, a1 = 0.0;
            for (int a = 0; a < L; ++a) {
                const double ua = u.at(c, a, comp);
                a0 += ops.kref[0](a, p) * ua;
                a1 += ops.kref[1](a, p) * ua;
            }
            s0[p] = a0;
            s1[p] = a1;
        }
        const auto& g = ops.geom[c];
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        const double j0 = g.Jinv[0][axis], j1 = g.Jinv[1][axis];
        for (int p = 0; p < P; ++p)
            rhs.at(map[p], rhs_comp) += sign * g.detJ * (j0 * s0[p] + j1 * s1[p]);
    }
}

CGField dual_solve(const OperatorSet& ops, const CGField& rhs, double tol, SolveStats* stats,
                   const CGField* guess) {
    if (!ops.mesh->has_periodic)
        throw Error("operators: dual operators require a periodic mesh");
    return mass_solve_impl(ops, rhs, tol, stats, guess);
}

CGField dual_jacobian(const OperatorSet& ops, const DGField& u, double tol) {
    CGField rhs(ops.cg->n_dofs, 2 * u.m);
    for (int k = 0; k < u.m; ++k)
        for (int d = 0; d < 2; ++d) add_dual_rhs_axis(ops, u, k, d, 1.0, rhs, k * 2 + d);
    return dual_solve(ops, rhs, tol);
}

CGField dual_grad(const OperatorSet& ops, const DGField& u, double tol) {
    if (u.m != 1) throw Error("dual_grad: expected a scalar field");
    return dual_jacobian(ops, u, tol);
}

CGField dual_div2(const OperatorSet& ops, const DGField& v, double tol) {
    if (v.m != 2) throw Error("dual_div2: expected a 2-component field");
    CGField rhs(ops.cg->n_dofs, 1);
    add_dual_rhs_axis(ops, v, 0, 0, 1.0, rhs, 0);
    add_dual_rhs_axis(ops, v, 1, 1, 1.0, rhs, 0);
    return dual_solve(ops, rhs, tol);
}

CGField dual_curl2(const OperatorSet& ops, const DGField& v, double tol) {
    if (v.m != 2) throw Error("dual_curl2: expected a 2-component field");
    CGField rhs(ops.cg->n_dofs, 1);
    add_dual_rhs_axis(ops, v, 1, 0, 1.0, rhs, 0);
    add_dual_rhs_axis(ops, v, 0, 1, -1.0, rhs, 0);
    return dual_solve(ops, rhs, tol);
}

CGField dual_curl3(const OperatorSet& ops, const DGField& v, double tol) {
    if (v.m != 3) throw Error("dual_curl3: expected a 3-component field");
    CGField rhs(ops.cg->n_dofs, 3);
    add_dual_rhs_axis(ops, v, 2, 1, 1.0, rhs, 0);
    add_dual_rhs_axis(ops, v, 2, 0, -1.0, rhs, 1);
    add_dual_rhs_axis(ops, v, 1, 0, 1.0, rhs, 2);
    add_dual_rhs_axis(ops, v, 0, 1, -1.0, rhs, 2);
    return dual_solve(ops, rhs, tol);
}

std::vector<double> stencil_candidates(const OperatorSet& ops, const DGField& u) {
    const int nc = ops.mesh->n_cells(), L = ops.L(), P = ops.P(), m = u.m;
    std::vector<double> cand(static_cast<size_t>(nc) * P * m, 0.0);
    std::vector<int> stencil, gdofs;
    for (int k = 0; k < nc; ++k) {
        stencil.clear();
        for (int p = 0; p < P; ++p)
            for (const auto& [c, l] : ops.cg->dof_cells[ops.cg->global(k, p)])
                stencil.push_back(c);
        std::sort(stencil.begin(), stencil.end());
        stencil.erase(std::unique(stencil.begin(), stencil.end()), stencil.end());

        gdofs.clear();
        for (int c : stencil)
            for (int p = 0; p < P; ++p) gdofs.push_back(ops.cg->global(c, p));
        std::sort(gdofs.begin(), gdofs.end());
        gdofs.erase(std::unique(gdofs.begin(), gdofs.end()), gdofs.end());
        const int nloc = static_cast<int>(gdofs.size());
        auto local_of = [&gdofs](int g) {
            return static_cast<int>(std::lower_bound(gdofs.begin(), gdofs.end(), g) -
                                    gdofs.begin());
        };

        MatD mloc(nloc, nloc);
        std::vector<double> rloc(static_cast<size_t>(nloc) * m, 0.0);
        for (int c : stencil) {
            const double dj = ops.geom[c].detJ;
            const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
            for (int i = 0; i < P; ++i) {
                const int li = local_of(map[i]);
                for (int j = 0; j < P; ++j) mloc(li, local_of(map[j])) += dj * ops.mref(i, j);
                for (int a = 0; a < L; ++a) {
                    const double ba = dj * ops.bref(i, a);
                    for (int km = 0; km < m; ++km) rloc[li * m + km] += ba * u.at(c, a, km);
                }
            }
        }
        LU<double> lu(mloc);
        std::vector<double> col(nloc), sol(nloc);
        for (int km = 0; km < m; ++km) {
            for (int i = 0; i < nloc; ++i) col[i] = rloc[i * m + km];
            lu.solve(col.data(), sol.data());
            for (int p = 0; p < P; ++p)
                cand[(static_cast<size_t>(k) * P + p) * m + km] =
                    sol[local_of(ops.cg->global(k, p))];
        }
    }
    return cand;
}

CGField average_candidates(const OperatorSet& ops, const std::vector<double>& cand, int m) {
    const int nc = ops.mesh->n_cells(), P = ops.P();
    CGField out(ops.cg->n_dofs, m);
    for (int c = 0; c < nc; ++c)
        for (int p = 0; p < P; ++p) {
            const int g = ops.cg->global(c, p);
            for (int k = 0; k < m; ++k)
                out.at(g, k) += cand[(static_cast<size_t>(c) * P + p) * m + k];
        }
    for (int g = 0; g < ops.cg->n_dofs; ++g) {
        const double inv = 1.0 / static_cast<double>(ops.cg->dof_cells[g].size());
        for (int k = 0; k < m; ++k) out.at(g, k) *= inv;
    }
    return out;
}

CGField project_dg_to_cg(const OperatorSet& ops, const DGField& u, double tol,
                         bool stencil_warm_start, SolveStats* stats,
                         const CGField* initial_guess) {
    const int nc = ops.mesh->n_cells(), L = ops.L(), P = ops.P(), m = u.m;
    CGField rhs(ops.cg->n_dofs, m);
    for (int c = 0; c < nc; ++c) {
        const double dj = ops.geom[c].detJ;
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int i = 0; i < P; ++i)
            for (int a = 0; a < L; ++a) {
                const double ba = dj * ops.bref(i, a);
                for (int k = 0; k < m; ++k) rhs.at(map[i], k) += ba * u.at(c, a, k);
            }
    }
    CGField warm;
    const CGField* guess = initial_guess;
    if (!guess && stencil_warm_start) {
        warm = average_candidates(ops, stencil_candidates(ops, u), m);
        guess = &warm;
    }
    return mass_solve_impl(ops, rhs, tol, stats, guess);
}

CGField nscheme_combine(const OperatorSet& ops, const std::vector<double>& cand, int m,
                        const KPlusFn& kplus, double eps, bool eps_half_volume) {
    const TriMesh& mesh = *ops.mesh;
    const int P = ops.P();
    CGField out(ops.cg->n_dofs, m);
    const auto& classes = ops.cg->basis.node_classes();
    std::vector<double> qbar(m), bsum(m), kp(static_cast<size_t>(m) * m);
    MatD nmat(m, m);
    for (int g = 0; g < ops.cg->n_dofs; ++g) {
        const auto& contributors = ops.cg->dof_cells[g];
        if (contributors.size() == 1 && classes[contributors[0].second].kind == NodeKind::Interior) {
            const auto& [c, l] = contributors[0];
            for (int k = 0; k < m; ++k)
                out.at(g, k) = cand[(static_cast<size_t>(c) * P + l) * m + k];
            continue;
        }
        std::fill(qbar.begin(), qbar.end(), 0.0);
        for (const auto& [c, l] : contributors)
            for (int k = 0; k < m; ++k)
                qbar[k] += cand[(static_cast<size_t>(c) * P + l) * m + k];
        for (int k = 0; k < m; ++k) qbar[k] /= static_cast<double>(contributors.size());

        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) nmat(i, j) = 0.0;
        std::fill(bsum.begin(), bsum.end(), 0.0);
        for (const auto& [c, l] : contributors) {
            const NodeClass& nk = classes[l];
            Vec2 n{0.0, 0.0};
            if (nk.kind == NodeKind::Vertex) {
                n = ops.corners.ln[c][nk.which];
            } else if (nk.kind == NodeKind::Edge) {
                const int e = mesh.cell_edges[c][nk.which];
                const Vec2 dir = mesh.vertex_coords[mesh.edges[e][1]] -
                                 mesh.vertex_coords[mesh.edges[e][0]];
                n = rot_minus90(dir);
                if (mesh.edge_to_cells[e][0] != c) n = -1.0 * n;
            } else {
                // Interior node of a merged dof cannot occur; fall back to a
                // zero normal so only the regularization weights it.
            }
            kplus(n, qbar.data(), kp.data());
            const double ec = eps_half_volume ? 0.5 * mesh.cell_area[c] : eps;
            const double* w = &cand[(static_cast<size_t>(c) * P + l) * m];
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < m; ++j) {
                    const double kij = kp[i * m + j] + (i == j ? ec : 0.0);
                    nmat(i, j) += kij;
                    bsum[i] += kij * w[j];
                }
            }
        }
        LU<double> lu(nmat);
        lu.solve(bsum.data(), qbar.data());
        for (int k = 0; k < m; ++k) out.at(g, k) = qbar[k];
    }
    return out;
}

CGField nscheme_reconstruct(const OperatorSet& ops, const DGField& u, const KPlusFn& kplus,
                            double eps, bool eps_half_volume) {
    return nscheme_combine(ops, stencil_candidates(ops, u), u.m, kplus, eps, eps_half_volume);
}

CGField poisson_solve(const ScalarFn& f, const TriMesh& mesh, const CGSpace& cg, double tol,
                      SolveStats* stats) {
    const auto geom = build_cell_geometry(mesh);
    const int P = cg.P(), n = cg.n_dofs, nc = mesh.n_cells();
    const QuadratureRule rule = triangle_rule(2 * cg.degree + 2);
    std::vector<double> vals;
    std::vector<Vec2> grads;
    cg.basis.tabulate(rule, vals, grads);
    const int Q = rule.size();

    // Reference grad-grad blocks per axis pair; physical stiffness applies
    // detJ * sum_ee' (Jinv Jinv^T)_{ee'} S_{ee'}.
    MatD s00(P, P), s01(P, P), s11(P, P);
    for (int i = 0; i < P; ++i)
        for (int j = 0; j < P; ++j) {
            Accum a00, a01, a11;
            for (int q = 0; q < Q; ++q) {
                const Vec2 gi = grads[q * P + i], gj = grads[q * P + j];
                a00.add(rule.weights[q] * gi.x * gj.x);
                a01.add(rule.weights[q] * gi.x * gj.y);
                a11.add(rule.weights[q] * gi.y * gj.y);
            }
            s00(i, j) = a00.value();
            s01(i, j) = a01.value();
            s11(i, j) = a11.value();
        }

    std::vector<double> diag(n, 0.0), b(n, 0.0), vols(n, 0.0);
    std::vector<double> c00(nc), c01(nc), c11(nc);
    for (int c = 0; c < nc; ++c) {
        const auto& g = geom[c];
        const double dj = g.detJ;
        c00[c] = dj * (g.Jinv[0][0] * g.Jinv[0][0] + g.Jinv[0][1] * g.Jinv[0][1]);
        c01[c] = dj * (g.Jinv[0][0] * g.Jinv[1][0] + g.Jinv[0][1] * g.Jinv[1][1]);
        c11[c] = dj * (g.Jinv[1][0] * g.Jinv[1][0] + g.Jinv[1][1] * g.Jinv[1][1]);
        const int* map = &cg.loc2glob[static_cast<size_t>(c) * P];
        for (int i = 0; i < P; ++i) {
            diag[map[i]] += c00[c] * s00(i, i) + 2.0 * c01[c] * s01(i, i) + c11[c] * s11(i, i);
            double bi = 0.0, vi = 0.0;
            for (int q = 0; q < Q; ++q) {
                const double wpsi = rule.weights[q] * vals[q * P + i];
                bi += wpsi * f(ref_to_phys(g, rule.points[q]));
                vi += wpsi;
            }
            b[map[i]] += -dj * bi;
            vols[map[i]] += dj * vi;
        }
    }

    // Pure-Neumann compatibility: the source moments must sum to zero, since
    // the basis forms a partition of unity.
    double bsum = 0.0, babs = 0.0;
    for (int i = 0; i < n; ++i) {
        bsum += b[i];
        babs += std::abs(b[i]);
    }
    if (std::abs(bsum) > 1e-8 * std::max(babs, 1e-300))
        throw Error("poisson_solve: source term must have zero mean");

    std::vector<double> xl(P), yl(P);
    auto apply = [&](const double* x, double* y) {
        std::fill(y, y + n, 0.0);
        for (int c = 0; c < nc; ++c) {
            const int* map = &cg.loc2glob[static_cast<size_t>(c) * P];
            for (int i = 0; i < P; ++i) xl[i] = x[map[i]];
            for (int i = 0; i < P; ++i) {
                double s = 0.0;
                for (int j = 0; j < P; ++j)
                    s += (c00[c] * s00(i, j) + c01[c] * (s01(i, j) + s01(j, i)) +
                          c11[c] * s11(i, j)) *
                         xl[j];
                yl[i] = s;
            }
            for (int i = 0; i < P; ++i) y[map[i]] += yl[i];
        }
        // Deflate the constant kernel so the iteration stays on the range.
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += y[i];
        mean /= n;
        for (int i = 0; i < n; ++i) y[i] -= mean;
    };
    double mean_b = bsum / n;
    for (int i = 0; i < n; ++i) b[i] -= mean_b;

    std::vector<double> x(n, 0.0);
    SolveStats s;
    if (!pcg(n, apply, diag.data(), b.data(), x.data(), tol, 10 * n, &s))
        throw Error("poisson_solve: conjugate gradients did not converge");
    if (stats) *stats = s;

    // Pin the mass-weighted mean to zero.
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        num += vols[i] * x[i];
        den += vols[i];
    }
    CGField out(n, 1);
    for (int i = 0; i < n; ++i) out.at(i, 0) = x[i] - num / den;
    return out;
}

void dump_cg_mass_matrix(const OperatorSet& ops, const std::string& path) {
    std::map<std::pair<int, int>, double> entries;
    const int P = ops.P();
    for (int c = 0; c < ops.mesh->n_cells(); ++c) {
        const double dj = ops.geom[c].detJ;
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int i = 0; i < P; ++i)
            for (int j = 0; j < P; ++j) entries[{map[i], map[j]}] += dj * ops.mref(i, j);
    }
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw Error("dump_cg_mass_matrix: cannot open " + path);
    for (const auto& [key, value] : entries)
        std::fprintf(fp, "%d %d %.17g\n", key.first, key.second, value);
    std::fclose(fp);
}

void dump_stiffness_tensor(const OperatorSet& ops, const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw Error("dump_stiffness_tensor: cannot open " + path);
    const int L = ops.L(), P = ops.P();
    std::vector<std::pair<int, double>> row;
    for (int c = 0; c < ops.mesh->n_cells(); ++c) {
        const auto& g = ops.geom[c];
        const int* map = &ops.cg->loc2glob[static_cast<size_t>(c) * P];
        for (int a = 0; a < L; ++a) {
            row.clear();
            for (int p = 0; p < P; ++p)
                for (int d = 0; d < 2; ++d) {
                    const double v = g.detJ * (g.Jinv[0][d] * ops.kref[0](a, p) +
                                               g.Jinv[1][d] * ops.kref[1](a, p));
                    row.emplace_back(2 * map[p] + d, v);
                }
            std::sort(row.begin(), row.end());
            for (const auto& [col, v] : row)
                std::fprintf(fp, "%d %d %.17g\n", c * L + a, col, v);
        }
    }
    std::fclose(fp);
}

}  // namespace cgdg
