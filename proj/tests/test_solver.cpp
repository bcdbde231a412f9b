#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "cgdg/error.hpp"
#include "cgdg/quadrature.hpp"
#include "cgdg/solver.hpp"
#include "doctest.h"

using namespace cgdg;

namespace {

TriMesh periodic_mesh(int nx, int ny, double perturb, uint64_t seed = 5) {
    return generate_square_mesh(nx, ny, {0.0, 0.0, 1.0, 1.0}, perturb, seed);
}

struct Setup {
    TriMesh mesh;
    DGSpace dg;
    CGSpace cg;
    OperatorSet ops;
    Setup(int nx, int ny, double perturb, int N, uint64_t seed = 5)
        : mesh(periodic_mesh(nx, ny, perturb, seed)),
          dg(N),
          cg(mesh, N + 1, true),
          ops(assemble_operators(mesh, dg, cg)) {}
};

// Smooth periodic three-component initial data.
DGField smooth_acoustic(const Setup& s) {
    return interpolate_dg(s.mesh, s.ops.geom, s.dg, 3, [](Vec2 x, double* q) {
        q[0] = 0.2 * std::sin(2.0 * M_PI * x.x) * std::cos(2.0 * M_PI * x.y);
        q[1] = -0.1 * std::cos(2.0 * M_PI * x.x);
        q[2] = 1.0 + 0.3 * std::sin(2.0 * M_PI * (x.x + x.y));
    });
}

double linf_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double linf(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("construction rejects mismatched space degrees") {
    const TriMesh mesh = periodic_mesh(3, 3, 0.0);
    const DGSpace dg(1);
    const CGSpace cg(mesh, 3, true);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    CHECK_THROWS_WITH_AS(assemble_operators(mesh, dg, cg), doctest::Contains("degree"), Error);
    const CGSpace ok(mesh, 2, true);
    const OperatorSet ops = assemble_operators(mesh, dg, ok);
    CGDGSolver solver(sys, ops);
    DGField bad(mesh.n_cells(), dg.L(), 4);
    CHECK_THROWS_AS(solver.make_state(bad), Error);
}

TEST_CASE("uniform states are exact steady solutions") {
    Setup s(4, 4, 0.12, 2);

    SUBCASE("linear system, plain flux") {
        const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
        CGDGSolver solver(sys, s.ops);
        DGField u0(s.mesh.n_cells(), s.dg.L(), 3);
        for (int c = 0; c < s.mesh.n_cells(); ++c)
            for (int a = 0; a < s.dg.L(); ++a) {
                u0.at(c, a, 0) = 0.4;
                u0.at(c, a, 1) = -0.3;
                u0.at(c, a, 2) = 0.9;
            }
        EvolutionState st = solver.make_state(u0);
        const DGField rate = solver.rhs(st.u, &st);
        CHECK(linf(rate.a) <= 1e-12);
        for (int i = 0; i < 5; ++i) solver.step(st, 0.01);
        CHECK(linf_diff(st.u.a, u0.a) <= 1e-12);
    }

    SUBCASE("nonlinear system with dissipation enabled") {
        const SystemDescriptor sys = euler_descriptor(1.4);
        SolverOptions opt;
        opt.viscosity = true;
        opt.chi = 1.0;
        CGDGSolver solver(sys, s.ops, opt);
        DGField u0(s.mesh.n_cells(), s.dg.L(), 4);
        for (int c = 0; c < s.mesh.n_cells(); ++c)
            for (int a = 0; a < s.dg.L(); ++a) {
                u0.at(c, a, 0) = 1.0;
                u0.at(c, a, 1) = 0.1;
                u0.at(c, a, 2) = -0.2;
                u0.at(c, a, 3) = 2.525;
            }
        EvolutionState st = solver.make_state(u0);
        for (int i = 0; i < 3; ++i) solver.step(st);
        CHECK(linf_diff(st.u.a, u0.a) <= 1e-11);
    }
}

TEST_CASE("the semi-discrete rate is the exact divergence of the continuous flux") {
    Setup s(5, 5, 0.15, 3);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    CGDGSolver solver(sys, s.ops);
    EvolutionState st = solver.make_state(smooth_acoustic(s));
    const StageEval ev = solver.evaluate(st.u, &st);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> bary(0.05, 0.9);
    std::uniform_int_distribution<int> cells(0, s.mesh.n_cells() - 1);
    double worst = 0.0, scale = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int c = cells(rng);
        Vec2 r = {bary(rng), bary(rng)};
        if (r.x + r.y > 0.95) r = {0.95 - r.y, 0.95 - r.x};
        const Vec2 x = ref_to_phys(s.ops.geom[c], r);
        double grad[12], rate[3];
        eval_grad_cg(s.cg, s.ops.geom, ev.fhat, c, x, grad);
        eval_dg_ref(s.dg, ev.dudt, c, r, rate);
        for (int k = 0; k < 3; ++k) {
            const double div = grad[(k * 2 + 0) * 2 + 0] + grad[(k * 2 + 1) * 2 + 1];
            worst = std::max(worst, std::abs(rate[k] + div));
            scale = std::max(scale, std::abs(div));
        }
    }
    CHECK(worst <= 1e-11 * (1.0 + scale));
}

TEST_CASE("cell averages change by the boundary flux of the continuous field") {
    Setup s(4, 4, 0.18, 2);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    CGDGSolver solver(sys, s.ops);
    EvolutionState st = solver.make_state(smooth_acoustic(s));
    const StageEval ev = solver.evaluate(st.u, &st);

    const QuadratureRule vol = triangle_rule(2 * s.dg.degree + 1);
    const EdgeRule edge = gauss_legendre(s.cg.degree + 1);
    double worst = 0.0;
    for (int c = 0; c < s.mesh.n_cells(); ++c) {
        double cellint[3] = {0, 0, 0}, bflux[3] = {0, 0, 0};
        for (int q = 0; q < vol.size(); ++q) {
            double val[3];
            eval_dg_ref(s.dg, ev.dudt, c, vol.points[q], val);
            for (int k = 0; k < 3; ++k)
                cellint[k] += s.ops.geom[c].detJ * vol.weights[q] * val[k];
        }
        for (int e = 0; e < 3; ++e) {
            const Vec2 a = s.mesh.cell_vertex(c, e), b = s.mesh.cell_vertex(c, (e + 1) % 3);
            const Vec2 t = {b.x - a.x, b.y - a.y};  // outward normal (t.y, -t.x)
            for (int g = 0; g < edge.size(); ++g) {
                const Vec2 x = {a.x + edge.points[g] * t.x, a.y + edge.points[g] * t.y};
                double f[6];
                eval_cg_in_cell(s.cg, s.ops.geom, ev.fhat, c, x, f);
                for (int k = 0; k < 3; ++k)
                    bflux[k] += edge.weights[g] * (f[k * 2 + 0] * t.y - f[k * 2 + 1] * t.x);
            }
        }
        for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(cellint[k] + bflux[k]));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("projected dynamics reduce to the classical continuous scheme") {
    // For a linear system without dissipation, the least-squares fit of the
    // evolving element states obeys a closed equation: the standard
    // continuous Galerkin semi-discretization. Evolve both and compare.
    Setup s(4, 4, 0.1, 1);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    CGDGSolver solver(sys, s.ops);
    EvolutionState st = solver.make_state(smooth_acoustic(s));

    // Constant coefficient matrices, extracted from the flux of unit states.
    double A[2][3][3];
    for (int j = 0; j < 3; ++j) {
        double e[3] = {0, 0, 0}, f[6];
        e[j] = 1.0;
        sys.flux(e, f);
        for (int k = 0; k < 3; ++k)
            for (int d = 0; d < 2; ++d) A[d][k][j] = f[k * 2 + d];
    }
    const QuadratureRule rule = triangle_rule(2 * s.cg.degree + 1);
    const int P = s.cg.P();
    std::vector<double> psi(P);
    std::vector<Vec2> gref(P);
    // Galerkin right-hand side: moments of the flux divergence of the fit.
    auto galerkin_rate = [&](const CGField& w) {
        CGField bb(s.cg.n_dofs, 3);
        for (int c = 0; c < s.mesh.n_cells(); ++c) {
            const auto& g = s.ops.geom[c];
            for (int q = 0; q < rule.size(); ++q) {
                s.cg.basis.eval(rule.points[q], psi.data());
                s.cg.basis.eval_grad(rule.points[q], gref.data());
                double wq[3] = {0, 0, 0}, dwdx[3] = {0, 0, 0}, dwdy[3] = {0, 0, 0};
                for (int p = 0; p < P; ++p) {
                    const int dof = s.cg.global(c, p);
                    const double gx = g.Jinv[0][0] * gref[p].x + g.Jinv[1][0] * gref[p].y;
                    const double gy = g.Jinv[0][1] * gref[p].x + g.Jinv[1][1] * gref[p].y;
                    for (int k = 0; k < 3; ++k) {
                        wq[k] += psi[p] * w.at(dof, k);
                        dwdx[k] += gx * w.at(dof, k);
                        dwdy[k] += gy * w.at(dof, k);
                    }
                }
                double divf[3] = {0, 0, 0};
                for (int k = 0; k < 3; ++k)
                    for (int j = 0; j < 3; ++j)
                        divf[k] += A[0][k][j] * dwdx[j] + A[1][k][j] * dwdy[j];
                const double wt = g.detJ * rule.weights[q];
                for (int p = 0; p < P; ++p) {
                    const int dof = s.cg.global(c, p);
                    for (int k = 0; k < 3; ++k) bb.at(dof, k) += wt * psi[p] * divf[k];
                }
            }
        }
        CGField rate = mass_solve(s.ops, bb, 1e-13);
        for (double& v : rate.a) v = -v;
        return rate;
    };

    CGField w = project_dg_to_cg(s.ops, st.u, 1e-13);
    const double dt = 0.005;
    for (int n = 0; n < 20; ++n) {
        // Mirror the degree-1 default integrator (three stages).
        const CGField k1 = galerkin_rate(w);
        CGField w1 = w;
        for (size_t i = 0; i < w.a.size(); ++i) w1.a[i] += dt * k1.a[i];
        const CGField k2 = galerkin_rate(w1);
        CGField w2 = w;
        for (size_t i = 0; i < w.a.size(); ++i)
            w2.a[i] += 0.25 * dt * (k1.a[i] + k2.a[i]);
        const CGField k3 = galerkin_rate(w2);
        for (size_t i = 0; i < w.a.size(); ++i)
            w.a[i] += dt * (k1.a[i] / 6.0 + k2.a[i] / 6.0 + 2.0 * k3.a[i] / 3.0);
        solver.step(st, dt);
    }
    const CGField wp = project_dg_to_cg(s.ops, st.u, 1e-13);
    double worst = 0.0;
    for (size_t i = 0; i < w.a.size(); ++i)
        worst = std::max(worst, std::abs(w.a[i] - wp.a[i]));
    CHECK(worst <= 1e-9);
}

TEST_CASE("weighted quadratic energy is conserved by the semi-discrete rate") {
    auto energy_and_rate = [](const Setup& s, const SystemDescriptor& sys, const DGField& u0) {
        CGDGSolver solver(sys, s.ops);
        EvolutionState st = solver.make_state(u0);
        const StageEval ev = solver.evaluate(st.u, &st);
        std::vector<double> sigma;
        REQUIRE(sys.quadratic_energy_weights(sigma));
        const QuadratureRule rule = triangle_rule(2 * s.dg.degree + 3);
        const int m = sys.m;
        double E = 0.0, rate = 0.0;
        std::vector<double> wq(m), rq(m);
        for (int c = 0; c < s.mesh.n_cells(); ++c)
            for (int q = 0; q < rule.size(); ++q) {
                const Vec2 x = ref_to_phys(s.ops.geom[c], rule.points[q]);
                eval_cg_in_cell(s.cg, s.ops.geom, ev.what, c, x, wq.data());
                eval_dg_ref(s.dg, ev.dudt, c, rule.points[q], rq.data());
                const double wt = s.ops.geom[c].detJ * rule.weights[q];
                for (int k = 0; k < m; ++k) {
                    E += 0.5 * wt * sigma[k] * wq[k] * wq[k];
                    rate += wt * sigma[k] * wq[k] * rq[k];
                }
            }
        return std::pair<double, double>(E, rate);
    };

    SUBCASE("three-component wave system") {
        Setup s(5, 5, 0.15, 2);
        const auto [E, rate] = energy_and_rate(s, acoustics_descriptor(1.0, 1.0),
                                               smooth_acoustic(s));
        CHECK(E > 0.1);
        CHECK(std::abs(rate) <= 1e-12 * std::max(1.0, E));
    }

    SUBCASE("six-component wave system") {
        Setup s(4, 4, 0.12, 2);
        const DGField u0 =
            interpolate_dg(s.mesh, s.ops.geom, s.dg, 6, [](Vec2 x, double* q) {
                q[0] = 0.2 * std::cos(2.0 * M_PI * x.y);
                q[1] = -0.1 * std::sin(2.0 * M_PI * x.x);
                q[2] = 0.3 * std::sin(2.0 * M_PI * (x.x - x.y));
                q[3] = 0.15 * std::cos(2.0 * M_PI * x.x);
                q[4] = 0.25 * std::sin(2.0 * M_PI * x.y);
                q[5] = 1.0 + 0.2 * std::cos(2.0 * M_PI * (x.x + x.y));
            });
        const auto [E, rate] = energy_and_rate(s, maxwell_descriptor(), u0);
        CHECK(E > 0.1);
        CHECK(std::abs(rate) <= 1e-12 * std::max(1.0, E));
    }
}

TEST_CASE("the integrator hits its design order in the step size") {
    Setup s(3, 3, 0.1, 1);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    const DGField u0 = smooth_acoustic(s);
    const double T = 0.04;

    auto final_state = [&](TimeScheme sch, int steps) {
        SolverOptions opt;
        opt.scheme = sch;
        CGDGSolver solver(sys, s.ops, opt);
        EvolutionState st = solver.make_state(u0);
        const double dt = T / steps;
        for (int n = 0; n < steps; ++n) solver.step(st, dt);
        return st.u;
    };

    for (const auto& [sch, design] :
         {std::pair<TimeScheme, double>{TimeScheme::SSPRK3, 3.0},
          std::pair<TimeScheme, double>{TimeScheme::RK4, 4.0}}) {
        const DGField ref = final_state(sch, 256);
        const DGField ua = final_state(sch, 4);
        const DGField ub = final_state(sch, 8);
        const double ea = linf_diff(ua.a, ref.a), eb = linf_diff(ub.a, ref.a);
        const double order = std::log2(ea / eb);
        CHECK(order >= design - 0.4);
        CHECK(order <= design + 0.6);
    }
}

TEST_CASE("state changes equal the divergence of the accumulated flux") {
    SUBCASE("linear system, plain flux") {
        Setup s(4, 4, 0.15, 2);
        const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
        CGDGSolver solver(sys, s.ops);
        EvolutionState st = solver.make_state(smooth_acoustic(s));
        const DGField u0 = st.u;
        for (int n = 0; n < 20; ++n) solver.step(st, 0.004);
        DGField res = primary_div_tensor(s.ops, st.integrated_flux);
        for (size_t i = 0; i < res.a.size(); ++i) res.a[i] += st.u.a[i] - u0.a[i];
        CHECK(linf(res.a) <= 1e-11 * std::max(1.0, linf(st.u.a)));
    }

    SUBCASE("nonlinear system with dissipation") {
        Setup s(3, 3, 0.1, 1);
        const SystemDescriptor sys = euler_descriptor(1.4);
        SolverOptions opt;
        opt.viscosity = true;
        opt.chi = 1.0;
        CGDGSolver solver(sys, s.ops, opt);
        const DGField u0 = interpolate_dg(s.mesh, s.ops.geom, s.dg, 4, [](Vec2 x, double* q) {
            const double rho = 1.0 + 0.2 * std::sin(2.0 * M_PI * x.x);
            const double vx = 0.3, vy = -0.1, p = 1.0 + 0.1 * std::cos(2.0 * M_PI * x.y);
            q[0] = rho;
            q[1] = rho * vx;
            q[2] = rho * vy;
            q[3] = p / 0.4 + 0.5 * rho * (vx * vx + vy * vy);
        });
        EvolutionState st = solver.make_state(u0);
        for (int n = 0; n < 10; ++n) solver.step(st);
        DGField res = primary_div_tensor(s.ops, st.integrated_flux);
        for (size_t i = 0; i < res.a.size(); ++i) res.a[i] += st.u.a[i] - u0.a[i];
        CHECK(linf(res.a) <= 1e-11 * std::max(1.0, linf(st.u.a)));
    }
}

TEST_CASE("scheme selection, stability estimate, and exact arrival") {
    Setup s2(3, 3, 0.0, 2);
    Setup s3(3, 3, 0.0, 3);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 2.0);
    CHECK(CGDGSolver(sys, s2.ops).effective_scheme() == TimeScheme::SSPRK3);
    CHECK(CGDGSolver(sys, s3.ops).effective_scheme() == TimeScheme::RK4);
    SolverOptions forced;
    forced.scheme = TimeScheme::RK4;
    CHECK(CGDGSolver(sys, s2.ops, forced).effective_scheme() == TimeScheme::RK4);

    CGDGSolver solver(sys, s2.ops);
    DGField u0(s2.mesh.n_cells(), s2.dg.L(), 3);
    for (int c = 0; c < s2.mesh.n_cells(); ++c)
        for (int a = 0; a < s2.dg.L(); ++a) u0.at(c, a, 2) = 1.0;
    double hmin = 1e300;
    for (int c = 0; c < s2.mesh.n_cells(); ++c) hmin = std::min(hmin, s2.mesh.cell_h[c]);
    CHECK(solver.stable_dt(u0) == doctest::Approx(0.4 * hmin / (5.0 * 2.0)).epsilon(1e-14));

    EvolutionState st = solver.make_state(u0);
    solver.run(st, 0.0321);
    CHECK(st.t == 0.0321);

    SolverOptions fixed;
    fixed.fixed_dt = 0.01;
    CGDGSolver fsolver(sys, s2.ops, fixed);
    EvolutionState fst = fsolver.make_state(u0);
    fsolver.run(fst, 0.035);
    CHECK(fst.t == 0.035);
    CHECK(fst.steps == 4);  // three full steps plus the 0.005 remainder
}

TEST_CASE("non-finite data is rejected instead of propagated") {
    Setup s(3, 3, 0.0, 1);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    CGDGSolver solver(sys, s.ops);
    DGField u0(s.mesh.n_cells(), s.dg.L(), 3);
    u0.at(1, 0, 2) = std::numeric_limits<double>::quiet_NaN();
    EvolutionState st = solver.make_state(u0);
    CHECK_THROWS_WITH_AS(solver.step(st, 0.001), doctest::Contains("non-finite"), Error);
}

TEST_CASE("characteristic reconstruction drives a stable evolution") {
    Setup s(4, 4, 0.1, 1);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    SolverOptions opt;
    opt.reconstruction = Reconstruction::Characteristic;
    CGDGSolver solver(sys, s.ops, opt);
    EvolutionState st = solver.make_state(smooth_acoustic(s));
    const double E0 = [&] {
        double e = 0.0;
        for (double v : st.u.a) e = std::max(e, std::abs(v));
        return e;
    }();
    solver.run(st, 0.05);
    double E1 = 0.0;
    for (double v : st.u.a) E1 = std::max(E1, std::abs(v));
    CHECK(E1 <= 2.0 * E0);
    CHECK(std::isfinite(E1));
    // The accumulated-flux identity holds for this reconstruction too.
    EvolutionState st2 = solver.make_state(smooth_acoustic(s));
    const DGField u0 = st2.u;
    for (int n = 0; n < 10; ++n) solver.step(st2, 0.004);
    DGField res = primary_div_tensor(s.ops, st2.integrated_flux);
    for (size_t i = 0; i < res.a.size(); ++i) res.a[i] += st2.u.a[i] - u0.a[i];
    double worst = 0.0;
    for (double v : res.a) worst = std::max(worst, std::abs(v));
    CHECK(worst <= 1e-11);
}
