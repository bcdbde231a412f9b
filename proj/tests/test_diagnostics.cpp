#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cgdg/diagnostics.hpp"
#include "cgdg/error.hpp"
#include "cgdg/radial_reference.hpp"
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
    Setup(int nx, int ny, double perturb, int N, uint64_t seed = 5,
          std::array<double, 4> box = {0.0, 0.0, 1.0, 1.0})
        : mesh(generate_square_mesh(nx, ny, box, perturb, seed)),
          dg(N),
          cg(mesh, N + 1, true),
          ops(assemble_operators(mesh, dg, cg)) {}
};

DGField smooth_acoustic(const Setup& s, double amp = 0.3) {
    return interpolate_dg(s.mesh, s.ops.geom, s.dg, 3, [amp](Vec2 x, double* q) {
        q[0] = amp * std::sin(2.0 * M_PI * x.x) * std::cos(2.0 * M_PI * x.y);
        q[1] = -0.5 * amp * std::cos(2.0 * M_PI * x.x);
        q[2] = 1.0 + amp * std::sin(2.0 * M_PI * (x.x + x.y));
    });
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

// Exact solution of the planar Riemann problem for the Euler equations,
// solved by Newton iteration on the star pressure and sampled along rays
// xi = x/t. Used as the independent reference for the planar mode of the
// radial solver.
struct ExactRiemann {
    double g, dl, vl, pl, dr, vr, pr;
    double cl = 0, cr = 0, ps = 0, us = 0;

    void wave_fn(double p, double dk, double pk, double ck, double& f, double& fd) const {
        if (p > pk) {
            const double A = 2.0 / ((g + 1.0) * dk);
            const double B = (g - 1.0) / (g + 1.0) * pk;
            const double q = std::sqrt(A / (p + B));
            f = (p - pk) * q;
            fd = q * (1.0 - 0.5 * (p - pk) / (p + B));
        } else {
            f = 2.0 * ck / (g - 1.0) * (std::pow(p / pk, (g - 1.0) / (2.0 * g)) - 1.0);
            fd = std::pow(p / pk, -(g + 1.0) / (2.0 * g)) / (dk * ck);
        }
    }

    void solve() {
        cl = std::sqrt(g * pl / dl);
        cr = std::sqrt(g * pr / dr);
        double p = std::max(1e-8, 0.5 * (pl + pr));
        for (int it = 0; it < 100; ++it) {
            double f1, f1d, f2, f2d;
            wave_fn(p, dl, pl, cl, f1, f1d);
            wave_fn(p, dr, pr, cr, f2, f2d);
            const double pn = std::max(1e-12, p - (f1 + f2 + vr - vl) / (f1d + f2d));
            const bool done = std::abs(pn - p) < 1e-15 * pn;
            p = pn;
            if (done) break;
        }
        ps = p;
        double f1, f1d, f2, f2d;
        wave_fn(ps, dl, pl, cl, f1, f1d);
        wave_fn(ps, dr, pr, cr, f2, f2d);
        us = 0.5 * (vl + vr) + 0.5 * (f2 - f1);
    }

    void sample(double xi, double& d, double& v, double& p) const {
        const double gm = g - 1.0, gp = g + 1.0;
        if (xi <= us) {
            if (ps > pl) {  // left shock
                const double sl = vl - cl * std::sqrt(gp / (2.0 * g) * ps / pl + gm / (2.0 * g));
                if (xi <= sl) {
                    d = dl, v = vl, p = pl;
                } else {
                    d = dl * ((ps / pl + gm / gp) / (gm / gp * ps / pl + 1.0));
                    v = us, p = ps;
                }
            } else {  // left rarefaction
                if (xi <= vl - cl) {
                    d = dl, v = vl, p = pl;
                } else {
                    const double cls = cl * std::pow(ps / pl, gm / (2.0 * g));
                    if (xi >= us - cls) {
                        d = dl * std::pow(ps / pl, 1.0 / g);
                        v = us, p = ps;
                    } else {
                        const double fac = 2.0 / gp + gm / (gp * cl) * (vl - xi);
                        d = dl * std::pow(fac, 2.0 / gm);
                        v = 2.0 / gp * (cl + gm / 2.0 * vl + xi);
                        p = pl * std::pow(fac, 2.0 * g / gm);
                    }
                }
            }
        } else {
            if (ps > pr) {  // right shock
                const double sr = vr + cr * std::sqrt(gp / (2.0 * g) * ps / pr + gm / (2.0 * g));
                if (xi >= sr) {
                    d = dr, v = vr, p = pr;
                } else {
                    d = dr * ((ps / pr + gm / gp) / (gm / gp * ps / pr + 1.0));
                    v = us, p = ps;
                }
            } else {  // right rarefaction
                if (xi >= vr + cr) {
                    d = dr, v = vr, p = pr;
                } else {
                    const double crs = cr * std::pow(ps / pr, gm / (2.0 * g));
                    if (xi <= us + crs) {
                        d = dr * std::pow(ps / pr, 1.0 / g);
                        v = us, p = ps;
                    } else {
                        const double fac = 2.0 / gp - gm / (gp * cr) * (vr - xi);
                        d = dr * std::pow(fac, 2.0 / gm);
                        v = 2.0 / gp * (-cr + gm / 2.0 * vr + xi);
                        p = pr * std::pow(fac, 2.0 * g / gm);
                    }
                }
            }
        }
    }
};

}  // namespace

TEST_CASE("record keeps named series with strictly increasing timestamps") {
    DiagnosticsRecord rec;
    const int a = rec.series("energy");
    const int b = rec.series("residual");
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(rec.series("energy") == a);  // find-or-create
    CHECK(rec.find("energy") == a);
    CHECK(rec.find("missing") == -1);
    CHECK(rec.n_series() == 2);
    CHECK(rec.name(1) == "residual");

    rec.append(a, 0.0, 1.5);
    rec.append(a, 0.25, 1.4);
    rec.append("energy", 0.5, 1.3);
    CHECK(rec.samples(a).size() == 3);
    CHECK(rec.samples(a)[2].value == 1.3);
    CHECK_THROWS_WITH_AS(rec.append(a, 0.5, 1.0), doctest::Contains("increasing"), Error);
    CHECK_THROWS_WITH_AS(rec.append(a, 0.4, 1.0), doctest::Contains("increasing"), Error);
    rec.append(b, -1.0, 7.0);  // series are independent
    CHECK(rec.samples(b).size() == 1);
}

TEST_CASE("series CSV files round-trip through the text format") {
    DiagnosticsRecord rec;
    rec.append("total energy", 0.0, 3.9444444444444446);
    rec.append("total energy", 0.125, 3.9444444444444402);
    rec.write_csv_files("tmp_diag_");

    std::ifstream in("tmp_diag_total_energy.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,value");
    std::getline(in, line);
    auto cells = split_csv(line);
    REQUIRE(cells.size() == 2);
    CHECK(std::stod(cells[0]) == 0.0);
    CHECK(std::stod(cells[1]) == doctest::Approx(3.9444444444444446).epsilon(1e-15));
    std::getline(in, line);
    cells = split_csv(line);
    REQUIRE(cells.size() == 2);
    CHECK(std::stod(cells[0]) == 0.125);
    CHECK(std::stod(cells[1]) == doctest::Approx(3.9444444444444402).epsilon(1e-15));
    std::remove("tmp_diag_total_energy.csv");
}

TEST_CASE("involution monitors vanish on potential data and flag generic data") {
    Setup s(6, 6, 0.15, 2, 11);
    const int nc = s.mesh.n_cells(), L = s.dg.L();

    SUBCASE("curl-free acoustic momentum") {
        const SystemDescriptor sys = acoustics_descriptor(2.0, 1.5);
        const DGField grad = init_from_scalar_potential(s.ops, [](Vec2 x) {
            return std::sin(2.0 * M_PI * x.x) * std::cos(2.0 * M_PI * x.y) +
                   0.3 * std::cos(2.0 * M_PI * x.y);
        });
        DGField u(nc, L, 3);
        for (int c = 0; c < nc; ++c)
            for (int i = 0; i < L; ++i) {
                u.at(c, i, 0) = sys.rho * grad.at(c, i, 0);
                u.at(c, i, 1) = sys.rho * grad.at(c, i, 1);
                u.at(c, i, 2) = 1.0 + 0.2 * grad.at(c, i, 0);
            }
        const auto errs = involution_errors(sys, s.ops, u);
        REQUIRE(errs.size() == 1);
        CHECK(errs[0].label == sys.involutions[0].label);
        CHECK(errs[0].dual <= 1e-10);
        CHECK(errs[0].pointwise <= 1e-10);
    }

    SUBCASE("divergence-free electromagnetic fields") {
        const SystemDescriptor sys = maxwell_descriptor();
        const auto pot1 = [](Vec2 x, double* a) {
            a[0] = std::sin(2.0 * M_PI * x.y);
            a[1] = std::cos(2.0 * M_PI * x.x);
            a[2] = std::sin(2.0 * M_PI * x.x) * std::sin(2.0 * M_PI * x.y);
        };
        const auto pot2 = [](Vec2 x, double* a) {
            a[0] = 0.4 * std::cos(2.0 * M_PI * x.y);
            a[1] = 0.7 * std::sin(2.0 * M_PI * (x.x + x.y));
            a[2] = std::cos(2.0 * M_PI * x.x) - 0.5 * std::sin(2.0 * M_PI * x.y);
        };
        const DGField b = init_from_vector_potential(s.ops, pot1);
        const DGField e = init_from_vector_potential(s.ops, pot2);
        DGField u(nc, L, 6);
        for (int c = 0; c < nc; ++c)
            for (int i = 0; i < L; ++i)
                for (int k = 0; k < 3; ++k) {
                    u.at(c, i, k) = b.at(c, i, k);
                    u.at(c, i, 3 + k) = e.at(c, i, k);
                }
        const auto errs = involution_errors(sys, s.ops, u);
        REQUIRE(errs.size() == 2);
        for (const auto& ie : errs) {
            CHECK(ie.dual <= 1e-10);
            CHECK(ie.pointwise <= 1e-10);
        }
    }

    SUBCASE("generic data produces order-one errors, scaled by 1/rho") {
        const DGField u = interpolate_dg(s.mesh, s.ops.geom, s.dg, 3, [](Vec2 x, double* q) {
            q[0] = std::sin(2.0 * M_PI * x.y);
            q[1] = std::sin(2.0 * M_PI * x.x);
            q[2] = 0.5;
        });
        const auto e1 = involution_errors(acoustics_descriptor(1.0, 1.0), s.ops, u);
        const auto e2 = involution_errors(acoustics_descriptor(2.0, 1.0), s.ops, u);
        REQUIRE(e1.size() == 1);
        REQUIRE(e2.size() == 1);
        CHECK(e1[0].dual > 0.01);
        CHECK(e1[0].pointwise > 0.01);
        CHECK(e1[0].pointwise / e2[0].pointwise == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(e1[0].dual / e2[0].dual == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("energy integrals match hand-computed values") {
    Setup s(5, 4, 0.2, 2, 3);

    SUBCASE("quadratic density of a uniform acoustic state") {
        const SystemDescriptor sys = acoustics_descriptor(2.0, 3.0);
        const EnergyMonitor em(sys, s.ops);
        const DGField u = interpolate_dg(s.mesh, s.ops.geom, s.dg, 3, [](Vec2, double* q) {
            q[0] = 2.0;
            q[1] = 3.0;
            q[2] = 5.0;
        });
        // (4 + 9) / (2 rho) + 25 / (2 rho c^2) over the unit box.
        CHECK(em.total(u) == doctest::Approx(3.9444444444444446).epsilon(1e-13));
        const CGField w = interpolate_cg(s.cg, 3, [](Vec2, double* q) {
            q[0] = 2.0;
            q[1] = 3.0;
            q[2] = 5.0;
        });
        CHECK(em.projected(w) == doctest::Approx(3.9444444444444446).epsilon(1e-13));
        DGField z(s.mesh.n_cells(), s.dg.L(), 3);
        CHECK(em.total(z) == 0.0);
        CHECK(total_energy(sys, s.ops, u) == doctest::Approx(em.total(u)));
    }

    SUBCASE("total density of a uniform gas state, no quadratic form") {
        const SystemDescriptor sys = euler_descriptor(1.4);
        const EnergyMonitor em(sys, s.ops);
        const DGField u = interpolate_dg(s.mesh, s.ops.geom, s.dg, 4, [](Vec2, double* q) {
            q[0] = 1.2;
            q[1] = 0.36;
            q[2] = -0.6;
            q[3] = 2.454;
        });
        CHECK(em.total(u) == doctest::Approx(2.454).epsilon(1e-13));
        const CGField w = interpolate_cg(s.cg, 4, [](Vec2, double* q) {
            q[0] = 1.2;
            q[1] = 0.36;
            q[2] = -0.6;
            q[3] = 2.454;
        });
        CHECK_THROWS_WITH_AS(em.projected(w), doctest::Contains("quadratic"), Error);
        DGField z(s.mesh.n_cells(), s.dg.L(), 4);
        CHECK_THROWS_WITH_AS(em.rate(w, z), doctest::Contains("quadratic"), Error);
    }
}

TEST_CASE("projected energy is conserved by the semi-discrete flow") {
    Setup s(6, 6, 0.1, 2, 9);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    SolverOptions opts;
    opts.scheme = TimeScheme::RK4;
    const CGDGSolver solver(sys, s.ops, opts);
    const EnergyMonitor em(sys, s.ops);

    EvolutionState state = solver.make_state(smooth_acoustic(s));
    const double e0 = em.projected(solver.reconstruct(state.u, &state));
    REQUIRE(e0 > 0.01);

    SUBCASE("instantaneous rate is roundoff") {
        const StageEval ev = solver.evaluate(state.u, &state);
        CHECK(std::abs(em.rate(ev.what, ev.dudt)) <= 1e-10);
        CHECK(std::abs(energy_rate(sys, s.ops, ev.what, ev.dudt)) <= 1e-10);
    }

    SUBCASE("drift over a short run is at the time-integrator level") {
        const double dt = solver.stable_dt(state.u);
        solver.run(state, 12.0 * dt);
        CHECK(state.steps >= 12);
        const double e1 = em.projected(solver.reconstruct(state.u, &state));
        CHECK(std::abs(e1 - e0) <= 1e-7 * e0);
    }
}

TEST_CASE("strong-form residual at observation points is roundoff") {
    Setup s(8, 8, 0.15, 2, 17);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    const CGDGSolver solver(sys, s.ops, {});

    // One generic point plus a mesh vertex away from the domain edge: the
    // one-sided evaluation there must satisfy the same identity.
    Vec2 vertex{0.5, 0.5};
    for (int c = 0; c < s.mesh.n_cells() && vertex.x == 0.5; ++c)
        for (int k = 0; k < 3; ++k) {
            const Vec2 v = s.mesh.cell_vertex(c, k);
            if (v.x > 0.3 && v.x < 0.7 && v.y > 0.3 && v.y < 0.7) {
                vertex = v;
                break;
            }
        }
    PointResidualMonitor mon(s.ops, {Vec2{0.37, 0.61}, vertex, Vec2{0.11, 0.93}});
    CHECK(mon.n_points() == 3);

    EvolutionState state = solver.make_state(smooth_acoustic(s));
    const StageHook hook = mon.hook();
    for (int i = 0; i < 5; ++i) solver.step(state, 0.0, hook);
    CHECK(mon.stages_seen() == 15);  // three stages per step at this degree
    for (int p = 0; p < mon.n_points(); ++p) CHECK(mon.maximum(p) <= 1e-11);
    CHECK(mon.maximum(0, 2) <= mon.maximum(0));
}

TEST_CASE("strong-form residual is unaffected by the nodal viscosity") {
    Setup s(8, 8, 0.1, 2, 23, {0.0, 0.0, 10.0, 10.0});
    const SystemDescriptor sys = euler_descriptor(1.4);
    SolverOptions opts;
    opts.viscosity = true;
    opts.chi = 1.0;
    const CGDGSolver solver(sys, s.ops, opts);

    EvolutionState state = solver.make_state(
        interpolate_dg(s.mesh, s.ops.geom, s.dg, 4,
                       [&](Vec2 x, double* q) { isentropic_vortex(x, sys.gamma, q); }));
    PointResidualMonitor mon(s.ops, {Vec2{4.3, 5.6}, Vec2{5.0, 5.0}, Vec2{7.9, 2.2}});
    const StageHook hook = mon.hook();
    for (int i = 0; i < 2; ++i) solver.step(state, 0.0, hook);
    CHECK(mon.stages_seen() > 0);
    for (int p = 0; p < mon.n_points(); ++p) CHECK(mon.maximum(p) <= 1e-11);
}

TEST_CASE("circle quadrature closes and tracks the disc geometry") {
    Setup s(4, 4, 0.1, 1, 29);

    SUBCASE("area converges at the geometric interpolation order") {
        CircleControlVolume cv;
        cv.center = {0.5, 0.5};
        cv.radius = 0.25;
        const double exact = M_PI * cv.radius * cv.radius;

        CircleQuadrature q8(cv, s.mesh, s.ops.geom);
        cv.wedges = 16;
        CircleQuadrature q16(cv, s.mesh, s.ops.geom);
        const double e8 = std::abs(q8.area() - exact);
        const double e16 = std::abs(q16.area() - exact);
        CHECK(e8 <= 1e-7 * exact);
        CHECK(e16 * 30.0 <= e8);

        const Vec2 c8 = q8.boundary_normal_sum();
        CHECK(std::abs(c8.x) <= 1e-13);
        CHECK(std::abs(c8.y) <= 1e-13);
        CHECK(q8.boundary_points() == 8 * 8);
        CHECK(q8.volume_points() >= 8 * 64);
    }

    SUBCASE("invalid circles are rejected") {
        CircleControlVolume cv;
        cv.center = {0.5, 0.5};
        cv.radius = -0.1;
        CHECK_THROWS_WITH_AS(CircleQuadrature(cv, s.mesh, s.ops.geom),
                             doctest::Contains("positive"), Error);
        cv.radius = 0.5;  // touches all four sides
        CHECK_THROWS_WITH_AS(CircleQuadrature(cv, s.mesh, s.ops.geom),
                             doctest::Contains("boundary"), Error);
        cv.radius = 0.2;
        cv.center = {0.1, 0.5};
        CHECK_THROWS_WITH_AS(CircleQuadrature(cv, s.mesh, s.ops.geom),
                             doctest::Contains("boundary"), Error);
        cv.center = {0.5, 0.5};
        cv.wedges = 2;
        CHECK_THROWS_WITH_AS(CircleQuadrature(cv, s.mesh, s.ops.geom),
                             doctest::Contains("wedges"), Error);
    }
}

TEST_CASE("control-volume balance is roundoff inside a single cell") {
    Setup s(2, 2, 0.0, 2, 1);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    const CGDGSolver solver(sys, s.ops, {});

    // Incenter and inradius of cell 0; the circle stays strictly interior.
    const Vec2 A = s.mesh.cell_vertex(0, 0), B = s.mesh.cell_vertex(0, 1),
               C = s.mesh.cell_vertex(0, 2);
    const auto dist = [](Vec2 p, Vec2 q) {
        return std::sqrt((p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y));
    };
    const double a = dist(B, C), b = dist(C, A), c = dist(A, B);
    const double per = a + b + c;
    const Vec2 incenter = (A * a + B * b + C * c) / per;
    const double area2 = std::abs((B.x - A.x) * (C.y - A.y) - (B.y - A.y) * (C.x - A.x));
    const double inradius = area2 / per;

    CircleControlVolume cv;
    cv.center = incenter;
    cv.radius = 0.4 * inradius;
    const CircleQuadrature cq(cv, s.mesh, s.ops.geom);
    REQUIRE(cq.single_cell());

    EvolutionState state = solver.make_state(smooth_acoustic(s));
    const StageEval ev = solver.evaluate(state.u, &state);
    const std::vector<double> bal = cq.balance(s.ops, ev);
    REQUIRE(bal.size() == 3);
    for (double v : bal) CHECK(std::abs(v) <= 1e-10);
}

TEST_CASE("control-volume balance stays tiny across cell boundaries") {
    Setup s(10, 10, 0.1, 3, 31);
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    const CGDGSolver solver(sys, s.ops, {});

    CircleControlVolume big, small;
    big.center = small.center = {0.43, 0.52};
    big.radius = 0.05;
    small.radius = 0.025;
    CircleBalanceMonitor mon(s.ops, {big, small});
    CHECK(mon.n_circles() == 2);
    CHECK_FALSE(mon.quadrature(0).single_cell());

    EvolutionState state = solver.make_state(smooth_acoustic(s, 0.1));
    const StageHook hook = mon.hook();
    for (int i = 0; i < 2; ++i) solver.step(state, 0.0, hook);
    CHECK(mon.stages_seen() == 8);  // four stages per step at this degree
    CHECK(mon.maximum(0) <= 5e-7);
    CHECK(mon.maximum(1) <= std::max(2.0 * mon.maximum(0), 1e-9));
}

TEST_CASE("convergence study reproduces the approximation orders at rest") {
    const SystemDescriptor sys = euler_descriptor(1.4);
    ConvergenceConfig cfg;
    cfg.t_end = 0.0;
    cfg.mesh_factory = [](int nx) {
        return generate_square_mesh(nx, nx, {0.0, 0.0, 10.0, 10.0}, 0.15, 7);
    };
    const VectorFn vortex = [&](Vec2 x, double* q) { isentropic_vortex(x, sys.gamma, q); };
    const ConvergenceTable table = convergence_study(sys, 1, {12, 24}, vortex, vortex, cfg);

    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].nx == 12);
    CHECK(table.rows[1].h == doctest::Approx(10.0 / 24.0));
    CHECK(table.rows[0].steps == 0);
    REQUIRE(table.rows[0].err_u.size() == 4);

    const auto ru = convergence_rates(table, false, 0);
    const auto rw = convergence_rates(table, true, 0);
    CHECK(ru[0] == 0.0);
    CHECK(ru[1] >= 1.6);
    CHECK(ru[1] <= 3.0);
    CHECK(rw[1] >= 1.6);  // the reconstruction interpolates one degree higher
    CHECK(table.rows[1].err_w[0] < table.rows[1].err_u[0]);

    write_convergence_csv("tmp_diag_conv.csv", table, false, {{0, "rho"}});
    std::ifstream in("tmp_diag_conv.csv");
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line == "Nx,err_rho,rate_rho");
    std::getline(in, line);
    auto cells = split_csv(line);
    REQUIRE(cells.size() == 3);
    CHECK(cells[0] == "12");
    CHECK(cells[2] == "");  // no rate on the first row
    std::getline(in, line);
    cells = split_csv(line);
    REQUIRE(cells.size() == 3);
    CHECK(std::stod(cells[1]) == doctest::Approx(table.rows[1].err_u[0]).epsilon(1e-14));
    CHECK(std::stod(cells[2]) == doctest::Approx(ru[1]).epsilon(1e-12));
    std::remove("tmp_diag_conv.csv");
}

TEST_CASE("convergence study drives the dynamics and errors shrink") {
    const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
    ConvergenceConfig cfg;
    cfg.t_end = 0.2;
    cfg.mesh_factory = [](int nx) {
        return generate_square_mesh(nx, nx, {0.0, 0.0, 1.0, 1.0}, 0.1, 19);
    };
    // Rightward simple wave: an exact solution of the linear system.
    const auto wave = [](double xi, double* q) {
        const double f = 0.2 * std::sin(2.0 * M_PI * xi);
        q[0] = f;
        q[1] = 0.0;
        q[2] = f;
    };
    const VectorFn initial = [&](Vec2 x, double* q) { wave(x.x, q); };
    const VectorFn final_state = [&](Vec2 x, double* q) { wave(x.x - 0.2, q); };
    const ConvergenceTable table = convergence_study(sys, 1, {8, 16}, initial, final_state, cfg);

    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].steps > 0);
    CHECK(table.rows[1].steps > table.rows[0].steps);
    for (int k = 0; k < 3; k += 2) {
        CHECK(table.rows[1].err_u[k] < table.rows[0].err_u[k]);
        CHECK(table.rows[1].err_w[k] < table.rows[0].err_w[k]);
    }
    CHECK(table.rows[1].err_u[0] < 0.05);
}

TEST_CASE("radial reference starts from the two-state data") {
    RadialConfig cfg;
    cfg.t_end = 0.0;
    cfg.n_cells = 1000;
    cfg.n_samples = 100;
    const RadialProfile prof = radial_reference_euler(cfg);
    REQUIRE(prof.r.size() == 100);
    CHECK(prof.steps == 0);
    const auto at = [&](double r) {
        int best = 0;
        for (int i = 1; i < 100; ++i)
            if (std::abs(prof.r[i] - r) < std::abs(prof.r[best] - r)) best = i;
        return best;
    };
    CHECK(prof.rho[at(0.1)] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prof.p[at(0.1)] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prof.rho[at(0.5)] == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(prof.v[at(0.5)] == 0.0);
}

TEST_CASE("radial reference rejects bad configurations") {
    RadialConfig cfg;
    cfg.n_cells = 2;
    CHECK_THROWS_WITH_AS(radial_reference_euler(cfg), doctest::Contains("at least 4"), Error);
    cfg.n_cells = 100;
    cfg.inner.p = -1.0;
    CHECK_THROWS_WITH_AS(radial_reference_euler(cfg), doctest::Contains("non-physical"), Error);
    cfg.inner.p = 1.0;
    cfg.r_interface = 1.5;
    CHECK_THROWS_WITH_AS(radial_reference_euler(cfg), doctest::Contains("interface"), Error);
}

TEST_CASE("planar mode of the radial solver matches the exact shock tube") {
    ExactRiemann ex{1.4, 1.0, 0.0, 1.0, 0.125, 0.0, 0.1};
    ex.solve();
    // Classic star-region values for this tube, quoted to five digits.
    CHECK(ex.ps == doctest::Approx(0.30313).epsilon(2e-4));
    CHECK(ex.us == doctest::Approx(0.92745).epsilon(2e-4));
    const double shock_speed =
        ex.vr + ex.cr * std::sqrt((ex.g + 1.0) / (2.0 * ex.g) * ex.ps / ex.pr +
                                  (ex.g - 1.0) / (2.0 * ex.g));
    CHECK(shock_speed == doctest::Approx(1.75216).epsilon(2e-4));
    double d, v, p;
    ex.sample(ex.us - 1e-9, d, v, p);
    CHECK(d == doctest::Approx(0.42632).epsilon(2e-4));
    ex.sample(ex.us + 1e-9, d, v, p);
    CHECK(d == doctest::Approx(0.26557).epsilon(2e-4));

    RadialConfig cfg;
    cfg.geometric_alpha = 0.0;  // planar validation mode
    cfg.r_interface = 0.35;
    cfg.r_max = 0.7;
    cfg.n_cells = 4000;
    cfg.n_samples = 700;
    cfg.t_end = 0.1;
    const RadialProfile prof = radial_reference_euler(cfg);
    CHECK(prof.steps > 100);

    double l1 = 0.0, lp = 0.0;
    for (size_t i = 0; i < prof.r.size(); ++i) {
        const double xi = (prof.r[i] - cfg.r_interface) / cfg.t_end;
        ex.sample(xi, d, v, p);
        l1 += std::abs(prof.rho[i] - d);
        lp += std::abs(prof.p[i] - p);
        CHECK(prof.rho[i] > 0.0);
        CHECK(prof.p[i] > 0.0);
    }
    l1 /= static_cast<double>(prof.r.size());
    lp /= static_cast<double>(prof.r.size());
    CHECK(l1 <= 5e-3);
    CHECK(lp <= 5e-3);
}

TEST_CASE("cylindrical runs self-converge and keep the quiet regions intact") {
    RadialConfig coarse;
    coarse.n_cells = 2000;
    coarse.n_samples = 400;
    RadialConfig fine = coarse;
    fine.n_cells = 4000;

    const RadialProfile pc = radial_reference_euler(coarse);
    const RadialProfile pf = radial_reference_euler(fine);
    REQUIRE(pc.r.size() == pf.r.size());

    double diff = 0.0, norm = 0.0;
    for (size_t i = 0; i < pc.r.size(); ++i) {
        diff += std::abs(pc.rho[i] - pf.rho[i]);
        norm += std::abs(pf.rho[i]);
    }
    CHECK(diff <= 0.01 * norm);

    const auto at = [&](double r) {
        int best = 0;
        for (size_t i = 1; i < pf.r.size(); ++i)
            if (std::abs(pf.r[i] - r) < std::abs(pf.r[best] - r)) best = static_cast<int>(i);
        return best;
    };
    // The head of the expansion has not reached r = 0.05 and the shock has
    // not reached r = 0.65 by t = 0.1, so both ends are still exact.
    CHECK(pf.rho[at(0.05)] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(pf.v[at(0.05)]) <= 1e-6);
    CHECK(pf.rho[at(0.65)] == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(std::abs(pf.v[at(0.65)]) <= 1e-9);
    double vmax = 0.0, pmin = 1e30, rmin = 1e30;
    for (size_t i = 0; i < pf.r.size(); ++i) {
        vmax = std::max(vmax, pf.v[i]);
        pmin = std::min(pmin, pf.p[i]);
        rmin = std::min(rmin, pf.rho[i]);
    }
    CHECK(vmax > 0.2);   // outward-running shock
    CHECK(pmin > 0.0);
    CHECK(rmin > 0.0);
    CHECK(pmin < 0.9);   // the expansion has genuinely lowered the pressure
}
