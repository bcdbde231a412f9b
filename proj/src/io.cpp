#include "cgdg/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>

#include "cgdg/error.hpp"
#include "cgdg/fv_nodal.hpp"

namespace cgdg {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_e(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream f(path);
    if (!f) throw Error("io: cannot open '" + path + "' for writing");
    return f;
}

Reconstruction map_reconstruction(const std::string& s) {
    return s == "nscheme" ? Reconstruction::Characteristic : Reconstruction::Projection;
}

TimeScheme map_integrator(const std::string& s) {
    if (s == "ssprk3") return TimeScheme::SSPRK3;
    if (s == "rk4") return TimeScheme::RK4;
    return TimeScheme::Auto;
}

const char* scheme_name(TimeScheme s) {
    switch (s) {
        case TimeScheme::SSPRK3: return "ssprk3";
        case TimeScheme::RK4: return "rk4";
        default: return "auto";
    }
}

SystemDescriptor make_system(const RunConfig& cfg) {
    if (cfg.system == "acoustics") return acoustics_descriptor(cfg.rho, cfg.c);
    if (cfg.system == "maxwell") return maxwell_descriptor();
    return euler_descriptor(cfg.gamma);
}

SolverOptions make_solver_options(const RunConfig& cfg) {
    SolverOptions opt;
    opt.reconstruction = map_reconstruction(cfg.reconstruction);
    opt.scheme = map_integrator(cfg.integrator);
    opt.viscosity = cfg.viscosity;
    opt.chi = cfg.chi;
    opt.cfl = cfg.cfl;
    opt.fixed_dt = cfg.fixed_dt;
    return opt;
}

}  // namespace

std::vector<std::string> component_names(const SystemDescriptor& sys) {
    switch (sys.kind) {
        case SystemKind::Acoustics: return {"mx", "my", "p"};
        case SystemKind::Maxwell: return {"Bx", "By", "Bz", "Ex", "Ey", "Ez"};
        case SystemKind::Euler: return {"rho", "mx", "my", "E"};
    }
    throw Error("io: unknown system kind");
}

// --- writers ---------------------------------------------------------------------

void write_vtk_snapshot(const std::string& path, const OperatorSet& ops, const DGField& u,
                        const CGField* what, const std::vector<std::string>& names,
                        const std::string& title) {
    const TriMesh& mesh = *ops.mesh;
    const DGSpace& dg = *ops.dg;
    if ((int)names.size() != u.m) throw Error("vtk: component name count does not match field");
    if (what && what->m != u.m) throw Error("vtk: reconstruction component count mismatch");

    const int K = std::max(dg.degree, 1);
    const TriangleBasis lattice(K);
    const std::vector<Vec2>& rp = lattice.nodes();
    const auto tris = lattice.lattice_triangles();
    const int T = (int)rp.size();
    const int L = dg.L();

    std::vector<double> dgv((size_t)T * L);
    for (int t = 0; t < T; ++t) dg.basis.eval(rp[t], &dgv[(size_t)t * L]);
    std::vector<double> cgv;
    int P = 0;
    if (what) {
        P = ops.cg->P();
        cgv.resize((size_t)T * P);
        for (int t = 0; t < T; ++t) ops.cg->basis.eval(rp[t], &cgv[(size_t)t * P]);
    }

    std::ofstream f = open_out(path);
    const long npts = (long)mesh.n_cells() * T;
    const long nsub = (long)mesh.n_cells() * (long)tris.size();
    f << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    f << "POINTS " << npts << " double\n";
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int t = 0; t < T; ++t) {
            const Vec2 x = ref_to_phys(ops.geom[c], rp[t]);
            f << fmt_g(x.x) << ' ' << fmt_g(x.y) << " 0\n";
        }
    f << "CELLS " << nsub << ' ' << nsub * 4 << "\n";
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (const auto& tr : tris)
            f << "3 " << (long)c * T + tr[0] << ' ' << (long)c * T + tr[1] << ' '
              << (long)c * T + tr[2] << "\n";
    f << "CELL_TYPES " << nsub << "\n";
    for (long i = 0; i < nsub; ++i) f << "5\n";

    f << "POINT_DATA " << npts << "\n";
    for (int k = 0; k < u.m; ++k) {
        f << "SCALARS u_" << names[k] << " double 1\nLOOKUP_TABLE default\n";
        for (int c = 0; c < mesh.n_cells(); ++c)
            for (int t = 0; t < T; ++t) {
                double val = 0.0;
                for (int i = 0; i < L; ++i) val += dgv[(size_t)t * L + i] * u.at(c, i, k);
                f << fmt_g(val) << "\n";
            }
    }
    if (what) {
        for (int k = 0; k < what->m; ++k) {
            f << "SCALARS w_" << names[k] << " double 1\nLOOKUP_TABLE default\n";
            for (int c = 0; c < mesh.n_cells(); ++c)
                for (int t = 0; t < T; ++t) {
                    double val = 0.0;
                    for (int j = 0; j < P; ++j)
                        val += cgv[(size_t)t * P + j] * what->at(ops.cg->global(c, j), k);
                    f << fmt_g(val) << "\n";
                }
        }
    }
    if (!f) throw Error("io: failed writing '" + path + "'");
}

namespace {

void write_cut_header(std::ofstream& f, const SystemDescriptor& sys,
                      const std::vector<std::string>& names) {
    f << "x";
    for (const auto& n : names) f << ',' << n;
    if (sys.kind == SystemKind::Euler) f << ",p,vr";
    f << "\n";
}

void write_cut_row(std::ofstream& f, const SystemDescriptor& sys, Vec2 x,
                   const std::vector<double>& q) {
    f << fmt_g(x.x);
    for (double v : q) f << ',' << fmt_g(v);
    if (sys.kind == SystemKind::Euler) {
        const double r = std::hypot(x.x, x.y);
        const double vr =
            r > 1e-14 ? (q[1] * x.x + q[2] * x.y) / (std::max(q[0], 1e-300) * r) : 0.0;
        f << ',' << fmt_g(sys.pressure(q.data())) << ',' << fmt_g(vr);
    }
    f << "\n";
}

std::vector<Vec2> cut_sample_points(const TriMesh& mesh, double y, int samples) {
    const auto& b = mesh.domain_box;
    const double ex = 1e-9 * (b[2] - b[0]), ey = 1e-9 * (b[3] - b[1]);
    const double yc = std::min(std::max(y, b[1] + ey), b[3] - ey);
    std::vector<Vec2> out;
    out.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        double x = b[0] + (b[2] - b[0]) * i / (samples - 1);
        x = std::min(std::max(x, b[0] + ex), b[2] - ex);
        out.push_back({x, yc});
    }
    return out;
}

}  // namespace

void write_cut_csv(const std::string& path, const SystemDescriptor& sys,
                   const OperatorSet& ops, const CGField& what, double y, int samples) {
    if (samples < 2) throw Error("cut: need at least 2 samples");
    std::ofstream f = open_out(path);
    const auto names = component_names(sys);
    write_cut_header(f, sys, names);
    std::vector<double> q(what.m);
    for (const Vec2& x : cut_sample_points(*ops.mesh, y, samples)) {
        eval_cg(*ops.mesh, ops.geom, *ops.cg, what, x, q.data());
        write_cut_row(f, sys, x, q);
    }
    if (!f) throw Error("io: failed writing '" + path + "'");
}

void write_cut_csv(const std::string& path, const SystemDescriptor& sys,
                   const OperatorSet& ops, const DGField& u, double y, int samples) {
    if (samples < 2) throw Error("cut: need at least 2 samples");
    std::ofstream f = open_out(path);
    const auto names = component_names(sys);
    write_cut_header(f, sys, names);
    std::vector<double> q(u.m);
    for (const Vec2& x : cut_sample_points(*ops.mesh, y, samples)) {
        const PointLocation loc = locate_point(*ops.mesh, x);
        eval_dg(*ops.mesh, ops.geom, *ops.dg, u, loc.cell, x, q.data());
        write_cut_row(f, sys, x, q);
    }
    if (!f) throw Error("io: failed writing '" + path + "'");
}

void write_residual_csv(const std::string& path, const std::vector<std::string>& names,
                        const std::vector<Vec2>& points, const PointResidualMonitor* pmon,
                        const std::vector<CircleSpec>& circles,
                        const CircleBalanceMonitor* cmon) {
    std::ofstream f = open_out(path);
    f << "kind,x,y,radius,max_total";
    for (const auto& n : names) f << ",max_" << n;
    f << "\n";
    if (pmon) {
        for (int i = 0; i < (int)points.size(); ++i) {
            f << "point," << fmt_g(points[i].x) << ',' << fmt_g(points[i].y) << ",0,"
              << fmt_g(pmon->maximum(i));
            for (int k = 0; k < (int)names.size(); ++k) f << ',' << fmt_g(pmon->maximum(i, k));
            f << "\n";
        }
    }
    if (cmon) {
        for (int i = 0; i < (int)circles.size(); ++i) {
            f << "circle," << fmt_g(circles[i].center.x) << ',' << fmt_g(circles[i].center.y)
              << ',' << fmt_g(circles[i].radius) << ',' << fmt_g(cmon->maximum(i));
            for (int k = 0; k < (int)names.size(); ++k) f << ',' << fmt_g(cmon->maximum(i, k));
            f << "\n";
        }
    }
    if (!f) throw Error("io: failed writing '" + path + "'");
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& items) {
    std::ofstream f = open_out(path);
    for (const auto& [k, v] : items) f << k << " = " << v << "\n";
    if (!f) throw Error("io: failed writing '" + path + "'");
}

// --- initial data -----------------------------------------------------------------

namespace {

constexpr double kGaussianWidth = 0.05;
constexpr double kExplosionRadius = 0.25;

double gaussian_bump(Vec2 x) {
    const double r2 = x.x * x.x + x.y * x.y;
    return std::exp(-r2 / (2.0 * kGaussianWidth * kGaussianWidth));
}

double disc_indicator(Vec2 x) {
    return std::hypot(x.x, x.y) <= kExplosionRadius ? 1.0 : 0.0;
}

double trig_potential(Vec2 x) {
    return std::sin(2.0 * M_PI * x.x) * std::sin(2.0 * M_PI * x.y);
}

// Pointwise conserved gas state for the presets/expressions; also used by the
// node-based scheme for its cell means.
VectorFn euler_state_fn(const RunConfig& cfg) {
    const double g = cfg.gamma;
    if (cfg.preset == "vortex")
        return [g](Vec2 x, double* q) { isentropic_vortex(x, g, q); };
    if (cfg.preset == "sod-circular")
        return [g](Vec2 x, double* q) {
            const bool in = std::hypot(x.x, x.y) <= 0.25;
            const double rho = in ? 1.0 : 0.125;
            const double p = in ? 1.0 : 0.1;
            q[0] = rho;
            q[1] = 0.0;
            q[2] = 0.0;
            q[3] = p / (g - 1.0);
        };
    const ScalarFn d = parse_expression(cfg.expressions.at("density"));
    const ScalarFn vx = parse_expression(cfg.expressions.at("velocity_x"));
    const ScalarFn vy = parse_expression(cfg.expressions.at("velocity_y"));
    const ScalarFn p = parse_expression(cfg.expressions.at("pressure"));
    return [=](Vec2 x, double* q) {
        const double rho = d(x), ux = vx(x), uy = vy(x), pr = p(x);
        q[0] = rho;
        q[1] = rho * ux;
        q[2] = rho * uy;
        q[3] = pr / (g - 1.0) + 0.5 * rho * (ux * ux + uy * uy);
    };
}

// Builds the element initial state. Vector parts tied to a differential
// constraint come from potentials (an exact element-wise gradient or curl of
// an interpolated continuous potential), so the constraint holds at the
// discrete level from the first step.
DGField build_initial(const RunConfig& cfg, const SystemDescriptor& sys,
                      const OperatorSet& ops) {
    const TriMesh& mesh = *ops.mesh;
    const DGSpace& dg = *ops.dg;
    const auto& geom = ops.geom;
    const auto& nodes = dg.basis.nodes();
    auto node_pos = [&](int c, int i) { return ref_to_phys(geom[c], nodes[i]); };

    if (cfg.preset == "acoustic-gaussian")
        return interpolate_dg(mesh, geom, dg, 3, [](Vec2 x, double* q) {
            q[0] = q[1] = 0.0;
            q[2] = gaussian_bump(x);
        });
    if (cfg.preset == "acoustic-explosion") {
        const DGField grad = init_from_scalar_potential(ops, trig_potential);
        DGField out(mesh.n_cells(), dg.L(), 3);
        for (int c = 0; c < mesh.n_cells(); ++c)
            for (int i = 0; i < dg.L(); ++i) {
                out.at(c, i, 0) = cfg.rho * grad.at(c, i, 0);
                out.at(c, i, 1) = cfg.rho * grad.at(c, i, 1);
                out.at(c, i, 2) = disc_indicator(node_pos(c, i));
            }
        return out;
    }
    if (cfg.preset == "maxwell-gaussian")
        return interpolate_dg(mesh, geom, dg, 6, [](Vec2 x, double* q) {
            for (int k = 0; k < 6; ++k) q[k] = 0.0;
            q[5] = gaussian_bump(x);
        });
    if (cfg.preset == "maxwell-explosion") {
        const DGField curl = init_from_vector_potential(ops, [](Vec2 x, double* a) {
            a[0] = a[1] = 0.0;
            a[2] = trig_potential(x);
        });
        DGField out(mesh.n_cells(), dg.L(), 6);
        for (int c = 0; c < mesh.n_cells(); ++c)
            for (int i = 0; i < dg.L(); ++i) {
                const double ind = disc_indicator(node_pos(c, i));
                out.at(c, i, 0) = curl.at(c, i, 0);
                out.at(c, i, 1) = curl.at(c, i, 1);
                out.at(c, i, 2) = ind;
                out.at(c, i, 3) = curl.at(c, i, 0);
                out.at(c, i, 4) = curl.at(c, i, 1);
                out.at(c, i, 5) = ind;
            }
        return out;
    }
    if (sys.kind == SystemKind::Euler)
        return interpolate_dg(mesh, geom, dg, 4, euler_state_fn(cfg));

    // Expression-defined linear systems.
    if (sys.kind == SystemKind::Acoustics) {
        const ScalarFn Z = parse_expression(cfg.expressions.at("scalar_potential"));
        const ScalarFn p = parse_expression(cfg.expressions.at("pressure"));
        const DGField grad = init_from_scalar_potential(ops, Z);
        DGField out(mesh.n_cells(), dg.L(), 3);
        for (int c = 0; c < mesh.n_cells(); ++c)
            for (int i = 0; i < dg.L(); ++i) {
                out.at(c, i, 0) = cfg.rho * grad.at(c, i, 0);
                out.at(c, i, 1) = cfg.rho * grad.at(c, i, 1);
                out.at(c, i, 2) = p(node_pos(c, i));
            }
        return out;
    }
    const ScalarFn Ab = parse_expression(cfg.expressions.at("potential_b"));
    const ScalarFn Ae = parse_expression(cfg.expressions.at("potential_e"));
    const ScalarFn bz = parse_expression(cfg.expressions.at("bz"));
    const ScalarFn ez = parse_expression(cfg.expressions.at("ez"));
    const DGField cb = init_from_vector_potential(ops, [&Ab](Vec2 x, double* a) {
        a[0] = a[1] = 0.0;
        a[2] = Ab(x);
    });
    const DGField ce = init_from_vector_potential(ops, [&Ae](Vec2 x, double* a) {
        a[0] = a[1] = 0.0;
        a[2] = Ae(x);
    });
    DGField out(mesh.n_cells(), dg.L(), 6);
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int i = 0; i < dg.L(); ++i) {
            const Vec2 x = node_pos(c, i);
            out.at(c, i, 0) = cb.at(c, i, 0);
            out.at(c, i, 1) = cb.at(c, i, 1);
            out.at(c, i, 2) = bz(x);
            out.at(c, i, 3) = ce.at(c, i, 0);
            out.at(c, i, 4) = ce.at(c, i, 1);
            out.at(c, i, 5) = ez(x);
        }
    return out;
}

// --- manifest ----------------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> manifest_items(
    const ConfigFile& file, const RunConfig& cfg, const TriMesh& mesh, int element_dofs,
    int continuous_dofs, const std::string& effective_integrator) {
    std::vector<std::pair<std::string, std::string>> items;
    for (const auto& [k, v] : file.sorted_entries()) items.emplace_back("config." + k, v);
    auto add = [&items](const std::string& k, const std::string& v) {
        items.emplace_back("resolved." + k, v);
    };
    add("system", cfg.system);
    if (cfg.system == "acoustics") {
        add("system.rho", fmt_g(cfg.rho));
        add("system.c", fmt_g(cfg.c));
    }
    if (cfg.system == "euler") add("system.gamma", fmt_g(cfg.gamma));
    add("mesh.source", cfg.mesh_source);
    if (cfg.mesh_source == "generate") {
        add("mesh.nx", std::to_string(cfg.nx));
        add("mesh.ny", std::to_string(cfg.ny));
        add("mesh.box", fmt_g(cfg.box[0]) + " " + fmt_g(cfg.box[1]) + " " + fmt_g(cfg.box[2]) +
                            " " + fmt_g(cfg.box[3]));
        add("mesh.perturb", fmt_g(cfg.perturb));
        add("mesh.seed", std::to_string(cfg.seed));
    } else {
        add("mesh.path", cfg.mesh_path);
    }
    add("scheme", cfg.scheme);
    add("scheme.degree", std::to_string(cfg.degree));
    add("scheme.reconstruction", cfg.reconstruction);
    add("scheme.viscosity", cfg.viscosity ? "on" : "off");
    add("scheme.chi", fmt_g(cfg.chi));
    add("scheme.integrator", effective_integrator);
    add("scheme.cfl", fmt_g(cfg.cfl));
    add("scheme.t_end", fmt_g(cfg.t_end));
    add("scheme.fixed_dt", fmt_g(cfg.fixed_dt));
    add("initial.preset", cfg.preset.empty() ? "(expressions)" : cfg.preset);
    add("diagnostics.points", std::to_string(cfg.points.size()));
    add("diagnostics.circles", std::to_string(cfg.circles.size()));
    add("diagnostics.cadence", std::to_string(cfg.cadence));
    add("output.prefix", cfg.out_prefix);
    items.emplace_back("mesh.triangles", std::to_string(mesh.n_cells()));
    items.emplace_back("mesh.vertices", std::to_string(mesh.n_vertices()));
    items.emplace_back(
        "mesh.h_min",
        fmt_g(*std::min_element(mesh.cell_h.begin(), mesh.cell_h.end())));
    items.emplace_back("space.element_dofs", std::to_string(element_dofs));
    items.emplace_back("space.continuous_dofs", std::to_string(continuous_dofs));
    return items;
}

// --- node-based scheme runner ---------------------------------------------------

int run_fv0(const ConfigFile& file, const RunConfig& cfg, const TriMesh& mesh,
            const SystemDescriptor& sys, bool dry_run, std::ostream& log) {
    if (!mesh.has_periodic)
        throw Error("run: fv0-entropy requires a periodic mesh");
    const DGSpace dg(0);
    const CGSpace cg(mesh, 1, mesh.has_periodic);
    const OperatorSet ops = assemble_operators(mesh, dg, cg);
    const DualCellComplex dual = build_dual_cells(mesh);
    const EulerEntropyPair pair = euler_entropy_pair(cfg.gamma);

    DGField u = l2_project_dg(mesh, ops.geom, dg, 4, euler_state_fn(cfg));
    const auto names = component_names(sys);

    write_manifest(cfg.out_prefix + "_manifest.txt",
                   manifest_items(file, cfg, mesh, dg.L(), cg.n_dofs, "ssprk2"));
    log << "manifest: " << cfg.out_prefix << "_manifest.txt\n";
    if (dry_run) {
        log << "dry run: configuration valid\n";
        return 0;
    }

    std::vector<double> qc((size_t)mesh.n_cells() * 4);
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int k = 0; k < 4; ++k) qc[c * 4 + k] = u.at(c, 0, k);
    for (int c = 0; c < mesh.n_cells(); ++c)
        if (!sys.admissible(&qc[c * 4]))
            throw Error("run: initial cell mean is not an admissible gas state");

    NodalFluxParams params;
    params.viscosity = cfg.viscosity;
    params.eps = cfg.chi;
    double hmin = 1e300;
    for (int n = 0; n < dual.n_nodes(); ++n) hmin = std::min(hmin, dual.node_h[n]);

    auto total_energy_fv = [&]() {
        double e = 0.0;
        for (int c = 0; c < mesh.n_cells(); ++c) e += mesh.cell_area[c] * sys.energy(&qc[c * 4]);
        return e;
    };
    DiagnosticsRecord rec;
    long last_rec = -1;
    double t = 0.0;
    long steps = 0;
    auto record_now = [&]() {
        if (!cfg.energy_series || steps == last_rec) return;
        last_rec = steps;
        rec.append("total_energy", t, total_energy_fv());
    };
    record_now();

    if (cfg.write_vtk) {
        for (int c = 0; c < mesh.n_cells(); ++c)
            for (int k = 0; k < 4; ++k) u.at(c, 0, k) = qc[c * 4 + k];
        write_vtk_snapshot(cfg.out_prefix + "_initial.vtk", ops, u, nullptr, names,
                           "initial state");
    }
    const double t_end = cfg.t_end;
    while (t < t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
        double smax = 0.0;
        for (int c = 0; c < mesh.n_cells(); ++c)
            smax = std::max(smax, sys.speed_bound(&qc[c * 4]));
        double dt = cfg.fixed_dt > 0.0 ? cfg.fixed_dt : cfg.cfl * hmin / smax;
        if (t + dt > t_end) dt = t_end - t;
        if (!(dt > 1e-15 * std::max(1.0, std::abs(t_end))))
            throw Error("run: time step underflow");
        fv_step(dual, sys, pair, qc, dt, params, true);
        t += dt;
        ++steps;
        if (steps % cfg.cadence == 0) record_now();
    }
    t = t_end;
    record_now();

    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int k = 0; k < 4; ++k) u.at(c, 0, k) = qc[c * 4 + k];
    if (cfg.write_vtk)
        write_vtk_snapshot(cfg.out_prefix + "_final.vtk", ops, u, nullptr, names, "final state");
    if (cfg.cut_y0)
        write_cut_csv(cfg.out_prefix + "_cut_y0.csv", sys, ops, u, 0.0, cfg.cut_samples);
    if (cfg.write_csv && rec.n_series() > 0) rec.write_csv_files(cfg.out_prefix + "_series_");
    log << "steps: " << steps << "\nfinal time: " << fmt_g(t) << "\n";
    return 0;
}

}  // namespace

// --- run ---------------------------------------------------------------------------

int cmd_run(const std::string& config_path, bool dry_run, std::ostream& log) {
    try {
        ConfigFile file = parse_config_file(config_path);
        const RunConfig cfg = resolve_run_config(file);

        const TriMesh mesh =
            cfg.mesh_source == "generate"
                ? generate_square_mesh(cfg.nx, cfg.ny, cfg.box, cfg.perturb, cfg.seed)
                : read_mesh(cfg.mesh_path);
        if (cfg.mesh_source == "file") {
            const auto& b = mesh.domain_box;
            for (const auto& p : cfg.points)
                if (!(p.x > b[0] && p.x < b[2] && p.y > b[1] && p.y < b[3]))
                    throw Error("run: observation point lies outside the mesh domain");
            for (const auto& c : cfg.circles)
                if (!(c.center.x - c.radius > b[0] && c.center.x + c.radius < b[2] &&
                      c.center.y - c.radius > b[1] && c.center.y + c.radius < b[3]))
                    throw Error("run: circle must lie strictly inside the mesh domain");
        }
        const SystemDescriptor sys = make_system(cfg);
        log << "mesh: " << mesh.n_cells() << " triangles, " << mesh.n_vertices()
            << " vertices\n";

        if (cfg.scheme == "fv0-entropy") return run_fv0(file, cfg, mesh, sys, dry_run, log);

        const DGSpace dg(cfg.degree);
        const CGSpace cg(mesh, cfg.degree + 1, mesh.has_periodic);
        OperatorSet ops = assemble_operators(mesh, dg, cg);
        DGField u0 = build_initial(cfg, sys, ops);
        const auto names = component_names(sys);

        // Monitor construction doubles as geometric validation of the
        // observation points and control circles against the actual mesh.
        std::unique_ptr<PointResidualMonitor> pmon;
        if (!cfg.points.empty())
            pmon = std::make_unique<PointResidualMonitor>(ops, cfg.points);
        std::unique_ptr<CircleBalanceMonitor> cmon;
        if (!cfg.circles.empty()) {
            std::vector<CircleControlVolume> cvs;
            for (const auto& c : cfg.circles) {
                CircleControlVolume cv;
                cv.center = c.center;
                cv.radius = c.radius;
                cvs.push_back(cv);
            }
            cmon = std::make_unique<CircleBalanceMonitor>(ops, cvs);
        }

        const CGDGSolver solver(sys, ops, make_solver_options(cfg));
        write_manifest(cfg.out_prefix + "_manifest.txt",
                       manifest_items(file, cfg, mesh, dg.L(), cg.n_dofs,
                                      scheme_name(solver.effective_scheme())));
        log << "manifest: " << cfg.out_prefix << "_manifest.txt\n";
        if (dry_run) {
            log << "dry run: configuration valid\n";
            return 0;
        }

        EvolutionState st = solver.make_state(std::move(u0));
        const EnergyMonitor emon(sys, ops);
        DiagnosticsRecord rec;
        long last_rec = -1;
        auto record_now = [&]() {
            if (st.steps == last_rec) return;
            last_rec = st.steps;
            if (cfg.energy_series) rec.append("total_energy", st.t, emon.total(st.u));
            if (cfg.involution_series && !sys.involutions.empty()) {
                for (const auto& e : involution_errors(sys, ops, st.u)) {
                    rec.append(e.label + " dual", st.t, e.dual);
                    rec.append(e.label + " pointwise", st.t, e.pointwise);
                }
            }
        };
        record_now();
        if (cfg.write_vtk)
            write_vtk_snapshot(cfg.out_prefix + "_initial.vtk", ops, st.u, nullptr, names,
                               "initial state");

        StageHook hook;
        if (pmon || cmon)
            hook = [&](const StageRecord& r) {
                if (pmon) pmon->observe(r);
                if (cmon) cmon->observe(r);
            };

        try {
            const double t_end = cfg.t_end;
            while (st.t < t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
                double dt = cfg.fixed_dt > 0.0 ? cfg.fixed_dt : solver.stable_dt(st.u);
                if (st.t + dt > t_end) dt = t_end - st.t;
                if (!(dt > 1e-15 * std::max(1.0, std::abs(t_end))))
                    throw Error("run: time step underflow");
                solver.step(st, dt, hook);
                if (st.steps % cfg.cadence == 0) record_now();
            }
            st.t = cfg.t_end;
            record_now();
        } catch (const Error& e) {
            // Preserve what the monitors saw up to the failure.
            log << "error during evolution: " << e.what() << "\n";
            if (cfg.write_csv) {
                if (rec.n_series() > 0) rec.write_csv_files(cfg.out_prefix + "_series_");
                if (pmon || cmon)
                    write_residual_csv(cfg.out_prefix + "_residuals.csv", names, cfg.points,
                                       pmon.get(), cfg.circles, cmon.get());
            }
            return 1;
        }

        const CGField wfinal = solver.reconstruct(st.u, &st);
        if (cfg.write_vtk)
            write_vtk_snapshot(cfg.out_prefix + "_final.vtk", ops, st.u, &wfinal, names,
                               "final state");
        if (cfg.cut_y0)
            write_cut_csv(cfg.out_prefix + "_cut_y0.csv", sys, ops, wfinal, 0.0,
                          cfg.cut_samples);
        if (cfg.write_csv) {
            if (rec.n_series() > 0) rec.write_csv_files(cfg.out_prefix + "_series_");
            if (pmon || cmon)
                write_residual_csv(cfg.out_prefix + "_residuals.csv", names, cfg.points,
                                   pmon.get(), cfg.circles, cmon.get());
        }
        log << "steps: " << st.steps << "\nfinal time: " << fmt_g(st.t) << "\n";
        log << "pcg iterations: " << st.pcg_iterations << "\n";
        if (pmon) {
            double m = 0.0;
            for (int i = 0; i < pmon->n_points(); ++i) m = std::max(m, pmon->maximum(i));
            log << "max point residual: " << fmt_e(m) << "\n";
        }
        if (cmon) {
            double m = 0.0;
            for (int i = 0; i < cmon->n_circles(); ++i) m = std::max(m, cmon->maximum(i));
            log << "max circle balance: " << fmt_e(m) << "\n";
        }
        return 0;
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

// --- verify --------------------------------------------------------------------------

namespace {

CGField random_cg(const CGSpace& cg, int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    CGField f(cg.n_dofs, m);
    for (auto& v : f.a) v = d(rng);
    return f;
}

DGField random_dg(const TriMesh& mesh, int L, int m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    DGField f(mesh.n_cells(), L, m);
    for (auto& v : f.a) v = d(rng);
    return f;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct VerifyReport {
    std::ostream* out;
    bool all_pass = true;
    void line(const std::string& check, const std::string& degree, double value,
              double bound) {
        const bool pass = value <= bound;
        all_pass = all_pass && pass;
        (*out) << std::left << std::setw(36) << check << std::setw(6) << degree
               << (pass ? "PASS" : "FAIL") << "  max " << fmt_e(value) << "  (bound "
               << fmt_e(bound) << ")\n";
    }
};

}  // namespace

int cmd_verify(const VerifyOptions& opt, std::ostream& out) {
    const TriMesh mesh =
        generate_square_mesh(opt.nx, opt.ny, {0.0, 0.0, 1.0, 1.0}, opt.perturb, opt.seed);
    out << "operator identity suite: " << mesh.n_cells() << " triangles, degrees";
    for (int n : opt.degrees) out << ' ' << n;
    if (opt.mutate_dual_sign) out << " (dual-sign mutation active)";
    out << "\n\n";
    VerifyReport rep{&out};
    std::mt19937_64 rng(42);

    for (int N : opt.degrees) {
        const std::string deg = std::to_string(N);
        const DGSpace dg(N);
        const CGSpace cg(mesh, N + 1, true);
        OperatorSet ops = assemble_operators(mesh, dg, cg);
        ops.debug_flip_dual_sign = opt.mutate_dual_sign;

        // Integration-by-parts compositions: both second mixed derivatives of
        // a scalar agree, so curl(grad) and div(curl) vanish at coefficient
        // level no matter how rough the potential. The floating-point residual
        // scales with the differentiated field, so it is measured relative to
        // that field's magnitude.
        double worst = 0.0;
        for (int rep_i = 0; rep_i < 3; ++rep_i) {
            const CGField w = random_cg(cg, 1, rng);
            const DGField g = primary_grad(ops, w);
            const double scale = std::max(1.0, max_abs(g.a));
            worst = std::max(worst, max_abs(dual_curl2(ops, g, 1e-14).a) / scale);
        }
        rep.line("compose dual-curl of gradient", deg, worst, 1e-11);

        worst = 0.0;
        for (int rep_i = 0; rep_i < 3; ++rep_i) {
            const CGField A = random_cg(cg, 3, rng);
            const DGField B = primary_curl3(ops, A);
            DGField B01(mesh.n_cells(), dg.L(), 2);
            for (int c = 0; c < mesh.n_cells(); ++c)
                for (int i = 0; i < dg.L(); ++i) {
                    B01.at(c, i, 0) = B.at(c, i, 0);
                    B01.at(c, i, 1) = B.at(c, i, 1);
                }
            const double scale = std::max(1.0, max_abs(B01.a));
            worst = std::max(worst, max_abs(dual_div2(ops, B01, 1e-14).a) / scale);
        }
        rep.line("compose dual-div of curl", deg, worst, 1e-11);

        // Element gradient exactness at off-node points.
        {
            const CGField w = random_cg(cg, 1, rng);
            const DGField g = primary_grad(ops, w);
            const Vec2 refs[3] = {{0.31, 0.17}, {0.05, 0.62}, {0.42, 0.41}};
            double diff = 0.0, scale = 1.0;
            for (int c = 0; c < mesh.n_cells(); ++c)
                for (const Vec2& r : refs) {
                    double ge[2], ga[2];
                    eval_dg_ref(dg, g, c, r, ge);
                    eval_grad_cg(cg, ops.geom, w, c, ref_to_phys(ops.geom[c], r), ga);
                    diff = std::max(diff, std::max(std::abs(ge[0] - ga[0]),
                                                   std::abs(ge[1] - ga[1])));
                    scale = std::max({scale, std::abs(ga[0]), std::abs(ga[1])});
                }
            rep.line("element gradient exactness", deg, diff / scale, 1e-12);
        }

        // Dual operators are the mass-solved adjoints: for any element data v
        // and continuous test function psi,  psi' M dual_div(v) = -(v, grad psi).
        {
            const DGField v = random_dg(mesh, dg.L(), 2, rng);
            const CGField psi = random_cg(cg, 1, rng);
            const CGField D = dual_div2(ops, v);
            CGField MD(cg.n_dofs, 1);
            apply_cg_mass(ops, D, MD);
            double lhs = 0.0;
            for (int p = 0; p < cg.n_dofs; ++p) lhs += psi.at(p, 0) * MD.at(p, 0);
            double rhs = 0.0;
            const int L = dg.L(), P = cg.P();
            const int nq = (int)ops.rule.weights.size();
            for (int c = 0; c < mesh.n_cells(); ++c) {
                const double dj = ops.geom[c].detJ;
                for (int q = 0; q < nq; ++q) {
                    double vx = 0.0, vy = 0.0;
                    for (int i = 0; i < L; ++i) {
                        vx += ops.dg_vals[(size_t)q * L + i] * v.at(c, i, 0);
                        vy += ops.dg_vals[(size_t)q * L + i] * v.at(c, i, 1);
                    }
                    Vec2 gp{0.0, 0.0};
                    for (int j = 0; j < P; ++j) {
                        const Vec2 gr = ops.cg_grads[(size_t)q * P + j];
                        const double co = psi.at(cg.global(c, j), 0);
                        gp.x += gr.x * co;
                        gp.y += gr.y * co;
                    }
                    const Vec2 gphys = grad_to_phys(ops.geom[c], gp);
                    rhs -= ops.rule.weights[q] * dj * (vx * gphys.x + vy * gphys.y);
                }
            }
            rep.line("dual-operator mass adjointness", deg,
                     std::abs(lhs - rhs) / (1.0 + std::abs(lhs)), 1e-10);
        }

        // End-to-end pointwise identity: du/dt + div(flux field) = 0 exactly
        // at arbitrary interior points during real steps.
        {
            const SystemDescriptor sys = acoustics_descriptor(1.0, 1.0);
            const DGField q0 =
                interpolate_dg(mesh, ops.geom, dg, 3, [](Vec2 x, double* q) {
                    q[0] = 0.2 * std::sin(2.0 * M_PI * x.x);
                    q[1] = -0.1 * std::cos(2.0 * M_PI * x.y);
                    q[2] = 1.0 + 0.2 * std::sin(2.0 * M_PI * (x.x + x.y));
                });
            const CGDGSolver solver(sys, ops, SolverOptions{});
            PointResidualMonitor mon(ops, {{0.387, 0.544}, {0.611, 0.293}});
            EvolutionState st = solver.make_state(q0);
            for (int s = 0; s < 2; ++s) solver.step(st, 0.0, mon.hook());
            double m = 0.0;
            for (int i = 0; i < mon.n_points(); ++i) m = std::max(m, mon.maximum(i));
            rep.line("pointwise conservation identity", deg, m, 1e-11);
        }
    }

    // Corner-normal identities on the median-dual complex (degree free).
    {
        const DualCellComplex dual = build_dual_cells(mesh);
        std::vector<Vec2> qconst(mesh.n_cells(), Vec2{1.3, -0.7});
        double closure = 0.0;
        for (double v : node_divergence(dual, qconst)) closure = std::max(closure, std::abs(v));
        rep.line("corner-normal closure", "-", closure, 1e-13);

        // An affine field is single-valued only without the periodic
        // identification, so this identity runs on the unwrapped copy.
        const TriMesh plain = build_trimesh(mesh.vertex_coords, mesh.triangles);
        const DualCellComplex dplain = build_dual_cells(plain);
        std::vector<Vec2> qp(dplain.n_nodes());
        for (int n = 0; n < dplain.n_nodes(); ++n) {
            const Vec2 x = dplain.node_pos[n];
            qp[n] = {0.5 * x.x - 0.2 * x.y + 0.1, 1.1 * x.x + 0.8 * x.y - 0.3};
        }
        double worst = 0.0;
        for (double v : cell_divergence(dplain, qp)) worst = std::max(worst, std::abs(v - 1.3));
        rep.line("corner-normal affine divergence", "-", worst, 1e-12);
    }

    // Entropy behaviour of the nodal flux construction for the gas system.
    {
        const SystemDescriptor sys = euler_descriptor(1.4);
        const EulerEntropyPair pair = euler_entropy_pair(1.4);
        const DualCellComplex dual = build_dual_cells(mesh);
        std::uniform_real_distribution<double> rho_d(0.5, 2.0), v_d(-1.0, 1.0), p_d(0.5, 2.0);
        double worst_prod = 0.0, worst_cons = 0.0;
        for (int draw = 0; draw < 5; ++draw) {
            std::vector<double> qc((size_t)mesh.n_cells() * 4);
            for (int c = 0; c < mesh.n_cells(); ++c) {
                const double rho = rho_d(rng), ux = v_d(rng), uy = v_d(rng), p = p_d(rng);
                qc[c * 4 + 0] = rho;
                qc[c * 4 + 1] = rho * ux;
                qc[c * 4 + 2] = rho * uy;
                qc[c * 4 + 3] = p / 0.4 + 0.5 * rho * (ux * ux + uy * uy);
            }
            std::vector<double> pvar((size_t)mesh.n_cells() * 4);
            std::vector<Vec2> psic(mesh.n_cells());
            for (int c = 0; c < mesh.n_cells(); ++c) {
                pair.entropic(&qc[c * 4], &pvar[c * 4]);
                double ps[2];
                pair.flux_potential(&pvar[c * 4], ps);
                psic[c] = {ps[0], ps[1]};
            }
            const std::vector<double> G = node_gradient(dual, pvar, 4);
            const std::vector<double> divpsi = node_divergence(dual, psic);
            for (const bool viscous : {true, false}) {
                NodalFluxParams params;
                params.viscosity = viscous;
                const std::vector<double> fp =
                    entropy_stable_nodal_fluxes(dual, sys, pair, qc, params);
                for (int n = 0; n < dual.n_nodes(); ++n) {
                    double prod = -divpsi[n];
                    for (int i = 0; i < 8; ++i) prod += fp[n * 8 + i] * G[n * 8 + i];
                    if (viscous)
                        worst_prod = std::max(worst_prod, -prod);  // must not be negative
                    else
                        worst_cons = std::max(worst_cons, std::abs(prod));
                }
            }
        }
        rep.line("nodal entropy production sign", "-", worst_prod, 1e-12);
        rep.line("nodal entropy conservative part", "-", worst_cons, 1e-11);

        const double q[4] = {1.2, 0.36, -0.6, 2.454};
        std::vector<double> qc((size_t)mesh.n_cells() * 4);
        for (int c = 0; c < mesh.n_cells(); ++c)
            for (int k = 0; k < 4; ++k) qc[c * 4 + k] = q[k];
        const std::vector<double> fp = entropy_stable_nodal_fluxes(dual, sys, pair, qc, {});
        double want[8], cons = 0.0;
        sys.flux(q, want);
        for (int n = 0; n < dual.n_nodes(); ++n)
            for (int i = 0; i < 8; ++i)
                cons = std::max(cons,
                                std::abs(fp[n * 8 + i] - want[i]) / (1.0 + std::abs(want[i])));
        rep.line("nodal flux consistency", "-", cons, 1e-13);
    }

    out << "\n" << (rep.all_pass ? "ALL CHECKS PASSED" : "CHECK FAILURES DETECTED") << "\n";
    return rep.all_pass ? 0 : 1;
}

// --- convergence ----------------------------------------------------------------------

int cmd_convergence(const ConvergenceOptions& opt, std::ostream& out) {
    try {
        SystemDescriptor sys;
        VectorFn state;
        std::array<double, 4> box{};
        double default_t = 0.0;
        if (opt.preset == "vortex") {
            sys = euler_descriptor(1.4);
            box = {0.0, 0.0, 10.0, 10.0};
            state = [](Vec2 x, double* q) { isentropic_vortex(x, 1.4, q); };
            default_t = 0.2;
        } else if (opt.preset == "acoustic-gaussian") {
            sys = acoustics_descriptor(1.0, 1.0);
            box = {-0.5, -0.5, 0.5, 0.5};
            state = [](Vec2 x, double* q) {
                q[0] = q[1] = 0.0;
                q[2] = gaussian_bump(x);
            };
        } else if (opt.preset == "maxwell-gaussian") {
            sys = maxwell_descriptor();
            box = {-0.5, -0.5, 0.5, 0.5};
            state = [](Vec2 x, double* q) {
                for (int k = 0; k < 6; ++k) q[k] = 0.0;
                q[5] = gaussian_bump(x);
            };
        } else {
            throw Error("convergence: unknown preset '" + opt.preset +
                        "' (known: vortex, acoustic-gaussian, maxwell-gaussian)");
        }
        const double t_end = opt.t_end < 0.0 ? default_t : opt.t_end;
        if (t_end > 0.0 && opt.preset != "vortex")
            throw Error("convergence: preset '" + opt.preset +
                        "' has no closed-form solution at t > 0; use --t-end 0");
        if (opt.sizes.size() < 2) throw Error("convergence: need at least two mesh sizes");

        std::vector<std::pair<int, std::string>> columns;
        if (sys.kind == SystemKind::Euler)
            columns = {{0, "rho"}, {1, "mom"}, {3, "E"}};
        else {
            const auto names = component_names(sys);
            for (int k = 0; k < sys.m; ++k) columns.emplace_back(k, names[k]);
        }

        ConvergenceConfig cc;
        cc.solver.reconstruction = map_reconstruction(opt.reconstruction);
        cc.solver.cfl = opt.cfl;
        cc.t_end = t_end;
        cc.mesh_factory = [&](int nx) {
            return generate_square_mesh(nx, nx, box, opt.perturb, opt.seed);
        };

        for (int N : opt.degrees) {
            const ConvergenceTable table =
                convergence_study(sys, N, opt.sizes, state, state, cc);
            const std::string base = opt.out_prefix + "_N" + std::to_string(N);
            write_convergence_csv(base + "_u.csv", table, false, columns);
            write_convergence_csv(base + "_w.csv", table, true, columns);
            out << "degree " << N << " (wrote " << base << "_u.csv, " << base << "_w.csv)\n";
            for (const bool flux : {false, true}) {
                out << (flux ? "  flux reconstruction errors\n" : "  element field errors\n");
                std::vector<std::vector<double>> rates;
                for (const auto& col : columns)
                    rates.push_back(convergence_rates(table, flux, col.first));
                for (size_t r = 0; r < table.rows.size(); ++r) {
                    const auto& row = table.rows[r];
                    out << "    nx " << std::setw(4) << row.nx << "  steps " << std::setw(6)
                        << row.steps << " ";
                    for (size_t ci = 0; ci < columns.size(); ++ci) {
                        const auto& err = flux ? row.err_w : row.err_u;
                        out << "  " << columns[ci].second << " " << fmt_e(err[columns[ci].first]);
                        if (r > 0) out << " (" << std::fixed << std::setprecision(2)
                                       << rates[ci][r] << ")" << std::defaultfloat;
                    }
                    out << "\n";
                }
            }
        }
        return 0;
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return 1;
    }
}

// --- meshgen ---------------------------------------------------------------------------

int cmd_meshgen(const MeshgenOptions& opt, std::ostream& out) {
    try {
        const TriMesh mesh =
            generate_square_mesh(opt.nx, opt.ny, opt.box, opt.perturb, opt.seed);
        std::filesystem::path p(opt.out_path);
        if (p.has_parent_path()) {
            std::error_code ec;
            std::filesystem::create_directories(p.parent_path(), ec);
        }
        write_mesh(mesh, opt.out_path);
        out << "wrote " << opt.out_path << ": " << mesh.n_cells() << " triangles, "
            << mesh.n_vertices() << " vertices\n";
        return 0;
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cgdg
