#include "cgdg/diagnostics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "cgdg/error.hpp"

namespace cgdg {

namespace {

// Compensated accumulator for long quadrature sums.
struct Kahan {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c, t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

// --- DiagnosticsRecord -------------------------------------------------------

int DiagnosticsRecord::series(const std::string& name) {
    const int id = find(name);
    if (id >= 0) return id;
    names_.push_back(name);
    data_.emplace_back();
    return n_series() - 1;
}

int DiagnosticsRecord::find(const std::string& name) const {
    for (int i = 0; i < n_series(); ++i)
        if (names_[i] == name) return i;
    return -1;
}

void DiagnosticsRecord::append(int id, double t, double value) {
    auto& s = data_.at(id);
    if (!s.empty() && !(t > s.back().t))
        throw Error("diagnostics: series '" + names_[id] +
                    "' needs strictly increasing timestamps");
    s.push_back({t, value});
}

void DiagnosticsRecord::append(const std::string& name, double t, double value) {
    append(series(name), t, value);
}

void DiagnosticsRecord::write_csv_files(const std::string& prefix) const {
    for (int i = 0; i < n_series(); ++i) {
        std::string fname = names_[i];
        for (char& ch : fname)
            if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '.' && ch != '-')
                ch = '_';
        write_series_csv(prefix + fname + ".csv", data_[i]);
    }
}

void write_series_csv(const std::string& path, const std::vector<SeriesSample>& samples) {
    std::ofstream out(path);
    if (!out) throw Error("diagnostics: cannot write " + path);
    out << "t,value\n";
    for (const auto& s : samples) out << format_g(s.t) << ',' << format_g(s.value) << '\n';
}

// --- involution monitors -----------------------------------------------------

std::vector<InvolutionError> involution_errors(const SystemDescriptor& sys,
                                               const OperatorSet& ops, const DGField& u) {
    const DGSpace& dg = *ops.dg;
    const int L = dg.L(), nc = ops.mesh->n_cells();
    if (u.m != sys.m || u.L != L || u.cells != nc)
        throw Error("diagnostics: field shape does not match the system and operators");

    const QuadratureRule& rule = ops.rule;
    const int nq = rule.size();
    std::vector<Vec2> gref(static_cast<size_t>(nq) * L);
    for (int q = 0; q < nq; ++q)
        dg.basis.eval_grad(rule.points[q], &gref[static_cast<size_t>(q) * L]);

    std::vector<InvolutionError> out;
    for (const auto& inv : sys.involutions) {
        DGField v(nc, L, 2);
        for (int c = 0; c < nc; ++c)
            for (int i = 0; i < L; ++i) {
                v.at(c, i, 0) = inv.scale * u.at(c, i, inv.comp0);
                v.at(c, i, 1) = inv.scale * u.at(c, i, inv.comp1);
            }
        const bool is_curl = inv.type == InvolutionSpec::Type::Curl2;
        const CGField img = is_curl ? dual_curl2(ops, v) : dual_div2(ops, v);
        double dual = 0.0;
        for (double a : img.a) dual = std::max(dual, std::abs(a));

        double pw = 0.0;
        for (int c = 0; c < nc; ++c) {
            const CellGeom& g = ops.geom[c];
            for (int q = 0; q < nq; ++q) {
                Vec2 r0{0.0, 0.0}, r1{0.0, 0.0};
                for (int i = 0; i < L; ++i) {
                    const Vec2 gi = gref[static_cast<size_t>(q) * L + i];
                    r0 = r0 + gi * v.at(c, i, 0);
                    r1 = r1 + gi * v.at(c, i, 1);
                }
                const Vec2 g0 = grad_to_phys(g, r0), g1 = grad_to_phys(g, r1);
                const double val = is_curl ? g1.x - g0.y : g0.x + g1.y;
                pw = std::max(pw, std::abs(val));
            }
        }
        out.push_back({inv.label, dual, pw});
    }
    return out;
}

// --- energy accounting --------------------------------------------------------

EnergyMonitor::EnergyMonitor(const SystemDescriptor& sys, const OperatorSet& ops)
    : sys_(&sys), ops_(&ops) {
    const int L = ops.dg->L(), P = ops.cg->P(), nq = ops.rule.size();
    dgv_ = MatD(L, nq);
    cgv_ = MatD(P, nq);
    std::vector<double> buf(static_cast<size_t>(std::max(L, P)));
    for (int q = 0; q < nq; ++q) {
        ops.dg->basis.eval(ops.rule.points[q], buf.data());
        for (int i = 0; i < L; ++i) dgv_(i, q) = buf[i];
        ops.cg->basis.eval(ops.rule.points[q], buf.data());
        for (int i = 0; i < P; ++i) cgv_(i, q) = buf[i];
    }
    quadratic_ = sys.quadratic_energy_weights(sigma_);
}

double EnergyMonitor::total(const DGField& u) const {
    const int L = ops_->dg->L(), nq = ops_->rule.size(), m = sys_->m;
    if (u.m != m || u.L != L || u.cells != ops_->mesh->n_cells())
        throw Error("energy: field shape mismatch");
    std::vector<double> uq(m);
    Kahan acc;
    for (int c = 0; c < u.cells; ++c) {
        const double dj = ops_->geom[c].detJ;
        for (int q = 0; q < nq; ++q) {
            std::fill(uq.begin(), uq.end(), 0.0);
            for (int i = 0; i < L; ++i) {
                const double b = dgv_(i, q);
                for (int k = 0; k < m; ++k) uq[k] += b * u.at(c, i, k);
            }
            acc.add(ops_->rule.weights[q] * dj * sys_->energy(uq.data()));
        }
    }
    return acc.s;
}

double EnergyMonitor::projected(const CGField& what) const {
    if (!quadratic_) throw Error("energy: projected energy needs a quadratic energy density");
    const int P = ops_->cg->P(), nq = ops_->rule.size(), m = sys_->m;
    if (what.m != m || what.n != ops_->cg->n_dofs) throw Error("energy: field shape mismatch");
    std::vector<double> wl(static_cast<size_t>(P) * m), wq(m);
    Kahan acc;
    for (int c = 0; c < ops_->mesh->n_cells(); ++c) {
        for (int p = 0; p < P; ++p) {
            const int dof = ops_->cg->global(c, p);
            for (int k = 0; k < m; ++k) wl[static_cast<size_t>(p) * m + k] = what.at(dof, k);
        }
        const double dj = ops_->geom[c].detJ;
        for (int q = 0; q < nq; ++q) {
            std::fill(wq.begin(), wq.end(), 0.0);
            for (int p = 0; p < P; ++p) {
                const double b = cgv_(p, q);
                for (int k = 0; k < m; ++k) wq[k] += b * wl[static_cast<size_t>(p) * m + k];
            }
            double e = 0.0;
            for (int k = 0; k < m; ++k) e += sigma_[k] * wq[k] * wq[k];
            acc.add(0.5 * ops_->rule.weights[q] * dj * e);
        }
    }
    return acc.s;
}

double EnergyMonitor::rate(const CGField& what, const DGField& dudt) const {
    if (!quadratic_) throw Error("energy: the energy rate needs a quadratic energy density");
    const int L = ops_->dg->L(), P = ops_->cg->P(), nq = ops_->rule.size(), m = sys_->m;
    if (what.m != m || what.n != ops_->cg->n_dofs || dudt.m != m || dudt.L != L)
        throw Error("energy: field shape mismatch");
    std::vector<double> wl(static_cast<size_t>(P) * m), wq(m), dq(m);
    Kahan acc;
    for (int c = 0; c < ops_->mesh->n_cells(); ++c) {
        for (int p = 0; p < P; ++p) {
            const int dof = ops_->cg->global(c, p);
            for (int k = 0; k < m; ++k) wl[static_cast<size_t>(p) * m + k] = what.at(dof, k);
        }
        const double dj = ops_->geom[c].detJ;
        for (int q = 0; q < nq; ++q) {
            std::fill(wq.begin(), wq.end(), 0.0);
            std::fill(dq.begin(), dq.end(), 0.0);
            for (int p = 0; p < P; ++p) {
                const double b = cgv_(p, q);
                for (int k = 0; k < m; ++k) wq[k] += b * wl[static_cast<size_t>(p) * m + k];
            }
            for (int i = 0; i < L; ++i) {
                const double b = dgv_(i, q);
                for (int k = 0; k < m; ++k) dq[k] += b * dudt.at(c, i, k);
            }
            double e = 0.0;
            for (int k = 0; k < m; ++k) e += sigma_[k] * wq[k] * dq[k];
            acc.add(ops_->rule.weights[q] * dj * e);
        }
    }
    return acc.s;
}

double total_energy(const SystemDescriptor& sys, const OperatorSet& ops, const DGField& u) {
    return EnergyMonitor(sys, ops).total(u);
}

double projected_energy(const SystemDescriptor& sys, const OperatorSet& ops,
                        const CGField& what) {
    return EnergyMonitor(sys, ops).projected(what);
}

double energy_rate(const SystemDescriptor& sys, const OperatorSet& ops, const CGField& what,
                   const DGField& dudt) {
    return EnergyMonitor(sys, ops).rate(what, dudt);
}

// --- pointwise strong-form residual -------------------------------------------

PointResidualMonitor::PointResidualMonitor(const OperatorSet& ops, std::vector<Vec2> points)
    : ops_(&ops), pts_(std::move(points)) {
    cells_.reserve(pts_.size());
    for (const Vec2& x : pts_) cells_.push_back(locate_point(*ops.mesh, x).cell);
}

void PointResidualMonitor::observe(const StageRecord& rec) {
    if (!rec.eval) throw Error("diagnostics: stage record carries no evaluation");
    const DGField& dudt = rec.eval->dudt;
    const CGField& fhat = rec.eval->fhat;
    if (m_ == 0) {
        m_ = dudt.m;
        max_.assign(pts_.size() * static_cast<size_t>(m_), 0.0);
    }
    std::vector<double> du(m_), gr(static_cast<size_t>(4) * m_);
    for (size_t p = 0; p < pts_.size(); ++p) {
        const int c = cells_[p];
        eval_dg(*ops_->mesh, ops_->geom, *ops_->dg, dudt, c, pts_[p], du.data());
        eval_grad_cg(*ops_->cg, ops_->geom, fhat, c, pts_[p], gr.data());
        for (int k = 0; k < m_; ++k) {
            const double div = gr[(2 * k + 0) * 2 + 0] + gr[(2 * k + 1) * 2 + 1];
            double& slot = max_[p * static_cast<size_t>(m_) + k];
            slot = std::max(slot, std::abs(du[k] + div));
        }
    }
    ++stages_;
}

StageHook PointResidualMonitor::hook() {
    return [this](const StageRecord& rec) { observe(rec); };
}

double PointResidualMonitor::maximum(int point) const {
    double m = 0.0;
    for (int k = 0; k < m_; ++k)
        m = std::max(m, max_.at(static_cast<size_t>(point) * m_ + k));
    return m;
}

double PointResidualMonitor::maximum(int point, int comp) const {
    return max_.at(static_cast<size_t>(point) * m_ + comp);
}

// --- circle control volumes ----------------------------------------------------

CircleQuadrature::CircleQuadrature(const CircleControlVolume& cv, const TriMesh& mesh,
                                   const std::vector<CellGeom>& geom) {
    if (!(cv.radius > 0.0)) throw Error("control volume: radius must be positive");
    if (cv.wedges < 4) throw Error("control volume: need at least 4 wedges");
    if (cv.geometry_degree < 2 || cv.geometry_degree > 6)
        throw Error("control volume: geometry degree must be in 2..6");
    if (cv.points_per_direction < 2)
        throw Error("control volume: need at least 2 quadrature points per direction");
    if (cv.clip_depth < 0 || cv.clip_depth > 12)
        throw Error("control volume: clip depth out of range");
    const auto& box = mesh.domain_box;
    if (cv.center.x - cv.radius <= box[0] || cv.center.x + cv.radius >= box[2] ||
        cv.center.y - cv.radius <= box[1] || cv.center.y + cv.radius >= box[3])
        throw Error("control volume: circle intersects the domain boundary");

    const TriangleBasis gb(cv.geometry_degree);
    const int Pg = gb.size();
    const QuadratureRule rule = collapsed_triangle_rule(cv.points_per_direction);
    const int nq = rule.size();
    const EdgeRule er = gauss_legendre(cv.points_per_direction);

    // Shared wedge angles so neighboring arcs reuse identical endpoint
    // coordinates and the closure sum telescopes exactly.
    std::vector<double> theta(cv.wedges + 1);
    for (int i = 0; i <= cv.wedges; ++i)
        theta[i] = 2.0 * M_PI * static_cast<double>(i) / cv.wedges;

    int hint = -1;
    auto locate = [&](Vec2 x) {
        if (hint >= 0) {
            const Vec2 r = phys_to_ref(geom[hint], x);
            if (r.x >= -1e-12 && r.y >= -1e-12 && r.x + r.y <= 1.0 + 1e-12) return hint;
        }
        hint = locate_point(mesh, x).cell;
        return hint;
    };

    std::vector<double> phi(Pg);
    std::vector<Vec2> gphi(Pg), gx(Pg);
    auto map_point = [&](Vec2 zeta, Vec2* X, double* detJ, Vec2* cols) {
        gb.eval(zeta, phi.data());
        Vec2 x{0.0, 0.0};
        for (int k = 0; k < Pg; ++k) x = x + gx[k] * phi[k];
        *X = x;
        if (detJ || cols) {
            gb.eval_grad(zeta, gphi.data());
            Vec2 dxi{0.0, 0.0}, deta{0.0, 0.0};
            for (int k = 0; k < Pg; ++k) {
                dxi = dxi + gx[k] * gphi[k].x;
                deta = deta + gx[k] * gphi[k].y;
            }
            if (detJ) *detJ = dxi.x * deta.y - dxi.y * deta.x;
            if (cols) {
                cols[0] = dxi;
                cols[1] = deta;
            }
        }
    };

    for (int w = 0; w < cv.wedges; ++w) {
        const double th0 = theta[w], dth = theta[w + 1] - theta[w];
        // Geometry nodes interpolate the exact polar wedge map: radial rays
        // stay straight, the outer edge tracks the arc.
        for (int k = 0; k < Pg; ++k) {
            const Vec2 nk = gb.nodes()[k];
            const double s = nk.x + nk.y;
            const double ang = th0 + (s > 0.0 ? nk.y / s : 0.0) * dth;
            gx[k] = {cv.center.x + cv.radius * s * std::cos(ang),
                     cv.center.y + cv.radius * s * std::sin(ang)};
        }

        // Clip against straight mesh edges by recursive subdivision: a leaf
        // whose points all fall in one cell is emitted whole; at max depth
        // each point keeps its own cell.
        std::function<void(Vec2, Vec2, Vec2, int)> clip = [&](Vec2 a, Vec2 b, Vec2 c,
                                                              int depth) {
            const double sub =
                std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
            std::vector<VolPoint> pts(nq);
            bool same = true;
            int cell0 = -1;
            for (int q = 0; q < nq; ++q) {
                const Vec2 rq = rule.points[q];
                const Vec2 zeta = {a.x + (b.x - a.x) * rq.x + (c.x - a.x) * rq.y,
                                   a.y + (b.y - a.y) * rq.x + (c.y - a.y) * rq.y};
                Vec2 X;
                double dj = 0.0;
                map_point(zeta, &X, &dj, nullptr);
                const int cell = locate(X);
                if (q == 0) cell0 = cell;
                else if (cell != cell0) same = false;
                pts[q] = {cell, X, rule.weights[q] * sub * std::abs(dj)};
            }
            if (same) {
                for (const Vec2& corner : {a, b, c}) {
                    Vec2 X;
                    map_point(corner, &X, nullptr, nullptr);
                    if (locate(X) != cell0) {
                        same = false;
                        break;
                    }
                }
            }
            if (!same && depth < cv.clip_depth) {
                const Vec2 ab = (a + b) * 0.5, bc = (b + c) * 0.5, ca = (c + a) * 0.5;
                clip(a, ab, ca, depth + 1);
                clip(ab, b, bc, depth + 1);
                clip(ca, bc, c, depth + 1);
                clip(ab, bc, ca, depth + 1);
                return;
            }
            for (const VolPoint& p : pts) {
                vol_.push_back(p);
                area_ += p.w;
            }
        };
        clip({0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, 0);

        // Outer arc: the reference edge from (1,0) to (0,1), walked so the
        // rotated tangent points out of the disc.
        for (int q = 0; q < er.size(); ++q) {
            const double t = er.points[q];
            Vec2 X, cols[2];
            map_point({1.0 - t, t}, &X, nullptr, cols);
            const Vec2 tang = cols[1] - cols[0];
            const Vec2 nw = rot_minus90(tang) * er.weights[q];
            bdry_.push_back({locate(X), X, nw});
            closure_ = closure_ + nw;
        }
    }
}

bool CircleQuadrature::single_cell() const {
    if (vol_.empty()) return false;
    for (const auto& p : vol_)
        if (p.cell != vol_.front().cell) return false;
    return true;
}

std::vector<double> CircleQuadrature::balance(const OperatorSet& ops,
                                              const StageEval& eval) const {
    const int m = eval.dudt.m;
    if (eval.fhat.m != 2 * m)
        throw Error("control volume: flux and state component counts do not match");
    std::vector<double> acc(m, 0.0), du(m), fx(static_cast<size_t>(2) * m);
    for (const VolPoint& p : vol_) {
        eval_dg(*ops.mesh, ops.geom, *ops.dg, eval.dudt, p.cell, p.x, du.data());
        for (int k = 0; k < m; ++k) acc[k] += p.w * du[k];
    }
    for (const BdryPoint& b : bdry_) {
        eval_cg_in_cell(*ops.cg, ops.geom, eval.fhat, b.cell, b.x, fx.data());
        for (int k = 0; k < m; ++k) acc[k] += fx[2 * k] * b.nw.x + fx[2 * k + 1] * b.nw.y;
    }
    return acc;
}

CircleBalanceMonitor::CircleBalanceMonitor(const OperatorSet& ops,
                                           const std::vector<CircleControlVolume>& circles)
    : ops_(&ops) {
    quads_.reserve(circles.size());
    for (const auto& cv : circles) quads_.emplace_back(cv, *ops.mesh, ops.geom);
}

void CircleBalanceMonitor::observe(const StageRecord& rec) {
    if (!rec.eval) throw Error("diagnostics: stage record carries no evaluation");
    if (m_ == 0) {
        m_ = rec.eval->dudt.m;
        max_.assign(quads_.size() * static_cast<size_t>(m_), 0.0);
    }
    for (size_t i = 0; i < quads_.size(); ++i) {
        const std::vector<double> b = quads_[i].balance(*ops_, *rec.eval);
        for (int k = 0; k < m_; ++k) {
            double& slot = max_[i * static_cast<size_t>(m_) + k];
            slot = std::max(slot, std::abs(b[k]));
        }
    }
    ++stages_;
}

StageHook CircleBalanceMonitor::hook() {
    return [this](const StageRecord& rec) { observe(rec); };
}

double CircleBalanceMonitor::maximum(int circle) const {
    double m = 0.0;
    for (int k = 0; k < m_; ++k)
        m = std::max(m, max_.at(static_cast<size_t>(circle) * m_ + k));
    return m;
}

double CircleBalanceMonitor::maximum(int circle, int comp) const {
    return max_.at(static_cast<size_t>(circle) * m_ + comp);
}

// --- convergence studies --------------------------------------------------------

ConvergenceTable convergence_study(const SystemDescriptor& sys, int degree,
                                   const std::vector<int>& sizes, const VectorFn& initial,
                                   const VectorFn& exact_final, const ConvergenceConfig& cfg) {
    if (!cfg.mesh_factory) throw Error("convergence: a mesh factory is required");
    if (sizes.empty()) throw Error("convergence: no mesh sizes given");

    ConvergenceTable table;
    table.degree = degree;
    for (int nx : sizes) {
        const TriMesh mesh = cfg.mesh_factory(nx);
        const DGSpace dg(degree);
        const CGSpace cg(mesh, degree + 1, mesh.has_periodic);
        const OperatorSet ops = assemble_operators(mesh, dg, cg);
        const CGDGSolver solver(sys, ops, cfg.solver);

        EvolutionState state =
            solver.make_state(interpolate_dg(mesh, ops.geom, dg, sys.m, initial));
        if (cfg.t_end > 0.0) solver.run(state, cfg.t_end);
        const CGField what = solver.reconstruct(state.u, &state);

        const QuadratureRule rule = triangle_rule(2 * (degree + 1) + 2);
        const int nq = rule.size(), L = dg.L(), P = cg.P(), m = sys.m;
        MatD dv(L, nq), cvv(P, nq);
        {
            std::vector<double> buf(static_cast<size_t>(std::max(L, P)));
            for (int q = 0; q < nq; ++q) {
                dg.basis.eval(rule.points[q], buf.data());
                for (int i = 0; i < L; ++i) dv(i, q) = buf[i];
                cg.basis.eval(rule.points[q], buf.data());
                for (int i = 0; i < P; ++i) cvv(i, q) = buf[i];
            }
        }

        std::vector<Kahan> eu(m), ew(m);
        std::vector<double> uq(m), wq(m), ex(m), wl(static_cast<size_t>(P) * m);
        for (int c = 0; c < mesh.n_cells(); ++c) {
            for (int p = 0; p < P; ++p) {
                const int dof = cg.global(c, p);
                for (int k = 0; k < m; ++k) wl[static_cast<size_t>(p) * m + k] = what.at(dof, k);
            }
            const CellGeom& g = ops.geom[c];
            for (int q = 0; q < nq; ++q) {
                std::fill(uq.begin(), uq.end(), 0.0);
                std::fill(wq.begin(), wq.end(), 0.0);
                for (int i = 0; i < L; ++i) {
                    const double b = dv(i, q);
                    for (int k = 0; k < m; ++k) uq[k] += b * state.u.at(c, i, k);
                }
                for (int p = 0; p < P; ++p) {
                    const double b = cvv(p, q);
                    for (int k = 0; k < m; ++k) wq[k] += b * wl[static_cast<size_t>(p) * m + k];
                }
                exact_final(ref_to_phys(g, rule.points[q]), ex.data());
                const double wdj = rule.weights[q] * g.detJ;
                for (int k = 0; k < m; ++k) {
                    eu[k].add(wdj * (uq[k] - ex[k]) * (uq[k] - ex[k]));
                    ew[k].add(wdj * (wq[k] - ex[k]) * (wq[k] - ex[k]));
                }
            }
        }

        ConvergenceRow row;
        row.nx = nx;
        row.h = mesh.box_width() / nx;
        row.steps = state.steps;
        for (int k = 0; k < m; ++k) {
            row.err_u.push_back(std::sqrt(std::max(eu[k].s, 0.0)));
            row.err_w.push_back(std::sqrt(std::max(ew[k].s, 0.0)));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::vector<double> convergence_rates(const ConvergenceTable& table, bool flux_table,
                                      int comp) {
    std::vector<double> rates(table.rows.size(), 0.0);
    for (size_t i = 1; i < table.rows.size(); ++i) {
        const auto& prev = flux_table ? table.rows[i - 1].err_w : table.rows[i - 1].err_u;
        const auto& cur = flux_table ? table.rows[i].err_w : table.rows[i].err_u;
        const double e0 = prev.at(comp), e1 = cur.at(comp);
        const double ratio =
            static_cast<double>(table.rows[i].nx) / static_cast<double>(table.rows[i - 1].nx);
        if (e0 > 0.0 && e1 > 0.0 && ratio > 1.0) rates[i] = std::log(e0 / e1) / std::log(ratio);
    }
    return rates;
}

void write_convergence_csv(const std::string& path, const ConvergenceTable& table,
                           bool flux_table,
                           const std::vector<std::pair<int, std::string>>& columns) {
    std::ofstream out(path);
    if (!out) throw Error("convergence: cannot write " + path);
    out << "Nx";
    for (const auto& col : columns) out << ",err_" << col.second;
    for (const auto& col : columns) out << ",rate_" << col.second;
    out << '\n';
    std::vector<std::vector<double>> rates;
    rates.reserve(columns.size());
    for (const auto& col : columns) rates.push_back(convergence_rates(table, flux_table, col.first));
    for (size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto& err = flux_table ? row.err_w : row.err_u;
        out << row.nx;
        for (const auto& col : columns) out << ',' << format_g(err.at(col.first));
        for (size_t j = 0; j < columns.size(); ++j) {
            out << ',';
            if (i > 0) out << format_g(rates[j][i]);
        }
        out << '\n';
    }
}

}  // namespace cgdg
