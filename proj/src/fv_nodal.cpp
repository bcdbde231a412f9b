#include "cgdg/fv_nodal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cgdg/error.hpp"

namespace cgdg {

DualCellComplex build_dual_cells(const TriMesh& mesh) {
    DualCellComplex d;
    d.mesh = &mesh;
    d.corners = corner_normals(mesh);

    const int nv = mesh.n_vertices();
    d.canon.assign(nv, -1);
    std::vector<int> rep;
    for (int v = 0; v < nv; ++v) {
        const int r = mesh.has_periodic ? mesh.periodic_vertex_map[v] : v;
        if (r == v) {
            d.canon[v] = static_cast<int>(rep.size());
            rep.push_back(v);
        }
    }
    for (int v = 0; v < nv; ++v)
        if (d.canon[v] < 0)
            d.canon[v] = d.canon[mesh.periodic_vertex_map[v]];

    const int nn = static_cast<int>(rep.size());
    d.node_pos.resize(nn);
    for (int n = 0; n < nn; ++n) d.node_pos[n] = mesh.vertex_coords[rep[n]];
    d.node_area.assign(nn, 0.0);
    d.node_cells.assign(nn, {});
    std::vector<Vec2> normal_sum(nn, {0.0, 0.0});
    std::vector<double> normal_mag(nn, 0.0);

    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int k = 0; k < 3; ++k) {
            const int n = d.canon[mesh.triangles[c][k]];
            d.node_cells[n].push_back({c, k});
            d.node_area[n] += mesh.cell_area[c] / 3.0;
            const Vec2 ln = d.corners.ln[c][k];
            normal_sum[n] = normal_sum[n] + ln;
            normal_mag[n] += norm(ln);
        }

    d.node_closed.assign(nn, 0);
    for (int n = 0; n < nn; ++n)
        d.node_closed[n] = norm(normal_sum[n]) <= 1e-12 * std::max(1.0, normal_mag[n]) ? 1 : 0;

    // Exact dual-cell diameter: collect the subcell polygon points of every
    // incident corner in a chart translated so the corner sits on the
    // canonical representative (periodic fans stay contiguous), then take
    // the largest pairwise distance.
    d.node_h.assign(nn, 0.0);
    std::vector<Vec2> pts;
    for (int n = 0; n < nn; ++n) {
        pts.clear();
        pts.push_back(d.node_pos[n]);
        for (const auto& [c, k] : d.node_cells[n]) {
            const Vec2 xp = mesh.cell_vertex(c, k);
            const Vec2 xa = mesh.cell_vertex(c, (k + 1) % 3);
            const Vec2 xb = mesh.cell_vertex(c, (k + 2) % 3);
            const Vec2 shift = d.node_pos[n] - xp;
            pts.push_back(0.5 * (xp + xa) + shift);
            pts.push_back(0.5 * (xp + xb) + shift);
            pts.push_back((1.0 / 3.0) * (xp + xa + xb) + shift);
        }
        double h = 0.0;
        for (size_t i = 0; i < pts.size(); ++i)
            for (size_t j = i + 1; j < pts.size(); ++j) h = std::max(h, norm(pts[i] - pts[j]));
        d.node_h[n] = h;
    }
    return d;
}

std::vector<double> cell_divergence(const DualCellComplex& d, const std::vector<Vec2>& qp) {
    const TriMesh& mesh = *d.mesh;
    if (static_cast<int>(qp.size()) != d.n_nodes())
        throw Error("cell_divergence: one vector per node expected");
    std::vector<double> out(mesh.n_cells(), 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
            const Vec2 ln = d.corners.ln[c][k];
            const Vec2 q = qp[d.canon[mesh.triangles[c][k]]];
            s += ln.x * q.x + ln.y * q.y;
        }
        out[c] = s / mesh.cell_area[c];
    }
    return out;
}

std::vector<double> node_divergence(const DualCellComplex& d, const std::vector<Vec2>& qc) {
    const TriMesh& mesh = *d.mesh;
    if (static_cast<int>(qc.size()) != mesh.n_cells())
        throw Error("node_divergence: one vector per cell expected");
    std::vector<double> out(d.n_nodes(), 0.0);
    for (int n = 0; n < d.n_nodes(); ++n) {
        if (!d.node_closed[n]) continue;
        double s = 0.0;
        for (const auto& [c, k] : d.node_cells[n]) {
            const Vec2 ln = d.corners.ln[c][k];
            s += ln.x * qc[c].x + ln.y * qc[c].y;
        }
        out[n] = -s / d.node_area[n];
    }
    return out;
}

std::vector<double> node_gradient(const DualCellComplex& d, const std::vector<double>& qc,
                                  int m) {
    const TriMesh& mesh = *d.mesh;
    if (static_cast<int>(qc.size()) != mesh.n_cells() * static_cast<size_t>(m))
        throw Error("node_gradient: m values per cell expected");
    std::vector<double> out(static_cast<size_t>(d.n_nodes()) * m * 2, 0.0);
    for (int n = 0; n < d.n_nodes(); ++n) {
        if (!d.node_closed[n]) continue;
        double* g = &out[static_cast<size_t>(n) * m * 2];
        for (const auto& [c, k] : d.node_cells[n]) {
            const Vec2 ln = d.corners.ln[c][k];
            for (int j = 0; j < m; ++j) {
                g[j * 2 + 0] += ln.x * qc[static_cast<size_t>(c) * m + j];
                g[j * 2 + 1] += ln.y * qc[static_cast<size_t>(c) * m + j];
            }
        }
        for (int i = 0; i < m * 2; ++i) g[i] = -g[i] / d.node_area[n];
    }
    return out;
}

std::vector<double> entropy_stable_nodal_fluxes(const DualCellComplex& d,
                                                const SystemDescriptor& sys,
                                                const EulerEntropyPair& pair,
                                                const std::vector<double>& qc,
                                                const NodalFluxParams& params,
                                                std::vector<NodalFluxInfo>* info) {
    const TriMesh& mesh = *d.mesh;
    const int m = sys.m;
    if (sys.kind != SystemKind::Euler)
        throw Error("nodal flux: entropy-stable construction targets the gas system");
    if (static_cast<int>(qc.size()) != mesh.n_cells() * m)
        throw Error("nodal flux: m values per cell expected");
    if (params.viscosity && !(params.eps > 0.0))
        throw Error("nodal flux: viscosity strength must be positive");

    std::vector<double> out(static_cast<size_t>(d.n_nodes()) * m * 2, 0.0);
    if (info) info->assign(d.n_nodes(), {});

    std::vector<double> fc(2 * m), p4(m), psi(2);
    double G[8], HG[8], H[16];
    for (int n = 0; n < d.n_nodes(); ++n) {
        if (!d.node_closed[n]) continue;
        const auto& fan = d.node_cells[n];
        const double inv_cnt = 1.0 / static_cast<double>(fan.size());
        double* f = &out[static_cast<size_t>(n) * m * 2];

        // Mean flux, mean state, entropic gradient, potential divergence,
        // and wave speed over the fan.
        double qbar[4] = {0, 0, 0, 0};
        double divpsi = 0.0, a = 0.0;
        std::fill(G, G + 8, 0.0);
        for (const auto& [c, k] : fan) {
            const double* q = &qc[static_cast<size_t>(c) * m];
            if (!sys.admissible(q)) {
                char buf[128];
                std::snprintf(buf, sizeof buf,
                              "nodal flux: non-physical state in cell %d near (%.6g, %.6g)", c,
                              d.node_pos[n].x, d.node_pos[n].y);
                throw Error(buf);
            }
            sys.flux(q, fc.data());
            for (int i = 0; i < 2 * m; ++i) f[i] += inv_cnt * fc[i];
            for (int i = 0; i < m; ++i) qbar[i] += inv_cnt * q[i];
            pair.entropic(q, p4.data());
            pair.flux_potential(p4.data(), psi.data());
            const Vec2 ln = d.corners.ln[c][k];
            for (int j = 0; j < m; ++j) {
                G[j * 2 + 0] += ln.x * p4[j];
                G[j * 2 + 1] += ln.y * p4[j];
            }
            divpsi += ln.x * psi[0] + ln.y * psi[1];
            const double len = norm(ln);
            if (len > 0.0) a = std::max(a, sys.max_speed(q, ln / len));
        }
        for (int i = 0; i < 8; ++i) G[i] = -G[i] / d.node_area[n];
        divpsi = -divpsi / d.node_area[n];

        pair.inverse_hessian(qbar, H);
        double quad = 0.0;
        for (int i = 0; i < m; ++i)
            for (int e = 0; e < 2; ++e) {
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += H[i * m + j] * G[j * 2 + e];
                HG[i * 2 + e] = s;
                quad += s * G[i * 2 + e];
            }
        if (info) (*info)[n].quad = quad;
        if (std::abs(quad) < 1e-14) continue;  // mean flux already in place

        double fg = 0.0;
        for (int i = 0; i < 2 * m; ++i) fg += f[i] * G[i];
        const double alpha = -(fg - divpsi) / quad;
        const double visc = params.viscosity ? 0.5 * params.eps * d.node_h[n] * a : 0.0;
        for (int i = 0; i < 2 * m; ++i) f[i] += (alpha - visc) * HG[i];
        if (info) {
            (*info)[n].alpha = alpha;
            (*info)[n].corrected = true;
        }
    }
    return out;
}

std::vector<double> fv_rhs(const DualCellComplex& d, const std::vector<double>& node_flux,
                           int m) {
    const TriMesh& mesh = *d.mesh;
    if (node_flux.size() != static_cast<size_t>(d.n_nodes()) * m * 2)
        throw Error("fv_rhs: m-by-2 flux per node expected");
    std::vector<double> rate(static_cast<size_t>(mesh.n_cells()) * m, 0.0);
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int k = 0; k < 3; ++k) {
            const int n = d.canon[mesh.triangles[c][k]];
            const Vec2 ln = d.corners.ln[c][k];
            const double* f = &node_flux[static_cast<size_t>(n) * m * 2];
            for (int j = 0; j < m; ++j)
                rate[static_cast<size_t>(c) * m + j] -=
                    (f[j * 2 + 0] * ln.x + f[j * 2 + 1] * ln.y) / mesh.cell_area[c];
        }
    return rate;
}

void fv_step(const DualCellComplex& d, const SystemDescriptor& sys,
             const EulerEntropyPair& pair, std::vector<double>& qc, double dt,
             const NodalFluxParams& params, bool ssprk2) {
    for (int n = 0; n < d.n_nodes(); ++n)
        if (!d.node_closed[n])
            throw Error("fv_step: every dual cell must close (periodic mesh required)");
    const int m = sys.m;
    auto rate = [&](const std::vector<double>& q) {
        return fv_rhs(d, entropy_stable_nodal_fluxes(d, sys, pair, q, params), m);
    };
    const std::vector<double> r1 = rate(qc);
    if (!ssprk2) {
        for (size_t i = 0; i < qc.size(); ++i) qc[i] += dt * r1[i];
        return;
    }
    std::vector<double> q1(qc.size());
    for (size_t i = 0; i < qc.size(); ++i) q1[i] = qc[i] + dt * r1[i];
    const std::vector<double> r2 = rate(q1);
    for (size_t i = 0; i < qc.size(); ++i) qc[i] = 0.5 * (qc[i] + q1[i] + dt * r2[i]);
}

}  // namespace cgdg
