#include "cgdg/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "cgdg/error.hpp"

namespace cgdg {

std::vector<CellGeom> build_cell_geometry(const TriMesh& mesh) {
    std::vector<CellGeom> geom(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Vec2 a = mesh.cell_vertex(c, 0);
        const Vec2 b = mesh.cell_vertex(c, 1);
        const Vec2 d = mesh.cell_vertex(c, 2);
        CellGeom& g = geom[c];
        g.origin = a;
        g.J[0][0] = b.x - a.x;
        g.J[0][1] = d.x - a.x;
        g.J[1][0] = b.y - a.y;
        g.J[1][1] = d.y - a.y;
        g.detJ = g.J[0][0] * g.J[1][1] - g.J[0][1] * g.J[1][0];
        const double inv = 1.0 / g.detJ;
        g.Jinv[0][0] = g.J[1][1] * inv;
        g.Jinv[0][1] = -g.J[0][1] * inv;
        g.Jinv[1][0] = -g.J[1][0] * inv;
        g.Jinv[1][1] = g.J[0][0] * inv;
    }
    return geom;
}

namespace {

// Edge lookup keyed on the sorted endpoint pair.
std::unordered_map<long long, int> edge_index_map(const TriMesh& mesh) {
    std::unordered_map<long long, int> map;
    map.reserve(static_cast<size_t>(mesh.n_edges()) * 2);
    const long long nv = mesh.n_vertices();
    for (int e = 0; e < mesh.n_edges(); ++e)
        map[mesh.edges[e][0] * nv + mesh.edges[e][1]] = e;
    return map;
}

}  // namespace

CGSpace::CGSpace(const TriMesh& m, int M, bool periodic_merge)
    : degree(M), basis(M), mesh(&m), periodic(m.has_periodic && periodic_merge) {
    if (M < 1) throw Error("CGSpace: degree must be at least 1");
    const int nv = m.n_vertices(), nc = m.n_cells(), ne = m.n_edges();
    const int edge_per = M - 1;
    const int int_per = (M - 1) * (M - 2) / 2;

    std::vector<char> vertex_on_boundary(nv, 0);
    for (int e = 0; e < ne; ++e)
        if (m.boundary_edge_flags[e]) {
            vertex_on_boundary[m.edges[e][0]] = 1;
            vertex_on_boundary[m.edges[e][1]] = 1;
        }

    // Canonical representative of each vertex / edge under the periodic
    // identification (identity when merging is off). Edge orbits have at
    // most two members, so the rank flip to the canonical edge is one hop.
    std::vector<int> vcanon(nv);
    for (int v = 0; v < nv; ++v) vcanon[v] = periodic ? m.periodic_vertex_map[v] : v;

    std::vector<int> ecanon(ne);
    std::vector<char> eflip(ne, 0);
    for (int e = 0; e < ne; ++e) ecanon[e] = e;
    if (periodic) {
        const auto edge_map = edge_index_map(m);
        const double tol = 1e-9 * std::max(m.box_width(), m.box_height());
        const auto& box = m.domain_box;
        for (int e = 0; e < ne; ++e) {
            if (!m.boundary_edge_flags[e]) continue;
            const int a = m.edges[e][0], b = m.edges[e][1];
            const Vec2 pa = m.vertex_coords[a], pb = m.vertex_coords[b];
            const bool on_x_line = (std::abs(pa.x - box[0]) < tol && std::abs(pb.x - box[0]) < tol) ||
                                   (std::abs(pa.x - box[2]) < tol && std::abs(pb.x - box[2]) < tol);
            const bool on_y_line = (std::abs(pa.y - box[1]) < tol && std::abs(pb.y - box[1]) < tol) ||
                                   (std::abs(pa.y - box[3]) < tol && std::abs(pb.y - box[3]) < tol);
            int qa = -1, qb = -1;
            if (on_x_line && m.periodic_x_partner[a] >= 0 && m.periodic_x_partner[b] >= 0) {
                qa = m.periodic_x_partner[a];
                qb = m.periodic_x_partner[b];
            } else if (on_y_line && m.periodic_y_partner[a] >= 0 && m.periodic_y_partner[b] >= 0) {
                qa = m.periodic_y_partner[a];
                qb = m.periodic_y_partner[b];
            } else {
                continue;  // this side of the boundary is not identified
            }
            const long long key = static_cast<long long>(std::min(qa, qb)) * nv + std::max(qa, qb);
            const auto it = edge_map.find(key);
            if (it == edge_map.end())
                throw Error("CGSpace: periodic boundary triangulations do not match");
            const int partner = it->second;
            if (partner < e) {
                ecanon[e] = partner;
                // Same orientation when the image of this edge's low vertex
                // is the partner's low vertex.
                eflip[e] = (qa == m.edges[partner][0]) ? 0 : 1;
            }
        }
    }

    // Dof numbering: vertex orbits, canonical edges, cell interiors.
    std::vector<int> vertex_dof(nv, -1);
    int next = 0;
    for (int v = 0; v < nv; ++v)
        if (vcanon[v] == v) vertex_dof[v] = next++;
    n_vertex_dofs = next;
    std::vector<int> edge_dof_base(ne, -1);
    if (edge_per > 0)
        for (int e = 0; e < ne; ++e)
            if (ecanon[e] == e) {
                edge_dof_base[e] = next;
                next += edge_per;
            }
    n_edge_dofs = next - n_vertex_dofs;
    const int interior_base = next;
    n_interior_dofs = nc * int_per;
    n_dofs = interior_base + n_interior_dofs;

    const int P = basis.size();
    loc2glob.assign(static_cast<size_t>(nc) * P, -1);
    dof_position.assign(n_dofs, Vec2{0.0, 0.0});
    dof_h.assign(n_dofs, 0.0);
    dof_on_boundary.assign(n_dofs, 0);
    dof_cells.assign(n_dofs, {});

    for (int v = 0; v < nv; ++v)
        if (vcanon[v] == v) {
            dof_position[vertex_dof[v]] = m.vertex_coords[v];
            dof_on_boundary[vertex_dof[v]] = vertex_on_boundary[v];
        }
    if (edge_per > 0)
        for (int e = 0; e < ne; ++e)
            if (ecanon[e] == e && edge_dof_base[e] >= 0) {
                const Vec2 a = m.vertex_coords[m.edges[e][0]];
                const Vec2 b = m.vertex_coords[m.edges[e][1]];
                for (int r = 1; r < M; ++r) {
                    const int dof = edge_dof_base[e] + r - 1;
                    const double t = double(r) / M;
                    dof_position[dof] = a + t * (b - a);
                    dof_on_boundary[dof] = m.boundary_edge_flags[e];
                }
            }

    const auto geom = build_cell_geometry(m);
    const auto& nodes = basis.nodes();
    const auto& classes = basis.node_classes();
    for (int c = 0; c < nc; ++c) {
        for (int l = 0; l < P; ++l) {
            const NodeClass& nk = classes[l];
            int g = -1;
            if (nk.kind == NodeKind::Vertex) {
                g = vertex_dof[vcanon[m.triangles[c][nk.which]]];
            } else if (nk.kind == NodeKind::Edge) {
                const int e = m.cell_edges[c][nk.which];
                // Rank along the stored low->high direction of the edge.
                const int first = m.triangles[c][nk.which];
                int slot = (first == m.edges[e][0]) ? nk.rank : M - nk.rank;
                if (eflip[e]) slot = M - slot;
                g = edge_dof_base[ecanon[e]] + slot - 1;
            } else {
                g = interior_base + c * int_per + nk.rank;
                dof_position[g] = ref_to_phys(geom[c], nodes[l]);
            }
            loc2glob[static_cast<size_t>(c) * P + l] = g;
            dof_cells[g].emplace_back(c, l);
        }
    }

    for (int g = 0; g < n_dofs; ++g) {
        double h = 0.0;
        bool first = true;
        for (const auto& [c, l] : dof_cells[g]) {
            h = first ? m.cell_h[c] : std::min(h, m.cell_h[c]);
            first = false;
        }
        dof_h[g] = h;
    }
}

void eval_dg_ref(const DGSpace& dg, const DGField& f, int cell, Vec2 ref, double* out) {
    const int L = dg.L(), m = f.m;
    std::vector<double> phi(L);
    dg.basis.eval(ref, phi.data());
    for (int k = 0; k < m; ++k) out[k] = 0.0;
    for (int i = 0; i < L; ++i) {
        const double p = phi[i];
        for (int k = 0; k < m; ++k) out[k] += p * f.at(cell, i, k);
    }
}

void eval_dg(const TriMesh&, const std::vector<CellGeom>& geom, const DGSpace& dg,
             const DGField& f, int cell, Vec2 x, double* out) {
    eval_dg_ref(dg, f, cell, phys_to_ref(geom[cell], x), out);
}

void eval_cg_in_cell(const CGSpace& cg, const std::vector<CellGeom>& geom, const CGField& f,
                     int cell, Vec2 x, double* out) {
    const int P = cg.P(), m = f.m;
    std::vector<double> psi(P);
    cg.basis.eval(phys_to_ref(geom[cell], x), psi.data());
    for (int k = 0; k < m; ++k) out[k] = 0.0;
    for (int i = 0; i < P; ++i) {
        const double p = psi[i];
        const int g = cg.global(cell, i);
        for (int k = 0; k < m; ++k) out[k] += p * f.at(g, k);
    }
}

void eval_cg(const TriMesh& mesh, const std::vector<CellGeom>& geom, const CGSpace& cg,
             const CGField& f, Vec2 x, double* out) {
    eval_cg_in_cell(cg, geom, f, locate_point(mesh, x).cell, x, out);
}

void eval_grad_cg(const CGSpace& cg, const std::vector<CellGeom>& geom, const CGField& f,
                  int cell, Vec2 x, double* out) {
    const int P = cg.P(), m = f.m;
    std::vector<Vec2> gr(P);
    cg.basis.eval_grad(phys_to_ref(geom[cell], x), gr.data());
    for (int k = 0; k < 2 * m; ++k) out[k] = 0.0;
    for (int i = 0; i < P; ++i) {
        const Vec2 gp = grad_to_phys(geom[cell], gr[i]);
        const int g = cg.global(cell, i);
        for (int k = 0; k < m; ++k) {
            out[k * 2 + 0] += gp.x * f.at(g, k);
            out[k * 2 + 1] += gp.y * f.at(g, k);
        }
    }
}

DGField interpolate_dg(const TriMesh& mesh, const std::vector<CellGeom>& geom,
                       const DGSpace& dg, int m, const VectorFn& f) {
    const int L = dg.L();
    DGField out(mesh.n_cells(), L, m);
    std::vector<double> val(m);
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int i = 0; i < L; ++i) {
            f(ref_to_phys(geom[c], dg.basis.nodes()[i]), val.data());
            for (int k = 0; k < m; ++k) out.at(c, i, k) = val[k];
        }
    return out;
}

DGField l2_project_dg(const TriMesh& mesh, const std::vector<CellGeom>& geom,
                      const DGSpace& dg, int m, const VectorFn& f, int quad_degree) {
    const int L = dg.L();
    if (quad_degree < 0) quad_degree = 2 * dg.degree + 2;
    const QuadratureRule rule = triangle_rule(std::max(quad_degree, 2 * dg.degree));
    std::vector<double> vals;
    std::vector<Vec2> grads;
    dg.basis.tabulate(rule, vals, grads);

    // Reference mass is shared by all cells; the affine volume factor
    // cancels between the matrix and the right-hand side.
    MatD mass(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            Accum s;
            for (int q = 0; q < rule.size(); ++q)
                s.add(rule.weights[q] * vals[q * L + i] * vals[q * L + j]);
            mass(i, j) = s.value();
        }
    LU<double> lu(mass);

    DGField out(mesh.n_cells(), L, m);
    std::vector<double> fx(m), rhs(static_cast<size_t>(L) * m), sol(L), col(L);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        std::fill(rhs.begin(), rhs.end(), 0.0);
        for (int q = 0; q < rule.size(); ++q) {
            f(ref_to_phys(geom[c], rule.points[q]), fx.data());
            for (int i = 0; i < L; ++i) {
                const double wphi = rule.weights[q] * vals[q * L + i];
                for (int k = 0; k < m; ++k) rhs[i * m + k] += wphi * fx[k];
            }
        }
        for (int k = 0; k < m; ++k) {
            for (int i = 0; i < L; ++i) col[i] = rhs[i * m + k];
            lu.solve(col.data(), sol.data());
            for (int i = 0; i < L; ++i) out.at(c, i, k) = sol[i];
        }
    }
    return out;
}

CGField interpolate_cg(const CGSpace& cg, int m, const VectorFn& f) {
    CGField out(cg.n_dofs, m);
    std::vector<double> val(m);
    for (int g = 0; g < cg.n_dofs; ++g) {
        f(cg.dof_position[g], val.data());
        for (int k = 0; k < m; ++k) out.at(g, k) = val[k];
    }
    return out;
}

}  // namespace cgdg
