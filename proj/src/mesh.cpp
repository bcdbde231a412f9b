#include "cgdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace cgdg {

namespace {

double signed_area(Vec2 a, Vec2 b, Vec2 c) { return 0.5 * cross(b - a, c - a); }

// Deterministic uniform in [-1, 1); avoids the implementation-defined
// std::uniform_real_distribution so generated meshes are bit-stable.
double rand_sym(std::mt19937_64& rng) {
    return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

int find_orbit_root(std::vector<int>& parent, int v) {
    while (parent[v] != v) {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    return v;
}

}  // namespace

TriMesh build_trimesh(std::vector<Vec2> vertices,
                      std::vector<std::array<int, 3>> triangles,
                      std::vector<std::array<int, 2>> periodic_pairs) {
    TriMesh m;
    m.vertex_coords = std::move(vertices);
    m.triangles = std::move(triangles);
    const int nv = m.n_vertices(), nc = m.n_cells();
    if (nv < 3 || nc < 1) throw Error("mesh: needs at least one triangle");

    double xmin = m.vertex_coords[0].x, xmax = xmin;
    double ymin = m.vertex_coords[0].y, ymax = ymin;
    for (const Vec2& v : m.vertex_coords) {
        xmin = std::min(xmin, v.x); xmax = std::max(xmax, v.x);
        ymin = std::min(ymin, v.y); ymax = std::max(ymax, v.y);
    }
    m.domain_box = {xmin, ymin, xmax, ymax};

    m.cell_area.resize(nc);
    m.cell_h.resize(nc);
    Accum area_sum;
    for (int c = 0; c < nc; ++c) {
        for (int k = 0; k < 3; ++k) {
            const int v = m.triangles[c][k];
            if (v < 0 || v >= nv) throw Error("mesh: triangle vertex index out of range");
        }
        const Vec2 a = m.cell_vertex(c, 0), b = m.cell_vertex(c, 1), d = m.cell_vertex(c, 2);
        const double A = signed_area(a, b, d);
        if (!(A > 0.0)) throw Error("mesh: triangle with non-positive area (CCW required)");
        m.cell_area[c] = A;
        const double s = 0.5 * (norm(b - a) + norm(d - b) + norm(a - d));
        m.cell_h[c] = 2.0 * A / s;
        area_sum.add(A);
    }
    // Skeleton with low->high orientation; cells recorded by side.
    std::map<std::pair<int, int>, int> edge_ids;
    m.cell_edges.resize(nc);
    for (int c = 0; c < nc; ++c) {
        for (int k = 0; k < 3; ++k) {
            const int a = m.triangles[c][k], b = m.triangles[c][(k + 1) % 3];
            const auto key = std::minmax(a, b);
            auto it = edge_ids.find(key);
            int e;
            if (it == edge_ids.end()) {
                e = m.n_edges();
                edge_ids.emplace(key, e);
                m.edges.push_back({key.first, key.second});
                m.edge_to_cells.push_back({-1, -1});
            } else {
                e = it->second;
            }
            // Cell c traverses a->b CCW; relative to the stored low->high
            // direction it sits left when a < b, right otherwise.
            const int side = (a < b) ? 0 : 1;
            if (m.edge_to_cells[e][side] != -1)
                throw Error("mesh: non-conforming connectivity (edge with 3+ incident cells)");
            m.edge_to_cells[e][side] = c;
            m.cell_edges[c][k] = e;
        }
    }
    m.boundary_edge_flags.resize(m.n_edges());
    for (int e = 0; e < m.n_edges(); ++e) {
        const auto& cc = m.edge_to_cells[e];
        if (cc[0] == -1 && cc[1] == -1) throw Error("mesh: orphan edge");
        m.boundary_edge_flags[e] = (cc[0] == -1 || cc[1] == -1) ? 1 : 0;
    }

    const double box_area = m.box_width() * m.box_height();
    if (box_area > 0.0 && std::abs(area_sum.value() - box_area) > 1e-12 * box_area)
        throw Error("mesh: triangle areas do not tile the bounding box");

    m.vertex_to_cells.assign(nv, {});
    for (int c = 0; c < nc; ++c)
        for (int k = 0; k < 3; ++k) m.vertex_to_cells[m.triangles[c][k]].push_back(c);
    for (auto& lst : m.vertex_to_cells) std::sort(lst.begin(), lst.end());

    // Periodic identification layer.
    m.periodic_vertex_map.resize(nv);
    for (int v = 0; v < nv; ++v) m.periodic_vertex_map[v] = v;
    m.periodic_x_partner.assign(nv, -1);
    m.periodic_y_partner.assign(nv, -1);
    if (!periodic_pairs.empty()) {
        const double wx = m.box_width(), wy = m.box_height();
        std::vector<int> parent(nv);
        for (int v = 0; v < nv; ++v) parent[v] = v;
        for (auto& pr : periodic_pairs) {
            const int a = pr[0], b = pr[1];
            if (a < 0 || a >= nv || b < 0 || b >= nv || a == b)
                throw Error("mesh: bad periodic pair");
            const Vec2 d = m.vertex_coords[a] - m.vertex_coords[b];
            const bool x_pair = std::abs(std::abs(d.x) - wx) < 1e-9 * wx && std::abs(d.y) < 1e-9 * wy;
            const bool y_pair = std::abs(std::abs(d.y) - wy) < 1e-9 * wy && std::abs(d.x) < 1e-9 * wx;
            if (!x_pair && !y_pair)
                throw Error("mesh: periodic pair does not differ by one box period");
            auto& partner = x_pair ? m.periodic_x_partner : m.periodic_y_partner;
            if (partner[a] != -1 || partner[b] != -1)
                throw Error("mesh: periodic map is not an involution per axis");
            partner[a] = b;
            partner[b] = a;
            const int ra = find_orbit_root(parent, a), rb = find_orbit_root(parent, b);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
        for (int v = 0; v < nv; ++v) m.periodic_vertex_map[v] = find_orbit_root(parent, v);
        m.periodic_pairs = std::move(periodic_pairs);
        m.has_periodic = true;
    }

    // Background bins sized for ~O(1) candidates per query.
    const int nb = std::max(1, static_cast<int>(std::sqrt(double(nc) / 2.0)));
    m.grid_nx = nb;
    m.grid_ny = nb;
    m.grid_cells.assign(static_cast<size_t>(nb) * nb, {});
    const double gw = m.box_width() / nb, gh = m.box_height() / nb;
    for (int c = 0; c < nc; ++c) {
        double cxmin = 1e300, cxmax = -1e300, cymin = 1e300, cymax = -1e300;
        for (int k = 0; k < 3; ++k) {
            const Vec2 p = m.cell_vertex(c, k);
            cxmin = std::min(cxmin, p.x); cxmax = std::max(cxmax, p.x);
            cymin = std::min(cymin, p.y); cymax = std::max(cymax, p.y);
        }
        const int i0 = std::clamp(int((cxmin - xmin) / gw), 0, nb - 1);
        const int i1 = std::clamp(int((cxmax - xmin) / gw), 0, nb - 1);
        const int j0 = std::clamp(int((cymin - ymin) / gh), 0, nb - 1);
        const int j1 = std::clamp(int((cymax - ymin) / gh), 0, nb - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i)
                m.grid_cells[static_cast<size_t>(j) * nb + i].push_back(c);
    }
    return m;
}

TriMesh generate_square_mesh(int nx, int ny, const std::array<double, 4>& box,
                             double perturb, unsigned long long seed) {
    if (nx < 2 || ny < 2) throw Error("meshgen: nx and ny must be >= 2");
    if (!(perturb >= 0.0 && perturb < 0.3)) throw Error("meshgen: perturb must be in [0, 0.3)");
    const double x0 = box[0], y0 = box[1], x1 = box[2], y1 = box[3];
    if (!(x1 > x0 && y1 > y0)) throw Error("meshgen: empty box");
    const double dx = (x1 - x0) / nx, dy = (y1 - y0) / ny;

    auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
    std::vector<Vec2> base((nx + 1) * (ny + 1));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            base[vid(i, j)] = {x0 + i * dx, y0 + j * dy};

    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<size_t>(2) * nx * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int bl = vid(i, j), br = vid(i + 1, j), tr = vid(i + 1, j + 1), tl = vid(i, j + 1);
            if ((i + j) % 2 == 0) {
                tris.push_back({bl, br, tr});
                tris.push_back({bl, tr, tl});
            } else {
                tris.push_back({bl, br, tl});
                tris.push_back({br, tr, tl});
            }
        }
    }

    // Jitter directions are drawn once; retries only shrink the magnitude,
    // which converges to the valid structured mesh.
    std::mt19937_64 rng(seed);
    std::vector<Vec2> dir(base.size(), {0.0, 0.0});
    for (int j = 1; j < ny; ++j)
        for (int i = 1; i < nx; ++i) {
            const double ux = rand_sym(rng), uy = rand_sym(rng);
            dir[vid(i, j)] = {ux, uy};
        }

    const double hloc = std::min(dx, dy);
    const double area_floor = 0.02 * 0.5 * dx * dy;
    std::vector<Vec2> pts = base;
    double scale = 1.0;
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (size_t v = 0; v < base.size(); ++v)
            pts[v] = base[v] + (perturb * scale * hloc) * dir[v];
        bool ok = true;
        for (auto& t : tris) {
            if (signed_area(pts[t[0]], pts[t[1]], pts[t[2]]) < area_floor) {
                ok = false;
                break;
            }
        }
        if (ok) {
            std::vector<std::array<int, 2>> pairs;
            for (int j = 0; j <= ny; ++j) pairs.push_back({vid(0, j), vid(nx, j)});
            for (int i = 0; i <= nx; ++i) pairs.push_back({vid(i, 0), vid(i, ny)});
            return build_trimesh(std::move(pts), std::move(tris), std::move(pairs));
        }
        scale *= 0.8;
    }
    throw Error("meshgen: could not find a non-inverting jitter in 100 attempts");
}

CornerNormalSet corner_normals(const TriMesh& mesh) {
    CornerNormalSet cn;
    const int nc = mesh.n_cells();
    cn.ln.resize(nc);
    cn.half_minus.resize(nc);
    cn.half_plus.resize(nc);
    for (int c = 0; c < nc; ++c) {
        for (int p = 0; p < 3; ++p) {
            const Vec2 xp = mesh.cell_vertex(c, p);
            const Vec2 xnext = mesh.cell_vertex(c, (p + 1) % 3);
            const Vec2 xprev = mesh.cell_vertex(c, (p + 2) % 3);
            // Area gradient: half the neighbour difference rotated by -90.
            cn.ln[c][p] = 0.5 * rot_minus90(xnext - xprev);
            cn.half_minus[c][p] = 0.5 * rot_minus90(xp - xprev);
            cn.half_plus[c][p] = 0.5 * rot_minus90(xnext - xp);
        }
    }
    return cn;
}

PointLocation locate_point(const TriMesh& mesh, Vec2 x) {
    const auto& box = mesh.domain_box;
    const double tol_box = 1e-12 * std::max(mesh.box_width(), mesh.box_height());
    if (x.x < box[0] - tol_box || x.x > box[2] + tol_box ||
        x.y < box[1] - tol_box || x.y > box[3] + tol_box)
        throw Error("locate_point: point outside domain box");

    auto try_cell = [&](int c, PointLocation& out) {
        const Vec2 a = mesh.cell_vertex(c, 0), b = mesh.cell_vertex(c, 1),
                   d = mesh.cell_vertex(c, 2);
        const double A = mesh.cell_area[c];
        const double l0 = signed_area(x, b, d) / A;
        const double l1 = signed_area(a, x, d) / A;
        const double l2 = 1.0 - l0 - l1;
        const double tol = 1e-12;
        if (l0 >= -tol && l1 >= -tol && l2 >= -tol) {
            out.cell = c;
            out.bary = {l0, l1, l2};
            return true;
        }
        return false;
    };

    const int i = std::clamp(int((x.x - box[0]) / (mesh.box_width() / mesh.grid_nx)), 0,
                             mesh.grid_nx - 1);
    const int j = std::clamp(int((x.y - box[1]) / (mesh.box_height() / mesh.grid_ny)), 0,
                             mesh.grid_ny - 1);
    PointLocation loc;
    // Bin lists are ascending, so the first hit is the lowest-id containing
    // cell (every containing cell overlaps this bin).
    for (int c : mesh.grid_cells[static_cast<size_t>(j) * mesh.grid_nx + i])
        if (try_cell(c, loc)) return loc;
    // Roundoff fallback near bin borders.
    for (int c = 0; c < mesh.n_cells(); ++c)
        if (try_cell(c, loc)) return loc;
    throw Error("locate_point: no containing cell found");
}

}  // namespace cgdg
