// The two compatible approximation spaces on a triangulation: an
// element-wise discontinuous nodal space of degree N and a globally
// continuous nodal space of degree M = N + 1 whose dofs are merged across
// shared edges, vertices, and periodic identifications.
#pragma once

#include <functional>
#include <vector>

#include "cgdg/basis.hpp"
#include "cgdg/mesh.hpp"
#include "cgdg/quadrature.hpp"

namespace cgdg {

// Per-cell affine geometry: x(ref) = origin + J * ref.
struct CellGeom {
    Vec2 origin;
    double J[2][2];     // columns are edge vectors v1-v0, v2-v0
    double Jinv[2][2];
    double detJ;        // = 2 * area
};

std::vector<CellGeom> build_cell_geometry(const TriMesh& mesh);

inline Vec2 ref_to_phys(const CellGeom& g, Vec2 r) {
    return {g.origin.x + g.J[0][0] * r.x + g.J[0][1] * r.y,
            g.origin.y + g.J[1][0] * r.x + g.J[1][1] * r.y};
}
inline Vec2 phys_to_ref(const CellGeom& g, Vec2 x) {
    const Vec2 d = x - g.origin;
    return {g.Jinv[0][0] * d.x + g.Jinv[0][1] * d.y,
            g.Jinv[1][0] * d.x + g.Jinv[1][1] * d.y};
}
// Physical gradient from a reference gradient: J^{-T} grad_ref.
inline Vec2 grad_to_phys(const CellGeom& g, Vec2 gr) {
    return {g.Jinv[0][0] * gr.x + g.Jinv[1][0] * gr.y,
            g.Jinv[0][1] * gr.x + g.Jinv[1][1] * gr.y};
}

struct DGSpace {
    int degree;            // N >= 0
    TriangleBasis basis;   // L = (N+1)(N+2)/2 functions
    explicit DGSpace(int N) : degree(N), basis(N) {}
    int L() const { return basis.size(); }
};

// Globally numbered continuous space. Dof order: vertex orbits, then edge
// orbits (M - 1 dofs each, ranked from the low vertex of the canonical
// edge), then per-cell interior blocks.
struct CGSpace {
    int degree;  // M = N + 1
    TriangleBasis basis;
    const TriMesh* mesh = nullptr;
    bool periodic = false;

    int n_dofs = 0;
    int n_vertex_dofs = 0, n_edge_dofs = 0, n_interior_dofs = 0;
    std::vector<int> loc2glob;                 // [cell * P + local] -> dof
    std::vector<Vec2> dof_position;            // canonical representative
    std::vector<double> dof_h;                 // min incircle h over incident cells
    std::vector<char> dof_on_boundary;         // non-periodic domain boundary
    std::vector<std::vector<std::pair<int, int>>> dof_cells;  // (cell, local)

    CGSpace(const TriMesh& m, int M, bool periodic_merge);
    int P() const { return basis.size(); }
    int global(int cell, int local) const { return loc2glob[cell * P() + local]; }
};

// Element-blocked coefficients: a[(cell * L + node) * m + comp].
struct DGField {
    int m = 0, L = 0, cells = 0;
    std::vector<double> a;
    DGField() = default;
    DGField(int cells_, int L_, int m_)
        : m(m_), L(L_), cells(cells_), a(static_cast<size_t>(cells_) * L_ * m_, 0.0) {}
    double& at(int c, int i, int k) { return a[(static_cast<size_t>(c) * L + i) * m + k]; }
    double at(int c, int i, int k) const { return a[(static_cast<size_t>(c) * L + i) * m + k]; }
};

// Globally numbered coefficients: a[dof * m + comp].
struct CGField {
    int m = 0, n = 0;
    std::vector<double> a;
    CGField() = default;
    CGField(int n_, int m_) : m(m_), n(n_), a(static_cast<size_t>(n_) * m_, 0.0) {}
    double& at(int p, int k) { return a[static_cast<size_t>(p) * m + k]; }
    double at(int p, int k) const { return a[static_cast<size_t>(p) * m + k]; }
};

using ScalarFn = std::function<double(Vec2)>;
using VectorFn = std::function<void(Vec2, double*)>;  // writes m components

// Evaluation. Points are physical; the *_ref variants take reference coords.
void eval_dg_ref(const DGSpace& dg, const DGField& f, int cell, Vec2 ref, double* out);
void eval_dg(const TriMesh& mesh, const std::vector<CellGeom>& geom, const DGSpace& dg,
             const DGField& f, int cell, Vec2 x, double* out);
void eval_cg_in_cell(const CGSpace& cg, const std::vector<CellGeom>& geom, const CGField& f,
                     int cell, Vec2 x, double* out);
void eval_cg(const TriMesh& mesh, const std::vector<CellGeom>& geom, const CGSpace& cg,
             const CGField& f, Vec2 x, double* out);
// Gradient of each component: out[k * 2 + d], d = x/y.
void eval_grad_cg(const CGSpace& cg, const std::vector<CellGeom>& geom, const CGField& f,
                  int cell, Vec2 x, double* out);

DGField interpolate_dg(const TriMesh& mesh, const std::vector<CellGeom>& geom,
                       const DGSpace& dg, int m, const VectorFn& f);
// Element-local least squares against a quadrature rule of the given degree
// (defaults to one past twice the space degree for non-polynomial data).
DGField l2_project_dg(const TriMesh& mesh, const std::vector<CellGeom>& geom,
                      const DGSpace& dg, int m, const VectorFn& f, int quad_degree = -1);
CGField interpolate_cg(const CGSpace& cg, int m, const VectorFn& f);

inline VectorFn scalar_fn(ScalarFn f) {
    return [f = std::move(f)](Vec2 x, double* out) { out[0] = f(x); };
}

}  // namespace cgdg
