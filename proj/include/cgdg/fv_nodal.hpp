// Node-based finite volumes on the median-dual complex: corner-normal
// discrete divergence/gradient operators, an entropy-stable multidimensional
// nodal flux for the gas system, and the matching cell update. The degree-0
// element scheme with the same nodal fluxes produces identical updates.
#pragma once

#include <utility>
#include <vector>

#include "cgdg/mesh.hpp"
#include "cgdg/systems.hpp"

namespace cgdg {

// Median-dual cells: per (canonical) vertex, the union of the incident
// corner quadrilaterals (vertex, two edge midpoints, centroid), each of area
// |cell|/3. Periodic partner vertices share one node.
struct DualCellComplex {
    const TriMesh* mesh = nullptr;
    CornerNormalSet corners;
    std::vector<int> canon;        // vertex -> node id
    std::vector<Vec2> node_pos;    // canonical representative position
    std::vector<double> node_area;
    std::vector<double> node_h;    // exact dual-cell diameter (chart-aligned)
    std::vector<char> node_closed; // corner normals sum to zero
    std::vector<std::vector<std::pair<int, int>>> node_cells;  // (cell, corner)
    int n_nodes() const { return static_cast<int>(node_area.size()); }
};

DualCellComplex build_dual_cells(const TriMesh& mesh);

// (1/|cell|) sum_p <ln_pc, q_p>: divergence of node vectors, one value per
// cell; exact for affine fields sampled at the vertices.
std::vector<double> cell_divergence(const DualCellComplex& d, const std::vector<Vec2>& qp);

// -(1/|omega_p|) sum_c <ln_pc, q_c>: divergence of per-cell vectors at the
// nodes. Meaningful only where the dual cell closes; open nodes stay zero.
std::vector<double> node_divergence(const DualCellComplex& d, const std::vector<Vec2>& qc);

// -(1/|omega_p|) sum_c ln_pc (x) q_c: m-by-2 gradient of m-component cell
// data, layout out[node * m * 2 + k * 2 + d]. Open nodes stay zero.
std::vector<double> node_gradient(const DualCellComplex& d, const std::vector<double>& qc,
                                  int m);

struct NodalFluxParams {
    bool viscosity = true;
    double eps = 1.0;  // multiplies the h a / 2 viscosity coefficient
};

// Per-node construction diagnostics.
struct NodalFluxInfo {
    double alpha = 0.0;
    double quad = 0.0;       // H GRAD : GRAD, non-positive
    bool corrected = false;  // false when the degenerate-gradient guard fired
};

// Entropy-stable nodal flux tensors, m x 2 per node (open nodes zero):
//   f_p = {f}_p + (alpha_p - eps_p h_p a_p / 2) H_p GRAD_p
// with alpha_p chosen so the entropy production reduces to the (dissipative)
// viscosity part. States are cell-major, qc[c * m + k]; all must be
// admissible.
std::vector<double> entropy_stable_nodal_fluxes(const DualCellComplex& d,
                                                const SystemDescriptor& sys,
                                                const EulerEntropyPair& pair,
                                                const std::vector<double>& qc,
                                                const NodalFluxParams& params,
                                                std::vector<NodalFluxInfo>* info = nullptr);

// dq_c/dt = -(1/|cell|) sum_p f_p ln_pc for given nodal flux tensors.
std::vector<double> fv_rhs(const DualCellComplex& d, const std::vector<double>& node_flux,
                           int m);

// One step of the node-based scheme (SSP-RK2 by default, forward Euler
// otherwise); every dual cell must close, i.e. the mesh must be periodic.
void fv_step(const DualCellComplex& d, const SystemDescriptor& sys,
             const EulerEntropyPair& pair, std::vector<double>& qc, double dt,
             const NodalFluxParams& params, bool ssprk2 = true);

}  // namespace cgdg
