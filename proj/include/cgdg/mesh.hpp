// Conforming unstructured triangular meshes: construction, adjacency,
// corner-normal geometry, periodic identification, point location, and a
// deterministic jittered generator for square domains.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "cgdg/error.hpp"
#include "cgdg/linalg.hpp"

namespace cgdg {

struct TriMesh {
    std::vector<Vec2> vertex_coords;
    std::vector<std::array<int, 3>> triangles;  // CCW vertex ids

    // Skeleton: edges stored low vertex id -> high vertex id. Incident cells
    // are stored by side of the directed edge v0 -> v1 (left, right); a
    // boundary edge has exactly one side filled and the other -1.
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> edge_to_cells;
    std::vector<char> boundary_edge_flags;
    std::vector<std::array<int, 3>> cell_edges;  // edge id between local vertices (k, k+1)

    std::vector<std::vector<int>> vertex_to_cells;  // incident cells, ascending id

    // Periodic identification: raw involution pairs (per axis) plus the
    // orbit-canonical representative of every vertex (identity if unpaired).
    bool has_periodic = false;
    std::vector<std::array<int, 2>> periodic_pairs;
    std::vector<int> periodic_vertex_map;
    // Per-axis partner of each vertex (-1 if none): the vertex one box
    // period away in x resp. y.
    std::vector<int> periodic_x_partner;
    std::vector<int> periodic_y_partner;

    std::array<double, 4> domain_box{};  // xmin, ymin, xmax, ymax

    std::vector<double> cell_area;
    std::vector<double> cell_h;  // incircle diameter, 2 * area / semiperimeter

    // Background bins for point location.
    int grid_nx = 0, grid_ny = 0;
    std::vector<std::vector<int>> grid_cells;

    int n_vertices() const { return static_cast<int>(vertex_coords.size()); }
    int n_cells() const { return static_cast<int>(triangles.size()); }
    int n_edges() const { return static_cast<int>(edges.size()); }

    Vec2 cell_vertex(int c, int k) const { return vertex_coords[triangles[c][k]]; }
    double box_width() const { return domain_box[2] - domain_box[0]; }
    double box_height() const { return domain_box[3] - domain_box[1]; }
};

struct CornerNormalSet {
    // ln[c][p]: the area gradient of cell c with respect to vertex p, equal
    // to half the 90-degree-rotated difference of the neighbouring vertices.
    // half_minus/half_plus split it into the two half-edge contributions
    // (edge into p, edge out of p).
    std::vector<std::array<Vec2, 3>> ln;
    std::vector<std::array<Vec2, 3>> half_minus;
    std::vector<std::array<Vec2, 3>> half_plus;
};

// Builds adjacency, validates conformity and positivity, and computes the
// derived geometry. The periodic pairs, if given, must each match up to one
// box period.
TriMesh build_trimesh(std::vector<Vec2> vertices,
                      std::vector<std::array<int, 3>> triangles,
                      std::vector<std::array<int, 2>> periodic_pairs = {});

// Deterministic criss-cross generator: nx-by-ny squares split along
// alternating diagonals, interior vertices jittered by `perturb` times the
// local spacing. Boundary vertices stay put so periodic pairing is exact.
TriMesh generate_square_mesh(int nx, int ny, const std::array<double, 4>& box,
                             double perturb, unsigned long long seed);

CornerNormalSet corner_normals(const TriMesh& mesh);

struct PointLocation {
    int cell = -1;
    std::array<double, 3> bary{};  // barycentric w.r.t. the cell's vertices
};

// Lowest-id containing cell; throws if x lies outside the domain box.
PointLocation locate_point(const TriMesh& mesh, Vec2 x);

TriMesh read_mesh(const std::string& path);
void write_mesh(const TriMesh& mesh, const std::string& path);

}  // namespace cgdg
