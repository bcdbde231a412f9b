// Nodal Lagrange basis on the reference triangle for an equispaced
// barycentric lattice of a given degree. The basis is represented in the
// Bernstein basis with coefficients obtained from a long-double Vandermonde
// solve, so nodality and partition of unity hold to double roundoff for all
// supported degrees (0 through 6; the top degree serves the curved
// control-volume geometry rather than the solution spaces).
#pragma once

#include <array>
#include <utility>
#include <vector>

#include "cgdg/linalg.hpp"
#include "cgdg/quadrature.hpp"

namespace cgdg {

enum class NodeKind { Vertex, Edge, Interior };

struct NodeClass {
    NodeKind kind;
    // Vertex: which corner (0..2). Edge: which reference edge (0: V0-V1,
    // 1: V1-V2, 2: V2-V0) and the 1-based rank along that edge measured from
    // its first vertex. Interior: sequential interior index.
    int which = 0;
    int rank = 0;
};

class TriangleBasis {
  public:
    explicit TriangleBasis(int degree);

    int degree() const { return degree_; }
    int size() const { return n_; }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<NodeClass>& node_classes() const { return classes_; }

    // Values / gradients of all basis functions at a reference point.
    void eval(Vec2 p, double* vals) const;
    void eval_grad(Vec2 p, Vec2* grads) const;
    std::vector<double> eval(Vec2 p) const;
    std::vector<Vec2> eval_grad(Vec2 p) const;

    // Cached tables at the points of a rule: vals[q*n + i], grads likewise.
    void tabulate(const QuadratureRule& rule, std::vector<double>& vals,
                  std::vector<Vec2>& grads) const;

    // Lattice sub-triangulation (vertex index triples) for plotting output;
    // max(degree, 1)^2 small triangles covering the reference element.
    std::vector<std::array<int, 3>> lattice_triangles() const;

  private:
    int degree_;
    int n_;
    std::vector<Vec2> nodes_;
    std::vector<NodeClass> classes_;
    std::vector<std::pair<int, int>> monos_;  // (a, b) exponent pairs
    MatD coeff_;                              // coeff_(i, mono): basis i
};

}  // namespace cgdg
