// Quadrature on the reference triangle {x >= 0, y >= 0, x + y <= 1} and on
// the reference edge [0, 1]. Triangle rules are built from a collapsed
// tensor-product Gauss rule and then symmetrized over the six affine
// self-maps of the triangle, which keeps weights positive and exactness
// provable for any requested degree.
#pragma once

#include <vector>

#include "cgdg/linalg.hpp"

namespace cgdg {

struct QuadratureRule {
    int degree = 0;             // total polynomial degree integrated exactly
    std::vector<Vec2> points;   // reference-triangle coordinates
    std::vector<double> weights;  // sum to 1/2 (reference area)

    int size() const { return static_cast<int>(points.size()); }
};

struct EdgeRule {
    std::vector<double> points;   // in [0, 1]
    std::vector<double> weights;  // sum to 1
    int size() const { return static_cast<int>(points.size()); }
};

// Gauss-Legendre on [0, 1], exact for polynomials of degree 2n - 1.
EdgeRule gauss_legendre(int n);

// Symmetric positive-weight triangle rule exact for total degree >= `degree`.
QuadratureRule triangle_rule(int degree);

// Collapsed n x n tensor rule (not symmetrized); used for isoparametric
// control-volume integration where a tensor layout per direction is wanted.
QuadratureRule collapsed_triangle_rule(int n_per_direction);

// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double reference_monomial_integral(int a, int b);

}  // namespace cgdg
