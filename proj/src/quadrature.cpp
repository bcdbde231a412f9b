#include "cgdg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace cgdg {

EdgeRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    EdgeRule r;
    r.points.resize(n);
    r.weights.resize(n);
    // Newton iteration on P_n over [-1, 1], then map to [0, 1]. Long double
    // keeps the nodes good to ~1e-18 so downstream exactness tests sit at
    // double roundoff.
    for (int i = 0; i < n; ++i) {
        long double x = std::cos(M_PIl * (i + 0.75L) / (n + 0.5L));
        long double pp = 0.0L;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1.0L, p1 = x;
            if (n == 1) { p1 = x; }
            for (int k = 2; k <= n; ++k) {
                long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            long double pn = (n == 1) ? x : p1;
            long double pm = (n == 1) ? 1.0L : p0;
            pp = n * (x * pn - pm) / (x * x - 1.0L);
            long double dx = pn / pp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        long double w = 2.0L / ((1.0L - x * x) * pp * pp);
        r.points[i] = static_cast<double>((x + 1.0L) / 2.0L);
        r.weights[i] = static_cast<double>(w / 2.0L);
    }
    return r;
}

QuadratureRule collapsed_triangle_rule(int n) {
    // Map the unit square to the triangle by x = u(1-v), y = v with
    // Jacobian (1-v); the weight is folded into the v-direction integrand,
    // so n points per direction integrate total degree 2n - 2 exactly.
    EdgeRule g = gauss_legendre(n);
    QuadratureRule r;
    r.degree = 2 * n - 2;
    r.points.reserve(static_cast<size_t>(n) * n);
    r.weights.reserve(static_cast<size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        const double v = g.points[j], wv = g.weights[j];
        for (int i = 0; i < n; ++i) {
            const double u = g.points[i], wu = g.weights[i];
            r.points.push_back({u * (1.0 - v), v});
            r.weights.push_back(wu * wv * (1.0 - v));
        }
    }
    return r;
}

QuadratureRule triangle_rule(int degree) {
    if (degree < 0) throw std::invalid_argument("triangle_rule: degree must be >= 0");
    // (1-v) weight raises the v-degree by one: need 2n - 2 >= degree + 1
    // in the worst direction, i.e. n >= (degree + 3) / 2.
    const int n = (degree + 3 + 1) / 2;
    QuadratureRule base = collapsed_triangle_rule(n);

    // Average over the six barycentric permutations. Affine self-maps of the
    // triangle preserve total-degree polynomial spaces, so the average of
    // six exact rules is exact and fully symmetric.
    static const int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                   {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    QuadratureRule r;
    r.degree = degree;
    const int q = base.size();
    r.points.reserve(static_cast<size_t>(6) * q);
    r.weights.reserve(static_cast<size_t>(6) * q);
    for (int k = 0; k < q; ++k) {
        const double lam[3] = {1.0 - base.points[k].x - base.points[k].y,
                               base.points[k].x, base.points[k].y};
        const double w6 = base.weights[k] / 6.0;
        for (const auto& p : perm) {
            r.points.push_back({lam[p[1]], lam[p[2]]});
            r.weights.push_back(w6);
        }
    }
    return r;
}

double reference_monomial_integral(int a, int b) {
    // a! b! / (a + b + 2)! computed as a product to avoid overflow.
    long double v = 1.0L;
    for (int k = 1; k <= a + b + 2; ++k) v /= k;
    for (int k = 1; k <= a; ++k) v *= k;
    for (int k = 1; k <= b; ++k) v *= k;
    return static_cast<double>(v);
}

}  // namespace cgdg
