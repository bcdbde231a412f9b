#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cgdg/quadrature.hpp"

using namespace cgdg;

// Oracle: closed form for reference-triangle monomial integrals,
// int x^a y^b = a! b! / (a+b+2)!. Hand-checked low cases frozen below.
TEST_CASE("monomial integral closed form matches hand values") {
    CHECK(reference_monomial_integral(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(reference_monomial_integral(1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(reference_monomial_integral(2, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(reference_monomial_integral(1, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
    CHECK(reference_monomial_integral(0, 3) == doctest::Approx(1.0 / 20.0).epsilon(1e-15));
}

TEST_CASE("gauss-legendre integrates polynomials of degree 2n-1 on [0,1]") {
    for (int n = 1; n <= 12; ++n) {
        EdgeRule r = gauss_legendre(n);
        double wsum = 0.0;
        for (double w : r.weights) {
            CHECK(w > 0.0);
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
        for (int d = 0; d <= 2 * n - 1; ++d) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += r.weights[k] * std::pow(r.points[k], d);
            CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("triangle rules: positive weights, exact monomials, points inside") {
    for (int degree = 0; degree <= 14; ++degree) {
        QuadratureRule r = triangle_rule(degree);
        double wsum = 0.0;
        for (int k = 0; k < r.size(); ++k) {
            CHECK(r.weights[k] > 0.0);
            wsum += r.weights[k];
            const Vec2 p = r.points[k];
            CHECK(p.x >= -1e-15);
            CHECK(p.y >= -1e-15);
            CHECK(p.x + p.y <= 1.0 + 1e-15);
        }
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
        for (int a = 0; a + 0 <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                double s = 0.0;
                for (int k = 0; k < r.size(); ++k)
                    s += r.weights[k] * std::pow(r.points[k].x, a) * std::pow(r.points[k].y, b);
                const double exact = reference_monomial_integral(a, b);
                CHECK(std::abs(s - exact) <= 1e-14 * std::max(1.0, std::abs(exact) * 10));
            }
        }
    }
}

TEST_CASE("triangle rule is symmetric under barycentric swap") {
    // Swapping x and y maps the rule onto itself: integrating x^2 y equals
    // integrating x y^2 term by term with weights attached.
    QuadratureRule r = triangle_rule(6);
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < r.size(); ++k) {
        s1 += r.weights[k] * r.points[k].x * r.points[k].x * r.points[k].y;
        s2 += r.weights[k] * r.points[k].y * r.points[k].y * r.points[k].x;
    }
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-15));
}

TEST_CASE("collapsed rule integrates its stated degree") {
    for (int n = 2; n <= 9; ++n) {
        QuadratureRule r = collapsed_triangle_rule(n);
        const int degree = r.degree;
        for (int a = 0; a <= degree; ++a) {
            for (int b = 0; a + b <= degree; ++b) {
                double s = 0.0;
                for (int k = 0; k < r.size(); ++k)
                    s += r.weights[k] * std::pow(r.points[k].x, a) * std::pow(r.points[k].y, b);
                CHECK(std::abs(s - reference_monomial_integral(a, b)) <= 1e-14);
            }
        }
    }
}
