#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cgdg/basis.hpp"

using namespace cgdg;

TEST_CASE("nodality: basis i is 1 at node i and 0 at the others") {
    for (int d = 0; d <= 6; ++d) {
        TriangleBasis basis(d);
        const int n = basis.size();
        CHECK(n == (d + 1) * (d + 2) / 2);
        for (int j = 0; j < n; ++j) {
            auto vals = basis.eval(basis.nodes()[j]);
            for (int i = 0; i < n; ++i)
                CHECK(std::abs(vals[i] - (i == j ? 1.0 : 0.0)) <= 1e-12);
        }
    }
}

TEST_CASE("partition of unity at random points") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int d = 0; d <= 6; ++d) {
        TriangleBasis basis(d);
        for (int t = 0; t < 50; ++t) {
            double x = dist(rng), y = dist(rng) * (1.0 - x);
            auto vals = basis.eval({x, y});
            double s = 0.0;
            for (double v : vals) s += v;
            CHECK(std::abs(s - 1.0) <= 1e-13);
            auto grads = basis.eval_grad({x, y});
            Vec2 g{0.0, 0.0};
            for (auto& gr : grads) g += gr;
            CHECK(std::abs(g.x) <= 1e-12);
            CHECK(std::abs(g.y) <= 1e-12);
        }
    }
}

// Oracle: degree-d polynomials are reproduced exactly by nodal interpolation.
TEST_CASE("polynomial reproduction through interpolation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int d = 1; d <= 6; ++d) {
        TriangleBasis basis(d);
        // Random polynomial of total degree d in monomial form.
        std::vector<std::pair<int, int>> monos;
        for (int s = 0; s <= d; ++s)
            for (int a = 0; a <= s; ++a) monos.emplace_back(a, s - a);
        std::vector<double> c(monos.size());
        for (auto& v : c) v = dist(rng);
        auto poly = [&](Vec2 p) {
            double s = 0.0;
            for (size_t m = 0; m < monos.size(); ++m)
                s += c[m] * std::pow(p.x, monos[m].first) * std::pow(p.y, monos[m].second);
            return s;
        };
        std::vector<double> coeffs(basis.size());
        for (int i = 0; i < basis.size(); ++i) coeffs[i] = poly(basis.nodes()[i]);
        for (int t = 0; t < 30; ++t) {
            double x = dist(rng) * 0.5 + 0.25, y = dist(rng) * 0.2 + 0.2;
            if (x < 0 || y < 0 || x + y > 1) continue;
            auto vals = basis.eval({x, y});
            double s = 0.0;
            for (int i = 0; i < basis.size(); ++i) s += coeffs[i] * vals[i];
            CHECK(s == doctest::Approx(poly({x, y})).epsilon(1e-12));
        }
    }
}

// Oracle: central finite differences for gradients.
TEST_CASE("gradients agree with finite differences") {
    TriangleBasis basis(4);
    const double h = 1e-6;
    Vec2 p{0.31, 0.27};
    auto g = basis.eval_grad(p);
    auto fx1 = basis.eval({p.x + h, p.y}), fx0 = basis.eval({p.x - h, p.y});
    auto fy1 = basis.eval({p.x, p.y + h}), fy0 = basis.eval({p.x, p.y - h});
    for (int i = 0; i < basis.size(); ++i) {
        CHECK(g[i].x == doctest::Approx((fx1[i] - fx0[i]) / (2 * h)).epsilon(1e-6));
        CHECK(g[i].y == doctest::Approx((fy1[i] - fy0[i]) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("node classification counts") {
    for (int d = 1; d <= 6; ++d) {
        TriangleBasis basis(d);
        int nv = 0, ne = 0, ni = 0;
        for (auto& c : basis.node_classes()) {
            if (c.kind == NodeKind::Vertex) ++nv;
            else if (c.kind == NodeKind::Edge) ++ne;
            else ++ni;
        }
        CHECK(nv == 3);
        CHECK(ne == 3 * (d - 1));
        CHECK(ni == (d - 1) * (d - 2) / 2);
        // Edge ranks run 1..d-1 from the first vertex of each edge; the rank-r
        // node on edge 0 sits at x = r/d on the bottom edge.
        for (int i = 0; i < basis.size(); ++i) {
            auto& c = basis.node_classes()[i];
            if (c.kind == NodeKind::Edge) {
                CHECK(c.rank >= 1);
                CHECK(c.rank <= d - 1);
                if (c.which == 0)
                    CHECK(basis.nodes()[i].x == doctest::Approx(double(c.rank) / d));
            }
        }
    }
}

TEST_CASE("lattice triangulation covers the element") {
    for (int d = 1; d <= 4; ++d) {
        TriangleBasis basis(d);
        auto tris = basis.lattice_triangles();
        CHECK(static_cast<int>(tris.size()) == d * d);
        double area = 0.0;
        for (auto& t : tris) {
            Vec2 a = basis.nodes()[t[0]], b = basis.nodes()[t[1]], c = basis.nodes()[t[2]];
            area += 0.5 * cross(b - a, c - a);
        }
        CHECK(area == doctest::Approx(0.5).epsilon(1e-13));
    }
}
