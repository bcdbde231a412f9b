#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cgdg/linalg.hpp"

using namespace cgdg;

TEST_CASE("vec2 algebra") {
    Vec2 a{1.0, 2.0}, b{-3.0, 0.5};
    CHECK(dot(a, b) == doctest::Approx(-2.0));
    CHECK(cross(a, b) == doctest::Approx(1.0 * 0.5 - 2.0 * (-3.0)));
    // Rotation by -90: CCW tangent of the bottom edge of a CCW square maps
    // to the downward (outward) normal.
    Vec2 t{1.0, 0.0};
    Vec2 n = rot_minus90(t);
    CHECK(n.x == doctest::Approx(0.0));
    CHECK(n.y == doctest::Approx(-1.0));
}

TEST_CASE("lu solves a hand-checked 3x3 system") {
    // x = (1, -2, 3) with A chosen so Ax is easy by hand:
    // A = [[2,1,0],[1,3,1],[0,1,4]], Ax = (0, -2, 10).
    MatD A(3, 3);
    A(0, 0) = 2; A(0, 1) = 1; A(0, 2) = 0;
    A(1, 0) = 1; A(1, 1) = 3; A(1, 2) = 1;
    A(2, 0) = 0; A(2, 1) = 1; A(2, 2) = 4;
    std::vector<double> b = {0.0, -2.0, 10.0};
    LU<double> lu(A);
    auto x = lu.solve(b);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(x[2] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("lu residual on random diagonally dominant systems") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 12;
        MatD A(n, n);
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = 0; j < n; ++j) {
                A(i, j) = dist(rng);
                row += std::abs(A(i, j));
            }
            A(i, i) += row;
        }
        std::vector<double> xe(n), b(n, 0.0);
        for (int i = 0; i < n; ++i) xe[i] = dist(rng);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b[i] += A(i, j) * xe[j];
        auto x = LU<double>(A).solve(b);
        for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xe[i]).epsilon(1e-12));
    }
}

TEST_CASE("matrix inverse round trip") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 8;
    MatD A(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) A(i, j) = dist(rng);
        A(i, i) += 4.0;
    }
    MatD inv = mat_inverse(A);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += A(i, k) * inv(k, j);
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("lu rejects singular input") {
    MatD A(2, 2);
    A(0, 0) = 1; A(0, 1) = 2;
    A(1, 0) = 2; A(1, 1) = 4;
    auto factor = [&] { LU<double> lu(A); (void)lu; };
    CHECK_THROWS_AS(factor(), std::runtime_error);
}

TEST_CASE("compensated accumulation beats naive summation") {
    // 1 + 1e-16 added 10^6 times cancels against -1: naive sum loses the
    // small parts; the compensated sum keeps them.
    Accum acc;
    acc.add(1.0);
    for (int i = 0; i < 1000000; ++i) acc.add(1e-16);
    acc.add(-1.0);
    CHECK(acc.value() == doctest::Approx(1e-10).epsilon(1e-6));
}
