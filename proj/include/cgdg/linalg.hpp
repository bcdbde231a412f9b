// Small dense linear algebra used throughout: 2D vectors, row-major
// matrices with LU solves, and compensated accumulation for the
// cancellation-sensitive diagnostic sums.
#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cgdg {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::sqrt(dot(v, v)); }
// Rotation by -90 degrees: maps a CCW-traversed edge tangent to the outward normal.
inline Vec2 rot_minus90(const Vec2& v) { return {v.y, -v.x}; }

// Row-major dense matrix over a floating scalar. T = long double is used
// where node-placement conditioning matters (Vandermonde solves).
template <class T>
struct Mat {
    int nr = 0, nc = 0;
    std::vector<T> a;

    Mat() = default;
    Mat(int r, int c) : nr(r), nc(c), a(static_cast<size_t>(r) * c, T(0)) {}

    T& operator()(int i, int j) { return a[static_cast<size_t>(i) * nc + j]; }
    const T& operator()(int i, int j) const { return a[static_cast<size_t>(i) * nc + j]; }
};

using MatD = Mat<double>;

// In-place LU with partial pivoting. Throws on (numerically) singular input.
template <class T>
struct LU {
    Mat<T> lu;
    std::vector<int> piv;

    explicit LU(Mat<T> m) : lu(std::move(m)), piv(lu.nr) {
        const int n = lu.nr;
        if (n != lu.nc) throw std::invalid_argument("LU: matrix must be square");
        for (int i = 0; i < n; ++i) piv[i] = i;
        for (int k = 0; k < n; ++k) {
            int p = k;
            T best = std::abs(lu(k, k));
            for (int i = k + 1; i < n; ++i) {
                T v = std::abs(lu(i, k));
                if (v > best) { best = v; p = i; }
            }
            if (!(best > T(0))) throw std::runtime_error("LU: singular matrix");
            if (p != k) {
                std::swap(piv[p], piv[k]);
                for (int j = 0; j < n; ++j) std::swap(lu(p, j), lu(k, j));
            }
            const T d = lu(k, k);
            for (int i = k + 1; i < n; ++i) {
                const T f = lu(i, k) / d;
                lu(i, k) = f;
                for (int j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
            }
        }
    }

    // Solves A x = b; b and x may alias.
    void solve(const T* b, T* x) const {
        const int n = lu.nr;
        std::vector<T> y(n);
        for (int i = 0; i < n; ++i) y[i] = b[piv[i]];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) y[i] -= lu(i, j) * y[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) y[i] -= lu(i, j) * y[j];
            y[i] /= lu(i, i);
        }
        for (int i = 0; i < n; ++i) x[i] = y[i];
    }

    std::vector<T> solve(const std::vector<T>& b) const {
        std::vector<T> x(b.size());
        solve(b.data(), x.data());
        return x;
    }
};

template <class T>
Mat<T> mat_inverse(const Mat<T>& m) {
    const int n = m.nr;
    LU<T> lu(m);
    Mat<T> inv(n, n);
    std::vector<T> e(n, T(0)), col(n);
    for (int j = 0; j < n; ++j) {
        e[j] = T(1);
        lu.solve(e.data(), col.data());
        for (int i = 0; i < n; ++i) inv(i, j) = col[i];
        e[j] = T(0);
    }
    return inv;
}

// Neumaier-compensated accumulator; keeps diagnostic contractions that
// cancel to ~1e-14 absolute from drowning in summation roundoff.
struct Accum {
    double s = 0.0, c = 0.0;
    void add(double v) {
        double t = s + v;
        if (std::abs(s) >= std::abs(v)) c += (s - t) + v;
        else c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

}  // namespace cgdg
