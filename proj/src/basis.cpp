#include "cgdg/basis.hpp"

#include <stdexcept>

namespace cgdg {

namespace {

long double ipow(long double x, int e) {
    long double r = 1.0L;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}

long double multinomial(int d, int i, int j, int k) {
    long double r = 1.0L;
    for (int t = 1; t <= d; ++t) r *= t;
    for (int t = 1; t <= i; ++t) r /= t;
    for (int t = 1; t <= j; ++t) r /= t;
    for (int t = 1; t <= k; ++t) r /= t;
    return r;
}

}  // namespace

// The nodal basis is stored in the Bernstein basis of the same degree:
// values of Bernstein polynomials lie in [0, 1] on the element, which keeps
// nodality and partition of unity at double roundoff even at degree 5
// (a monomial representation loses ~1e-13 there).
TriangleBasis::TriangleBasis(int degree) : degree_(degree) {
    if (degree < 0 || degree > 6)
        throw std::invalid_argument("TriangleBasis: supported degrees are 0..6");
    n_ = (degree + 1) * (degree + 2) / 2;

    if (degree == 0) {
        // Single constant function; node at the centroid so interpolation
        // samples the cell center.
        nodes_ = {{1.0 / 3.0, 1.0 / 3.0}};
        classes_ = {{NodeKind::Interior, 0, 0}};
        monos_ = {{0, 0}};
        coeff_ = MatD(1, 1);
        coeff_(0, 0) = 1.0;
        return;
    }

    const int d = degree;
    int interior_seq = 0;
    for (int j = 0; j <= d; ++j) {
        for (int i = 0; i + j <= d; ++i) {
            nodes_.push_back({double(i) / d, double(j) / d});
            const int k = d - i - j;  // barycentric index of vertex 0
            NodeClass nc{NodeKind::Interior, 0, 0};
            if (i == d) nc = {NodeKind::Vertex, 1, 0};
            else if (j == d) nc = {NodeKind::Vertex, 2, 0};
            else if (k == d) nc = {NodeKind::Vertex, 0, 0};
            else if (j == 0) nc = {NodeKind::Edge, 0, i};          // V0 -> V1
            else if (k == 0) nc = {NodeKind::Edge, 1, j};          // V1 -> V2
            else if (i == 0) nc = {NodeKind::Edge, 2, d - j};      // V2 -> V0
            else nc = {NodeKind::Interior, 0, interior_seq++};
            classes_.push_back(nc);
        }
    }

    // monos_ holds Bernstein multi-indices as (j, k) with i = d - j - k.
    for (int k = 0; k <= d; ++k)
        for (int j = 0; j + k <= d; ++j) monos_.emplace_back(j, k);

    Mat<long double> V(n_, n_);
    for (int p = 0; p < n_; ++p) {
        const long double l1 = nodes_[p].x, l2 = nodes_[p].y, l0 = 1.0L - l1 - l2;
        for (int m = 0; m < n_; ++m) {
            const int j = monos_[m].first, k = monos_[m].second, i = d - j - k;
            V(p, m) = multinomial(d, i, j, k) * ipow(l0, i) * ipow(l1, j) * ipow(l2, k);
        }
    }
    Mat<long double> inv = mat_inverse(V);
    coeff_ = MatD(n_, n_);
    for (int p = 0; p < n_; ++p)
        for (int m = 0; m < n_; ++m) coeff_(p, m) = static_cast<double>(inv(m, p));
}

void TriangleBasis::eval(Vec2 p, double* vals) const {
    const int d = degree_;
    const double l1 = p.x, l2 = p.y, l0 = 1.0 - l1 - l2;
    std::vector<double> bern(n_);
    for (int m = 0; m < n_; ++m) {
        const int j = monos_[m].first, k = monos_[m].second, i = d - j - k;
        bern[m] = static_cast<double>(multinomial(d, i, j, k)) *
                  std::pow(l0, i) * std::pow(l1, j) * std::pow(l2, k);
    }
    for (int b = 0; b < n_; ++b) {
        double s = 0.0;
        for (int m = 0; m < n_; ++m) s += coeff_(b, m) * bern[m];
        vals[b] = s;
    }
}

void TriangleBasis::eval_grad(Vec2 p, Vec2* grads) const {
    const int d = degree_;
    const double l1 = p.x, l2 = p.y, l0 = 1.0 - l1 - l2;
    // d/dx acts as d/dl1 - d/dl0 and d/dy as d/dl2 - d/dl0.
    std::vector<Vec2> db(n_);
    for (int m = 0; m < n_; ++m) {
        const int j = monos_[m].first, k = monos_[m].second, i = d - j - k;
        const double c = static_cast<double>(multinomial(d, i, j, k));
        const double di = (i == 0) ? 0.0
                                   : i * std::pow(l0, i - 1) * std::pow(l1, j) * std::pow(l2, k);
        const double dj = (j == 0) ? 0.0
                                   : j * std::pow(l0, i) * std::pow(l1, j - 1) * std::pow(l2, k);
        const double dk = (k == 0) ? 0.0
                                   : k * std::pow(l0, i) * std::pow(l1, j) * std::pow(l2, k - 1);
        db[m] = {c * (dj - di), c * (dk - di)};
    }
    for (int b = 0; b < n_; ++b) {
        Vec2 g{0.0, 0.0};
        for (int m = 0; m < n_; ++m) g += coeff_(b, m) * db[m];
        grads[b] = g;
    }
}

std::vector<double> TriangleBasis::eval(Vec2 p) const {
    std::vector<double> v(n_);
    eval(p, v.data());
    return v;
}

std::vector<Vec2> TriangleBasis::eval_grad(Vec2 p) const {
    std::vector<Vec2> g(n_);
    eval_grad(p, g.data());
    return g;
}

void TriangleBasis::tabulate(const QuadratureRule& rule, std::vector<double>& vals,
                             std::vector<Vec2>& grads) const {
    const int q = rule.size();
    vals.resize(static_cast<size_t>(q) * n_);
    grads.resize(static_cast<size_t>(q) * n_);
    for (int k = 0; k < q; ++k) {
        eval(rule.points[k], vals.data() + static_cast<size_t>(k) * n_);
        eval_grad(rule.points[k], grads.data() + static_cast<size_t>(k) * n_);
    }
}

std::vector<std::array<int, 3>> TriangleBasis::lattice_triangles() const {
    const int d = std::max(degree_, 1);
    if (degree_ == 0) return {{0, 0, 0}};  // degenerate; callers special-case N=0
    auto idx = [d](int i, int j) { return j * (d + 1) - j * (j - 1) / 2 + i; };
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i + j < d; ++i) {
            tris.push_back({idx(i, j), idx(i + 1, j), idx(i, j + 1)});
            if (i + j < d - 1)
                tris.push_back({idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)});
        }
    }
    return tris;
}

}  // namespace cgdg
