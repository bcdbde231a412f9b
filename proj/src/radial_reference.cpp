#include "cgdg/radial_reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cgdg/error.hpp"

namespace cgdg {

namespace {

inline double pressure3(const double* u, double g) {
    return (g - 1.0) * (u[2] - 0.5 * u[1] * u[1] / u[0]);
}

inline void phys_flux(const double* u, double g, double* f) {
    const double v = u[1] / u[0], p = pressure3(u, g);
    f[0] = u[1];
    f[1] = u[1] * v + p;
    f[2] = v * (u[2] + p);
}

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
}

// Approximate Riemann flux with a contact restored between two direct
// wave-speed estimates.
void contact_riemann_flux(const double* ul, const double* ur, double g, double* f) {
    const double dl = ul[0], vl = ul[1] / ul[0], pl = pressure3(ul, g);
    const double dr = ur[0], vr = ur[1] / ur[0], pr = pressure3(ur, g);
    const double cl = std::sqrt(g * pl / dl), cr = std::sqrt(g * pr / dr);
    const double sl = std::min(vl - cl, vr - cr);
    const double sr = std::max(vl + cl, vr + cr);
    double fl[3], fr[3];
    phys_flux(ul, g, fl);
    phys_flux(ur, g, fr);
    if (sl >= 0.0) {
        for (int k = 0; k < 3; ++k) f[k] = fl[k];
        return;
    }
    if (sr <= 0.0) {
        for (int k = 0; k < 3; ++k) f[k] = fr[k];
        return;
    }
    const double sm = (pr - pl + dl * vl * (sl - vl) - dr * vr * (sr - vr)) /
                      (dl * (sl - vl) - dr * (sr - vr));
    double us[3];
    if (sm >= 0.0) {
        const double fac = dl * (sl - vl) / (sl - sm);
        us[0] = fac;
        us[1] = fac * sm;
        us[2] = fac * (ul[2] / dl + (sm - vl) * (sm + pl / (dl * (sl - vl))));
        for (int k = 0; k < 3; ++k) f[k] = fl[k] + sl * (us[k] - ul[k]);
    } else {
        const double fac = dr * (sr - vr) / (sr - sm);
        us[0] = fac;
        us[1] = fac * sm;
        us[2] = fac * (ur[2] / dr + (sm - vr) * (sm + pr / (dr * (sr - vr))));
        for (int k = 0; k < 3; ++k) f[k] = fr[k] + sr * (us[k] - ur[k]);
    }
}

}  // namespace

RadialProfile radial_reference_euler(const RadialConfig& cfg) {
    if (cfg.n_cells < 4) throw Error("radial reference: need at least 4 cells");
    if (!(cfg.r_max > 0.0)) throw Error("radial reference: r_max must be positive");
    if (!(cfg.r_interface > 0.0) || !(cfg.r_interface < cfg.r_max))
        throw Error("radial reference: the interface must sit inside (0, r_max)");
    if (cfg.n_samples < 2) throw Error("radial reference: need at least 2 samples");
    if (!(cfg.gamma > 1.0)) throw Error("radial reference: gamma must exceed 1");
    if (!(cfg.cfl > 0.0) || cfg.cfl > 0.9)
        throw Error("radial reference: cfl must lie in (0, 0.9]");
    if (!(cfg.inner.rho > 0.0) || !(cfg.inner.p > 0.0) || !(cfg.outer.rho > 0.0) ||
        !(cfg.outer.p > 0.0))
        throw Error("radial reference: non-physical initial state");
    if (cfg.t_end < 0.0) throw Error("radial reference: t_end must be non-negative");

    const int n = cfg.n_cells;
    const double g = cfg.gamma, dr = cfg.r_max / n, alpha = cfg.geometric_alpha;

    std::vector<double> U(static_cast<size_t>(3) * n);
    for (int i = 0; i < n; ++i) {
        const double r = (i + 0.5) * dr;
        const RadialPrimitive& w = r < cfg.r_interface ? cfg.inner : cfg.outer;
        U[3 * i + 0] = w.rho;
        U[3 * i + 1] = w.rho * w.v;
        U[3 * i + 2] = w.p / (g - 1.0) + 0.5 * w.rho * w.v * w.v;
    }

    auto source = [&](const double* u, double r, double* s) {
        const double v = u[1] / u[0], p = pressure3(u, g);
        const double a = -alpha / r;
        s[0] = a * u[1];
        s[1] = a * u[1] * v;
        s[2] = a * v * (u[2] + p);
    };

    // Primitive scratch: (rho, v, p) per cell.
    std::vector<double> W(static_cast<size_t>(3) * n);
    std::vector<double> um(static_cast<size_t>(3) * n), up(static_cast<size_t>(3) * n);
    std::vector<double> F(static_cast<size_t>(3) * (n + 1));

    long steps = 0;
    double t = 0.0;
    const long max_steps = 10'000'000;
    while (t < cfg.t_end) {
        double smax = 0.0;
        for (int i = 0; i < n; ++i) {
            const double* u = &U[3 * i];
            const double p = pressure3(u, g);
            if (!(u[0] > 0.0) || !(p > 0.0) || !std::isfinite(u[2]))
                throw Error("radial reference: state left the admissible set");
            const double v = u[1] / u[0];
            smax = std::max(smax, std::abs(v) + std::sqrt(g * p / u[0]));
            W[3 * i + 0] = u[0];
            W[3 * i + 1] = v;
            W[3 * i + 2] = p;
        }
        double dt = cfg.cfl * dr / smax;
        dt = std::min(dt, cfg.t_end - t);

        // Limited primitive slopes, a half-step face evolution, and the
        // geometric source evaluated at the cell centre.
        for (int i = 0; i < n; ++i) {
            const double* wi = &W[3 * i];
            double wl[3], wr[3];
            if (i == 0) {
                wl[0] = wi[0];
                wl[1] = -wi[1];
                wl[2] = wi[2];
            } else {
                for (int k = 0; k < 3; ++k) wl[k] = W[3 * (i - 1) + k];
            }
            if (i == n - 1) {
                for (int k = 0; k < 3; ++k) wr[k] = wi[k];
            } else {
                for (int k = 0; k < 3; ++k) wr[k] = W[3 * (i + 1) + k];
            }
            double wm[3], wp[3];
            for (int k = 0; k < 3; ++k) {
                const double slope = minmod(wi[k] - wl[k], wr[k] - wi[k]);
                wm[k] = wi[k] - 0.5 * slope;
                wp[k] = wi[k] + 0.5 * slope;
            }
            if (!(wm[0] > 0.0) || !(wm[2] > 0.0) || !(wp[0] > 0.0) || !(wp[2] > 0.0)) {
                for (int k = 0; k < 3; ++k) {
                    wm[k] = wi[k];
                    wp[k] = wi[k];
                }
            }
            double* umi = &um[3 * i];
            double* upi = &up[3 * i];
            umi[0] = wm[0];
            umi[1] = wm[0] * wm[1];
            umi[2] = wm[2] / (g - 1.0) + 0.5 * wm[0] * wm[1] * wm[1];
            upi[0] = wp[0];
            upi[1] = wp[0] * wp[1];
            upi[2] = wp[2] / (g - 1.0) + 0.5 * wp[0] * wp[1] * wp[1];

            double fm[3], fp[3], s[3];
            phys_flux(umi, g, fm);
            phys_flux(upi, g, fp);
            source(&U[3 * i], (i + 0.5) * dr, s);
            bool ok = true;
            double em[3], ep[3];
            for (int k = 0; k < 3; ++k) {
                const double adv = 0.5 * dt / dr * (fm[k] - fp[k]) + 0.5 * dt * s[k];
                em[k] = umi[k] + adv;
                ep[k] = upi[k] + adv;
            }
            if (!(em[0] > 0.0) || !(pressure3(em, g) > 0.0) || !(ep[0] > 0.0) ||
                !(pressure3(ep, g) > 0.0))
                ok = false;
            if (ok) {
                for (int k = 0; k < 3; ++k) {
                    umi[k] = em[k];
                    upi[k] = ep[k];
                }
            } else {
                for (int k = 0; k < 3; ++k) {
                    umi[k] = U[3 * i + k];
                    upi[k] = U[3 * i + k];
                }
            }
        }

        // Interface fluxes: a reflecting ghost at the axis, a transmissive
        // ghost at the outer edge.
        for (int e = 0; e <= n; ++e) {
            double ghost[3];
            const double* left;
            const double* right;
            if (e == 0) {
                ghost[0] = um[0];
                ghost[1] = -um[1];
                ghost[2] = um[2];
                left = ghost;
                right = &um[0];
            } else if (e == n) {
                left = &up[3 * (n - 1)];
                for (int k = 0; k < 3; ++k) ghost[k] = up[3 * (n - 1) + k];
                right = ghost;
            } else {
                left = &up[3 * (e - 1)];
                right = &um[3 * e];
            }
            contact_riemann_flux(left, right, g, &F[3 * e]);
        }

        for (int i = 0; i < n; ++i) {
            double mid[3], s[3];
            for (int k = 0; k < 3; ++k) mid[k] = 0.5 * (um[3 * i + k] + up[3 * i + k]);
            if (!(mid[0] > 0.0) || !(pressure3(mid, g) > 0.0))
                for (int k = 0; k < 3; ++k) mid[k] = U[3 * i + k];
            source(mid, (i + 0.5) * dr, s);
            for (int k = 0; k < 3; ++k)
                U[3 * i + k] += -dt / dr * (F[3 * (i + 1) + k] - F[3 * i + k]) + dt * s[k];
        }

        t += dt;
        if (++steps > max_steps)
            throw Error("radial reference: exceeded the step budget before t_end");
    }

    RadialProfile out;
    out.steps = steps;
    out.r.resize(cfg.n_samples);
    out.rho.resize(cfg.n_samples);
    out.v.resize(cfg.n_samples);
    out.p.resize(cfg.n_samples);
    for (int s = 0; s < cfg.n_samples; ++s) {
        const double r = (s + 0.5) * cfg.r_max / cfg.n_samples;
        const double pos = r / dr - 0.5;
        const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 2);
        const double frac = std::clamp(pos - j, 0.0, 1.0);
        double prim[2][3];
        for (int side = 0; side < 2; ++side) {
            const double* u = &U[3 * (j + side)];
            prim[side][0] = u[0];
            prim[side][1] = u[1] / u[0];
            prim[side][2] = pressure3(u, g);
        }
        out.r[s] = r;
        out.rho[s] = (1.0 - frac) * prim[0][0] + frac * prim[1][0];
        out.v[s] = (1.0 - frac) * prim[0][1] + frac * prim[1][1];
        out.p[s] = (1.0 - frac) * prim[0][2] + frac * prim[1][2];
    }
    return out;
}

}  // namespace cgdg
