// One-dimensional radial compressible-gas reference solver: second-order
// MUSCL-Hancock finite volumes with minmod slopes, an HLLC Riemann flux, and
// the cylindrical geometric source, used as the reference profile for
// radially symmetric two-dimensional runs.
#pragma once

#include <vector>

namespace cgdg {

struct RadialPrimitive {
    double rho = 1.0;
    double v = 0.0;  // radial velocity
    double p = 1.0;
};

struct RadialConfig {
    double gamma = 1.4;
    double r_interface = 0.25;             // initial discontinuity radius
    RadialPrimitive inner{1.0, 0.0, 1.0};  // r < r_interface
    RadialPrimitive outer{0.125, 0.0, 0.1};
    double t_end = 0.1;
    double r_max = 0.7;    // outer edge of the 1D domain (transmissive)
    int n_cells = 10000;
    int n_samples = 512;   // uniform output grid
    double cfl = 0.45;
    // 1: cylindrical source -(1/r)(rho v, rho v^2, v(E+p)); 0: planar
    // (validation against the exact planar Riemann solution).
    double geometric_alpha = 1.0;
};

struct RadialProfile {
    std::vector<double> r, rho, v, p;
    long steps = 0;
};

RadialProfile radial_reference_euler(const RadialConfig& cfg);

}  // namespace cgdg
