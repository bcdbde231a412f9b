// Output writers (VTK snapshots, cut and residual CSVs, run manifests) and
// the four command-line entry points: run, verify, convergence, meshgen.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cgdg/config.hpp"
#include "cgdg/diagnostics.hpp"
#include "cgdg/solver.hpp"

namespace cgdg {

// Conserved component names: acoustics {mx,my,p}, the field system
// {Bx,By,Bz,Ex,Ey,Ez}, gas dynamics {rho,mx,my,E}.
std::vector<std::string> component_names(const SystemDescriptor& sys);

// Legacy ASCII unstructured-grid snapshot. Every cell is subdivided into
// max(N,1)^2 straight sub-triangles with per-cell duplicated points; point
// data carries u_<name> for the element field and, when `what` is non-null,
// w_<name> for the continuous reconstruction. Output is byte-deterministic.
void write_vtk_snapshot(const std::string& path, const OperatorSet& ops, const DGField& u,
                        const CGField* what, const std::vector<std::string>& names,
                        const std::string& title);

// Samples the continuous reconstruction along the horizontal line at height
// `y` (clipped just inside the domain box): columns x, every component, and
// for gas dynamics the derived pressure p and radial velocity vr.
void write_cut_csv(const std::string& path, const SystemDescriptor& sys,
                   const OperatorSet& ops, const CGField& what, double y, int samples);

// Table of per-location maxima from the stage monitors: one row per
// observation point and per control circle.
void write_residual_csv(const std::string& path, const std::vector<std::string>& names,
                        const std::vector<Vec2>& points, const PointResidualMonitor* pmon,
                        const std::vector<CircleSpec>& circles,
                        const CircleBalanceMonitor* cmon);

// "key = value" lines, written in the given order.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& items);

// --- commands (return a process exit code) -----------------------------------

// Executes a config file: builds mesh, spaces, system, and initial data,
// writes the manifest, then (unless dry_run) advances to t_end with the
// configured diagnostics and writes VTK/CSV outputs under the output prefix.
int cmd_run(const std::string& config_path, bool dry_run, std::ostream& log);

struct VerifyOptions {
    std::vector<int> degrees{0, 1, 2, 3, 4};
    int nx = 6, ny = 6;
    double perturb = 0.15;
    std::uint64_t seed = 3;
    // Deliberately corrupts one dual derivative sign to demonstrate that the
    // identity checks catch a broken operator.
    bool mutate_dual_sign = false;
};

// Runs the operator identity suite (integration-by-parts compositions,
// element gradient exactness, mass adjointness, corner-normal identities,
// nodal entropy production) on a fixed mesh across degrees; prints one
// PASS/FAIL line per check.
int cmd_verify(const VerifyOptions& opt, std::ostream& out);

struct ConvergenceOptions {
    std::string preset = "vortex";     // vortex | acoustic-gaussian | maxwell-gaussian
    std::vector<int> degrees{1, 2, 3};
    std::vector<int> sizes{10, 20, 40};
    double t_end = -1.0;               // < 0: preset default; 0: project/reconstruct only
    std::string reconstruction = "l2";
    double cfl = 0.4;
    double perturb = 0.2;
    std::uint64_t seed = 1;
    std::string out_prefix = "convergence";
};

// Mesh-refinement study of both the element field and its continuous
// reconstruction; writes one CSV per degree and field and prints the tables.
int cmd_convergence(const ConvergenceOptions& opt, std::ostream& out);

struct MeshgenOptions {
    int nx = 20, ny = 20;
    std::array<double, 4> box{0.0, 0.0, 1.0, 1.0};
    double perturb = 0.2;
    std::uint64_t seed = 1;
    std::string out_path = "mesh.txt";
};

int cmd_meshgen(const MeshgenOptions& opt, std::ostream& out);

}  // namespace cgdg
