// Verification instruments: involution monitors, energy accounting,
// pointwise strong-form residuals, arbitrary control-volume balances over
// isoparametric circles, convergence studies, and time-series recording.
#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "cgdg/solver.hpp"

namespace cgdg {

// --- time-series record -----------------------------------------------------

struct SeriesSample {
    double t = 0.0;
    double value = 0.0;
};

// Named time series with strictly increasing timestamps per series.
class DiagnosticsRecord {
  public:
    // Find-or-create a series id for `name`.
    int series(const std::string& name);
    // -1 when the series does not exist.
    int find(const std::string& name) const;
    void append(int id, double t, double value);
    void append(const std::string& name, double t, double value);

    int n_series() const { return static_cast<int>(names_.size()); }
    const std::string& name(int id) const { return names_.at(id); }
    const std::vector<SeriesSample>& samples(int id) const { return data_.at(id); }

    // One `t,value` CSV per series at prefix + sanitized name + ".csv".
    void write_csv_files(const std::string& prefix) const;

  private:
    std::vector<std::string> names_;
    std::vector<std::vector<SeriesSample>> data_;
};

void write_series_csv(const std::string& path, const std::vector<SeriesSample>& samples);

// --- involution monitors ----------------------------------------------------

struct InvolutionError {
    std::string label;
    double dual = 0.0;       // max |coefficient| of the dual-operator image
    double pointwise = 0.0;  // max per-cell analytic curl/div over quadrature points
};

// One entry per involution declared by the system (scaled components fed to
// the matching dual curl/divergence, plus the element-wise analytic value).
std::vector<InvolutionError> involution_errors(const SystemDescriptor& sys,
                                               const OperatorSet& ops, const DGField& u);

// --- energy accounting ------------------------------------------------------

// Quadrature-based energy integrals with precomputed basis tables; the
// per-call free functions below are conveniences for one-off evaluations.
class EnergyMonitor {
  public:
    EnergyMonitor(const SystemDescriptor& sys, const OperatorSet& ops);

    // Integral of the energy density of the element field.
    double total(const DGField& u) const;
    // (1/2) integral of the sigma-weighted square of the continuous field;
    // throws unless the system has a quadratic energy density.
    double projected(const CGField& what) const;
    // Instantaneous rate: integral of what' * Sigma * dudt (quadratic case).
    double rate(const CGField& what, const DGField& dudt) const;

  private:
    const SystemDescriptor* sys_;
    const OperatorSet* ops_;
    MatD dgv_, cgv_;  // basis values at the assembly rule points
    std::vector<double> sigma_;
    bool quadratic_ = false;
};

double total_energy(const SystemDescriptor& sys, const OperatorSet& ops, const DGField& u);
double projected_energy(const SystemDescriptor& sys, const OperatorSet& ops,
                        const CGField& what);
double energy_rate(const SystemDescriptor& sys, const OperatorSet& ops, const CGField& what,
                   const DGField& dudt);

// --- pointwise strong-form residual ----------------------------------------

// Observes Runge-Kutta stages and tracks, per observation point and
// component, the largest |du/dt + div fhat| where the divergence of the
// continuous flux is evaluated analytically at the point.
class PointResidualMonitor {
  public:
    PointResidualMonitor(const OperatorSet& ops, std::vector<Vec2> points);

    void observe(const StageRecord& rec);
    // The monitor must outlive the returned hook.
    StageHook hook();

    int n_points() const { return static_cast<int>(pts_.size()); }
    long stages_seen() const { return stages_; }
    double maximum(int point) const;            // over components and stages
    double maximum(int point, int comp) const;  // over stages

  private:
    const OperatorSet* ops_;
    std::vector<Vec2> pts_;
    std::vector<int> cells_;
    int m_ = 0;
    std::vector<double> max_;
    long stages_ = 0;
};

// --- circle control volumes -------------------------------------------------

struct CircleControlVolume {
    Vec2 center{};
    double radius = 0.0;
    int geometry_degree = 6;       // polynomial degree of the wedge geometry
    int points_per_direction = 8;  // tensor quadrature points per direction
    int wedges = 8;                // fan size
    int clip_depth = 6;            // max recursive subdivision against mesh edges
};

// Static quadrature of a circle approximated by a fan of isoparametric
// wedges, clipped against the (straight-edged) mesh by recursive
// subdivision so each volume point knows its owning cell. Built once and
// reused for every stage evaluation.
class CircleQuadrature {
  public:
    CircleQuadrature(const CircleControlVolume& cv, const TriMesh& mesh,
                     const std::vector<CellGeom>& geom);

    double area() const { return area_; }
    // Sum of the weighted outward boundary normals; zero for a closed fan.
    Vec2 boundary_normal_sum() const { return closure_; }
    int volume_points() const { return static_cast<int>(vol_.size()); }
    int boundary_points() const { return static_cast<int>(bdry_.size()); }
    bool single_cell() const;

    // Per-component balance d/dt int_V u + oint f . n for one stage.
    std::vector<double> balance(const OperatorSet& ops, const StageEval& eval) const;

  private:
    struct VolPoint {
        int cell;
        Vec2 x;
        double w;
    };
    struct BdryPoint {
        int cell;
        Vec2 x;
        Vec2 nw;  // outward normal times arc-length weight
    };
    std::vector<VolPoint> vol_;
    std::vector<BdryPoint> bdry_;
    double area_ = 0.0;
    Vec2 closure_{};
};

// Stage observer tracking the largest |balance| per circle and component.
class CircleBalanceMonitor {
  public:
    CircleBalanceMonitor(const OperatorSet& ops, const std::vector<CircleControlVolume>& circles);

    void observe(const StageRecord& rec);
    // The monitor must outlive the returned hook.
    StageHook hook();

    int n_circles() const { return static_cast<int>(quads_.size()); }
    long stages_seen() const { return stages_; }
    const CircleQuadrature& quadrature(int circle) const { return quads_.at(circle); }
    double maximum(int circle) const;
    double maximum(int circle, int comp) const;

  private:
    const OperatorSet* ops_;
    std::vector<CircleQuadrature> quads_;
    int m_ = 0;
    std::vector<double> max_;
    long stages_ = 0;
};

// --- convergence studies ----------------------------------------------------

struct ConvergenceRow {
    int nx = 0;      // mesh scale (elements per box edge)
    double h = 0.0;  // nominal spacing
    long steps = 0;
    std::vector<double> err_u;  // per-component L2 errors of the element field
    std::vector<double> err_w;  // per-component L2 errors of the reconstruction
};

struct ConvergenceTable {
    int degree = 0;
    std::vector<ConvergenceRow> rows;
};

struct ConvergenceConfig {
    SolverOptions solver{};
    double t_end = 0.0;                        // 0: project/reconstruct only
    std::function<TriMesh(int)> mesh_factory;  // nx -> mesh (required)
};

// Runs the scheme on each mesh and measures L2 errors of u_h and of the
// continuous reconstruction against `exact_final` by quadrature.
ConvergenceTable convergence_study(const SystemDescriptor& sys, int degree,
                                   const std::vector<int>& sizes, const VectorFn& initial,
                                   const VectorFn& exact_final, const ConvergenceConfig& cfg);

// Observed order between consecutive rows for one error column (first row 0).
std::vector<double> convergence_rates(const ConvergenceTable& table, bool flux_table, int comp);

// CSV `nx, err_<label>..., rate_<label>...` for the chosen components.
void write_convergence_csv(const std::string& path, const ConvergenceTable& table,
                           bool flux_table,
                           const std::vector<std::pair<int, std::string>>& columns);

}  // namespace cgdg
