#pragma once

// Characteristics phi(t, x) and deformation gradients D phi carried along a 2D
// Euler flow, plus the diagnostics built on them: the deformation-growth
// certificate, hyperbolicity at the stagnation point, the Lagrangian H^1
// pullback and the perturbation (inflation) experiment.

#include "eulab/constructions.hpp"
#include "eulab/core.hpp"
#include "eulab/euler2d.hpp"
#include "eulab/spectral.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace eulab {

/// Velocity and velocity gradient at a point. du(i, j) = d_j u_i.
struct FlowSample {
  Vec2 u = Vec2::Zero();
  Mat2 du = Mat2::Zero();
};

enum class InterpMethod {
  Auto,      // Exact for small seed sets, Lagrange otherwise
  Exact,     // direct trigonometric sum, O(n^2) per point
  Lagrange,  // zero-padded upsampling then a tensor Lagrange stencil
};

struct InterpOptions {
  InterpMethod method = InterpMethod::Auto;
  int upsample = 4;
  int width = 8;          // stencil points per axis (even)
  int exact_below = 32;   // Auto: exact sum when fewer seeds than this
};

/// Off-grid evaluation of several band-limited fields given by their half-spectrum
/// coefficients on a common grid. Immutable after construction; safe to share
/// between threads.
class SpectralInterpolator {
 public:
  /// `method` must be Exact or Lagrange.
  SpectralInterpolator(const GridSpec2D& g, std::vector<ComplexArray2> coeffs, InterpMethod method,
                       const InterpOptions& opt = {});
  /// Writes one value per field into out.
  void eval(const Vec2& x, double* out) const;
  std::size_t count() const { return nfields_; }
  const GridSpec2D& grid() const { return grid_; }

 private:
  void exact(const Vec2& x, double* out) const;
  void lagrange(const Vec2& x, double* out) const;

  GridSpec2D grid_;
  InterpMethod method_;
  std::size_t nfields_ = 0;
  int width_ = 8;
  int nf_ = 0;
  double hf_ = 0.0;
  Eigen::ArrayXd denom_;
  std::vector<ComplexArray2> coeffs_;
  std::vector<RealArray2> fine_;
};

/// Resolves Auto for a given number of evaluation points.
InterpMethod resolve_method(const InterpOptions& opt, std::size_t points);

/// u and Du for the vorticity with coefficients omega_hat.
class FlowInterpolator {
 public:
  FlowInterpolator(const GridSpec2D& g, const ComplexArray2& omega_hat, InterpMethod method,
                   const InterpOptions& opt = {});
  FlowSample operator()(const Vec2& x) const;

 private:
  SpectralInterpolator impl_;
};

/// f and its gradient.
class ScalarInterpolator {
 public:
  ScalarInterpolator(const SpectralField2D& f, InterpMethod method, const InterpOptions& opt = {});
  /// (f, d1 f, d2 f) at x.
  Eigen::Vector3d operator()(const Vec2& x) const;

 private:
  SpectralInterpolator impl_;
};

/// Analytic velocity for tests and stability experiments.
struct AnalyticFlow {
  std::function<FlowSample(double t, const Vec2& x)> eval;
};
AnalyticFlow zero_flow();
/// u = omega (-x2, x1).
AnalyticFlow solid_rotation(double omega = 1.0);
/// u = (-a x1, a x2).
AnalyticFlow linear_strain(double a);

/// Seeds: a uniform quadrature grid plus a dyadically refined cluster at the origin.
struct SeedLayout {
  std::vector<Vec2> points;
  // The first grid_count points form the regular grid x = lower + (i, j) spacing,
  // i, j in [0, per_side), stored with j fastest.
  int per_side = 0;
  Vec2 lower = Vec2::Zero();
  double spacing = 0.0;
  int grid_count = 0;
  int refine_levels = 0;
  /// Index of the seed at the origin, if any.
  std::optional<int> origin;
};

/// per_side x per_side cell-centered grid over [-half_width, half_width]^2, the
/// origin, and for each level l = 1..levels a 5 x 5 grid around the origin with
/// spacing (grid spacing) / 2^l.
SeedLayout make_seed_layout(double half_width, int per_side, int levels = 4, bool include_origin = true);
/// Grid nodes of g inside [-half_width, half_width]^2 taken every `stride` nodes;
/// half_width >= L/2 takes the whole periodic grid.
SeedLayout grid_aligned_layout(const GridSpec2D& g, double half_width, int stride = 1, int levels = 4);

struct FlowMapEnsemble {
  std::vector<Vec2> seeds;
  std::vector<double> times;
  std::vector<std::vector<Vec2>> positions;  // [time][seed], only at recorded times
  std::vector<std::vector<Mat2>> jacobians;
  std::vector<double> sup_series;            // max over seeds of the matrix max norm, every step
  std::vector<double> sup_times;
  std::vector<int> sup_argmax;               // seed index attaining sup_series
  std::vector<Mat2> sup_jacobian;            // D phi at that seed
  std::vector<double> det_drift;             // max |det D phi - 1| every step
  bool left_central_box = false;             // any tracer outside the central half box
  double quadrant_violation = 0.0;           // max over seeds of sign-change depth relative to |x|
  std::optional<int> origin;
  SeedLayout layout;

  double max_det_drift() const;
  double max_deformation() const;
  const std::vector<Vec2>& final_positions() const { return positions.back(); }
  const std::vector<Mat2>& final_jacobians() const { return jacobians.back(); }
};

/// RK4 state for tracers and jacobians; stages are fed one at a time.
class TracerRk4 {
 public:
  TracerRk4(std::vector<Vec2> seeds, bool with_jacobians = true);
  /// Positions at which stage s (0..3) must be sampled.
  std::vector<Vec2> stage_positions(int stage, double dt) const;
  /// Completes stage s with the samples at stage_positions(s, dt).
  void feed(int stage, double dt, const std::vector<FlowSample>& samples);
  /// Samples the flow at stage positions with `eval` (parallel over seeds) and feeds them.
  void feed(int stage, double dt, const std::function<FlowSample(const Vec2&)>& eval);

  const std::vector<Vec2>& positions() const { return x_; }
  const std::vector<Mat2>& jacobians() const { return j_; }
  std::size_t size() const { return x_.size(); }

 private:
  bool jac_;
  std::vector<Vec2> x_, xs_, kx_;
  std::vector<Mat2> j_, js_, kj_, acc_j_;
  std::vector<Vec2> acc_x_;
};

/// Records an ensemble from a TracerRk4 at step boundaries.
class EnsembleRecorder {
 public:
  EnsembleRecorder(const SeedLayout& layout, double box_length, bool odd_data, int record_every);
  void record(double t, const TracerRk4& tr, bool force = false);
  FlowMapEnsemble take() { return std::move(ens_); }
  const FlowMapEnsemble& ensemble() const { return ens_; }

 private:
  FlowMapEnsemble ens_;
  double box_length_;
  bool odd_;
  int every_;
  long calls_ = 0;
};

struct FlowMapOptions {
  InterpOptions interp;
  int record_every = 1;  // steps between stored positions/jacobians
  bool odd_data = false; // track quadrant containment
};

/// Integrates tracers through an analytic flow with RK4 of step dt.
FlowMapEnsemble advect_analytic(const AnalyticFlow& flow, const SeedLayout& seeds, double t_end, double dt,
                                const FlowMapOptions& opt = {}, double box_length = 1e300);

/// Stored vorticity trajectory: uniformly spaced coefficient snapshots.
struct VelocityTrajectory {
  GridSpec2D grid{16, 1.0};
  std::vector<double> times;
  std::vector<ComplexArray2> omega_hat;
};

/// RK4 tracer/jacobian integration with step 2 * (snapshot spacing); the
/// middle snapshot serves both midpoint stages. Needs an even number of intervals.
FlowMapEnsemble deformation(const VelocityTrajectory& traj, const SeedLayout& seeds, const FlowMapOptions& opt = {});
/// Positions only (jacobians stay the identity).
FlowMapEnsemble advect(const VelocityTrajectory& traj, const SeedLayout& seeds, const FlowMapOptions& opt = {});

/// lambda(t, 0) = (R12 w)(t, 0) and the off-diagonal entries of Du(t, 0).
struct OriginSample {
  double t = 0.0;
  double lambda = 0.0;
  double offdiag = 0.0;    // max(|d2u1(0)|, |d1u2(0)|) / max|Du|
  double du_scale = 0.0;   // max over the grid of the entries of Du
};
OriginSample sample_origin(const SimState2D& s);

/// A 2D Euler run with coupled tracers: the fluid and the tracers advance with
/// the same RK4 stages, so tracer velocities are exact stage velocities.
struct CoupledRun {
  RunResult run;
  FlowMapEnsemble ensemble;
  std::vector<OriginSample> origin;  // every step
};
CoupledRun run_with_flowmap(const RunConfig2D& cfg, const SpectralField2D& omega0, const SeedLayout& seeds,
                            const FlowMapOptions& opt = {},
                            const std::function<void(const SimState2D&)>& on_step = {});

/// B = integral of g x1 x2 / |x|^4, grid quadrature with Richardson extrapolation.
/// Refuses data that is not odd in both variables or negative on the first quadrant.
double b_functional(const SpectralField2D& omega0);

struct DeformationCertificate {
  double B = 0.0;
  std::vector<double> t;
  std::vector<double> lhs;          // integral of sup^-4
  std::vector<double> rhs;          // (pi/4B) log(1 + 4Bt/pi)
  std::vector<double> max_def;      // sup over s <= t of sup_series
  std::vector<double> lower_bound;  // (4Bt / (pi log(1 + 4Bt/pi)))^{1/4}
  std::vector<double> integral_margin;  // 1 - lhs/rhs (0 at t = 0)
  std::vector<double> growth_margin;    // max_def / lower_bound - 1
  double slack = 0.05;
  double seed_count = 0;
  double seed_spacing = 0.0;
  bool pass = false;
};

/// (4Bt / (pi log(1 + 4Bt/pi)))^{1/4}; 1 at t = 0.
double deformation_lower_bound(double B, double t);
double deformation_integral_bound(double B, double t);

/// Refused (ValidationError) for B <= 0 or det drift above 1e-2.
DeformationCertificate check_deformation_growth(const FlowMapEnsemble& ens, double B, double slack = 0.05);
/// Same check from stored series (e.g. a completed run's deformation CSV).
DeformationCertificate check_deformation_growth(const std::vector<double>& times, const std::vector<double>& sup_series,
                                                double det_drift, double B, double slack = 0.05);

struct HyperbolicityPoint {
  double t = 0.0;
  double lambda = 0.0;
  double offdiag = 0.0;
  double sup_def = 1.0;
  double bound_ratio = 0.0;  // -pi lambda sup^4 / B
};
struct HyperbolicityReport {
  std::vector<HyperbolicityPoint> series;
  double max_offdiag = 0.0;
  double min_bound_ratio = 0.0;
};
/// Combines origin samples with the ensemble's sup series (same step cadence).
HyperbolicityReport hyperbolicity_at_origin(const std::vector<OriginSample>& origin, const FlowMapEnsemble& ens,
                                            double B);

/// sum over the regular part of the seed grid of h^2 |adj(D phi)^T grad f|^2,
/// which is the squared Hdot^1 norm of f transported by the flow.
double lagrangian_h1(const SpectralField2D& f, const FlowMapEnsemble& ens, std::size_t time_index,
                     const InterpOptions& opt = {});

struct InflationConfig {
  std::vector<double> k_sweep{32, 64, 128};
  double m_threshold = 5.0;
  double delta = 0.1;
  BetaVariant variant = BetaVariant::Plain;
  std::optional<int> axis;          // default: from the orientation of D phi at the peak
  std::optional<double> t0;         // default: argmax of the sup series
  std::optional<Vec2> x_star;       // default: argmax seed
  std::optional<double> M_override; // scale beta with this M instead of the measured one
  double beta_scale = 1.0;          // 0 reruns the unperturbed data through the same path
  /// Finer grid (same box) for the comparison runs; the base tracer run stays on base.grid.
  std::optional<GridSpec2D> perturbed_grid;
  std::optional<double> perturbed_dt;
};

struct InflationRow {
  double k = 0.0;
  double hdot1_base = 0.0;
  double hdot1_perturbed = 0.0;
  double ratio = 0.0;
  double ratio0 = 0.0;  // the same ratio at t = 0
  double beta_l1 = 0.0, beta_linf = 0.0, beta_hdot1 = 0.0, beta_hdot_m1 = 0.0;
  double grad_beta_sq = 0.0;
};

struct InflationReport {
  double M = 0.0;
  double t0 = 0.0;
  Vec2 x_star = Vec2::Zero();
  int axis = 1;
  double hdot1_base0 = 0.0;
  std::vector<InflationRow> rows;
};

/// Runs the base flow with tracers, picks (t0, x_star, M), perturbs with beta for
/// every k and compares Hdot^1 at t0. Throws ValidationError when M is below threshold.
/// A measured x_star component closer than 2 delta to an axis is snapped onto it.
InflationReport inflation_experiment(const RunConfig2D& base, const SpectralField2D& omega0, const SeedLayout& seeds,
                                     const InflationConfig& ic, const FlowMapOptions& opt = {});

/// Response constants C(eps) = (|d phi|_inf + |d D phi|_inf) / eps for a flow
/// perturbed by eps * v with |v|_inf + |Dv|_inf = 1.
std::vector<double> ode_perturbation_constants(const AnalyticFlow& base, const AnalyticFlow& v,
                                               const SeedLayout& seeds, double t_end, double dt,
                                               const std::vector<double>& eps);

}  // namespace eulab
