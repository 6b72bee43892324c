#pragma once

// Axisymmetric Euler without swirl on a cell-centered (r, z) grid. The transported
// quantity is q = omega^theta / r; the velocity comes from the stream function
// psi with (Delta - 1/r^2) psi = -omega^theta, u^r = -d_z psi, u^z = (1/r) d_r (r psi).

#include "eulab/constructions.hpp"
#include "eulab/core.hpp"
#include "eulab/flowmap.hpp"
#include "eulab/norms.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace eulab {

/// r_i = (i + 1/2) h_r on (0, r_max]; z_j = (j - n_z/2) h_z, periodic with period l_z.
class AxiGrid {
 public:
  AxiGrid(int n_r, int n_z, double r_max, double l_z);

  int n_r() const { return n_r_; }
  int n_z() const { return n_z_; }
  double r_max() const { return r_max_; }
  double l_z() const { return l_z_; }
  double h_r() const { return r_max_ / n_r_; }
  double h_z() const { return l_z_ / n_z_; }
  double r(int i) const { return (i + 0.5) * h_r(); }
  double z(int j) const { return (j - n_z_ / 2) * h_z(); }
  int half_z() const { return n_z_ / 2 + 1; }
  double kz(int b) const { return 2.0 * kPi * b / l_z_; }

  bool operator==(const AxiGrid& o) const {
    return n_r_ == o.n_r_ && n_z_ == o.n_z_ && r_max_ == o.r_max_ && l_z_ == o.l_z_;
  }

 private:
  int n_r_, n_z_;
  double r_max_, l_z_;
};

/// Rows are r, columns are z.
using AxiField = RealArray2;

AxiField sample_axi(const AxiGrid& g, const std::function<double(double r, double z)>& fn);
/// Throws ValidationError (with the minimal feasible n_r / n_z) when a bump has
/// under 8 cells per radius or the support touches the two axis or wall cells.
void check_axi_resolvable(const AxiGrid& g, const SeedSpec& s);
/// omega^theta of an axisymmetric family.
AxiField make_axi_seed(const AxiGrid& g, const SeedSpec& s);

struct AxiVelocity {
  AxiField ur;
  AxiField uz;
  /// max |(1/r) d_r(r u^r) + d_z u^z| / max |d_z u^z| with the solver's differences.
  double divergence = 0.0;
};

AxiVelocity axi_velocity(const AxiGrid& g, const AxiField& omega_theta);
/// Stream function psi (u^r = -d_z psi, u^z = (1/r) d_r(r psi)).
AxiField axi_stream_function(const AxiGrid& g, const AxiField& omega_theta);

struct SupportBox {
  bool empty = true;
  double r_lo = 0.0, r_hi = 0.0, z_lo = 0.0, z_hi = 0.0;
};

class AxiState {
 public:
  /// Rejects non-finite data and q that does not vanish (1e-6 of max) on the two
  /// cells nearest the axis or the outer wall.
  AxiState(AxiGrid grid, AxiField q, double t = 0.0, long step_count = 0);

  const AxiGrid& grid() const { return grid_; }
  const AxiField& q() const { return q_; }
  double t() const { return t_; }
  long step_count() const { return steps_; }
  AxiField omega() const;
  const AxiVelocity& velocity() const;
  SupportBox support(double rel = 1e-8) const;

 private:
  AxiGrid grid_;
  AxiField q_;
  double t_;
  long steps_;
  mutable std::shared_ptr<const AxiVelocity> u_;
};

AxiState axi_state_from_omega(const AxiGrid& g, const AxiField& omega_theta);

using AxiVelocitySolver = std::function<AxiVelocity(const AxiGrid&, const AxiField& omega_theta)>;
/// Called once per RK stage with the stage q and its velocity.
using AxiStageObserver =
    std::function<void(int stage, double dt, double t, const AxiField& q, const AxiVelocity& u)>;

class AxiEuler {
 public:
  explicit AxiEuler(AxiGrid grid, double max_cfl = 0.5, AxiVelocitySolver solver = {});

  /// -(u^r d_r q + u^z d_z q): fifth-order upwind-biased in r, spectral in z,
  /// 2/3-rule in z on the product.
  AxiField rhs(const AxiField& q, const AxiVelocity& u) const;
  /// RK4 step. NumericalFault on CFL violation, non-finite values or support
  /// reaching the axis or wall cells.
  AxiState step(const AxiState& s, double dt, const AxiStageObserver& observer = {}) const;
  double cfl(const AxiVelocity& u, double dt) const;
  AxiVelocity velocity(const AxiField& q) const;

 private:
  AxiGrid grid_;
  double max_cfl_;
  AxiVelocitySolver solver_;
};

AxiState axi_step(const AxiState& s, double dt, double max_cfl = 0.5);

/// L^p of f with the measure 2 pi r dr dz.
double axi_lp_norm(const AxiGrid& g, const AxiField& f, double p);
double axi_lorentz_norm(const AxiGrid& g, const AxiField& f, double p, double q);
double ur_over_r_max(const AxiGrid& g, const AxiVelocity& u);

struct AxisRegularity {
  double first = 0.0;  // max over z of |u^r / r| on the first cell
  double third = 0.0;
  bool ok = true;      // first <= 2 * third
};
AxisRegularity axis_regularity(const AxiGrid& g, const AxiVelocity& u);
/// max |f(r, z) + f(r, -z)| / max |f|.
double odd_z_residual(const AxiGrid& g, const AxiField& f);

struct AxiDiagnosticsRow {
  double t, q_l2, q_l31, q_linf, ur_over_r, odd_z, cfl;
};
AxiDiagnosticsRow axi_diagnostics_row(const AxiState& s, double dt);
void write_axi_csv_header(std::ostream& os);
void write_axi_csv_row(std::ostream& os, const AxiDiagnosticsRow& r);

struct AxiRunConfig {
  AxiGrid grid{64, 128, 2.0, 4.0};
  double dt = 1e-3;
  double t_end = 0.1;
  double max_cfl = 0.5;
  int diag_every = 10;
};

struct AxiRunResult {
  AxiState final_state;
  std::vector<AxiDiagnosticsRow> diagnostics;
};

AxiRunResult axi_run(const AxiRunConfig& cfg, const AxiState& s0,
                     const std::function<void(const AxiState&)>& on_step = {},
                     const AxiStageObserver& observer = {}, const AxiVelocitySolver& solver = {});

/// Velocity and its (r, z) gradient at arbitrary points: linear in r, trigonometric in z.
class AxiInterpolator {
 public:
  AxiInterpolator(const AxiGrid& g, const AxiVelocity& u);
  /// u = (u^r, u^z); du rows are components, columns d_r, d_z. NumericalFault
  /// when r <= 0 or beyond the last cell center.
  FlowSample operator()(const Vec2& rz) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Scalar field at arbitrary points: cubic in r (axis parity through ghost rows),
/// trigonometric in z. Zero beyond the last cell center.
class AxiScalarInterpolator {
 public:
  /// `odd_in_r`: omega^theta is odd across the axis, q is even.
  AxiScalarInterpolator(const AxiGrid& g, const AxiField& f, bool odd_in_r);
  double operator()(const Vec2& rz) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

struct AxiFlowMapEnsemble {
  std::vector<Vec2> seeds;
  std::vector<double> times;
  std::vector<std::vector<Vec2>> positions;  // [time][seed]
  std::vector<std::vector<Mat2>> jacobians;
  std::vector<double> sup_series;            // max over seeds of max |D(phi^r, phi^z)_ij|
  std::vector<double> sup_times;
  std::vector<double> det_identity;          // max over seeds of |det D phi - r / phi^r|

  double max_det_identity() const;
  double max_deformation() const;
};

/// Seeds on a regular (r, z) lattice, cell-centered in [r_lo, r_hi] x [z_lo, z_hi].
std::vector<Vec2> axi_seed_grid(double r_lo, double r_hi, double z_lo, double z_hi, int n_r, int n_z);

struct AxiCoupledRun {
  AxiRunResult run;
  AxiFlowMapEnsemble ensemble;
};

/// Euler run with tracers and Jacobians advanced in lockstep (same RK4 stages).
AxiCoupledRun axi_run_with_flowmap(const AxiRunConfig& cfg, const AxiState& s0, const std::vector<Vec2>& seeds,
                                   int record_every = 1,
                                   const std::function<void(const AxiState&)>& on_step = {},
                                   const AxiVelocitySolver& solver = {});

struct MetricFactorReport {
  double residual = 0.0;  // max |omega_t(phi(x)) - omega_0(x) phi^r / r| / max |omega_t|
  int probes = 0;
};

/// Compares the stepper's omega^theta at the final tracer positions with the
/// transported formula omega_0 r / phi^r read along the tracers. Probes are the
/// seeds where |omega_0| >= threshold * max |omega_0|.
MetricFactorReport metric_factor_check(const AxiState& s0, const AxiFlowMapEnsemble& ens, const AxiState& st,
                                       double threshold = 0.1);

/// omega = omega^theta(r, z) e_theta sampled on a periodic 3D box.
struct AxiRaster3D {
  PeriodicRaster wx, wy, wz;
  /// max ||w|(x) - |w|(rotated x)| / max |w| over quarter-turn rotations about the z axis.
  double azimuthal_variance = 0.0;
};

AxiRaster3D raster_from_function(const std::function<double(double r, double z)>& omega_theta, int n,
                                 double box_length);
AxiRaster3D raster_to_3d(const AxiState& s, int n, double box_length);
/// sqrt of the sum over components of the squared homogeneous Sobolev norms.
double raster_sobolev_norm(const AxiRaster3D& w, double s);

/// u^r(r, z) from the whole-space five-dimensional Newton kernel (u^r = r v,
/// Delta_5 v = (1/r) d_z omega^theta) by direct quadrature over the grid cells,
/// with `images` periodic copies in z on each side. Independent of the solver.
double ur_kernel_quadrature(const AxiGrid& g, const AxiField& omega_theta, double r, double z, int images = 8);

}  // namespace eulab
