#pragma once

// Pseudo-spectral 2D Euler in vorticity form: classical RK4 in time, 2/3-rule
// dealiasing of the advection product, optional exponential filter.

#include "eulab/core.hpp"
#include "eulab/spectral.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace eulab {

/// exp(-strength * (|m|/(n/2))^order) applied per axis after each step.
struct FilterSpec {
  bool enabled = false;
  double order = 36.0;
  double strength = 36.0;
};

struct RunConfig2D {
  GridSpec2D grid{256, 16.0};
  double dt = 1e-3;
  double t_end = 1.0;
  FilterSpec filter;
  int diag_every = 10;  // steps between diagnostics rows
  double max_cfl = 0.5;
};

/// Time, vorticity and step count; the velocity is derived on demand and cached.
class SimState2D {
 public:
  /// Rejects non-mean-zero vorticity.
  explicit SimState2D(SpectralField2D omega, double t = 0.0, long step_count = 0);

  double t() const { return t_; }
  long step_count() const { return steps_; }
  const SpectralField2D& omega() const { return omega_; }
  const GridSpec2D& grid() const { return omega_.grid(); }
  const VelocityField2D& velocity() const;

 private:
  double t_;
  long steps_;
  SpectralField2D omega_;
  mutable std::shared_ptr<const VelocityField2D> u_;
};

/// Called once per RK stage (0..3) with the step size, the stage time and the
/// stage vorticity coefficients, before the stage derivative is evaluated.
using StageObserver = std::function<void(int stage, double dt, double t, const ComplexArray2& omega_hat)>;

class Euler2D {
 public:
  explicit Euler2D(GridSpec2D grid, FilterSpec filter = {}, double max_cfl = 0.5);

  const GridSpec2D& grid() const { return grid_; }

  /// -dealias(u . grad w) for the given coefficients. Also reports max |u|.
  ComplexArray2 rhs(const ComplexArray2& omega_hat, double* umax = nullptr) const;
  SpectralField2D rhs(const SpectralField2D& omega) const;

  /// One RK4 step. Throws NumericalFault on CFL violation (with a suggested
  /// dt) or on non-finite values.
  SimState2D step(const SimState2D& s, double dt, const StageObserver& observer = {}) const;

  /// Courant number max|u| dt / h for the current state.
  double cfl(const SimState2D& s, double dt) const;

 private:
  GridSpec2D grid_;
  FilterSpec filter_;
  double max_cfl_;
  Eigen::ArrayXd kd_;   // derivative wavenumbers per full-axis index, Nyquist zeroed
  Eigen::ArrayXd kabs_;  // true wavenumbers per full-axis index
  RealArray2 keep_;      // 1 inside the 2/3 window, 0 outside; zero mode dropped
  RealArray2 filter_symbol_;
};

/// Dealiases initial data; returns the dealiased field and the removed L2 fraction.
std::pair<SpectralField2D, double> prepare_initial(const SpectralField2D& omega);

struct ConservationReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double u_l2 = 0.0;
};

/// Relative drifts |N(t) - N(0)| / N(0) (absolute when N(0) = 0).
ConservationReport conservation_report(const SimState2D& s0, const SimState2D& st);

struct SymmetryReport {
  double odd_x1 = 0.0;  // max |w(x) + w(reflected x)| / max|w|
  double odd_x2 = 0.0;
  bool odd_odd = false;  // both residuals below the tolerance
  /// min of w on the closed first quadrant / max|w| (nonpositive means a sign change).
  double first_quadrant_min = 0.0;
  bool sign_preserved = true;
};

/// Symmetry residuals; sign preservation is checked only when `expect_nonnegative`.
SymmetryReport symmetry_report(const SimState2D& s, bool expect_nonnegative = false, double tol = 1e-8);

struct DiagnosticsRow {
  double t, l1, l2, linf, energy, hdot1, sym_x1, sym_x2, cfl;
};

DiagnosticsRow diagnostics_row(const SimState2D& s, double dt);
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const DiagnosticsRow& r);

struct RunResult {
  SimState2D final_state;
  std::vector<DiagnosticsRow> diagnostics;
  double dealias_removed = 0.0;
};

/// Runs from omega0 to t_end with a fixed dt (the last step is shortened to
/// land on t_end). `on_step` sees every accepted state including the initial one.
RunResult run2d(const RunConfig2D& cfg, const SpectralField2D& omega0,
                const std::function<void(const SimState2D&)>& on_step = {},
                const StageObserver& observer = {});

}  // namespace eulab
