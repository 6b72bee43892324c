#include "eulab/euler2d.hpp"

#include "eulab/norms.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace eulab {

SimState2D::SimState2D(SpectralField2D omega, double t, long step_count)
    : t_(t), steps_(step_count), omega_(std::move(omega)) {
  require_mean_zero(omega_, "euler2d state");
}

const VelocityField2D& SimState2D::velocity() const {
  if (!u_) u_ = std::make_shared<const VelocityField2D>(biot_savart(omega_));
  return *u_;
}

Euler2D::Euler2D(GridSpec2D grid, FilterSpec filter, double max_cfl)
    : grid_(grid), filter_(filter), max_cfl_(max_cfl) {
  const int n = grid_.n(), half = grid_.half(), cut = grid_.dealias_cutoff();
  kd_.resize(n);
  kabs_.resize(n);
  for (int a = 0; a < n; ++a) {
    kabs_(a) = grid_.k0() * grid_.mode(a);
    kd_(a) = a == n / 2 ? 0.0 : kabs_(a);
  }
  keep_.setZero(n, half);
  filter_symbol_.setOnes(n, half);
  auto f1 = [&](int m) {
    const double kappa = std::abs(m) / (0.5 * n);
    return std::exp(-filter_.strength * std::pow(kappa, filter_.order));
  };
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < half; ++b) {
      const int m1 = grid_.mode(a);
      if (std::abs(m1) <= cut && b <= cut && (m1 != 0 || b != 0)) keep_(a, b) = 1.0;
      if (filter_.enabled) filter_symbol_(a, b) = f1(m1) * f1(b);
    }
}

ComplexArray2 Euler2D::rhs(const ComplexArray2& w, double* umax) const {
  const int n = grid_.n(), half = grid_.half();
  auto& fft = fft_for(grid_);
  const Complex I(0.0, 1.0);
  ComplexArray2 c1(n, half), c2(n, half), c3(n, half), c4(n, half);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < half; ++b) {
      const double k1 = kabs_(a), k2 = grid_.k0() * b;
      const double kk = k1 * k1 + k2 * k2;
      const double d1 = kd_(a), d2 = b == n / 2 ? 0.0 : k2;
      const Complex wv = w(a, b);
      c1(a, b) = kk == 0.0 ? Complex(0.0) : I * k2 * wv / kk;
      c2(a, b) = kk == 0.0 ? Complex(0.0) : -I * k1 * wv / kk;
      c3(a, b) = I * d1 * wv;
      c4(a, b) = I * d2 * wv;
    }
  const RealArray2 u1 = fft.backward(c1), u2 = fft.backward(c2);
  const RealArray2 prod = u1 * fft.backward(c3) + u2 * fft.backward(c4);
  if (!std::isfinite(prod.sum())) throw NumericalFault("euler2d: non-finite values in the advection product");
  if (umax) *umax = std::sqrt((u1.square() + u2.square()).maxCoeff());
  ComplexArray2 out = fft.forward(prod);
  out = -out * keep_.cast<Complex>();
  return out;
}

SpectralField2D Euler2D::rhs(const SpectralField2D& omega) const {
  require_mean_zero(omega, "euler2d rhs");
  if (!(omega.grid() == grid_)) throw ValidationError("euler2d rhs: grid mismatch");
  return SpectralField2D::from_coeffs(grid_, rhs(omega.coeffs()));
}

double Euler2D::cfl(const SimState2D& s, double dt) const {
  const auto& u = s.velocity();
  const double umax = std::sqrt((u.u1.values().square() + u.u2.values().square()).maxCoeff());
  return umax * dt / grid_.spacing();
}

SimState2D Euler2D::step(const SimState2D& s, double dt, const StageObserver& observer) const {
  if (!(s.grid() == grid_)) throw ValidationError("euler2d step: grid mismatch");
  if (dt < 0.0 || !std::isfinite(dt)) throw ValidationError("euler2d step: dt must be finite and nonnegative");
  if (dt == 0.0) return s;
  const double t = s.t();
  const ComplexArray2& w = s.omega().coeffs();
  auto notify = [&](int stage, double ts, const ComplexArray2& ws) {
    if (observer) observer(stage, dt, ts, ws);
  };

  notify(0, t, w);
  double umax = 0.0;
  const ComplexArray2 k1 = rhs(w, &umax);
  const double courant = umax * dt / grid_.spacing();
  if (courant > max_cfl_) {
    std::ostringstream msg;
    msg << "euler2d: CFL " << courant << " exceeds " << max_cfl_ << " at t=" << t << "; suggested dt <= "
        << 0.9 * max_cfl_ * grid_.spacing() / umax;
    throw NumericalFault(msg.str());
  }
  ComplexArray2 ws = w + (0.5 * dt) * k1;
  notify(1, t + 0.5 * dt, ws);
  const ComplexArray2 k2 = rhs(ws);
  ws = w + (0.5 * dt) * k2;
  notify(2, t + 0.5 * dt, ws);
  const ComplexArray2 k3 = rhs(ws);
  ws = w + dt * k3;
  notify(3, t + dt, ws);
  const ComplexArray2 k4 = rhs(ws);
  ComplexArray2 next = w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (filter_.enabled) next *= filter_symbol_.cast<Complex>();
  if (!next.allFinite()) throw NumericalFault("euler2d: non-finite vorticity after step at t=" + std::to_string(t));
  return SimState2D(SpectralField2D::from_coeffs(grid_, std::move(next)), t + dt, s.step_count() + 1);
}

std::pair<SpectralField2D, double> prepare_initial(const SpectralField2D& omega) {
  require_mean_zero(omega, "euler2d initial data");
  SpectralField2D d = dealias(omega);
  const double total = lp_norm(omega, 2.0);
  const double removed = total == 0.0 ? 0.0 : lp_norm(omega - d, 2.0) / total;
  return {remove_mean(d), removed};
}

namespace {

double drift(double a, double b) { return a == 0.0 ? std::abs(b) : std::abs(b - a) / a; }

double velocity_l2(const SimState2D& s) {
  const auto& u = s.velocity();
  return std::hypot(lp_norm(u.u1, 2.0), lp_norm(u.u2, 2.0));
}

}  // namespace

ConservationReport conservation_report(const SimState2D& s0, const SimState2D& st) {
  ConservationReport r;
  r.l1 = drift(lp_norm(s0.omega(), 1.0), lp_norm(st.omega(), 1.0));
  r.l2 = drift(lp_norm(s0.omega(), 2.0), lp_norm(st.omega(), 2.0));
  r.linf = drift(s0.omega().max_abs(), st.omega().max_abs());
  r.u_l2 = drift(velocity_l2(s0), velocity_l2(st));
  return r;
}

SymmetryReport symmetry_report(const SimState2D& s, bool expect_nonnegative, double tol) {
  SymmetryReport r;
  const auto& w = s.omega();
  r.odd_x1 = parity_residual(w, 1, Parity::Odd);
  r.odd_x2 = parity_residual(w, 2, Parity::Odd);
  r.odd_odd = r.odd_x1 <= tol && r.odd_x2 <= tol;
  const int n = s.grid().n();
  const double scale = w.max_abs();
  if (scale > 0.0) {
    r.first_quadrant_min = w.values().bottomRightCorner(n / 2, n / 2).minCoeff() / scale;
    if (expect_nonnegative) r.sign_preserved = r.first_quadrant_min >= -1e-10;
  }
  return r;
}

DiagnosticsRow diagnostics_row(const SimState2D& s, double dt) {
  const auto& w = s.omega();
  const auto& u = s.velocity();
  const double h = s.grid().spacing();
  const double umax = std::sqrt((u.u1.values().square() + u.u2.values().square()).maxCoeff());
  const double e = std::pow(lp_norm(u.u1, 2.0), 2) + std::pow(lp_norm(u.u2, 2.0), 2);
  return {s.t(),
          lp_norm(w, 1.0),
          lp_norm(w, 2.0),
          w.max_abs(),
          e,
          sobolev_norm(w, 1.0),
          parity_residual(w, 1, Parity::Odd),
          parity_residual(w, 2, Parity::Odd),
          umax * dt / h};
}

void write_csv_header(std::ostream& os) { os << "t,L1,L2,Linf,E,Hdot1,sym_x1,sym_x2,cfl\n"; }

void write_csv_row(std::ostream& os, const DiagnosticsRow& r) {
  os << format_number(r.t) << ',' << format_number(r.l1) << ',' << format_number(r.l2) << ','
     << format_number(r.linf) << ',' << format_number(r.energy) << ',' << format_number(r.hdot1) << ','
     << format_number(r.sym_x1) << ',' << format_number(r.sym_x2) << ',' << format_number(r.cfl) << '\n';
}

RunResult run2d(const RunConfig2D& cfg, const SpectralField2D& omega0,
                const std::function<void(const SimState2D&)>& on_step, const StageObserver& observer) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= 0.0)) throw ValidationError("run2d: dt must be positive and t_end nonnegative");
  if (cfg.diag_every < 1) throw ValidationError("run2d: diag_every must be >= 1");
  if (!(omega0.grid() == cfg.grid)) throw ValidationError("run2d: initial data grid differs from the run grid");
  auto [w0, removed] = prepare_initial(omega0);
  Euler2D solver(cfg.grid, cfg.filter, cfg.max_cfl);
  SimState2D s(std::move(w0));
  RunResult res{s, {}, removed};
  res.diagnostics.push_back(diagnostics_row(s, cfg.dt));
  if (on_step) on_step(s);
  const long nsteps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  for (long i = 0; i < nsteps; ++i) {
    const double t_next = std::min(cfg.t_end, (i + 1) * cfg.dt);
    const double h = t_next - s.t();
    SimState2D next = solver.step(s, h, observer);
    s = SimState2D(next.omega(), t_next, next.step_count());
    if (on_step) on_step(s);
    if ((i + 1) % cfg.diag_every == 0 || i + 1 == nsteps) res.diagnostics.push_back(diagnostics_row(s, cfg.dt));
  }
  res.final_state = s;
  return res;
}

}  // namespace eulab
