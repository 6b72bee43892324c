#include "eulab/axisym3d.hpp"

#include "eulab/fft.hpp"
#include "eulab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace eulab {

AxiGrid::AxiGrid(int n_r, int n_z, double r_max, double l_z) : n_r_(n_r), n_z_(n_z), r_max_(r_max), l_z_(l_z) {
  if (n_r < 8) throw ValidationError("AxiGrid: n_r must be >= 8");
  if (n_z < 8 || n_z % 2 != 0) throw ValidationError("AxiGrid: n_z must be even and >= 8");
  if (!(r_max > 0.0) || !(l_z > 0.0) || !std::isfinite(r_max) || !std::isfinite(l_z))
    throw ValidationError("AxiGrid: r_max and l_z must be positive");
}

namespace {

// Row-wise real FFT along z (unnormalized forward, backward divides by n_z).
ComplexArray2 z_forward(const AxiGrid& g, const AxiField& f) {
  ComplexArray2 c(g.n_r(), g.half_z());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.n_r(); ++i) {
    auto& fft = fft_for(std::vector<int>{g.n_z()});
    fft.forward(std::span<const double>(f.data() + std::size_t(i) * g.n_z(), g.n_z()),
                std::span<Complex>(c.data() + std::size_t(i) * g.half_z(), g.half_z()));
  }
  return c;
}

AxiField z_backward(const AxiGrid& g, const ComplexArray2& c) {
  AxiField f(g.n_r(), g.n_z());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < g.n_r(); ++i) {
    auto& fft = fft_for(std::vector<int>{g.n_z()});
    fft.backward(std::span<const Complex>(c.data() + std::size_t(i) * g.half_z(), g.half_z()),
                 std::span<double>(f.data() + std::size_t(i) * g.n_z(), g.n_z()));
  }
  return f;
}

void require_shape(const AxiGrid& g, const AxiField& f, const char* op) {
  if (f.rows() != g.n_r() || f.cols() != g.n_z()) throw ValidationError(std::string(op) + ": field shape mismatch");
}

// Spectral d/dz with the Nyquist mode dropped.
AxiField z_derivative(const AxiGrid& g, const AxiField& f) {
  ComplexArray2 c = z_forward(g, f);
  const int nyq = g.n_z() / 2;
  for (int i = 0; i < g.n_r(); ++i)
    for (int b = 0; b < g.half_z(); ++b) c(i, b) *= b == nyq ? Complex(0.0) : Complex(0.0, g.kz(b));
  return z_backward(g, c);
}

// Central r-difference with ghost rows: the field has parity `sign` across the
// axis and the wall ghost is wall_sign times the last row.
AxiField r_derivative(const AxiGrid& g, const AxiField& f, double axis_sign, double wall_sign) {
  const int n = g.n_r();
  const double h = g.h_r();
  AxiField d(n, g.n_z());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < g.n_z(); ++j) {
      const double lo = i == 0 ? axis_sign * f(0, j) : f(i - 1, j);
      const double hi = i == n - 1 ? wall_sign * f(n - 1, j) : f(i + 1, j);
      d(i, j) = (hi - lo) / (2.0 * h);
    }
  }
  return d;
}

double max_abs(const AxiField& f) { return f.size() ? f.abs().maxCoeff() : 0.0; }

bool finite(const AxiField& f) { return f.allFinite(); }

// Largest |q| on the two cells nearest the axis and the wall, relative to max |q|.
double edge_fraction(const AxiField& q) {
  const double m = max_abs(q);
  if (m == 0.0) return 0.0;
  const int n = static_cast<int>(q.rows());
  const double edge = std::max({q.row(0).abs().maxCoeff(), q.row(1).abs().maxCoeff(), q.row(n - 2).abs().maxCoeff(),
                                q.row(n - 1).abs().maxCoeff()});
  return edge / m;
}

constexpr double kEdgeTolerance = 1e-6;

}  // namespace

AxiField sample_axi(const AxiGrid& g, const std::function<double(double, double)>& fn) {
  AxiField f(g.n_r(), g.n_z());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j) f(i, j) = fn(g.r(i), g.z(j));
  return f;
}

void check_axi_resolvable(const AxiGrid& g, const SeedSpec& s) {
  if (!is_axisymmetric(s.family))
    throw ValidationError(to_string(s.family) + " is not an axisymmetric family");
  const auto sites = bump_sites(s);
  const double feat = min_feature(s);
  if (feat < 8.0 * g.h_r() || feat < 8.0 * g.h_z()) {
    std::ostringstream os;
    os << to_string(s.family) << ": smallest bump radius " << feat << " has under 8 cells (needs n_r >= "
       << static_cast<long>(std::ceil(8.0 * g.r_max() / feat)) << " and n_z >= "
       << 2 * static_cast<long>(std::ceil(4.0 * g.l_z() / feat)) << ")";
    throw ValidationError(os.str());
  }
  for (const auto& b : sites) {
    if (b.center(0) - b.radius < 2.0 * g.h_r() || b.center(0) + b.radius > g.r_max() - 2.0 * g.h_r())
      throw ValidationError(to_string(s.family) + ": support reaches the axis or wall cells");
    if (std::abs(b.center(1)) + b.radius >= 0.5 * g.l_z())
      throw ValidationError(to_string(s.family) + ": support leaves the z period");
  }
}

AxiField make_axi_seed(const AxiGrid& g, const SeedSpec& s) {
  check_axi_resolvable(g, s);
  return sample_axi(g, [&](double r, double z) { return evaluate(s, Vec2(r, z)); });
}

AxiField axi_stream_function(const AxiGrid& g, const AxiField& omega_theta) {
  require_shape(g, omega_theta, "axi_stream_function");
  const int n = g.n_r();
  const double h = g.h_r();
  ComplexArray2 w = z_forward(g, omega_theta);
  ComplexArray2 psi(n, g.half_z());
  // (psi_{i+1} - 2 psi_i + psi_{i-1})/h^2 + (psi_{i+1} - psi_{i-1})/(2 r h) - psi/r^2 - k^2 psi = -w.
  // Axis ghost psi_{-1} = -psi_0 (its coefficient vanishes at r_0 = h/2); wall ghost psi_n = -psi_{n-1}.
#pragma omp parallel for schedule(static)
  for (int b = 0; b < g.half_z(); ++b) {
    const double k2 = g.kz(b) * g.kz(b);
    std::vector<double> lo(n), di(n), up(n), cp(n);
    std::vector<Complex> rhs(n), dp(n);
    for (int i = 0; i < n; ++i) {
      const double r = g.r(i);
      lo[i] = 1.0 / (h * h) - 1.0 / (2.0 * r * h);
      up[i] = 1.0 / (h * h) + 1.0 / (2.0 * r * h);
      di[i] = -2.0 / (h * h) - 1.0 / (r * r) - k2;
      rhs[i] = -w(i, b);
    }
    di[0] -= lo[0];
    di[n - 1] -= up[n - 1];
    // Thomas algorithm; the system is strictly diagonally dominant.
    cp[0] = up[0] / di[0];
    dp[0] = rhs[0] / di[0];
    for (int i = 1; i < n; ++i) {
      const double m = di[i] - lo[i] * cp[i - 1];
      cp[i] = up[i] / m;
      dp[i] = (rhs[i] - lo[i] * dp[i - 1]) / m;
    }
    psi(n - 1, b) = dp[n - 1];
    for (int i = n - 2; i >= 0; --i) psi(i, b) = dp[i] - cp[i] * psi(i + 1, b);
  }
  return z_backward(g, psi);
}

AxiVelocity axi_velocity(const AxiGrid& g, const AxiField& omega_theta) {
  require_shape(g, omega_theta, "axi_velocity");
  const int n = g.n_r();
  const double h = g.h_r();
  const AxiField psi = axi_stream_function(g, omega_theta);
  AxiVelocity u;
  u.ur = -z_derivative(g, psi);
  // u^z = (1/r) d_r (r psi); r psi is even across the axis, psi is odd across the wall.
  u.uz.resize(n, g.n_z());
  for (int i = 0; i < n; ++i) {
    const double r = g.r(i);
    for (int j = 0; j < g.n_z(); ++j) {
      const double lo = i == 0 ? g.r(0) * psi(0, j) : g.r(i - 1) * psi(i - 1, j);
      const double hi = i == n - 1 ? -(g.r_max() + 0.5 * h) * psi(n - 1, j) : g.r(i + 1) * psi(i + 1, j);
      u.uz(i, j) = (hi - lo) / (2.0 * h * r);
    }
  }
  // Discrete divergence with the same differences.
  AxiField rur(n, g.n_z());
  for (int i = 0; i < n; ++i) rur.row(i) = g.r(i) * u.ur.row(i);
  AxiField div = r_derivative(g, rur, 1.0, 1.0);
  // The wall ghost of r u^r follows psi: r_n u^r_n = -r_n (-psi_{n-1})_z.
  for (int j = 0; j < g.n_z(); ++j)
    div(n - 1, j) = (-(g.r_max() + 0.5 * h) * u.ur(n - 1, j) - rur(n - 2, j)) / (2.0 * h);
  const AxiField dzuz = z_derivative(g, u.uz);
  for (int i = 0; i < n; ++i) div.row(i) = div.row(i) / g.r(i) + dzuz.row(i);
  const double scale = max_abs(dzuz);
  u.divergence = scale > 0.0 ? max_abs(div) / scale : 0.0;
  return u;
}

AxiState::AxiState(AxiGrid grid, AxiField q, double t, long step_count)
    : grid_(grid), q_(std::move(q)), t_(t), steps_(step_count) {
  require_shape(grid_, q_, "AxiState");
  if (!finite(q_)) throw ValidationError("AxiState: non-finite q");
  const double e = edge_fraction(q_);
  if (e > kEdgeTolerance) {
    std::ostringstream os;
    os << "AxiState: q must vanish on the two cells nearest the axis and the wall (edge/max = " << e << ")";
    throw ValidationError(os.str());
  }
}

AxiField AxiState::omega() const {
  AxiField w = q_;
  for (int i = 0; i < grid_.n_r(); ++i) w.row(i) *= grid_.r(i);
  return w;
}

const AxiVelocity& AxiState::velocity() const {
  if (!u_) u_ = std::make_shared<const AxiVelocity>(axi_velocity(grid_, omega()));
  return *u_;
}

SupportBox AxiState::support(double rel) const {
  SupportBox b;
  const double thr = rel * max_abs(q_);
  for (int i = 0; i < grid_.n_r(); ++i)
    for (int j = 0; j < grid_.n_z(); ++j) {
      if (std::abs(q_(i, j)) <= thr || q_(i, j) == 0.0) continue;
      const double r = grid_.r(i), z = grid_.z(j);
      if (b.empty) {
        b = {false, r, r, z, z};
        continue;
      }
      b.r_lo = std::min(b.r_lo, r);
      b.r_hi = std::max(b.r_hi, r);
      b.z_lo = std::min(b.z_lo, z);
      b.z_hi = std::max(b.z_hi, z);
    }
  return b;
}

AxiState axi_state_from_omega(const AxiGrid& g, const AxiField& omega_theta) {
  require_shape(g, omega_theta, "axi_state_from_omega");
  AxiField q = omega_theta;
  for (int i = 0; i < g.n_r(); ++i) q.row(i) /= g.r(i);
  return AxiState(g, std::move(q));
}

AxiEuler::AxiEuler(AxiGrid grid, double max_cfl, AxiVelocitySolver solver)
    : grid_(grid), max_cfl_(max_cfl), solver_(std::move(solver)) {
  if (!solver_) solver_ = [](const AxiGrid& g, const AxiField& w) { return axi_velocity(g, w); };
}

AxiVelocity AxiEuler::velocity(const AxiField& q) const {
  AxiField w = q;
  for (int i = 0; i < grid_.n_r(); ++i) w.row(i) *= grid_.r(i);
  return solver_(grid_, w);
}

AxiField AxiEuler::rhs(const AxiField& q, const AxiVelocity& u) const {
  const int n = grid_.n_r(), nz = grid_.n_z();
  const double h = grid_.h_r();
  // q is even across the axis and zero beyond the wall.
  auto at = [&](int i, int j) {
    if (i < 0) return q(-1 - i, j);
    if (i >= n) return 0.0;
    return q(i, j);
  };
  const AxiField dz = z_derivative(grid_, q);
  AxiField prod(n, nz);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < nz; ++j) {
      const double v = u.ur(i, j);
      double dr;
      if (v >= 0.0)
        dr = -2.0 * at(i - 3, j) + 15.0 * at(i - 2, j) - 60.0 * at(i - 1, j) + 20.0 * at(i, j) + 30.0 * at(i + 1, j) -
             3.0 * at(i + 2, j);
      else
        dr = 2.0 * at(i + 3, j) - 15.0 * at(i + 2, j) + 60.0 * at(i + 1, j) - 20.0 * at(i, j) - 30.0 * at(i - 1, j) +
             3.0 * at(i - 2, j);
      prod(i, j) = -(v * dr / (60.0 * h) + u.uz(i, j) * dz(i, j));
    }
  }
  ComplexArray2 c = z_forward(grid_, prod);
  const int cut = nz / 3;
  for (int i = 0; i < n; ++i)
    for (int b = cut + 1; b < grid_.half_z(); ++b) c(i, b) = 0.0;
  return z_backward(grid_, c);
}

double AxiEuler::cfl(const AxiVelocity& u, double dt) const {
  return ((u.ur.abs() / grid_.h_r() + u.uz.abs() / grid_.h_z()) * dt).maxCoeff();
}

AxiState AxiEuler::step(const AxiState& s, double dt, const AxiStageObserver& observer) const {
  if (!(s.grid() == grid_)) throw ValidationError("axi_step: state grid differs from the solver grid");
  if (dt == 0.0) return s;
  if (!(dt > 0.0)) throw ValidationError("axi_step: dt must be >= 0");
  const AxiField& q0 = s.q();
  AxiVelocity u = velocity(q0);
  const double c = cfl(u, dt);
  if (c > max_cfl_) {
    std::ostringstream os;
    os << "axi_step: CFL " << c << " exceeds " << max_cfl_ << " at t=" << s.t() << "; suggested dt <= "
       << dt * max_cfl_ / c * 0.9;
    throw NumericalFault(os.str());
  }
  constexpr double cs[4] = {0.0, 0.5, 0.5, 1.0};
  constexpr double bs[4] = {1.0, 2.0, 2.0, 1.0};
  AxiField acc = AxiField::Zero(q0.rows(), q0.cols());
  AxiField k;
  for (int st = 0; st < 4; ++st) {
    AxiField qs = st == 0 ? q0 : AxiField(q0 + (cs[st] * dt) * k);
    if (st > 0) u = velocity(qs);
    if (observer) observer(st, dt, s.t() + cs[st] * dt, qs, u);
    k = rhs(qs, u);
    acc += bs[st] * k;
  }
  AxiField q1 = q0 + (dt / 6.0) * acc;
  if (!finite(q1)) throw NumericalFault("axi_step: non-finite q at t=" + format_number(s.t() + dt));
  const double e = edge_fraction(q1);
  if (e > kEdgeTolerance) {
    std::ostringstream os;
    os << "axi_step: support reached the axis or wall cells at t=" << s.t() + dt << " (edge/max = " << e << ")";
    throw NumericalFault(os.str());
  }
  return AxiState(grid_, std::move(q1), s.t() + dt, s.step_count() + 1);
}

AxiState axi_step(const AxiState& s, double dt, double max_cfl) { return AxiEuler(s.grid(), max_cfl).step(s, dt); }

namespace {
std::vector<double> axi_measure(const AxiGrid& g) {
  std::vector<double> m(std::size_t(g.n_r()) * g.n_z());
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < g.n_z(); ++j) m[std::size_t(i) * g.n_z() + j] = 2.0 * kPi * g.r(i) * g.h_r() * g.h_z();
  return m;
}
}  // namespace

double axi_lp_norm(const AxiGrid& g, const AxiField& f, double p) {
  require_shape(g, f, "axi_lp_norm");
  if (!(p >= 1.0)) throw ValidationError("axi_lp_norm: p must be >= 1");
  if (std::isinf(p)) return max_abs(f);
  double acc = 0.0;
  for (int i = 0; i < g.n_r(); ++i) acc += 2.0 * kPi * g.r(i) * f.row(i).abs().pow(p).sum();
  return std::pow(acc * g.h_r() * g.h_z(), 1.0 / p);
}

double axi_lorentz_norm(const AxiGrid& g, const AxiField& f, double p, double q) {
  require_shape(g, f, "axi_lorentz_norm");
  const auto m = axi_measure(g);
  return lorentz_norm(std::span<const double>(f.data(), f.size()), m, p, q);
}

double ur_over_r_max(const AxiGrid& g, const AxiVelocity& u) {
  double m = 0.0;
  for (int i = 0; i < g.n_r(); ++i) m = std::max(m, u.ur.row(i).abs().maxCoeff() / g.r(i));
  return m;
}

AxisRegularity axis_regularity(const AxiGrid& g, const AxiVelocity& u) {
  AxisRegularity a;
  a.first = u.ur.row(0).abs().maxCoeff() / g.r(0);
  a.third = u.ur.row(2).abs().maxCoeff() / g.r(2);
  a.ok = a.first <= 2.0 * a.third || a.first < 1e-300;
  return a;
}

double odd_z_residual(const AxiGrid& g, const AxiField& f) {
  const double m = max_abs(f);
  if (m == 0.0) return 0.0;
  double r = 0.0;
  const int nz = g.n_z();
  for (int i = 0; i < g.n_r(); ++i)
    for (int j = 0; j < nz; ++j) r = std::max(r, std::abs(f(i, j) + f(i, (nz - j) % nz)));
  return r / m;
}

AxiDiagnosticsRow axi_diagnostics_row(const AxiState& s, double dt) {
  const auto& g = s.grid();
  const auto& u = s.velocity();
  return {s.t(),
          axi_lp_norm(g, s.q(), 2.0),
          axi_lorentz_norm(g, s.q(), 3.0, 1.0),
          max_abs(s.q()),
          ur_over_r_max(g, u),
          odd_z_residual(g, s.q()),
          AxiEuler(g).cfl(u, dt)};
}

void write_axi_csv_header(std::ostream& os) { os << "t,q_L2,q_L31,q_Linf,ur_over_r,odd_z,cfl\n"; }

void write_axi_csv_row(std::ostream& os, const AxiDiagnosticsRow& r) {
  os << format_number(r.t) << ',' << format_number(r.q_l2) << ',' << format_number(r.q_l31) << ','
     << format_number(r.q_linf) << ',' << format_number(r.ur_over_r) << ',' << format_number(r.odd_z) << ','
     << format_number(r.cfl) << '\n';
}

AxiRunResult axi_run(const AxiRunConfig& cfg, const AxiState& s0, const std::function<void(const AxiState&)>& on_step,
                     const AxiStageObserver& observer, const AxiVelocitySolver& solver) {
  if (!(cfg.dt > 0.0) || !(cfg.t_end >= 0.0)) throw ValidationError("axi_run: dt must be positive and t_end nonnegative");
  if (cfg.diag_every < 1) throw ValidationError("axi_run: diag_every must be >= 1");
  if (!(s0.grid() == cfg.grid)) throw ValidationError("axi_run: initial data grid differs from the run grid");
  AxiEuler solver_(cfg.grid, cfg.max_cfl, solver);
  AxiState s = s0;
  AxiRunResult res{s, {}};
  res.diagnostics.push_back(axi_diagnostics_row(s, cfg.dt));
  if (on_step) on_step(s);
  const long nsteps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  for (long i = 0; i < nsteps; ++i) {
    const double t_next = std::min(cfg.t_end, (i + 1) * cfg.dt);
    AxiState next = solver_.step(s, t_next - s.t(), observer);
    s = AxiState(cfg.grid, next.q(), t_next, next.step_count());
    if (on_step) on_step(s);
    if ((i + 1) % cfg.diag_every == 0 || i + 1 == nsteps) res.diagnostics.push_back(axi_diagnostics_row(s, cfg.dt));
  }
  res.final_state = s;
  return res;
}

// Rows of z-Fourier coefficients evaluated at arbitrary z; ghost rows below the
// axis carry the field's axis parity.
namespace {

struct RowSeries {
  AxiGrid g;
  ComplexArray2 c;
  double axis_sign;

  RowSeries(const AxiGrid& grid, const AxiField& f, double sign) : g(grid), c(z_forward(grid, f)), axis_sign(sign) {}

  // Value of row i (may be negative: mirrored) at z given the phases e^{i k_b (z - z_0)}.
  double row(int i, const std::vector<Complex>& ph) const {
    double s = 1.0;
    if (i < 0) {
      i = -1 - i;
      s = axis_sign;
    }
    if (i >= g.n_r()) return 0.0;
    const int nyq = g.n_z() / 2;
    double acc = c(i, 0).real();
    for (int b = 1; b < nyq; ++b) acc += 2.0 * (c(i, b) * ph[b]).real();
    return s * acc / g.n_z();
  }
};

std::vector<Complex> phases(const AxiGrid& g, double z) {
  std::vector<Complex> ph(g.half_z());
  const Complex step = std::polar(1.0, 2.0 * kPi * (z - g.z(0)) / g.l_z());
  ph[0] = 1.0;
  // Re-seed periodically to keep the recurrence accurate.
  for (int b = 1; b < g.half_z(); ++b)
    ph[b] = b % 64 == 0 ? std::polar(1.0, g.kz(b) * (z - g.z(0))) : ph[b - 1] * step;
  return ph;
}

}  // namespace

struct AxiInterpolator::Impl {
  AxiGrid g;
  std::vector<RowSeries> f;  // ur, uz, dr ur, dz ur, dr uz, dz uz
};

AxiInterpolator::AxiInterpolator(const AxiGrid& g, const AxiVelocity& u) {
  auto impl = std::make_shared<Impl>(Impl{g, {}});
  const int n = g.n_r();
  // u^r vanishes at the wall (psi does), u^z is continued evenly there.
  AxiField drur = r_derivative(g, u.ur, -1.0, -1.0);
  AxiField druz = r_derivative(g, u.uz, 1.0, 1.0);
  for (int j = 0; j < g.n_z(); ++j)
    druz(n - 1, j) = (u.uz(n - 1, j) - u.uz(n - 2, j)) / g.h_r();
  impl->f.emplace_back(g, u.ur, -1.0);
  impl->f.emplace_back(g, u.uz, 1.0);
  impl->f.emplace_back(g, drur, 1.0);
  impl->f.emplace_back(g, z_derivative(g, u.ur), -1.0);
  impl->f.emplace_back(g, druz, -1.0);
  impl->f.emplace_back(g, z_derivative(g, u.uz), 1.0);
  impl_ = std::move(impl);
}

FlowSample AxiInterpolator::operator()(const Vec2& rz) const {
  const AxiGrid& g = impl_->g;
  const double r = rz(0);
  if (!(r > 0.0)) throw NumericalFault("axi tracer crossed the axis (r = " + format_number(r) + ")");
  if (r > g.r(g.n_r() - 1)) throw NumericalFault("axi tracer left the grid (r = " + format_number(r) + ")");
  const double s = r / g.h_r() - 0.5;
  const int i0 = static_cast<int>(std::floor(s));
  const double w = s - i0;
  const auto ph = phases(g, rz(1));
  double v[6];
  for (int k = 0; k < 6; ++k) v[k] = (1.0 - w) * impl_->f[k].row(i0, ph) + w * impl_->f[k].row(i0 + 1, ph);
  FlowSample out;
  out.u = Vec2(v[0], v[1]);
  out.du << v[2], v[3], v[4], v[5];
  return out;
}

struct AxiScalarInterpolator::Impl {
  AxiGrid g;
  RowSeries f;
};

AxiScalarInterpolator::AxiScalarInterpolator(const AxiGrid& g, const AxiField& f, bool odd_in_r)
    : impl_(std::make_shared<Impl>(Impl{g, RowSeries(g, f, odd_in_r ? -1.0 : 1.0)})) {}

double AxiScalarInterpolator::operator()(const Vec2& rz) const {
  const AxiGrid& g = impl_->g;
  const double r = std::abs(rz(0));
  if (r > g.r(g.n_r() - 1)) return 0.0;
  const double s = r / g.h_r() - 0.5;
  const int i0 = static_cast<int>(std::floor(s));
  const double w = s - i0;
  const auto ph = phases(g, rz(1));
  // Four-point Lagrange weights at nodes -1, 0, 1, 2.
  const double l[4] = {-w * (w - 1.0) * (w - 2.0) / 6.0, (w + 1.0) * (w - 1.0) * (w - 2.0) / 2.0,
                       -(w + 1.0) * w * (w - 2.0) / 2.0, (w + 1.0) * w * (w - 1.0) / 6.0};
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) acc += l[k] * impl_->f.row(i0 - 1 + k, ph);
  const double sign = rz(0) < 0.0 ? impl_->f.axis_sign : 1.0;
  return sign * acc;
}

double AxiFlowMapEnsemble::max_det_identity() const {
  return det_identity.empty() ? 0.0 : *std::max_element(det_identity.begin(), det_identity.end());
}

double AxiFlowMapEnsemble::max_deformation() const {
  return sup_series.empty() ? 0.0 : *std::max_element(sup_series.begin(), sup_series.end());
}

std::vector<Vec2> axi_seed_grid(double r_lo, double r_hi, double z_lo, double z_hi, int n_r, int n_z) {
  if (n_r < 1 || n_z < 1) throw ValidationError("axi_seed_grid: counts must be >= 1");
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || !(z_hi > z_lo)) throw ValidationError("axi_seed_grid: bad box");
  std::vector<Vec2> out;
  out.reserve(std::size_t(n_r) * n_z);
  const double dr = (r_hi - r_lo) / n_r, dz = (z_hi - z_lo) / n_z;
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_z; ++j) out.emplace_back(r_lo + (i + 0.5) * dr, z_lo + (j + 0.5) * dz);
  return out;
}

AxiCoupledRun axi_run_with_flowmap(const AxiRunConfig& cfg, const AxiState& s0, const std::vector<Vec2>& seeds,
                                   int record_every, const std::function<void(const AxiState&)>& on_step,
                                   const AxiVelocitySolver& solver) {
  for (const auto& x : seeds)
    if (!(x(0) > 0.0)) throw ValidationError("axi flow map: seeds need r > 0");
  TracerRk4 tr(seeds);
  AxiFlowMapEnsemble ens;
  ens.seeds = seeds;
  const int every = std::max(1, record_every);
  const long steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  long count = 0;
  auto observer = [&](int stage, double dt, double, const AxiField&, const AxiVelocity& u) {
    AxiInterpolator f(cfg.grid, u);
    tr.feed(stage, dt, [&](const Vec2& x) { return f(x); });
  };
  auto step_cb = [&](const AxiState& s) {
    const auto& x = tr.positions();
    const auto& j = tr.jacobians();
    double sup = 0.0, det = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sup = std::max(sup, j[i].cwiseAbs().maxCoeff());
      det = std::max(det, std::abs(j[i].determinant() - seeds[i](0) / x[i](0)));
    }
    ens.sup_series.push_back(sup);
    ens.sup_times.push_back(s.t());
    ens.det_identity.push_back(det);
    if (count % every == 0 || count == steps) {
      ens.times.push_back(s.t());
      ens.positions.push_back(x);
      ens.jacobians.push_back(j);
    }
    ++count;
    if (on_step) on_step(s);
  };
  AxiCoupledRun out{axi_run(cfg, s0, step_cb, observer, solver), std::move(ens)};
  return out;
}

MetricFactorReport metric_factor_check(const AxiState& s0, const AxiFlowMapEnsemble& ens, const AxiState& st,
                                       double threshold) {
  if (ens.times.empty() || std::abs(ens.times.back() - st.t()) > 1e-9 * std::max(1.0, st.t()))
    throw ValidationError("metric_factor_check: ensemble does not end at the state time");
  const AxiField w0 = s0.omega(), wt = st.omega();
  const AxiScalarInterpolator f0(s0.grid(), w0, true), ft(st.grid(), wt, true);
  const double m0 = max_abs(w0), mt = max_abs(wt);
  MetricFactorReport rep;
  if (m0 == 0.0) return rep;
  const auto& x = ens.positions.back();
  for (std::size_t i = 0; i < ens.seeds.size(); ++i) {
    const Vec2& a = ens.seeds[i];
    const double v0 = f0(a);
    if (std::abs(v0) < threshold * m0) continue;
    const double formula = v0 / a(0) * x[i](0);
    rep.residual = std::max(rep.residual, std::abs(ft(x[i]) - formula) / mt);
    ++rep.probes;
  }
  return rep;
}

AxiRaster3D raster_from_function(const std::function<double(double, double)>& omega_theta, int n, double box_length) {
  if (n < 8 || n % 2 != 0) throw ValidationError("raster: n must be even and >= 8");
  AxiRaster3D out;
  const std::vector<int> shape{n, n, n};
  const std::size_t total = std::size_t(n) * n * n;
  for (auto* c : {&out.wx, &out.wy, &out.wz}) *c = PeriodicRaster{shape, box_length, Eigen::ArrayXd::Zero(total)};
  const double h = box_length / n;
  auto coord = [&](int i) { return (i - n / 2) * h; };
  auto idx = [&](int a, int b, int c) { return (std::size_t(a) * n + b) * n + c; };
  // Samples in the (x1, x2) plane depend on r only; evaluate omega^theta once per (i, j, k).
#pragma omp parallel for schedule(static)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double x1 = coord(a), x2 = coord(b), r = std::hypot(x1, x2);
      if (r == 0.0) continue;
      for (int c = 0; c < n; ++c) {
        const double w = omega_theta(r, coord(c));
        out.wx.values[idx(a, b, c)] = -w * x2 / r;
        out.wy.values[idx(a, b, c)] = w * x1 / r;
      }
    }
  double m = 0.0, var = 0.0;
  for (std::size_t t = 0; t < total; ++t) m = std::max(m, std::hypot(out.wx.values[t], out.wy.values[t]));
  // Quarter turn (x1, x2) -> (-x2, x1) maps node (a, b) to ((n - b) % n, a).
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int ra = (n - b) % n, rb = a;
      for (int c = 0; c < n; ++c) {
        const double v1 = std::hypot(out.wx.values[idx(a, b, c)], out.wy.values[idx(a, b, c)]);
        const double v2 = std::hypot(out.wx.values[idx(ra, rb, c)], out.wy.values[idx(ra, rb, c)]);
        // Nodes whose rotation image leaves the box (the x2 = -L/2 row) are skipped.
        if (b == 0) continue;
        var = std::max(var, std::abs(v1 - v2));
      }
    }
  out.azimuthal_variance = m > 0.0 ? var / m : 0.0;
  if (out.azimuthal_variance > 1e-8)
    throw NumericalFault("raster: azimuthal variance " + format_number(out.azimuthal_variance) + " exceeds 1e-8");
  return out;
}

AxiRaster3D raster_to_3d(const AxiState& s, int n, double box_length) {
  const auto& g = s.grid();
  if (box_length > g.l_z() + 1e-12) throw ValidationError("raster: box longer than the z period");
  const AxiScalarInterpolator f(g, s.omega(), true);
  return raster_from_function(
      [&](double r, double z) {
        if (r > g.r(g.n_r() - 1)) return 0.0;
        return f(Vec2(r, z));
      },
      n, box_length);
}

double raster_sobolev_norm(const AxiRaster3D& w, double s) {
  const double a = sobolev_norm(w.wx, s), b = sobolev_norm(w.wy, s), c = sobolev_norm(w.wz, s);
  return std::sqrt(a * a + b * b + c * c);
}

double ur_kernel_quadrature(const AxiGrid& g, const AxiField& omega_theta, double r, double z, int images) {
  require_shape(g, omega_theta, "ur_kernel_quadrature");
  if (!(r > 0.0)) throw ValidationError("ur_kernel_quadrature: r must be > 0");
  // Gauss-Legendre 16 nodes on each of 12 panels graded towards theta = 0.
  static const auto gl = [] {
    const int m = 16;
    std::vector<std::pair<double, double>> nw(m);
    for (int i = 0; i < m; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (m + 0.5)), dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p1 = 1.0, p2 = 0.0;
        for (int j = 1; j <= m; ++j) {
          const double p3 = p2;
          p2 = p1;
          p1 = ((2.0 * j - 1.0) * x * p2 - (j - 1.0) * p3) / j;
        }
        dp = m * (x * p1 - p2) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nw[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
    }
    return nw;
  }();
  constexpr int panels = 12;
  std::vector<double> th, wt;
  for (int p = 0; p < panels; ++p) {
    const double a = kPi * std::pow(double(p) / panels, 2), b = kPi * std::pow(double(p + 1) / panels, 2);
    for (const auto& [x, w] : gl) {
      th.push_back(0.5 * (a + b) + 0.5 * (b - a) * x);
      wt.push_back(0.5 * (b - a) * w);
    }
  }
  std::vector<double> s2(th.size()), ct(th.size());
  for (std::size_t k = 0; k < th.size(); ++k) {
    s2[k] = std::sin(th[k]) * std::sin(th[k]);
    ct[k] = std::cos(th[k]);
  }
  const double thr = 1e-14 * max_abs(omega_theta);
  double acc = 0.0;
  for (int i = 0; i < g.n_r(); ++i) {
    const double rho = g.r(i);
    for (int j = 0; j < g.n_z(); ++j) {
      const double w = omega_theta(i, j);
      if (std::abs(w) <= thr) continue;
      for (int m = -images; m <= images; ++m) {
        const double dz = z - (g.z(j) + m * g.l_z());
        double ang = 0.0;
        for (std::size_t k = 0; k < th.size(); ++k) {
          const double d = r * r + rho * rho - 2.0 * r * rho * ct[k] + dz * dz;
          ang += wt[k] * s2[k] / (d * d * std::sqrt(d));
        }
        acc += rho * rho * w * dz * ang;
      }
    }
  }
  // u^r = r v, v = (3 / 2 pi) sum rho^2 omega (z - y) int sin^2 / D^{5/2} dr dy.
  return r * 3.0 / (2.0 * kPi) * acc * g.h_r() * g.h_z();
}

}  // namespace eulab
