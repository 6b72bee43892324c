#include "eulab/flowmap.hpp"

#include "eulab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace eulab {

namespace {

// Multipliers applied to the vorticity: u1, u2, R11, R12, R22.
std::vector<ComplexArray2> flow_coeffs(const GridSpec2D& g, const ComplexArray2& w) {
  const Complex I(0.0, 1.0);
  return {apply_symbol(g, w, [&](double k1, double k2) {
            const double kk = k1 * k1 + k2 * k2;
            return kk == 0.0 ? Complex(0.0) : I * k2 / kk;
          }),
          apply_symbol(g, w, [&](double k1, double k2) {
            const double kk = k1 * k1 + k2 * k2;
            return kk == 0.0 ? Complex(0.0) : -I * k1 / kk;
          }),
          apply_symbol(g, w, [](double k1, double k2) {
            const double kk = k1 * k1 + k2 * k2;
            return kk == 0.0 ? Complex(0.0) : Complex(k1 * k1 / kk);
          }),
          apply_symbol(g, w, [](double k1, double k2) {
            const double kk = k1 * k1 + k2 * k2;
            return kk == 0.0 ? Complex(0.0) : Complex(k1 * k2 / kk);
          }),
          apply_symbol(g, w, [](double k1, double k2) {
            const double kk = k1 * k1 + k2 * k2;
            return kk == 0.0 ? Complex(0.0) : Complex(k2 * k2 / kk);
          })};
}

FlowSample assemble(const double* v) {
  FlowSample s;
  s.u = Vec2(v[0], v[1]);
  // d1u1 = -R12, d2u1 = -R22, d1u2 = R11, d2u2 = R12
  s.du << -v[3], -v[4], v[2], v[3];
  return s;
}

double matrix_max(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

SpectralInterpolator::SpectralInterpolator(const GridSpec2D& g, std::vector<ComplexArray2> coeffs,
                                           InterpMethod method, const InterpOptions& opt)
    : grid_(g), method_(method), nfields_(coeffs.size()), width_(opt.width) {
  const int n = g.n(), half = g.half();
  for (auto& c : coeffs) {
    if (c.rows() != n || c.cols() != half) throw ValidationError("interpolator: coefficient shape mismatch");
    // Nyquist row and column carry no well-defined off-grid interpolant.
    c.row(n / 2).setZero();
    c.col(n / 2).setZero();
  }
  if (method_ == InterpMethod::Exact) {
    coeffs_ = std::move(coeffs);
    return;
  }
  if (method_ != InterpMethod::Lagrange) throw ValidationError("interpolator: method must be exact or lagrange");
  if (opt.upsample < 1 || width_ < 2 || width_ % 2 != 0) throw ValidationError("interpolator: bad stencil options");
  nf_ = opt.upsample * n;
  hf_ = g.box_length() / nf_;
  const double scale = double(nf_) * nf_ / (double(n) * n);
  auto& fft = fft_for(std::vector<int>{nf_, nf_});
  for (const auto& c : coeffs) {
    ComplexArray2 f = ComplexArray2::Zero(nf_, nf_ / 2 + 1);
    for (int a = 0; a < n; ++a) {
      const int m1 = g.mode(a);
      for (int b = 0; b < n / 2; ++b) f((m1 + nf_) % nf_, b) = c(a, b) * scale;
    }
    fine_.push_back(fft.backward(f));
  }
  denom_.resize(width_);
  for (int j = 0; j < width_; ++j) {
    double d = 1.0;
    for (int m = 0; m < width_; ++m)
      if (m != j) d *= double(j - m);
    denom_(j) = d;
  }
}

void SpectralInterpolator::eval(const Vec2& x, double* out) const {
  if (method_ == InterpMethod::Exact)
    exact(x, out);
  else
    lagrange(x, out);
}

void SpectralInterpolator::exact(const Vec2& x, double* out) const {
  const int n = grid_.n(), half = grid_.half();
  const double k0 = grid_.k0(), L = grid_.box_length();
  Eigen::ArrayXcd e1(n), e2(half);
  for (int a = 0; a < n; ++a) e1(a) = std::polar(1.0, k0 * grid_.mode(a) * (x(0) + 0.5 * L));
  for (int b = 0; b < half; ++b) e2(b) = std::polar(b == 0 ? 1.0 : 2.0, k0 * b * (x(1) + 0.5 * L));
  const double norm = 1.0 / (double(n) * n);
  for (std::size_t f = 0; f < nfields_; ++f) {
    const auto& c = coeffs_[f];
    double acc = 0.0;
    for (int a = 0; a < n; ++a) {
      Complex inner = 0.0;
      for (int b = 0; b < half; ++b) inner += c(a, b) * e2(b);
      acc += (e1(a) * inner).real();
    }
    out[f] = acc * norm;
  }
}

void SpectralInterpolator::lagrange(const Vec2& x, double* out) const {
  const double L = grid_.box_length();
  const int w = width_, lo = -(w / 2 - 1);
  double wt[2][32];
  int idx[2][32];
  for (int d = 0; d < 2; ++d) {
    const double s = (x(d) + 0.5 * L) / hf_;
    const double fl = std::floor(s);
    const double th = s - fl;
    const long i0 = static_cast<long>(fl);
    // Lagrange basis on nodes lo..lo+w-1 at offset th.
    double full = 1.0;
    bool on_node = false;
    int node = 0;
    for (int j = 0; j < w; ++j) {
      const double dj = th - (lo + j);
      if (dj == 0.0) {
        on_node = true;
        node = j;
      }
      full *= dj;
    }
    for (int j = 0; j < w; ++j) {
      if (on_node)
        wt[d][j] = j == node ? 1.0 : 0.0;
      else
        wt[d][j] = full / ((th - (lo + j)) * denom_(j));
      long k = (i0 + lo + j) % nf_;
      if (k < 0) k += nf_;
      idx[d][j] = static_cast<int>(k);
    }
  }
  for (std::size_t f = 0; f < nfields_; ++f) {
    const auto& v = fine_[f];
    double acc = 0.0;
    for (int a = 0; a < w; ++a) {
      const double* row = v.data() + static_cast<std::size_t>(idx[0][a]) * nf_;
      double r = 0.0;
      for (int b = 0; b < w; ++b) r += wt[1][b] * row[idx[1][b]];
      acc += wt[0][a] * r;
    }
    out[f] = acc;
  }
}

InterpMethod resolve_method(const InterpOptions& opt, std::size_t points) {
  if (opt.method != InterpMethod::Auto) return opt.method;
  return points < static_cast<std::size_t>(opt.exact_below) ? InterpMethod::Exact : InterpMethod::Lagrange;
}

FlowInterpolator::FlowInterpolator(const GridSpec2D& g, const ComplexArray2& omega_hat, InterpMethod method,
                                   const InterpOptions& opt)
    : impl_(g, flow_coeffs(g, omega_hat), method, opt) {}

FlowSample FlowInterpolator::operator()(const Vec2& x) const {
  double v[5];
  impl_.eval(x, v);
  return assemble(v);
}

namespace {
std::vector<ComplexArray2> scalar_coeffs(const SpectralField2D& f) {
  const Complex I(0.0, 1.0);
  const auto& g = f.grid();
  return {f.coeffs(), apply_symbol(g, f.coeffs(), [&](double k1, double) { return I * k1; }),
          apply_symbol(g, f.coeffs(), [&](double, double k2) { return I * k2; })};
}
}  // namespace

ScalarInterpolator::ScalarInterpolator(const SpectralField2D& f, InterpMethod method, const InterpOptions& opt)
    : impl_(f.grid(), scalar_coeffs(f), method, opt) {}

Eigen::Vector3d ScalarInterpolator::operator()(const Vec2& x) const {
  Eigen::Vector3d v;
  impl_.eval(x, v.data());
  return v;
}

AnalyticFlow zero_flow() {
  return {[](double, const Vec2&) { return FlowSample{}; }};
}

AnalyticFlow solid_rotation(double omega) {
  return {[omega](double, const Vec2& x) {
    FlowSample s;
    s.u = Vec2(-omega * x(1), omega * x(0));
    s.du << 0.0, -omega, omega, 0.0;
    return s;
  }};
}

AnalyticFlow linear_strain(double a) {
  return {[a](double, const Vec2& x) {
    FlowSample s;
    s.u = Vec2(-a * x(0), a * x(1));
    s.du << -a, 0.0, 0.0, a;
    return s;
  }};
}

namespace {

void add_refinement(SeedLayout& l, double spacing, int levels) {
  l.refine_levels = levels;
  for (int lev = 1; lev <= levels; ++lev) {
    const double s = std::ldexp(spacing, -lev);
    for (int i = -2; i <= 2; ++i)
      for (int j = -2; j <= 2; ++j)
        if (i != 0 || j != 0) l.points.emplace_back(i * s, j * s);
  }
}

}  // namespace

SeedLayout make_seed_layout(double half_width, int per_side, int levels, bool include_origin) {
  if (!(half_width > 0.0) || per_side < 1 || levels < 0) throw ValidationError("seed layout: bad parameters");
  SeedLayout l;
  l.per_side = per_side;
  l.spacing = 2.0 * half_width / per_side;
  l.lower = Vec2::Constant(-half_width + 0.5 * l.spacing);
  for (int i = 0; i < per_side; ++i)
    for (int j = 0; j < per_side; ++j) l.points.emplace_back(l.lower(0) + i * l.spacing, l.lower(1) + j * l.spacing);
  l.grid_count = per_side * per_side;
  if (per_side % 2 == 1) {
    l.origin = (per_side / 2) * per_side + per_side / 2;
  } else if (include_origin) {
    l.origin = static_cast<int>(l.points.size());
    l.points.emplace_back(0.0, 0.0);
  }
  add_refinement(l, l.spacing, levels);
  return l;
}

SeedLayout grid_aligned_layout(const GridSpec2D& g, double half_width, int stride, int levels) {
  if (stride < 1 || g.n() % stride != 0) throw ValidationError("seed layout: stride must divide n");
  const double h = g.spacing() * stride;
  SeedLayout l;
  l.spacing = h;
  if (half_width >= 0.5 * g.box_length()) {
    // Whole periodic grid: nodes -n/2 .. n/2 - 1.
    const int m = g.n() / (2 * stride);
    l.per_side = 2 * m;
    l.lower = Vec2::Constant(-m * h);
    for (int i = -m; i < m; ++i)
      for (int j = -m; j < m; ++j) l.points.emplace_back(i * h, j * h);
    l.origin = m * l.per_side + m;
  } else {
    const int m = static_cast<int>(std::floor(half_width / h + 1e-9));
    if (m < 1) throw ValidationError("seed layout: half width below the stride spacing");
    l.per_side = 2 * m + 1;
    l.lower = Vec2::Constant(-m * h);
    for (int i = -m; i <= m; ++i)
      for (int j = -m; j <= m; ++j) l.points.emplace_back(i * h, j * h);
    l.origin = m * l.per_side + m;
  }
  l.grid_count = l.per_side * l.per_side;
  add_refinement(l, h, levels);
  return l;
}

double FlowMapEnsemble::max_det_drift() const {
  return det_drift.empty() ? 0.0 : *std::max_element(det_drift.begin(), det_drift.end());
}

double FlowMapEnsemble::max_deformation() const {
  return sup_series.empty() ? 1.0 : *std::max_element(sup_series.begin(), sup_series.end());
}

TracerRk4::TracerRk4(std::vector<Vec2> seeds, bool with_jacobians)
    : jac_(with_jacobians), x_(std::move(seeds)) {
  const std::size_t n = x_.size();
  xs_.assign(n, Vec2::Zero());
  kx_.assign(n, Vec2::Zero());
  acc_x_.assign(n, Vec2::Zero());
  j_.assign(n, Mat2::Identity());
  js_ = j_;
  kj_.assign(n, Mat2::Zero());
  acc_j_.assign(n, Mat2::Zero());
}

namespace {
constexpr double kStageC[4] = {0.0, 0.5, 0.5, 1.0};
constexpr double kStageB[4] = {1.0, 2.0, 2.0, 1.0};
}  // namespace

std::vector<Vec2> TracerRk4::stage_positions(int stage, double dt) const {
  std::vector<Vec2> out(x_.size());
  const double c = kStageC[stage] * dt;
  for (std::size_t i = 0; i < x_.size(); ++i) out[i] = stage == 0 ? x_[i] : Vec2(x_[i] + c * kx_[i]);
  return out;
}

void TracerRk4::feed(int stage, double dt, const std::vector<FlowSample>& samples) {
  if (stage < 0 || stage > 3) throw ValidationError("tracer stage must be 0..3");
  if (samples.size() != x_.size()) throw ValidationError("tracer: sample count mismatch");
  const double c = kStageC[stage] * dt, b = kStageB[stage];
  for (std::size_t i = 0; i < x_.size(); ++i) {
    kx_[i] = samples[i].u;
    acc_x_[i] += b * kx_[i];
    if (jac_) {
      const Mat2 js = stage == 0 ? j_[i] : Mat2(j_[i] + c * kj_[i]);
      kj_[i] = samples[i].du * js;
      acc_j_[i] += b * kj_[i];
    }
  }
  if (stage == 3) {
    for (std::size_t i = 0; i < x_.size(); ++i) {
      x_[i] += (dt / 6.0) * acc_x_[i];
      acc_x_[i].setZero();
      if (jac_) {
        j_[i] += (dt / 6.0) * acc_j_[i];
        acc_j_[i].setZero();
      }
    }
  }
}

void TracerRk4::feed(int stage, double dt, const std::function<FlowSample(const Vec2&)>& eval) {
  const auto pos = stage_positions(stage, dt);
  std::vector<FlowSample> samples(pos.size());
  const long n = static_cast<long>(pos.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) samples[i] = eval(pos[i]);
  feed(stage, dt, samples);
}

EnsembleRecorder::EnsembleRecorder(const SeedLayout& layout, double box_length, bool odd_data, int record_every)
    : box_length_(box_length), odd_(odd_data), every_(std::max(1, record_every)) {
  ens_.seeds = layout.points;
  ens_.origin = layout.origin;
  ens_.layout = layout;
}

void EnsembleRecorder::record(double t, const TracerRk4& tr, bool force) {
  const auto& x = tr.positions();
  const auto& j = tr.jacobians();
  double sup = 0.0, det = 0.0, quad = 0.0;
  int arg = 0;
  bool out = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = matrix_max(j[i]);
    if (m > sup) {
      sup = m;
      arg = static_cast<int>(i);
    }
    det = std::max(det, std::abs(j[i].determinant() - 1.0));
    if (x[i].cwiseAbs().maxCoeff() > 0.25 * box_length_) out = true;
    if (odd_) {
      const Vec2& x0 = ens_.seeds[i];
      const double r = x0.norm();
      if (r == 0.0) continue;
      for (int d = 0; d < 2; ++d) {
        double depth;
        if (x0(d) == 0.0)
          depth = std::abs(x[i](d));
        else
          depth = std::max(0.0, -x[i](d) * (x0(d) > 0 ? 1.0 : -1.0));
        quad = std::max(quad, depth / r);
      }
    }
  }
  ens_.sup_times.push_back(t);
  ens_.sup_series.push_back(sup);
  ens_.sup_argmax.push_back(arg);
  ens_.sup_jacobian.push_back(j.empty() ? Mat2::Identity() : j[arg]);
  ens_.det_drift.push_back(det);
  ens_.left_central_box = ens_.left_central_box || out;
  ens_.quadrant_violation = std::max(ens_.quadrant_violation, quad);
  const bool due = calls_ % every_ == 0;
  ++calls_;
  if ((due || force) && (ens_.times.empty() || ens_.times.back() != t)) {
    ens_.times.push_back(t);
    ens_.positions.push_back(x);
    ens_.jacobians.push_back(j);
  }
}

FlowMapEnsemble advect_analytic(const AnalyticFlow& flow, const SeedLayout& seeds, double t_end, double dt,
                                const FlowMapOptions& opt, double box_length) {
  if (!(dt > 0.0) || t_end < 0.0) throw ValidationError("advect: dt must be positive");
  TracerRk4 tr(seeds.points);
  EnsembleRecorder rec(seeds, box_length, opt.odd_data, opt.record_every);
  rec.record(0.0, tr);
  const long steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  double t = 0.0;
  for (long s = 0; s < steps; ++s) {
    const double t_next = std::min(t_end, (s + 1) * dt);
    const double h = t_next - t;
    for (int st = 0; st < 4; ++st) {
      const double ts = t + kStageC[st] * h;
      tr.feed(st, h, [&](const Vec2& x) { return flow.eval(ts, x); });
    }
    t = t_next;
    rec.record(t, tr, s + 1 == steps);
  }
  return rec.take();
}

namespace {

FlowMapEnsemble integrate_trajectory(const VelocityTrajectory& traj, const SeedLayout& seeds,
                                     const FlowMapOptions& opt, bool jacobians) {
  const std::size_t m = traj.times.size();
  if (m != traj.omega_hat.size() || m < 3 || (m - 1) % 2 != 0)
    throw ValidationError("trajectory: need an odd number (>= 3) of snapshots, i.e. an even number of intervals");
  const double spacing = traj.times[1] - traj.times[0];
  if (!(spacing > 0.0)) throw ValidationError("trajectory: times must increase");
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(traj.times[i] - traj.times[i - 1] - spacing) > 1e-9 * spacing)
      throw ValidationError("trajectory: snapshots must be uniformly spaced");
  const InterpMethod method = resolve_method(opt.interp, seeds.points.size());
  TracerRk4 tr(seeds.points, jacobians);
  EnsembleRecorder rec(seeds, traj.grid.box_length(), opt.odd_data, opt.record_every);
  rec.record(traj.times[0], tr);
  const double dt = 2.0 * spacing;
  std::optional<FlowInterpolator> start(std::in_place, traj.grid, traj.omega_hat[0], method, opt.interp);
  for (std::size_t s = 0; 2 * s + 2 < m; ++s) {
    FlowInterpolator mid(traj.grid, traj.omega_hat[2 * s + 1], method, opt.interp);
    FlowInterpolator end(traj.grid, traj.omega_hat[2 * s + 2], method, opt.interp);
    tr.feed(0, dt, [&](const Vec2& x) { return (*start)(x); });
    tr.feed(1, dt, [&](const Vec2& x) { return mid(x); });
    tr.feed(2, dt, [&](const Vec2& x) { return mid(x); });
    tr.feed(3, dt, [&](const Vec2& x) { return end(x); });
    rec.record(traj.times[2 * s + 2], tr, 2 * s + 3 == m);
    start.emplace(std::move(end));
  }
  return rec.take();
}

}  // namespace

FlowMapEnsemble deformation(const VelocityTrajectory& traj, const SeedLayout& seeds, const FlowMapOptions& opt) {
  return integrate_trajectory(traj, seeds, opt, true);
}

FlowMapEnsemble advect(const VelocityTrajectory& traj, const SeedLayout& seeds, const FlowMapOptions& opt) {
  return integrate_trajectory(traj, seeds, opt, false);
}

OriginSample sample_origin(const SimState2D& s) {
  const auto du = velocity_gradient(s.omega());
  const int o = s.grid().n() / 2;
  OriginSample r;
  r.t = s.t();
  r.lambda = du.d2u2(o, o);
  r.du_scale = std::max({du.d1u1.max_abs(), du.d2u1.max_abs(), du.d1u2.max_abs(), du.d2u2.max_abs()});
  const double off = std::max(std::abs(du.d2u1(o, o)), std::abs(du.d1u2(o, o)));
  r.offdiag = r.du_scale == 0.0 ? 0.0 : off / r.du_scale;
  return r;
}

CoupledRun run_with_flowmap(const RunConfig2D& cfg, const SpectralField2D& omega0, const SeedLayout& seeds,
                            const FlowMapOptions& opt, const std::function<void(const SimState2D&)>& on_step) {
  const InterpMethod method = resolve_method(opt.interp, seeds.points.size());
  TracerRk4 tr(seeds.points);
  EnsembleRecorder rec(seeds, cfg.grid.box_length(), opt.odd_data, opt.record_every);
  std::vector<OriginSample> origin;
  const long steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  auto observer = [&](int stage, double dt, double, const ComplexArray2& w) {
    FlowInterpolator f(cfg.grid, w, method, opt.interp);
    tr.feed(stage, dt, [&](const Vec2& x) { return f(x); });
  };
  long count = 0;
  auto step_cb = [&](const SimState2D& s) {
    rec.record(s.t(), tr, count == steps);
    origin.push_back(sample_origin(s));
    ++count;
    if (on_step) on_step(s);
  };
  CoupledRun out{run2d(cfg, omega0, step_cb, observer), {}, {}};
  out.ensemble = rec.take();
  out.origin = std::move(origin);
  return out;
}

double b_functional(const SpectralField2D& g) {
  const double scale = g.max_abs();
  if (scale == 0.0) return 0.0;
  const double r1 = parity_residual(g, 1, Parity::Odd), r2 = parity_residual(g, 2, Parity::Odd);
  if (r1 > 1e-10 || r2 > 1e-10) {
    std::ostringstream msg;
    msg << "b_functional: data must be odd in x1 and x2 (residuals " << r1 << ", " << r2
        << "); the integrand is singular at the origin otherwise";
    throw ValidationError(msg.str());
  }
  const auto& grid = g.grid();
  const int n = grid.n(), o = n / 2;
  const double qmin = g.values().bottomRightCorner(o, o).minCoeff();
  if (qmin < -1e-12 * scale) throw ValidationError("b_functional: data must be nonnegative on the first quadrant");
  auto quad = [&](int stride) {
    double acc = 0.0;
    for (int i = o % stride; i < n; i += stride) {
      const double x1 = grid.coord(i);
      for (int j = o % stride; j < n; j += stride) {
        const double x2 = grid.coord(j);
        const double r2 = x1 * x1 + x2 * x2;
        if (r2 == 0.0) continue;
        acc += g(i, j) * x1 * x2 / (r2 * r2);
      }
    }
    const double h = grid.spacing() * stride;
    return acc * h * h;
  };
  return (4.0 * quad(1) - quad(2)) / 3.0;
}

double deformation_integral_bound(double B, double t) {
  return kPi / (4.0 * B) * std::log1p(4.0 * B * t / kPi);
}

double deformation_lower_bound(double B, double t) {
  if (t <= 0.0) return 1.0;
  const double a = 4.0 * B * t / kPi;
  return std::pow(a / std::log1p(a), 0.25);
}

DeformationCertificate check_deformation_growth(const std::vector<double>& times, const std::vector<double>& sup_series,
                                                double det_drift, double B, double slack) {
  if (!(B > 0.0)) throw ValidationError("certificate refused: B must be positive (got " + format_number(B) + ")");
  if (det_drift > 1e-2)
    throw ValidationError("certificate refused: det D phi drift " + format_number(det_drift) + " exceeds 1e-2");
  if (sup_series.empty()) throw ValidationError("certificate refused: empty ensemble");
  if (times.size() != sup_series.size()) throw ValidationError("certificate refused: series lengths differ");
  DeformationCertificate c;
  c.B = B;
  c.slack = slack;
  double lhs = 0.0, maxdef = 0.0;
  bool ok = true;
  const double t0 = times.front();
  for (std::size_t i = 0; i < sup_series.size(); ++i) {
    const double t = times[i] - t0;
    if (i > 0) {
      const double dt = times[i] - times[i - 1];
      lhs += 0.5 * dt * (std::pow(sup_series[i], -4.0) + std::pow(sup_series[i - 1], -4.0));
    }
    maxdef = std::max(maxdef, sup_series[i]);
    const double rhs = deformation_integral_bound(B, t);
    const double lb = deformation_lower_bound(B, t);
    c.t.push_back(t);
    c.lhs.push_back(lhs);
    c.rhs.push_back(rhs);
    c.max_def.push_back(maxdef);
    c.lower_bound.push_back(lb);
    c.integral_margin.push_back(rhs > 0.0 ? 1.0 - lhs / rhs : 0.0);
    c.growth_margin.push_back(maxdef / lb - 1.0);
    if (t > 0.0 && (lhs > (1.0 + slack) * rhs || maxdef < (1.0 - slack) * lb)) ok = false;
  }
  c.pass = ok;
  return c;
}

DeformationCertificate check_deformation_growth(const FlowMapEnsemble& ens, double B, double slack) {
  auto c = check_deformation_growth(ens.sup_times, ens.sup_series, ens.max_det_drift(), B, slack);
  c.seed_count = static_cast<double>(ens.seeds.size());
  c.seed_spacing = ens.layout.spacing;
  return c;
}

HyperbolicityReport hyperbolicity_at_origin(const std::vector<OriginSample>& origin, const FlowMapEnsemble& ens,
                                            double B) {
  if (origin.size() != ens.sup_series.size())
    throw ValidationError("hyperbolicity: origin samples and ensemble use different cadences");
  HyperbolicityReport r;
  r.min_bound_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < origin.size(); ++i) {
    HyperbolicityPoint p;
    p.t = origin[i].t;
    p.lambda = origin[i].lambda;
    p.offdiag = origin[i].offdiag;
    p.sup_def = ens.sup_series[i];
    p.bound_ratio = B > 0.0 ? -kPi * p.lambda * std::pow(p.sup_def, 4) / B : 0.0;
    r.max_offdiag = std::max(r.max_offdiag, p.offdiag);
    r.min_bound_ratio = std::min(r.min_bound_ratio, p.bound_ratio);
    r.series.push_back(p);
  }
  if (r.series.empty()) r.min_bound_ratio = 0.0;
  return r;
}

double lagrangian_h1(const SpectralField2D& f, const FlowMapEnsemble& ens, std::size_t time_index,
                     const InterpOptions& opt) {
  const auto& lay = ens.layout;
  if (lay.grid_count == 0) throw ValidationError("lagrangian_h1: ensemble has no regular seed grid");
  if (time_index >= ens.jacobians.size()) throw ValidationError("lagrangian_h1: time index not recorded");
  const auto& J = ens.jacobians[time_index];
  double det = 0.0;
  for (int i = 0; i < lay.grid_count; ++i) det = std::max(det, std::abs(J[i].determinant() - 1.0));
  if (det > 1e-2) throw ValidationError("lagrangian_h1: det D phi drift " + format_number(det) + " too large");
  // Coverage: the part of |grad f|^2 living outside the seed box must be negligible.
  const auto& g = f.grid();
  const auto f1 = derivative(f, 1), f2 = derivative(f, 2);
  const double lo0 = lay.lower(0) - 0.5 * lay.spacing, lo1 = lay.lower(1) - 0.5 * lay.spacing;
  const double hi0 = lo0 + lay.per_side * lay.spacing, hi1 = lo1 + lay.per_side * lay.spacing;
  double inside = 0.0, outside = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const double e = f1(i, j) * f1(i, j) + f2(i, j) * f2(i, j);
      const double x1 = g.coord(i), x2 = g.coord(j);
      (x1 < lo0 || x1 > hi0 || x2 < lo1 || x2 > hi1 ? outside : inside) += e;
    }
  if (outside > 1e-8 * (inside + outside))
    throw ValidationError("lagrangian_h1: seed grid does not cover the support of f (outside fraction " +
                          format_number(outside / (inside + outside)) + ")");
  const ScalarInterpolator interp(f, resolve_method(opt, lay.grid_count), opt);
  double acc = 0.0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (int i = 0; i < lay.grid_count; ++i) {
    const Eigen::Vector3d v = interp(ens.seeds[i]);
    const Vec2 grad(v(1), v(2));
    const Mat2& a = J[i];
    Mat2 adj;
    adj << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
    acc += (adj.transpose() * grad).squaredNorm();
  }
  return acc * lay.spacing * lay.spacing;
}

InflationReport inflation_experiment(const RunConfig2D& base, const SpectralField2D& omega0, const SeedLayout& seeds,
                                     const InflationConfig& ic, const FlowMapOptions& opt) {
  auto coupled = run_with_flowmap(base, omega0, seeds, opt);
  const auto& ens = coupled.ensemble;
  std::size_t idx = 0;
  if (ic.t0) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ens.sup_times.size(); ++i)
      if (std::abs(ens.sup_times[i] - *ic.t0) < best) {
        best = std::abs(ens.sup_times[i] - *ic.t0);
        idx = i;
      }
  } else {
    for (std::size_t i = 0; i < ens.sup_series.size(); ++i)
      if (ens.sup_series[i] > ens.sup_series[idx]) idx = i;
  }
  InflationReport rep;
  rep.t0 = ens.sup_times[idx];
  rep.M = ens.sup_series[idx];
  if (rep.M < ic.m_threshold)
    throw ValidationError("inflation experiment declined: measured M = " + format_number(rep.M) +
                          " is below the threshold " + format_number(ic.m_threshold));
  rep.x_star = ic.x_star ? *ic.x_star : ens.seeds[ens.sup_argmax[idx]];
  if (!ic.x_star)
    for (int i = 0; i < 2; ++i)
      if (std::abs(rep.x_star(i)) < 2.0 * ic.delta) rep.x_star(i) = 0.0;
  if (ic.axis) {
    rep.axis = *ic.axis;
  } else {
    // Oscillating along e_axis pairs with column 3 - axis of D phi in the pullback.
    const Mat2 a = ens.sup_jacobian[idx].cwiseAbs();
    const double col1 = std::max(a(0, 0), a(1, 0)), col2 = std::max(a(0, 1), a(1, 1));
    rep.axis = col1 >= col2 ? 2 : 1;
  }
  const double t0 = rep.t0;
  const double M = ic.M_override ? *ic.M_override : rep.M;
  RunConfig2D cfg = base;
  cfg.t_end = t0;
  cfg.diag_every = 1 << 30;
  if (ic.perturbed_grid) cfg.grid = *ic.perturbed_grid;
  if (ic.perturbed_dt) cfg.dt = *ic.perturbed_dt;
  const auto w0 = resample(omega0, cfg.grid);
  const auto base_t0 = run2d(cfg, w0).final_state.omega();
  const double h_base = sobolev_norm(base_t0, 1.0);
  rep.hdot1_base0 = sobolev_norm(w0, 1.0);
  for (double k : ic.k_sweep) {
    BetaSpec bs;
    bs.k = k;
    bs.M = M;
    bs.x_star = rep.x_star;
    bs.delta = ic.delta;
    bs.variant = ic.variant;
    bs.axis = rep.axis;
    const auto beta = make_perturbation_beta(cfg.grid, bs) * ic.beta_scale;
    InflationRow row;
    row.k = k;
    row.hdot1_base = h_base;
    row.beta_l1 = lp_norm(beta, 1.0);
    row.beta_linf = beta.max_abs();
    row.beta_hdot1 = sobolev_norm(beta, 1.0);
    row.beta_hdot_m1 = sobolev_norm(beta, -1.0);
    row.grad_beta_sq = row.beta_hdot1 * row.beta_hdot1;
    row.ratio0 = sobolev_norm(w0 + beta, 1.0) / rep.hdot1_base0;
    const auto pert = run2d(cfg, w0 + beta).final_state.omega();
    row.hdot1_perturbed = sobolev_norm(pert, 1.0);
    row.ratio = row.hdot1_perturbed / h_base;
    rep.rows.push_back(row);
  }
  return rep;
}

std::vector<double> ode_perturbation_constants(const AnalyticFlow& base, const AnalyticFlow& v,
                                               const SeedLayout& seeds, double t_end, double dt,
                                               const std::vector<double>& eps) {
  const auto ref = advect_analytic(base, seeds, t_end, dt);
  std::vector<double> out;
  for (double e : eps) {
    AnalyticFlow p{[&, e](double t, const Vec2& x) {
      FlowSample a = base.eval(t, x), b = v.eval(t, x);
      a.u += e * b.u;
      a.du += e * b.du;
      return a;
    }};
    const auto run = advect_analytic(p, seeds, t_end, dt);
    double dx = 0.0, dj = 0.0;
    for (std::size_t i = 0; i < seeds.points.size(); ++i) {
      dx = std::max(dx, (run.final_positions()[i] - ref.final_positions()[i]).cwiseAbs().maxCoeff());
      dj = std::max(dj, matrix_max(run.final_jacobians()[i] - ref.final_jacobians()[i]));
    }
    out.push_back((dx + dj) / e);
  }
  return out;
}

}  // namespace eulab
