#include "eulab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

namespace eulab {

GridSpec2D::GridSpec2D(int n, double box_length) : n_(n), box_length_(box_length) {
  if (n < 16 || !is_power_of_two(n)) {
    std::ostringstream os;
    os << "grid: n must be a power of two >= 16 (got " << n << ")";
    throw ValidationError(os.str());
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) throw ValidationError("grid: box_length must be > 0");
}

RealFft& fft_for(const std::vector<int>& shape) {
  thread_local std::map<std::vector<int>, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[shape];
  if (!slot) slot = std::make_unique<RealFft>(shape);
  return *slot;
}

SpectralField2D SpectralField2D::from_values(const GridSpec2D& grid, RealArray2 values) {
  if (values.rows() != grid.n() || values.cols() != grid.n()) throw ValidationError("field: values shape mismatch");
  ComplexArray2 c = fft_for(grid).forward(values);
  return SpectralField2D(grid, std::move(values), std::move(c));
}

SpectralField2D SpectralField2D::from_coeffs(const GridSpec2D& grid, ComplexArray2 coeffs) {
  if (coeffs.rows() != grid.n() || coeffs.cols() != grid.half()) throw ValidationError("field: coeffs shape mismatch");
  RealArray2 v = fft_for(grid).backward(coeffs);
  // Re-derive the coefficients so both views agree exactly with a real field
  // (the imaginary parts of self-conjugate modes are dropped by c2r).
  ComplexArray2 c = fft_for(grid).forward(v);
  return SpectralField2D(grid, std::move(v), std::move(c));
}

SpectralField2D SpectralField2D::zero(const GridSpec2D& grid) {
  return SpectralField2D(grid, RealArray2::Zero(grid.n(), grid.n()), ComplexArray2::Zero(grid.n(), grid.half()));
}

SpectralField2D SpectralField2D::sample(const GridSpec2D& grid, const std::function<double(double, double)>& fn) {
  RealArray2 v(grid.n(), grid.n());
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.n(); ++j) v(i, j) = fn(grid.coord(i), grid.coord(j));
  return from_values(grid, std::move(v));
}

double SpectralField2D::zero_mode_relative() const {
  const double rms_sum = std::sqrt(static_cast<double>(values_.size()) * values_.square().sum());
  if (rms_sum == 0.0) return 0.0;
  return std::abs(coeffs_(0, 0)) / rms_sum;
}

SpectralField2D SpectralField2D::operator+(const SpectralField2D& o) const {
  if (!(grid_ == o.grid_)) throw ValidationError("field: grid mismatch in +");
  return SpectralField2D(grid_, values_ + o.values_, coeffs_ + o.coeffs_);
}

SpectralField2D SpectralField2D::operator-(const SpectralField2D& o) const {
  if (!(grid_ == o.grid_)) throw ValidationError("field: grid mismatch in -");
  return SpectralField2D(grid_, values_ - o.values_, coeffs_ - o.coeffs_);
}

SpectralField2D SpectralField2D::operator*(double s) const { return SpectralField2D(grid_, values_ * s, coeffs_ * s); }

ComplexArray2 apply_symbol(const GridSpec2D& grid, const ComplexArray2& coeffs,
                           const std::function<Complex(double, double)>& symbol) {
  const int n = grid.n();
  const double k0 = grid.k0();
  ComplexArray2 out(n, grid.half());
  for (int a = 0; a < n; ++a) {
    const double k1 = k0 * grid.mode(a);
    for (int b = 0; b < grid.half(); ++b) out(a, b) = symbol(k1, k0 * b) * coeffs(a, b);
  }
  return out;
}

void require_mean_zero(const SpectralField2D& f, const char* op) {
  if (!f.mean_zero()) {
    std::ostringstream os;
    os << op << ": input is not mean-zero (zero-mode/L2 = " << f.zero_mode_relative()
       << "); the periodic Biot-Savart law needs mean-zero vorticity";
    throw ValidationError(os.str());
  }
}

namespace {

// Nyquist rows/columns carry no sign information and are dropped by odd symbols.
bool is_nyquist(const GridSpec2D& g, double k1, double k2) {
  const double kn = g.k0() * (g.n() / 2);
  return std::abs(std::abs(k1) - kn) < 1e-9 * kn || std::abs(k2 - kn) < 1e-9 * kn;
}

}  // namespace

VelocityField2D biot_savart(const SpectralField2D& omega) {
  require_mean_zero(omega, "biot_savart");
  const auto& g = omega.grid();
  // u = Delta^{-1} grad^perp w = (-d2 psi, d1 psi), psi = Delta^{-1} w.
  auto s1 = [&](double k1, double k2) -> Complex {
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0 || is_nyquist(g, k1, k2)) return 0.0;
    return Complex(0.0, k2 / kk);
  };
  auto s2 = [&](double k1, double k2) -> Complex {
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0 || is_nyquist(g, k1, k2)) return 0.0;
    return Complex(0.0, -k1 / kk);
  };
  return {SpectralField2D::from_coeffs(g, apply_symbol(g, omega.coeffs(), s1)),
          SpectralField2D::from_coeffs(g, apply_symbol(g, omega.coeffs(), s2))};
}

SpectralField2D riesz(const SpectralField2D& f, int i, int j) {
  if (i < 1 || i > 2 || j < 1 || j > 2) throw ValidationError("riesz: indices must be 1 or 2");
  require_mean_zero(f, "riesz");
  const auto& g = f.grid();
  auto sym = [&](double k1, double k2) -> Complex {
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0) return 0.0;
    const double ki = i == 1 ? k1 : k2;
    const double kj = j == 1 ? k1 : k2;
    if (i != j && is_nyquist(g, k1, k2)) return 0.0;
    return ki * kj / kk;
  };
  return SpectralField2D::from_coeffs(g, apply_symbol(g, f.coeffs(), sym));
}

VelocityGradient2D velocity_gradient(const SpectralField2D& omega) {
  require_mean_zero(omega, "velocity_gradient");
  SpectralField2D r12 = riesz(omega, 1, 2);
  SpectralField2D r11 = riesz(omega, 1, 1);
  SpectralField2D r22 = riesz(omega, 2, 2);
  return {r12 * -1.0, r22 * -1.0, r11, r12};
}

SpectralField2D dealias(const SpectralField2D& f) {
  const auto& g = f.grid();
  const int cut = g.dealias_cutoff();
  ComplexArray2 c = f.coeffs();
  for (int a = 0; a < g.n(); ++a) {
    const bool row_out = std::abs(g.mode(a)) > cut;
    for (int b = 0; b < g.half(); ++b)
      if (row_out || b > cut) c(a, b) = 0.0;
  }
  return SpectralField2D::from_coeffs(g, std::move(c));
}

SpectralField2D derivative(const SpectralField2D& f, int axis) {
  if (axis != 1 && axis != 2) throw ValidationError("derivative: axis must be 1 or 2");
  const auto& g = f.grid();
  auto sym = [&](double k1, double k2) -> Complex {
    if (is_nyquist(g, k1, k2)) return 0.0;
    return Complex(0.0, axis == 1 ? k1 : k2);
  };
  return SpectralField2D::from_coeffs(g, apply_symbol(g, f.coeffs(), sym));
}

SpectralField2D divergence(const VelocityField2D& u) { return derivative(u.u1, 1) + derivative(u.u2, 2); }

SpectralField2D resample(const SpectralField2D& f, const GridSpec2D& to) {
  const GridSpec2D& from = f.grid();
  if (from.box_length() != to.box_length()) throw ValidationError("resample: box lengths differ");
  if (from == to) return f;
  const int lim = std::min(from.n(), to.n()) / 2;  // keep |m| < lim
  const double scale = (double(to.n()) * to.n()) / (double(from.n()) * from.n());
  ComplexArray2 c = ComplexArray2::Zero(to.n(), to.half());
  for (int m1 = -lim + 1; m1 < lim; ++m1) {
    const int a_from = m1 < 0 ? m1 + from.n() : m1, a_to = m1 < 0 ? m1 + to.n() : m1;
    for (int b = 0; b < lim; ++b) c(a_to, b) = f.coeffs()(a_from, b) * scale;
  }
  return SpectralField2D::from_coeffs(to, std::move(c));
}

SpectralField2D remove_mean(const SpectralField2D& f) {
  ComplexArray2 c = f.coeffs();
  c(0, 0) = 0.0;
  return SpectralField2D::from_coeffs(f.grid(), std::move(c));
}

double parity_residual(const SpectralField2D& f, int axis, Parity parity) {
  if (axis != 1 && axis != 2) throw ValidationError("parity_residual: axis must be 1 or 2");
  const auto& g = f.grid();
  const auto& v = f.values();
  const double scale = v.abs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const double sign = parity == Parity::Odd ? 1.0 : -1.0;
  double worst = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const double mirrored = axis == 1 ? v(g.mirror(i), j) : v(i, g.mirror(j));
      worst = std::max(worst, std::abs(v(i, j) + sign * mirrored));
    }
  return worst / scale;
}

}  // namespace eulab
