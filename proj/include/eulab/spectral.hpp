#pragma once

// Periodic-box field representation and Fourier-multiplier operators.

#include "eulab/core.hpp"
#include "eulab/fft.hpp"

#include <functional>
#include <vector>

namespace eulab {

/// Square periodic box [-L/2, L/2)^2 sampled at n points per side.
class GridSpec2D {
 public:
  GridSpec2D(int n, double box_length);

  int n() const { return n_; }
  double box_length() const { return box_length_; }
  double spacing() const { return box_length_ / n_; }
  double cell_area() const { return spacing() * spacing(); }
  /// (i - n/2) h, so mirrored nodes carry exactly negated coordinates.
  double coord(int i) const { return (i - n_ / 2) * spacing(); }
  /// Fundamental wavenumber 2*pi/L.
  double k0() const { return 2.0 * kPi / box_length_; }
  /// Signed integer mode for a full-axis index (first axis of the half spectrum).
  int mode(int idx) const { return idx < n_ / 2 ? idx : idx - n_; }
  /// Index of the point mirrored through x = 0.
  int mirror(int i) const { return (n_ - i) % n_; }
  int half() const { return n_ / 2 + 1; }
  /// Largest |m| kept by the 2/3 rule.
  int dealias_cutoff() const { return n_ / 3; }

  bool operator==(const GridSpec2D& o) const { return n_ == o.n_ && box_length_ == o.box_length_; }

 private:
  int n_;
  double box_length_;
};

/// A real field on a GridSpec2D, held jointly as samples and (unnormalized)
/// half-spectrum FFT coefficients. Both representations are materialized at
/// construction; instances are immutable.
class SpectralField2D {
 public:
  static SpectralField2D from_values(const GridSpec2D& grid, RealArray2 values);
  static SpectralField2D from_coeffs(const GridSpec2D& grid, ComplexArray2 coeffs);
  static SpectralField2D zero(const GridSpec2D& grid);
  /// Samples fn(x1, x2) at the grid points.
  static SpectralField2D sample(const GridSpec2D& grid, const std::function<double(double, double)>& fn);

  const GridSpec2D& grid() const { return grid_; }
  const RealArray2& values() const { return values_; }
  const ComplexArray2& coeffs() const { return coeffs_; }
  double operator()(int i1, int i2) const { return values_(i1, i2); }

  /// |mean| / rms, the zero-mode size relative to the L2 norm.
  double zero_mode_relative() const;
  /// True when the zero mode is below 1e-12 of the L2 norm (or the field is 0).
  bool mean_zero() const { return zero_mode_relative() <= 1e-12; }

  double max_abs() const { return values_.abs().maxCoeff(); }

  SpectralField2D operator+(const SpectralField2D& o) const;
  SpectralField2D operator-(const SpectralField2D& o) const;
  SpectralField2D operator*(double s) const;

 private:
  SpectralField2D(GridSpec2D grid, RealArray2 v, ComplexArray2 c)
      : grid_(grid), values_(std::move(v)), coeffs_(std::move(c)) {}
  GridSpec2D grid_;
  RealArray2 values_;
  ComplexArray2 coeffs_;
};

struct VelocityField2D {
  SpectralField2D u1;
  SpectralField2D u2;
};

/// Entries of Du: d1u1 = -R12 w, d2u1 = -R22 w, d1u2 = R11 w, d2u2 = R12 w.
struct VelocityGradient2D {
  SpectralField2D d1u1;
  SpectralField2D d2u1;
  SpectralField2D d1u2;
  SpectralField2D d2u2;
};

/// Shared FFT for a grid shape, one per thread.
RealFft& fft_for(const std::vector<int>& shape);
inline RealFft& fft_for(const GridSpec2D& g) { return fft_for(std::vector<int>{g.n(), g.n()}); }

/// Applies symbol(k1, k2) (physical wavenumbers) to the coefficients.
ComplexArray2 apply_symbol(const GridSpec2D& grid, const ComplexArray2& coeffs,
                           const std::function<Complex(double, double)>& symbol);

/// Throws ValidationError (with the zero-mode size) unless mean-zero.
void require_mean_zero(const SpectralField2D& f, const char* op);

VelocityField2D biot_savart(const SpectralField2D& omega);
/// R_ij = Delta^{-1} d_i d_j with symbol k_i k_j / |k|^2; i, j in {1, 2}.
SpectralField2D riesz(const SpectralField2D& f, int i, int j);
VelocityGradient2D velocity_gradient(const SpectralField2D& omega);
/// Zeroes modes with max(|m1|, |m2|) > n/3.
SpectralField2D dealias(const SpectralField2D& f);
/// Spectral d/dx_axis (axis 1 or 2), Nyquist mode dropped.
SpectralField2D derivative(const SpectralField2D& f, int axis);
SpectralField2D divergence(const VelocityField2D& u);
SpectralField2D remove_mean(const SpectralField2D& f);
/// Fourier resampling onto a grid with the same box: zero-padding or truncation.
/// Nyquist modes are dropped.
SpectralField2D resample(const SpectralField2D& f, const GridSpec2D& to);

enum class Parity { Odd, Even };

/// max |f(x) -/+ f(reflected x)| / max|f| for reflection of coordinate axis (1 or 2).
double parity_residual(const SpectralField2D& f, int axis, Parity parity);

}  // namespace eulab
