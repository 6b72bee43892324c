#pragma once

#include "eulab/spectral.hpp"

#include <random>

namespace eulab::testing {

/// Random real field with modes |m1|, |m2| <= kmax and zero mean.
inline SpectralField2D random_band_limited(const GridSpec2D& g, int kmax, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexArray2 c = ComplexArray2::Zero(g.n(), g.half());
  for (int a = 0; a < g.n(); ++a) {
    if (std::abs(g.mode(a)) > kmax) continue;
    for (int b = 0; b <= kmax && b < g.half(); ++b) c(a, b) = Complex(nd(rng), nd(rng));
  }
  c(0, 0) = 0.0;
  return SpectralField2D::from_coeffs(g, std::move(c));
}

/// Evaluates the trigonometric interpolant of f at an arbitrary point.
inline double trig_eval(const SpectralField2D& f, double x1, double x2) {
  const auto& g = f.grid();
  const double L = g.box_length();
  const double k0 = g.k0();
  double acc = 0.0;
  for (int a = 0; a < g.n(); ++a) {
    const int m1 = g.mode(a);
    if (std::abs(m1) == g.n() / 2) continue;
    for (int b = 0; b < g.half() - 1; ++b) {
      const Complex c = f.coeffs()(a, b);
      if (c == 0.0) continue;
      const double phase = k0 * (m1 * (x1 + 0.5 * L) + b * (x2 + 0.5 * L));
      const double w = b == 0 ? 1.0 : 2.0;
      acc += w * (c.real() * std::cos(phase) - c.imag() * std::sin(phase));
    }
  }
  return acc / (static_cast<double>(g.n()) * g.n());
}

}  // namespace eulab::testing
