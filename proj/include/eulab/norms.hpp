#pragma once

// Lebesgue, Sobolev, Besov and Lorentz norms of sampled fields.
//
// Discrete norms use the physical cell measure h^d, so on compactly supported
// data they approximate the corresponding integrals over R^d. Fourier-side
// norms use the normalized Plancherel identity (the Hdot^0 norm equals L2).

#include "eulab/core.hpp"
#include "eulab/spectral.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace eulab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Real samples on a periodic box [-L/2, L/2)^d, row-major, d in {2, 3}.
struct PeriodicRaster {
  std::vector<int> shape;
  double box_length = 1.0;
  Eigen::ArrayXd values;

  int dim() const { return static_cast<int>(shape.size()); }
  double spacing() const { return box_length / shape.front(); }
  double cell_volume() const;
  double k0() const { return 2.0 * kPi / box_length; }
  /// Largest |xi| present on the grid (corner of the spectrum).
  double max_wavenumber() const;

  static PeriodicRaster from(const SpectralField2D& f);
};

/// Smooth radial cutoff: 1 on [0, 1], 0 on [2, inf), C-infinity in between.
double lp_cutoff(double r);
/// Multiplier of P_N at |xi|: lp_cutoff(|xi|/N) - lp_cutoff(2|xi|/N).
double lp_band_symbol(double xi, double N);

/// Dyadic N = 2^j whose band meets the grid's wavenumbers, ascending.
std::vector<double> dyadic_bands(const PeriodicRaster& f);

/// ||f||_p with cell measure `cell`; p may be kInf.
double lp_norm(std::span<const double> values, double cell, double p);
double lp_norm(const PeriodicRaster& f, double p);
double lp_norm(const SpectralField2D& f, double p);

/// Littlewood-Paley piece P_N f. N must be a power of two in the resolvable range.
PeriodicRaster lp_projection(const PeriodicRaster& f, double N);
SpectralField2D lp_projection(const SpectralField2D& f, double N);

/// Homogeneous (|xi|^{2s}) or inhomogeneous ((1+|xi|^2)^s) Sobolev norm.
double sobolev_norm(const PeriodicRaster& f, double s, bool homogeneous = true);
double sobolev_norm(const SpectralField2D& f, double s, bool homogeneous = true);

struct BandValue {
  double N;
  double value;  // N^s ||P_N f||_p
};

struct BesovResult {
  double value = 0.0;
  std::vector<BandValue> band_profile;
};

/// l^q over dyadic N of N^s ||P_N f||_p; inhomogeneous adds ||f||_p.
BesovResult besov_norm(const PeriodicRaster& f, double s, double p, double q, bool homogeneous = true);
BesovResult besov_norm(const SpectralField2D& f, double s, double p, double q, bool homogeneous = true);

/// Lorentz L^{p,q} norm via the nonincreasing rearrangement. Sample i carries
/// measure `measure[i]`; the rearrangement is a step function and the integral
/// of (t^{1/p} f*(t))^q dt/t is evaluated exactly on it.
double lorentz_norm(std::span<const double> values, std::span<const double> measure, double p, double q);
double lorentz_norm(std::span<const double> values, double cell, double p, double q);
double lorentz_norm(const PeriodicRaster& f, double p, double q);
double lorentz_norm(const SpectralField2D& f, double p, double q);

/// ||R11 f||_inf / (||f||_2^{1/2} ||grad f||_inf^{1/2}).
double riesz_interp_check(const SpectralField2D& f);

/// Pointwise |grad P_N f| for the Bernstein check.
double gradient_lp_norm(const SpectralField2D& f, double p);

struct NormDescriptor {
  enum class Kind { Lebesgue, Sobolev, Besov, Lorentz } kind;
  double s = 0.0;
  double p = 2.0;
  double q = 2.0;
  bool homogeneous = true;

  /// Stable key, e.g. "Hdot:s=1", "Bdot:s=1.5:p=2:q=inf", "Lorentz:p=3:q=1", "L:p=2".
  std::string key() const;
  static NormDescriptor parse(const std::string& key);
};

std::string format_number(double v);

struct NormReport {
  double time = 0.0;
  std::map<std::string, double> entries;
  std::map<std::string, std::vector<BandValue>> band_profiles;

  void add(const NormDescriptor& d, double value) { entries[d.key()] = value; }
  double at(const std::string& key) const;
  nlohmann::json to_json() const;
  static NormReport from_json(const nlohmann::json& j);
};

/// Evaluates every descriptor on a 2D field.
NormReport analyze(const SpectralField2D& f, const std::vector<NormDescriptor>& which, double time = 0.0);
NormReport analyze(const PeriodicRaster& f, const std::vector<NormDescriptor>& which, double time = 0.0);

}  // namespace eulab
