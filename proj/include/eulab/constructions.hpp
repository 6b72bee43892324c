#pragma once

// Initial-data generators: the odd bump eta_0, its dyadic rescalings and the
// multi-scale families built from them, the oscillatory perturbation beta and
// multi-patch layouts.

#include "eulab/core.hpp"
#include "eulab/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eulab {

/// Standard mollifier exp(1 - 1/(1 - rho^2)) on rho < 1, zero outside; peak 1 at rho = 0.
double mollifier(double rho);
/// Integral of the mollifier over R^2 (radial quadrature).
double mollifier_l1();
/// Integral of the squared mollifier over R^2.
double mollifier_l2_squared();
/// Plateau bump: 1 on |x| <= 1, 0 on |x| >= 2, smooth and radial.
double plateau(double rho);

enum class Family {
  Eta0,
  EtaK,
  HA2D,
  GA2DCompact,
  GA3D,
  TildeGA3D,
  BesovSeed,
  ReflectedGaussian,
};

std::string to_string(Family f);
Family family_from_string(const std::string& s);
/// True for the axisymmetric (r, z) families.
bool is_axisymmetric(Family f);

enum class PrefactorMode { Paper, Lab };
/// Normalization reading for h_A: c(A) = sqrt(log A) or log A.
enum class HANormalization { SqrtLog, Log };

struct SeedSpec {
  Family family = Family::Eta0;
  double A = 0.0;
  int k = 0;                  // EtaK only
  PrefactorMode mode = PrefactorMode::Lab;
  double lab_constant = 1.0;  // c in lab mode
  double radius = 0.125;      // eta_0 bump radius (2^-10 in the asymptotic construction)
  double amplitude = 1.0;     // Eta0/EtaK peak, ReflectedGaussian scale
  double width = 1.0;         // ReflectedGaussian length scale
  double q = 2.0;             // BesovSeed
  HANormalization ha_norm = HANormalization::SqrtLog;
  /// Spatial magnification of the bump families (bump centers and radii times
  /// zoom). Euler is scale invariant, so zoom = 2^k_min puts the coarsest shell at
  /// unit scale without changing the dynamics up to that rescaling.
  double zoom = 1.0;
};

/// Bump radius 2^-s for a separation exponent s.
inline double radius_from_separation(int s) { return std::ldexp(1.0, -s); }

struct ShellRange {
  int k_min = 0;
  int k_max = -1;
  int count() const { return k_max >= k_min ? k_max - k_min + 1 : 0; }
};

/// Dyadic indices k used by the family (Eta0: {0}; EtaK: {k}).
ShellRange shell_range(const SeedSpec& s);
/// Multiplier in front of the bump sum; throws ValidationError in paper mode
/// when the literal formula is not positive.
double prefactor(const SeedSpec& s);
/// (log A)^{eps1} / log A exponent eps1 = (1 - 1/q)/2.
inline double besov_epsilon(double q) { return 0.5 * (1.0 - 1.0 / q); }

/// One compactly supported bump: sign * scale * mollifier(|x - center| / radius).
struct BumpSite {
  Vec2 center;  // (x1, x2) in 2D, (r, z) for axisymmetric families
  double radius;
  double weight;
  int k;
};

/// All bumps of a bump-sum family, prefactor included.
std::vector<BumpSite> bump_sites(const SeedSpec& s);
/// Pointwise value (2D coordinates or (r, z)).
double evaluate(const SeedSpec& s, const Vec2& x);
/// Radius of a ball around the origin containing the support (6.5 widths for
/// the Gaussian family, where it is below 1e-16 of its peak).
double support_radius(const SeedSpec& s);
/// Smallest bump radius, infinite for the Gaussian family.
double min_feature(const SeedSpec& s);

/// Throws ValidationError naming the minimal feasible n when a bump radius is
/// under 8 cells or the support leaves the box.
void check_resolvable(const GridSpec2D& g, const SeedSpec& s);

SpectralField2D make_eta0(const GridSpec2D& g, double radius, double amplitude = 1.0);
SpectralField2D make_scale_family(const GridSpec2D& g, const SeedSpec& s);
/// Samples a 2D family translated to `center`.
SpectralField2D make_seed(const GridSpec2D& g, const SeedSpec& s, const Vec2& center = Vec2::Zero());

enum class BetaVariant {
  Plain,  // (1/(10k)) sin(k x) b(x) M^{-1/2}
  Odd,    // (1/k) sin(k x1) sin(x2) b(x) M^{-1/2}, odd in both variables
};

struct BetaSpec {
  double k = 0.0;
  double M = 1.0;
  Vec2 x_star = Vec2::Zero();
  double delta = 0.1;
  BetaVariant variant = BetaVariant::Plain;
  int axis = 1;  // oscillation variable for the plain variant
};

/// Even reflected plateau sum b(x) = (1/delta) sum Phi_0((x - x_s)/delta) over the
/// reflections x_s of x_star (one, two or four copies depending on its zero components).
double reflected_plateau(const BetaSpec& b, const Vec2& x);
SpectralField2D make_perturbation_beta(const GridSpec2D& g, const BetaSpec& b);

struct Patch {
  SeedSpec seed;
  Vec2 center = Vec2::Zero();
  double amplitude = 1.0;
};

struct PatchLayout {
  std::vector<Patch> patches;
  double min_distance = 0.0;
};

struct LayoutReport {
  double min_pair_distance = 0.0;  // infinite for a single patch
  double l1 = 0.0;
  double linf = 0.0;
};

/// Sum of translated patches; rejects overlaps, separations below the declared
/// minimum and patches leaving the box.
SpectralField2D make_layout(const GridSpec2D& g, const PatchLayout& layout, LayoutReport* report = nullptr);

/// Centers z_j = (sum_{k=1}^{j-1} scale / 2^k, 0) for j = 1..count.
std::vector<Vec2> geometric_centers(int count, double scale = 100.0);

}  // namespace eulab
