#include "eulab/constructions.hpp"

#include "eulab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace eulab {

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

bool uses_A(Family f) { return f != Family::Eta0 && f != Family::EtaK && f != Family::ReflectedGaussian; }

int next_pow2(double x) {
  int n = 16;
  while (n < x) n *= 2;
  return n;
}

}  // namespace

double mollifier(double rho) {
  const double s = rho * rho;
  if (s >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s));
}

double mollifier_l1() {
  // substitute s = rho^2: 2 pi int rho phi drho = pi int_0^1 phi(sqrt s) ds
  static const double v = kPi * simpson([](double s) { return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s)); },
                                       0.0, 1.0, 20000);
  return v;
}

double mollifier_l2_squared() {
  static const double v = kPi * simpson([](double s) { return s >= 1.0 ? 0.0 : std::exp(2.0 - 2.0 / (1.0 - s)); },
                                       0.0, 1.0, 20000);
  return v;
}

double plateau(double rho) { return lp_cutoff(rho); }

std::string to_string(Family f) {
  switch (f) {
    case Family::Eta0: return "eta0";
    case Family::EtaK: return "eta_k";
    case Family::HA2D: return "hA_2d";
    case Family::GA2DCompact: return "gA_2d_compact";
    case Family::GA3D: return "gA_3d";
    case Family::TildeGA3D: return "tilde_gA_3d";
    case Family::BesovSeed: return "besov_seed";
    case Family::ReflectedGaussian: return "custom_reflected_gaussian";
  }
  return "?";
}

Family family_from_string(const std::string& s) {
  for (Family f : {Family::Eta0, Family::EtaK, Family::HA2D, Family::GA2DCompact, Family::GA3D, Family::TildeGA3D,
                   Family::BesovSeed, Family::ReflectedGaussian})
    if (to_string(f) == s) return f;
  throw ValidationError("unknown seed family '" + s + "'");
}

bool is_axisymmetric(Family f) { return f == Family::GA3D || f == Family::TildeGA3D; }

ShellRange shell_range(const SeedSpec& s) {
  if (uses_A(s.family) && !(s.A > 1.0 && std::isfinite(s.A))) {
    std::ostringstream os;
    os << to_string(s.family) << ": A must be > 1 (got " << s.A << ")";
    throw ValidationError(os.str());
  }
  const double A = s.A;
  switch (s.family) {
    case Family::Eta0: return {0, 0};
    case Family::EtaK:
      if (s.k < 0) throw ValidationError("eta_k: k must be >= 0");
      return {s.k, s.k};
    case Family::HA2D:
    case Family::GA3D: return {static_cast<int>(std::ceil(A)), static_cast<int>(std::floor(2.0 * A))};
    case Family::GA2DCompact:
      return {static_cast<int>(std::ceil(A)), static_cast<int>(std::floor(A + std::log(A)))};
    case Family::TildeGA3D:
      return {static_cast<int>(std::ceil(A)), static_cast<int>(std::floor(A + std::sqrt(A)))};
    case Family::BesovSeed:
      return {static_cast<int>(std::floor(A)) + 1, static_cast<int>(std::ceil(A + std::log(A))) - 1};
    case Family::ReflectedGaussian: return {0, -1};
  }
  return {0, -1};
}

double prefactor(const SeedSpec& s) {
  if (!uses_A(s.family)) return s.amplitude;
  shell_range(s);  // validates A
  const double A = s.A;
  const double L = std::log(A);
  const bool lab = s.mode == PrefactorMode::Lab;
  if (lab && !(s.lab_constant > 0.0)) throw ValidationError("lab mode: constant c must be > 0");
  const double c = lab ? s.lab_constant : 1.0;
  double p = 0.0;
  switch (s.family) {
    case Family::HA2D:
      p = (s.ha_norm == HANormalization::SqrtLog ? std::sqrt(L) : L) / A;
      break;
    case Family::GA2DCompact: {
      if (lab) {
        p = 1.0 / std::sqrt(L);
        break;
      }
      const double l4 = std::log(std::log(std::log(L)));
      if (!(l4 > 0.0) || !std::isfinite(l4)) {
        std::ostringstream os;
        os << "gA_2d_compact: paper-mode prefactor 1/(log log log log A * sqrt(log A)) is not positive at A = " << A
           << "; it needs A > exp(exp(exp(1))) = " << std::exp(std::exp(std::exp(1.0)));
        throw ValidationError(os.str());
      }
      p = 1.0 / (l4 * std::sqrt(L));
      break;
    }
    case Family::GA3D: p = std::sqrt(L) / A; break;
    case Family::TildeGA3D: p = std::sqrt(L) / std::sqrt(A); break;
    case Family::BesovSeed: {
      if (!(s.q > 1.0)) throw ValidationError("besov_seed: q must be > 1");
      p = std::pow(L, besov_epsilon(s.q)) / L;
      break;
    }
    default: break;
  }
  if (!(p > 0.0) || !std::isfinite(p)) {
    std::ostringstream os;
    os << to_string(s.family) << ": prefactor not positive at A = " << A;
    throw ValidationError(os.str());
  }
  return c * p;
}

std::vector<BumpSite> bump_sites(const SeedSpec& s) {
  if (s.family == Family::ReflectedGaussian) return {};
  if (!(s.radius > 0.0)) throw ValidationError("seed: bump radius must be > 0");
  if (!(s.zoom > 0.0) || !std::isfinite(s.zoom)) throw ValidationError("seed: zoom must be > 0");
  const ShellRange kr = shell_range(s);
  if (kr.count() == 0) {
    std::ostringstream os;
    os << to_string(s.family) << ": empty dyadic range at A = " << s.A;
    throw ValidationError(os.str());
  }
  // Neighbouring shells touch once the radius reaches sqrt(2)/3 of the shell scale.
  if (s.radius >= (kr.count() > 1 ? std::sqrt(2.0) / 3.0 : 1.0))
    throw ValidationError("seed: bump radius too large, bumps would overlap");
  if (kr.k_max - std::log2(s.radius) > 1000.0) {
    std::ostringstream os;
    os << to_string(s.family) << ": scale underflow (smallest bump 2^-" << kr.k_max << " * " << s.radius << ")";
    throw ValidationError(os.str());
  }
  const double pre = prefactor(s);
  std::vector<BumpSite> out;
  for (int k = kr.k_min; k <= kr.k_max; ++k) {
    const double sc = std::ldexp(s.zoom, -k);
    if (is_axisymmetric(s.family)) {
      for (int e : {1, -1}) out.push_back({Vec2(sc, e * sc), s.radius * sc, pre * e, k});
    } else {
      for (int a1 : {1, -1})
        for (int a2 : {1, -1}) out.push_back({Vec2(a1 * sc, a2 * sc), s.radius * sc, pre * a1 * a2, k});
    }
  }
  return out;
}

double evaluate(const SeedSpec& s, const Vec2& x) {
  if (s.family == Family::ReflectedGaussian) {
    const double w2 = s.width * s.width;
    return s.amplitude * x(0) * x(1) / w2 * std::exp(-x.squaredNorm() / w2);
  }
  double acc = 0.0;
  for (const auto& b : bump_sites(s)) acc += b.weight * mollifier((x - b.center).norm() / b.radius);
  return acc;
}

double support_radius(const SeedSpec& s) {
  if (s.family == Family::ReflectedGaussian) return 6.5 * s.width;
  const ShellRange kr = shell_range(s);
  return std::ldexp(s.zoom, -kr.k_min) * (std::sqrt(2.0) + s.radius);
}

double min_feature(const SeedSpec& s) {
  if (s.family == Family::ReflectedGaussian) return std::numeric_limits<double>::infinity();
  return s.radius * std::ldexp(s.zoom, -shell_range(s).k_max);
}

void check_resolvable(const GridSpec2D& g, const SeedSpec& s) {
  if (is_axisymmetric(s.family))
    throw ValidationError(to_string(s.family) + " is axisymmetric; sample it on an axisymmetric grid");
  const double L = g.box_length();
  const double feature = min_feature(s);
  if (feature < 8.0 * g.spacing()) {
    std::ostringstream os;
    os << to_string(s.family) << ": smallest bump radius " << feature << " spans " << feature / g.spacing()
       << " cells (< 8) at n = " << g.n() << "; minimal feasible n = " << next_pow2(8.0 * L / feature);
    throw ValidationError(os.str());
  }
  if (support_radius(s) >= 0.5 * L - g.spacing()) {
    std::ostringstream os;
    os << to_string(s.family) << ": support radius " << support_radius(s) << " does not fit the box L = " << L;
    throw ValidationError(os.str());
  }
}

namespace {

void add_bumps(const GridSpec2D& g, const std::vector<BumpSite>& sites, const Vec2& shift, double scale,
               RealArray2& v) {
  const double h = g.spacing();
  const int n = g.n();
  for (const auto& b : sites) {
    const Vec2 c = b.center + shift;
    const int i0 = std::max(0, static_cast<int>(std::floor((c(0) - b.radius) / h)) + n / 2);
    const int i1 = std::min(n - 1, static_cast<int>(std::ceil((c(0) + b.radius) / h)) + n / 2);
    const int j0 = std::max(0, static_cast<int>(std::floor((c(1) - b.radius) / h)) + n / 2);
    const int j1 = std::min(n - 1, static_cast<int>(std::ceil((c(1) + b.radius) / h)) + n / 2);
    for (int i = i0; i <= i1; ++i) {
      const double dx = g.coord(i) - c(0);
      for (int j = j0; j <= j1; ++j) {
        const double dy = g.coord(j) - c(1);
        const double m = mollifier(std::sqrt(dx * dx + dy * dy) / b.radius);
        if (m != 0.0) v(i, j) += scale * b.weight * m;
      }
    }
  }
}

}  // namespace

SpectralField2D make_eta0(const GridSpec2D& g, double radius, double amplitude) {
  SeedSpec s;
  s.family = Family::Eta0;
  s.radius = radius;
  s.amplitude = amplitude;
  return make_scale_family(g, s);
}

SpectralField2D make_scale_family(const GridSpec2D& g, const SeedSpec& s) { return make_seed(g, s, Vec2::Zero()); }

SpectralField2D make_seed(const GridSpec2D& g, const SeedSpec& s, const Vec2& center) {
  check_resolvable(g, s);
  RealArray2 v = RealArray2::Zero(g.n(), g.n());
  if (s.family == Family::ReflectedGaussian) {
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.n(); ++j) v(i, j) = evaluate(s, Vec2(g.coord(i), g.coord(j)) - center);
  } else {
    add_bumps(g, bump_sites(s), center, 1.0, v);
  }
  return SpectralField2D::from_values(g, std::move(v));
}

double reflected_plateau(const BetaSpec& b, const Vec2& x) {
  const double a = b.x_star(0), c = b.x_star(1);
  double acc = 0.0;
  for (int e1 : {1, -1}) {
    if (a == 0.0 && e1 == -1) continue;
    for (int e2 : {1, -1}) {
      if (c == 0.0 && e2 == -1) continue;
      acc += plateau((x - Vec2(e1 * a, e2 * c)).norm() / b.delta);
    }
  }
  return acc / b.delta;
}

SpectralField2D make_perturbation_beta(const GridSpec2D& g, const BetaSpec& b) {
  if (!(b.k > 0.0)) throw ValidationError("beta: k must be > 0");
  if (!(b.M > 0.0)) throw ValidationError("beta: M must be > 0");
  if (!(b.delta > 0.0)) throw ValidationError("beta: delta must be > 0");
  if (b.axis != 1 && b.axis != 2) throw ValidationError("beta: axis must be 1 or 2");
  for (int i = 0; i < 2; ++i) {
    const double comp = std::abs(b.x_star(i));
    if (comp != 0.0 && comp < 2.0 * b.delta) {
      std::ostringstream os;
      os << "beta: delta = " << b.delta << " conflicts with x_star component " << b.x_star(i)
         << " (reflected plateaus overlap; need delta <= |component|/2)";
      throw ValidationError(os.str());
    }
  }
  const double kmax = g.k0() * g.dealias_cutoff();
  if (b.k > kmax) {
    std::ostringstream os;
    os << "beta: k = " << b.k << " beyond the dealiased band (max " << kmax << " at n = " << g.n() << ")";
    throw ValidationError(os.str());
  }
  if (b.delta < 4.0 * g.spacing()) throw ValidationError("beta: delta unresolved (< 4 cells)");
  if (b.x_star.cwiseAbs().maxCoeff() + 2.0 * b.delta >= 0.5 * g.box_length())
    throw ValidationError("beta: support leaves the box");
  const double scale = 1.0 / std::sqrt(b.M);
  RealArray2 v(g.n(), g.n());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) {
      const Vec2 x(g.coord(i), g.coord(j));
      const double bx = reflected_plateau(b, x);
      if (bx == 0.0) {
        v(i, j) = 0.0;
        continue;
      }
      if (b.variant == BetaVariant::Plain)
        v(i, j) = std::sin(b.k * x(b.axis - 1)) * bx * scale / (10.0 * b.k);
      else
        v(i, j) = std::sin(b.k * x(0)) * std::sin(x(1)) * bx * scale / b.k;
    }
  return SpectralField2D::from_values(g, std::move(v));
}

SpectralField2D make_layout(const GridSpec2D& g, const PatchLayout& layout, LayoutReport* report) {
  if (layout.patches.empty()) throw ValidationError("layout: no patches");
  const double half = 0.5 * g.box_length();
  std::vector<double> radii;
  for (const auto& p : layout.patches) {
    check_resolvable(g, p.seed);
    const double r = support_radius(p.seed);
    if (p.center.cwiseAbs().maxCoeff() + r >= half - g.spacing())
      throw ValidationError("layout: patch support leaves the box");
    radii.push_back(r);
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < layout.patches.size(); ++i)
    for (std::size_t j = i + 1; j < layout.patches.size(); ++j) {
      const double gap = (layout.patches[i].center - layout.patches[j].center).norm() - radii[i] - radii[j];
      min_gap = std::min(min_gap, gap);
    }
  if (min_gap <= 0.0) throw ValidationError("layout: patch supports overlap");
  if (min_gap < layout.min_distance) {
    std::ostringstream os;
    os << "layout: minimal support distance " << min_gap << " below the declared " << layout.min_distance;
    throw ValidationError(os.str());
  }
  RealArray2 v = RealArray2::Zero(g.n(), g.n());
  for (const auto& p : layout.patches) {
    if (p.seed.family == Family::ReflectedGaussian) {
      for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.n(); ++j)
          v(i, j) += p.amplitude * evaluate(p.seed, Vec2(g.coord(i), g.coord(j)) - p.center);
    } else {
      add_bumps(g, bump_sites(p.seed), p.center, p.amplitude, v);
    }
  }
  auto f = SpectralField2D::from_values(g, std::move(v));
  if (report) {
    report->min_pair_distance = min_gap;
    report->l1 = lp_norm(f, 1.0);
    report->linf = lp_norm(f, kInf);
  }
  return f;
}

std::vector<Vec2> geometric_centers(int count, double scale) {
  std::vector<Vec2> out;
  for (int j = 1; j <= count; ++j) {
    double x = 0.0;
    for (int k = 1; k <= j - 1; ++k) x += scale / std::ldexp(1.0, k);
    out.emplace_back(x, 0.0);
  }
  return out;
}

}  // namespace eulab
