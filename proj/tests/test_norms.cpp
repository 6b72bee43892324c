#include "eulab/norms.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace eulab;
using eulab::testing::random_band_limited;

namespace {

// Fourier-sum oracle: (h^2/N) sum over the full spectrum of w(|k|) |f_k|^2.
double fourier_sum(const SpectralField2D& f, const std::function<double(double)>& w) {
  const auto& g = f.grid();
  const int n = g.n();
  double acc = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int m1 = g.mode(a), m2 = g.mode(b);
      Complex c = b < g.half() ? f.coeffs()(a, b) : std::conj(f.coeffs()((n - a) % n, n - b));
      const double k = g.k0() * std::hypot(double(m1), double(m2));
      acc += w(k) * std::norm(c);
    }
  return std::sqrt(acc * g.cell_area() / (double(n) * n));
}

}  // namespace

TEST_CASE("cutoff and band symbol") {
  CHECK(lp_cutoff(0.3) == 1.0);
  CHECK(lp_cutoff(1.0) == 1.0);
  CHECK(lp_cutoff(2.0) == 0.0);
  CHECK(lp_cutoff(1.5) == doctest::Approx(0.5));
  for (double r = 1.01; r < 2.0; r += 0.05) CHECK(lp_cutoff(r) >= lp_cutoff(r + 0.05));
  CHECK(lp_band_symbol(8.0, 8.0) == 1.0);
  CHECK(lp_band_symbol(2.0, 8.0) == 0.0);
}

TEST_CASE("sobolev norms of a single mode") {
  GridSpec2D g(64, 2 * kPi);
  auto s = SpectralField2D::sample(g, [](double x1, double) { return std::sin(x1); });
  CHECK(sobolev_norm(s, 1.0) == doctest::Approx(kPi * std::sqrt(2.0)).epsilon(1e-13));
  CHECK(std::abs(sobolev_norm(s, 1.0) - 4.442883) < 1e-6);
  CHECK(sobolev_norm(s, 0.0) == doctest::Approx(lp_norm(s, 2.0)).epsilon(1e-12));
  // (1+|k|^2)^{1/2} at |k|=1
  CHECK(sobolev_norm(s, 1.0, false) == doctest::Approx(2 * kPi).epsilon(1e-13));

  auto shifted = SpectralField2D::sample(g, [](double x1, double) { return 0.5 + std::sin(x1); });
  CHECK_THROWS_AS(sobolev_norm(shifted, -1.0), ValidationError);
  CHECK_NOTHROW(sobolev_norm(shifted, 1.0));
}

TEST_CASE("sobolev norm on random fields matches the Fourier-sum oracle") {
  GridSpec2D g(64, 3.0);
  auto f = random_band_limited(g, 25, 41);
  for (double s : {-1.0, 0.5, 1.0, 1.5}) {
    const double oracle = fourier_sum(f, [s](double k) { return k == 0.0 ? 0.0 : std::pow(k, 2 * s); });
    CHECK(std::abs(sobolev_norm(f, s) - oracle) <= 1e-10 * oracle);
  }
  CHECK(std::abs(sobolev_norm(f, 0.0) - lp_norm(f, 2.0)) <= 1e-12 * lp_norm(f, 2.0));
}

TEST_CASE("lp_projection on single modes and range checks") {
  GridSpec2D g(64, 2 * kPi);
  auto m8 = SpectralField2D::sample(g, [](double x1, double) { return std::sin(8 * x1); });
  CHECK((lp_projection(m8, 8.0).values() - m8.values()).abs().maxCoeff() < 1e-14);
  CHECK(lp_projection(m8, 32.0).max_abs() < 1e-14);
  CHECK_THROWS_AS(lp_projection(m8, 12.0), ValidationError);
  CHECK_THROWS_AS(lp_projection(m8, 128.0), ValidationError);
  CHECK_THROWS_AS(lp_projection(m8, 0.25), ValidationError);
}

TEST_CASE("LP pieces sum back to the field") {
  GridSpec2D g(64, 5.0);
  auto f = random_band_limited(g, 31, 8);
  auto r = PeriodicRaster::from(f);
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(r.values.size());
  for (double N : dyadic_bands(r)) sum += lp_projection(r, N).values;
  CHECK((sum - r.values).abs().maxCoeff() <= 1e-10 * r.values.abs().maxCoeff());
}

TEST_CASE("besov single mode and q monotonicity") {
  GridSpec2D g(64, 2 * kPi);
  auto m8 = SpectralField2D::sample(g, [](double x1, double) { return std::sin(8 * x1); });
  for (double p : {2.0, 4.0, kInf}) {
    auto b = besov_norm(m8, 1.5, p, kInf);
    CHECK(b.value == doctest::Approx(std::pow(8.0, 1.5) * lp_norm(m8, p)).epsilon(1e-12));
    double mx = 0.0;
    for (auto& bv : b.band_profile) mx = std::max(mx, bv.value);
    CHECK(b.value == mx);
  }
  GridSpec2D h(64, 4.0);
  auto f = random_band_limited(h, 30, 12);
  for (double p : {1.0, 2.0, 4.0, kInf}) {
    const double b1 = besov_norm(f, 0.5, p, 1.0).value;
    const double b2 = besov_norm(f, 0.5, p, 2.0).value;
    const double b4 = besov_norm(f, 0.5, p, 4.0).value;
    const double bi = besov_norm(f, 0.5, p, kInf).value;
    CHECK(b1 >= b2);
    CHECK(b2 >= b4);
    CHECK(b4 >= bi);
  }
  CHECK(besov_norm(f, 0.0, 2.0, 2.0, false).value ==
        doctest::Approx(besov_norm(f, 0.0, 2.0, 2.0).value + lp_norm(f, 2.0)).epsilon(1e-14));
}

TEST_CASE("besov p=2 matches the Fourier-sum oracle") {
  GridSpec2D g(64, 3.0);
  auto f = random_band_limited(g, 28, 77);
  auto r = PeriodicRaster::from(f);
  for (double s : {0.0, 1.0, 1.5}) {
    for (double q : {1.0, 2.0, 3.0, kInf}) {
      double acc = 0.0;
      for (double N : dyadic_bands(r)) {
        const double piece = std::pow(N, s) * fourier_sum(f, [N](double k) { return std::pow(lp_band_symbol(k, N), 2); });
        acc = std::isinf(q) ? std::max(acc, piece) : acc + std::pow(piece, q);
      }
      const double oracle = std::isinf(q) ? acc : std::pow(acc, 1.0 / q);
      CHECK(std::abs(besov_norm(f, s, 2.0, q).value - oracle) <= 1e-10 * oracle);
    }
  }
}

TEST_CASE("square-function ratio Hdot^s / Bdot^s_{2,2} is pinned by the bump") {
  GridSpec2D g(128, 6.0);
  double lo = 1e9, hi = 0.0;
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    auto f = random_band_limited(g, 40, seed);
    const double ratio = besov_norm(f, 1.0, 2.0, 2.0).value / sobolev_norm(f, 1.0);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    CHECK(ratio >= 1.0 / std::sqrt(2.0) - 1e-12);
    CHECK(ratio <= 1.0 + 1e-12);
  }
  // For broadband data the ratio concentrates near its spectral average.
  CHECK(hi - lo < 0.05);
}

TEST_CASE("modulated bump concentrates near its carrier band") {
  GridSpec2D g(256, 2 * kPi);
  const double k = 64;
  auto f = SpectralField2D::sample(g, [k](double x1, double x2) {
    return std::sin(k * x1) * std::exp(-2.0 * (x1 * x1 + x2 * x2));
  });
  auto b = besov_norm(f, 0.0, 2.0, 2.0);
  double total = 0.0, off = 0.0;
  for (auto& bv : b.band_profile) {
    total += bv.value * bv.value;
    if (bv.N < k / 2 || bv.N > 2 * k) off += bv.value * bv.value;
  }
  CHECK(off <= 1e-6 * total);
}

TEST_CASE("bernstein inequality at constant 4") {
  GridSpec2D g(128, 5.0);
  auto f = random_band_limited(g, 60, 5);
  for (double N : dyadic_bands(PeriodicRaster::from(f))) {
    auto piece = lp_projection(f, N);
    if (piece.max_abs() < 1e-12 * f.max_abs()) continue;
    for (double p : {2.0, 4.0, kInf}) CHECK(gradient_lp_norm(piece, p) <= 4.0 * N * lp_norm(piece, p));
  }
}

TEST_CASE("lorentz norms") {
  GridSpec2D g(512, 4.0);
  const double rho = 0.9;
  auto ind = SpectralField2D::sample(g, [rho](double x1, double x2) { return x1 * x1 + x2 * x2 < rho * rho ? 1.0 : 0.0; });
  const double m_grid = ind.values().sum() * g.cell_area();
  CHECK(lorentz_norm(ind, 3.0, 1.0) == doctest::Approx(3.0 * std::cbrt(m_grid)).epsilon(1e-13));
  CHECK(std::abs(lorentz_norm(ind, 3.0, 1.0) / (3.0 * std::cbrt(kPi * rho * rho)) - 1.0) <= 1e-3);
  CHECK(lorentz_norm(ind, 3.0, kInf) == doctest::Approx(std::cbrt(m_grid)).epsilon(1e-13));

  GridSpec2D h(64, 3.0);
  auto f = random_band_limited(h, 20, 9);
  for (double p : {1.5, 2.0, 3.0, 6.0})
    CHECK(std::abs(lorentz_norm(f, p, p) / lp_norm(f, p) - 1.0) <= 1e-6);

  auto z = SpectralField2D::zero(h);
  CHECK(lorentz_norm(z, 3.0, 1.0) == 0.0);

  std::vector<double> v(f.values().data(), f.values().data() + f.values().size());
  const double before = lorentz_norm(v, h.cell_area(), 3.0, 1.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(3));
  CHECK(lorentz_norm(v, h.cell_area(), 3.0, 1.0) == before);

  CHECK_THROWS_AS(lorentz_norm(f, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(lorentz_norm(f, 3.0, 0.5), ValidationError);
}

TEST_CASE("lorentz norm with nonuniform measures") {
  // Step function 2 on measure 1, 1 on measure 3: f* = 2 on [0,1), 1 on [1,4).
  std::vector<double> v{1.0, 2.0, 0.0};
  std::vector<double> m{3.0, 1.0, 5.0};
  const double p = 2.0, q = 1.0;
  // int_0^1 2 t^{-1/2} dt + int_1^4 t^{-1/2} dt = 4 + 2
  CHECK(lorentz_norm(v, m, p, q) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("riesz interpolation ratio") {
  GridSpec2D g(64, 2 * kPi);
  auto s = SpectralField2D::sample(g, [](double x1, double) { return std::sin(x1); });
  CHECK(riesz_interp_check(s) == doctest::Approx(std::pow(2 * kPi * kPi, -0.25)).epsilon(1e-12));
  CHECK(std::abs(riesz_interp_check(s) - 0.4745) < 1e-4);
  CHECK_THROWS_AS(riesz_interp_check(SpectralField2D::zero(g)), ValidationError);
}

TEST_CASE("norm descriptors and report json") {
  NormDescriptor h1{NormDescriptor::Kind::Sobolev, 1.0, 2.0, 2.0, true};
  CHECK(h1.key() == "Hdot:s=1");
  NormDescriptor b{NormDescriptor::Kind::Besov, 1.5, 2.0, kInf, true};
  CHECK(b.key() == "Bdot:s=1.5:p=2:q=inf");
  NormDescriptor l{NormDescriptor::Kind::Lorentz, 0.0, 3.0, 1.0, true};
  CHECK(l.key() == "Lorentz:p=3:q=1");
  for (auto key : {"Hdot:s=1", "Bdot:s=1.5:p=2:q=inf", "Lorentz:p=3:q=1", "L:p=inf", "H:s=-0.5", "B:s=0:p=4:q=2"})
    CHECK(NormDescriptor::parse(key).key() == key);
  CHECK_THROWS_AS(NormDescriptor::parse("Hdot:p=2"), ValidationError);
  CHECK_THROWS_AS(NormDescriptor::parse("Zed:s=1"), ValidationError);

  GridSpec2D g(64, 2 * kPi);
  auto f = random_band_limited(g, 10, 2);
  auto rep = analyze(f, {h1, b, l, NormDescriptor::parse("L:p=2")}, 0.25);
  auto j = rep.to_json();
  CHECK(j["format_version"] == 1);
  auto back = NormReport::from_json(j);
  CHECK(back.entries == rep.entries);
  CHECK(back.band_profiles.at(b.key()).size() == rep.band_profiles.at(b.key()).size());
  for (auto& [k, v] : rep.entries) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
}
