#include "eulab/constructions.hpp"
#include "eulab/euler2d.hpp"
#include "eulab/norms.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace eulab;
using eulab::testing::random_band_limited;

namespace {

// Radial, mean-zero: integral of (1 - r^2) e^{-r^2} over the plane vanishes.
SpectralField2D radial(const GridSpec2D& g) {
  return remove_mean(SpectralField2D::sample(g, [](double x1, double x2) {
    const double r2 = x1 * x1 + x2 * x2;
    return (1.0 - r2) * std::exp(-r2);
  }));
}

double l2_diff(const SpectralField2D& a, const SpectralField2D& b) { return lp_norm(a - b, 2.0); }

// Coefficients of a fine field restricted to the modes of a coarse grid, as a coarse field.
SpectralField2D restrict_to(const GridSpec2D& coarse, const SpectralField2D& fine) {
  const auto& fg = fine.grid();
  const double scale = double(coarse.n()) * coarse.n() / (double(fg.n()) * fg.n());
  ComplexArray2 c = ComplexArray2::Zero(coarse.n(), coarse.half());
  for (int a = 0; a < coarse.n(); ++a) {
    const int m1 = coarse.mode(a);
    if (std::abs(m1) == coarse.n() / 2) continue;
    for (int b = 0; b < coarse.half() - 1; ++b) c(a, b) = fine.coeffs()((m1 + fg.n()) % fg.n(), b) * scale;
  }
  return SpectralField2D::from_coeffs(coarse, std::move(c));
}

SpectralField2D evolve(const SpectralField2D& w0, double dt, double t_end) {
  RunConfig2D cfg;
  cfg.grid = w0.grid();
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.diag_every = 1000000;
  return run2d(cfg, w0).final_state.omega();
}

}  // namespace

TEST_CASE("rhs vanishes on radial vorticity") {
  GridSpec2D g(128, 16.0);
  auto w = radial(g);
  Euler2D e(g);
  auto r = e.rhs(w);
  CHECK(r.max_abs() <= 1e-10 * w.max_abs());
  CHECK(r.mean_zero());
}

TEST_CASE("rhs vanishes on a shear") {
  GridSpec2D g(32, 2 * kPi);
  auto w = SpectralField2D::sample(g, [](double x1, double) { return std::sin(x1); });
  CHECK(Euler2D(g).rhs(w).max_abs() <= 1e-14);
}

TEST_CASE("semi-discrete L2 conservation: <w, rhs(w)> = 0") {
  GridSpec2D g(64, 5.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto w = dealias(random_band_limited(g, 30, seed));
    auto r = Euler2D(g).rhs(w);
    const double inner = (w.values() * r.values()).sum() * g.cell_area();
    CHECK(std::abs(inner) <= 1e-10 * lp_norm(w, 2.0) * lp_norm(r, 2.0));
  }
}

TEST_CASE("rhs rejects non-finite data and non-mean-zero input") {
  GridSpec2D g(32, 2 * kPi);
  Euler2D e(g);
  ComplexArray2 c = ComplexArray2::Zero(g.n(), g.half());
  c(1, 1) = std::nan("");
  CHECK_THROWS_AS(e.rhs(c), NumericalFault);
  auto w = SpectralField2D::sample(g, [](double x1, double) { return 1.0 + std::sin(x1); });
  CHECK_THROWS_AS(e.rhs(w), ValidationError);
  CHECK_THROWS_AS(SimState2D{w}, ValidationError);
}

TEST_CASE("dt = 0 leaves the state unchanged") {
  GridSpec2D g(64, 2 * kPi);
  SimState2D s(dealias(random_band_limited(g, 10, 4)));
  auto next = Euler2D(g).step(s, 0.0);
  CHECK(next.t() == s.t());
  CHECK((next.omega().values() - s.omega().values()).abs().maxCoeff() == 0.0);
}

TEST_CASE("radial vorticity is steady over 100 steps") {
  GridSpec2D g(128, 16.0);
  SimState2D s0(radial(g));
  Euler2D e(g);
  SimState2D s = s0;
  for (int i = 0; i < 100; ++i) s = e.step(s, 0.01);
  CHECK(s.t() == doctest::Approx(1.0));
  CHECK((s.omega().values() - s0.omega().values()).abs().maxCoeff() <= 1e-10 * s0.omega().max_abs());
  auto c = conservation_report(s0, s);
  CHECK(c.l1 <= 1e-10);
  CHECK(c.l2 <= 1e-10);
  CHECK(c.linf <= 1e-10);
  CHECK(c.u_l2 <= 1e-10);
}

TEST_CASE("CFL violation aborts with a suggested dt") {
  GridSpec2D g(64, 2 * kPi);
  SimState2D s(random_band_limited(g, 8, 5) * 50.0);
  Euler2D e(g);
  const double dt = 1.0;
  CHECK(e.cfl(s, dt) > 0.5);
  try {
    e.step(s, dt);
    FAIL("expected CFL fault");
  } catch (const NumericalFault& ex) {
    CHECK(std::string(ex.what()).find("suggested dt") != std::string::npos);
  }
}

TEST_CASE("conservation report is zero at t = 0") {
  GridSpec2D g(128, 8.0);
  SimState2D s(make_eta0(g, 0.5));
  auto c = conservation_report(s, s);
  CHECK(c.l1 == 0.0);
  CHECK(c.l2 == 0.0);
  CHECK(c.linf == 0.0);
  CHECK(c.u_l2 == 0.0);
}

TEST_CASE("eta_0 at n=256: L2 drift at t=0.5 and agreement with n=512") {
  const double r = 0.5, dt = 5e-3, t = 0.5;
  GridSpec2D g(256, 16.0), f(512, 16.0);
  RunConfig2D cfg;
  cfg.grid = g;
  cfg.dt = dt;
  cfg.t_end = t;
  cfg.diag_every = 20;
  auto res = run2d(cfg, make_eta0(g, r));
  SimState2D s0(prepare_initial(make_eta0(g, r)).first);
  CHECK(conservation_report(s0, res.final_state).l2 <= 1e-6);
  // 8 cells per radius: the 2/3 window keeps ~98.5% of the L2 mass.
  CHECK(res.dealias_removed < 0.02);
  CHECK(res.diagnostics.size() == 6);
  CHECK(res.diagnostics.back().t == doctest::Approx(t));

  RunConfig2D fcfg = cfg;
  fcfg.grid = f;
  auto fres = run2d(fcfg, make_eta0(f, r));
  SimState2D f0(prepare_initial(make_eta0(f, r)).first);
  CHECK(conservation_report(f0, fres.final_state).l2 <= 1e-6);
  // The coarse run differs from the fine one by the truncation of the data, not by the dynamics.
  const auto& fine = fres.final_state.omega();
  const double diff = l2_diff(restrict_to(g, fine), res.final_state.omega());
  const double trunc = l2_diff(restrict_to(g, f0.omega()), s0.omega());
  CHECK(diff <= 1.05 * trunc);
}

TEST_CASE("fourth-order convergence in time") {
  GridSpec2D g(64, 2 * kPi);
  auto w0 = dealias(random_band_limited(g, 6, 9));
  w0 = w0 * (1.0 / biot_savart(w0).u1.max_abs());
  auto a = evolve(w0, 0.04, 0.48);
  auto b = evolve(w0, 0.02, 0.48);
  auto c = evolve(w0, 0.01, 0.48);
  const double ratio = l2_diff(a, b) / l2_diff(b, c);
  MESSAGE("time convergence ratio " << ratio);
  CHECK(ratio >= 12.0);
}

TEST_CASE("spectral convergence in space") {
  auto data = [](const GridSpec2D& g) {
    return remove_mean(SpectralField2D::sample(g, [](double x1, double x2) {
      return x1 * x2 * std::exp(-(x1 * x1 + x2 * x2) / 0.5) * 4.0;
    }));
  };
  const double dt = 0.01, t = 0.5;
  GridSpec2D g1(32, 8.0), g2(64, 8.0), g3(128, 8.0);
  auto a = evolve(data(g1), dt, t);
  auto b = evolve(data(g2), dt, t);
  auto c = evolve(data(g3), dt, t);
  const double d1 = l2_diff(a, restrict_to(g1, b));
  const double d2 = l2_diff(restrict_to(g2, b), restrict_to(g2, c));
  MESSAGE("space differences " << d1 << " " << d2);
  CHECK(d1 / d2 >= 100.0);
}

TEST_CASE("symmetry report") {
  GridSpec2D g(128, 16.0);
  SeedSpec gs;
  gs.family = Family::ReflectedGaussian;
  gs.amplitude = 1.0;
  gs.width = 1.0;
  auto w = make_seed(g, gs);
  SimState2D s0(w);
  auto r0 = symmetry_report(s0, true);
  CHECK(r0.odd_x1 <= 1e-15);
  CHECK(r0.odd_x2 <= 1e-15);
  CHECK(r0.odd_odd);
  CHECK(r0.sign_preserved);

  RunConfig2D cfg;
  cfg.grid = g;
  cfg.dt = 0.01;
  cfg.t_end = 0.5;
  auto res = run2d(cfg, w);
  auto r1 = symmetry_report(res.final_state, true);
  CHECK(r1.odd_x1 <= 1e-8);
  CHECK(r1.odd_x2 <= 1e-8);
  for (const auto& row : res.diagnostics) {
    CHECK(row.sym_x1 <= 1e-8);
    CHECK(row.sym_x2 <= 1e-8);
  }

  auto shifted = remove_mean(SpectralField2D::sample(g, [](double x1, double x2) {
    return std::exp(-((x1 - 1) * (x1 - 1) + x2 * x2));
  }));
  auto r2 = symmetry_report(SimState2D(shifted));
  CHECK_FALSE(r2.odd_odd);
  CHECK(r2.odd_x1 > 0.1);
}

TEST_CASE("exponential filter damps the top of the spectrum only") {
  GridSpec2D g(64, 2 * kPi);
  FilterSpec fs;
  fs.enabled = true;
  auto w = dealias(random_band_limited(g, 21, 3));
  SimState2D s(w);
  auto plain = Euler2D(g).step(s, 1e-3);
  auto filtered = Euler2D(g, fs).step(s, 1e-3);
  // Low modes untouched, the 2/3 edge damped by exp(-36 (2/3)^36) ~ 1 - 1.6e-5.
  CHECK(std::abs(filtered.omega().coeffs()(1, 1) - plain.omega().coeffs()(1, 1)) <= 1e-12 * std::abs(plain.omega().coeffs()(1, 1)));
  const Complex edge = plain.omega().coeffs()(21, 21);
  CHECK(std::abs(filtered.omega().coeffs()(21, 21)) < std::abs(edge));
}

TEST_CASE("diagnostics CSV columns") {
  std::ostringstream os;
  write_csv_header(os);
  CHECK(os.str() == "t,L1,L2,Linf,E,Hdot1,sym_x1,sym_x2,cfl\n");
  GridSpec2D g(32, 2 * kPi);
  SimState2D s(SpectralField2D::sample(g, [](double x1, double x2) { return std::sin(x1) * std::sin(x2); }));
  auto row = diagnostics_row(s, 0.1);
  CHECK(row.l2 == doctest::Approx(kPi));
  CHECK(row.energy == doctest::Approx(0.5 * row.l2 * row.l2));
  write_csv_row(os, row);
  const std::string text = os.str();
  CHECK(std::count(text.begin(), text.end(), ',') == 16);
}
