#include "eulab/axisym3d.hpp"

#include <doctest.h>

#include <cmath>

using namespace eulab;

namespace {

// Value and first two derivatives in r, for exact manufactured-solution derivatives.
struct Jet {
  double v, d, dd;
};
Jet operator+(Jet a, Jet b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet operator-(Jet a, Jet b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Jet operator*(Jet a, Jet b) { return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd}; }
Jet operator*(double s, Jet a) { return {s * a.v, s * a.d, s * a.dd}; }
Jet jexp(Jet a) {
  const double e = std::exp(a.v);
  return {e, e * a.d, e * (a.dd + a.d * a.d)};
}
Jet jinv(Jet a) { return {1.0 / a.v, -a.d / (a.v * a.v), 2.0 * a.d * a.d / (a.v * a.v * a.v) - a.dd / (a.v * a.v)}; }

// Stokes stream function Psi = P(r) sin(kappa z), P = r^2 (R - r)^2 exp(-a^2 / r^2).
struct Manufactured {
  double R = 1.0, Lz = 1.0, a = 0.2;
  double kappa() const { return 2.0 * kPi / Lz; }
  Jet P(double r) const {
    const Jet x{r, 1.0, 0.0}, c{R, 0.0, 0.0};
    const Jet s = jexp(-(a * a) * jinv(x * x));
    return x * x * (c - x) * (c - x) * s;
  }
  double omega(double r, double z) const {
    const Jet p = P(r);
    const double k = kappa();
    return -(p.dd - p.d / r - k * k * p.v) / r * std::sin(k * z);
  }
  double ur(double r, double z) const { return -P(r).v * kappa() * std::cos(kappa() * z) / r; }
  double uz(double r, double z) const { return P(r).d * std::sin(kappa() * z) / r; }
};

std::pair<double, double> manufactured_errors(int n) {
  const Manufactured m;
  const AxiGrid g(n, n, m.R, m.Lz);
  const auto u = axi_velocity(g, sample_axi(g, [&](double r, double z) { return m.omega(r, z); }));
  const AxiField er = u.ur - sample_axi(g, [&](double r, double z) { return m.ur(r, z); });
  const AxiField ez = u.uz - sample_axi(g, [&](double r, double z) { return m.uz(r, z); });
  const double sr = sample_axi(g, [&](double r, double z) { return m.ur(r, z); }).matrix().norm();
  const double sz = sample_axi(g, [&](double r, double z) { return m.uz(r, z); }).matrix().norm();
  return {er.matrix().norm() / sr, ez.matrix().norm() / sz};
}

SeedSpec tilde_ga(double A, double c = 1.0) {
  SeedSpec s;
  s.family = Family::TildeGA3D;
  s.A = A;
  s.lab_constant = c;
  s.zoom = std::ldexp(1.0, static_cast<int>(std::ceil(A)));
  return s;
}

// Two rings of opposite sign, odd in z: a smooth data set for dynamics tests.
double ring_pair(double r, double z, double amp = 1.0) {
  auto bump = [](double rr, double zz) {
    const double d2 = ((rr - 0.6) * (rr - 0.6) + zz * zz) / (0.2 * 0.2);
    return d2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - d2)) : 0.0;
  };
  return amp * (bump(r, z - 0.5) - bump(r, z + 0.5));
}

}  // namespace

TEST_CASE("zero vorticity gives zero velocity") {
  const AxiGrid g(32, 32, 1.0, 2.0);
  const auto u = axi_velocity(g, AxiField::Zero(32, 32));
  CHECK(u.ur.abs().maxCoeff() == 0.0);
  CHECK(u.uz.abs().maxCoeff() == 0.0);
}

TEST_CASE("manufactured stream function: second-order velocity recovery") {
  const auto e1 = manufactured_errors(64), e2 = manufactured_errors(128), e3 = manufactured_errors(256);
  const double or1 = std::log2(e1.first / e2.first), or2 = std::log2(e2.first / e3.first);
  const double oz1 = std::log2(e1.second / e2.second), oz2 = std::log2(e2.second / e3.second);
  MESSAGE("u^r errors " << e1.first << " " << e2.first << " " << e3.first);
  MESSAGE("u^z errors " << e1.second << " " << e2.second << " " << e3.second);
  CHECK(or1 >= 1.8);
  CHECK(or2 >= 1.8);
  CHECK(oz1 >= 1.8);
  CHECK(oz2 >= 1.8);
  CHECK(e3.first < 1e-3);
}

TEST_CASE("discrete divergence vanishes and the k_z = 0 mode of u^r is zero") {
  const AxiGrid g(96, 128, 2.0, 4.0);
  const auto u = axi_velocity(g, sample_axi(g, [](double r, double z) { return r * ring_pair(r, z) + 0.3 * ring_pair(r, z - 0.2); }));
  CHECK(u.divergence < 1e-10);
  for (int i = 0; i < g.n_r(); ++i) CHECK(std::abs(u.ur.row(i).mean()) <= 1e-13 * u.ur.abs().maxCoeff());
}

TEST_CASE("state invariants") {
  const AxiGrid g(32, 32, 1.0, 2.0);
  AxiField q = AxiField::Zero(32, 32);
  q(1, 5) = 1.0;
  q(10, 5) = 1.0;
  CHECK_THROWS_AS(AxiState(g, q), ValidationError);
  q(1, 5) = 0.0;
  CHECK_NOTHROW(AxiState(g, q));
  q(10, 6) = std::nan("");
  CHECK_THROWS_AS(AxiState(g, q), ValidationError);
  CHECK_THROWS_AS(AxiState(g, AxiField::Zero(16, 32)), ValidationError);
}

TEST_CASE("dt = 0 and zero velocity leave the state unchanged") {
  const AxiGrid g(64, 64, 2.0, 4.0);
  const AxiState s = axi_state_from_omega(g, sample_axi(g, [](double r, double z) { return ring_pair(r, z); }));
  CHECK((axi_step(s, 0.0).q() - s.q()).abs().maxCoeff() == 0.0);
  AxiEuler frozen(g, 0.5, [](const AxiGrid& gg, const AxiField&) {
    return AxiVelocity{AxiField::Zero(gg.n_r(), gg.n_z()), AxiField::Zero(gg.n_r(), gg.n_z()), 0.0};
  });
  AxiState t = s;
  for (int i = 0; i < 5; ++i) t = frozen.step(t, 0.1);
  CHECK((t.q() - s.q()).abs().maxCoeff() <= 1e-14 * s.q().abs().maxCoeff());
}

TEST_CASE("CFL violation is a numerical fault") {
  const AxiGrid g(64, 64, 2.0, 4.0);
  const AxiState s = axi_state_from_omega(g, sample_axi(g, [](double r, double z) { return ring_pair(r, z, 50.0); }));
  CHECK_THROWS_AS(axi_step(s, 1.0), NumericalFault);
}

TEST_CASE("ring pair: odd symmetry, stagnation line, conservation") {
  const AxiGrid g(128, 256, 2.0, 4.0);
  const AxiState s0 = axi_state_from_omega(g, sample_axi(g, [](double r, double z) { return ring_pair(r, z, 5.0); }));
  AxiRunConfig cfg;
  cfg.grid = g;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  const auto res = axi_run(cfg, s0);
  const auto& st = res.final_state;
  CHECK(odd_z_residual(g, st.q()) <= 1e-12);
  const auto& u = st.velocity();
  const int j0 = g.n_z() / 2;  // z = 0
  CHECK(u.uz.col(j0).abs().maxCoeff() <= 1e-12 * u.uz.abs().maxCoeff());
  const double l2 = std::abs(axi_lp_norm(g, st.q(), 2.0) / axi_lp_norm(g, s0.q(), 2.0) - 1.0);
  const double l31 =
      std::abs(axi_lorentz_norm(g, st.q(), 3.0, 1.0) / axi_lorentz_norm(g, s0.q(), 3.0, 1.0) - 1.0);
  MESSAGE("drifts L2 " << l2 << " L31 " << l31);
  CHECK(l2 <= 1e-3);
  CHECK(l31 <= 1e-3);
  const auto ax = axis_regularity(g, u);
  CHECK(ax.ok);
  CHECK(ur_over_r_max(g, u) <= 10.0 * axi_lorentz_norm(g, st.q(), 3.0, 1.0));
}

TEST_CASE("tilde g_A lab run: q L2 drift and self-convergence") {
  const SeedSpec s = tilde_ga(2.0, 4.0);
  auto run = [&](int nr) {
    const AxiGrid g(nr, 2 * nr, 1.5, 3.0);
    AxiRunConfig cfg;
    cfg.grid = g;
    cfg.dt = 5e-3;
    cfg.t_end = 0.2;
    const auto res = axi_run(cfg, axi_state_from_omega(g, make_axi_seed(g, s)));
    return std::make_pair(res, axi_lp_norm(g, res.final_state.q(), 2.0));
  };
  const auto [coarse, l2c] = run(192);
  const auto [fine, l2f] = run(384);
  const double q0c = coarse.diagnostics.front().q_l2, q0f = fine.diagnostics.front().q_l2;
  const double drift_c = std::abs(l2c / q0c - 1.0), drift_f = std::abs(l2f / q0f - 1.0);
  MESSAGE("drift coarse " << drift_c << " fine " << drift_f);
  CHECK(drift_c <= 1e-3);
  CHECK(drift_f <= 1e-3);
  // The doubled grid agrees on the conserved norm to the same tolerance.
  CHECK(std::abs(l2c / l2f - q0c / q0f) <= 1e-3);
}

TEST_CASE("resolvability and family checks") {
  const AxiGrid g(64, 128, 1.5, 3.0);
  CHECK_THROWS_AS(make_axi_seed(g, tilde_ga(2.0)), ValidationError);
  SeedSpec flat;
  flat.family = Family::Eta0;
  CHECK_THROWS_AS(make_axi_seed(g, flat), ValidationError);
  try {
    make_axi_seed(g, tilde_ga(2.0));
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("n_r >= 192") != std::string::npos);
  }
}

TEST_CASE("flow map: identity for zero velocity and det = r / phi^r") {
  const AxiGrid g(128, 256, 2.0, 4.0);
  const auto seeds = axi_seed_grid(0.3, 0.9, -0.8, 0.8, 12, 24);
  AxiRunConfig cfg;
  cfg.grid = g;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  SUBCASE("zero velocity") {
    const AxiState s0 = axi_state_from_omega(g, sample_axi(g, [](double r, double z) { return ring_pair(r, z); }));
    auto zero = [](const AxiGrid& gg, const AxiField&) {
      return AxiVelocity{AxiField::Zero(gg.n_r(), gg.n_z()), AxiField::Zero(gg.n_r(), gg.n_z()), 0.0};
    };
    const auto run = axi_run_with_flowmap(cfg, s0, seeds, 1, {}, zero);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      CHECK((run.ensemble.positions.back()[i] - seeds[i]).norm() == 0.0);
      CHECK((run.ensemble.jacobians.back()[i] - Mat2::Identity()).norm() == 0.0);
    }
  }
  SUBCASE("evolved ring pair") {
    const AxiState s0 = axi_state_from_omega(g, sample_axi(g, [](double r, double z) { return ring_pair(r, z, 5.0); }));
    const auto run = axi_run_with_flowmap(cfg, s0, seeds, 10);
    const auto& e = run.ensemble;
    CHECK(e.det_identity.front() <= 1e-15);
    MESSAGE("det identity " << e.max_det_identity() << " max deformation " << e.max_deformation());
    CHECK(e.max_det_identity() <= 1e-3);
    CHECK(e.max_deformation() > 1.0);
    // Tracers moved: the check is not vacuous.
    double moved = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) moved = std::max(moved, (e.positions.back()[i] - seeds[i]).norm());
    CHECK(moved > 2.0 * g.h_r());
    const auto mf = metric_factor_check(s0, e, run.run.final_state);
    MESSAGE("metric factor residual " << mf.residual << " over " << mf.probes << " probes");
    CHECK(mf.probes > 20);
    CHECK(mf.residual <= 0.02);
    AxiRunConfig c0 = cfg;
    c0.t_end = 0.0;
    const auto still = axi_run_with_flowmap(c0, s0, seeds);
    CHECK(metric_factor_check(s0, still.ensemble, still.run.final_state).residual <= 1e-14);
  }
}

TEST_CASE("tracer crossing the axis is a numerical fault") {
  const AxiGrid g(32, 32, 1.0, 2.0);
  AxiVelocity u{AxiField::Constant(32, 32, -1.0), AxiField::Zero(32, 32), 0.0};
  const AxiInterpolator f(g, u);
  CHECK_THROWS_AS(f(Vec2(-0.01, 0.0)), NumericalFault);
  CHECK_NOTHROW(f(Vec2(0.01, 0.0)));
}

TEST_CASE("five-dimensional kernel quadrature matches the solver at 16 probes") {
  const AxiGrid g(256, 512, 4.0, 8.0);
  const AxiField w = sample_axi(g, [](double r, double z) { return ring_pair(r, z); });
  const auto u = axi_velocity(g, w);
  const AxiScalarInterpolator ur(g, u.ur, true);
  std::vector<double> got, want;
  double scale = 0.0;
  for (double r : {0.15, 0.35, 1.0, 1.3})
    for (double z : {-1.1, -0.1, 0.3, 0.9}) {
      got.push_back(ur(Vec2(r, z)));
      want.push_back(ur_kernel_quadrature(g, w, r, z));
      scale = std::max(scale, std::abs(want.back()));
    }
  double worst = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]) / scale);
  MESSAGE("kernel vs solver max deviation " << worst);
  CHECK(worst <= 0.03);
}

TEST_CASE("u^r / r bounded by the L^{3,1} norm of q across families") {
  for (double A : {2.0, 4.0}) {
    for (Family f : {Family::TildeGA3D, Family::GA3D}) {
      SeedSpec s = tilde_ga(A);
      s.family = f;
      const double feat = min_feature(s);
      const int nr = static_cast<int>(std::ceil(8.0 * 1.5 / feat / 16.0)) * 16;
      const AxiGrid g(nr, 2 * nr, 1.5, 3.0);
      const AxiState st = axi_state_from_omega(g, make_axi_seed(g, s));
      const double ratio = ur_over_r_max(g, st.velocity()) / axi_lorentz_norm(g, st.q(), 3.0, 1.0);
      MESSAGE(to_string(f) << " A=" << A << " ratio " << ratio);
      CHECK(ratio <= 10.0);
      CHECK(axis_regularity(g, st.velocity()).ok);
    }
  }
}

TEST_CASE("3D raster of axisymmetric shells") {
  const auto zero = raster_from_function([](double, double) { return 0.0; }, 16, 1.0);
  CHECK(zero.wx.values.abs().maxCoeff() == 0.0);
  CHECK(zero.azimuthal_variance == 0.0);

  // eta_k shell: bumps at (r, z) = (2^-k, +-2^-k) with opposite signs.
  auto shell = [](int k, int which) {
    return [k, which](double r, double z) {
      const double sc = std::ldexp(1.0, -k), rad = 0.125 * sc;
      double acc = 0.0;
      for (int e : {1, -1}) {
        if (which != 0 && which != e) continue;
        acc += e * mollifier(std::hypot(r - sc, z - e * sc) / rad);
      }
      return acc;
    };
  };
  // Box sizes and cells per bump differ between the k values so the comparison
  // is not an exact rescaling of the same samples.
  auto norm = [&](int k, int which, double box, int n) {
    return raster_sobolev_norm(raster_from_function(shell(k, which), n, box * std::ldexp(1.0, -k)), 1.5);
  };
  const double both = norm(0, 0, 3.0, 192), plus = norm(0, 1, 3.0, 192), minus = norm(0, -1, 3.0, 192);
  const double oracle = std::sqrt(plus * plus + minus * minus);
  MESSAGE("shell " << both << " disjoint sum " << oracle);
  CHECK(std::abs(both / oracle - 1.0) <= 0.05);
  const double n1 = norm(1, 0, 2.6, 176), n2 = norm(2, 0, 3.4, 224);
  MESSAGE("k sweep " << both << " " << n1 << " " << n2);
  CHECK(std::abs(n1 / both - 1.0) <= 0.05);
  CHECK(std::abs(n2 / both - 1.0) <= 0.05);
}

TEST_CASE("raster of a state matches the analytic raster") {
  const AxiGrid g(256, 512, 2.0, 4.0);
  const AxiState s = axi_state_from_omega(g, sample_axi(g, [](double r, double z) { return ring_pair(r, z); }));
  const auto a = raster_to_3d(s, 64, 4.0);
  const auto b = raster_from_function([](double r, double z) { return ring_pair(r, z); }, 64, 4.0);
  CHECK((a.wx.values - b.wx.values).abs().maxCoeff() <= 1e-3 * b.wx.values.abs().maxCoeff());
  CHECK_THROWS_AS(raster_to_3d(s, 64, 8.0), ValidationError);
}
