#include "eulab/constructions.hpp"
#include "eulab/flowmap.hpp"
#include "eulab/norms.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace eulab;
using eulab::testing::random_band_limited;
using eulab::testing::trig_eval;

namespace {

SeedSpec gaussian_spec(double amplitude = 1.0, double width = 1.0) {
  SeedSpec s;
  s.family = Family::ReflectedGaussian;
  s.amplitude = amplitude;
  s.width = width;
  return s;
}

SeedLayout points(std::vector<Vec2> p) {
  SeedLayout l;
  l.points = std::move(p);
  return l;
}

RunConfig2D config(const GridSpec2D& g, double dt, double t_end) {
  RunConfig2D c;
  c.grid = g;
  c.dt = dt;
  c.t_end = t_end;
  c.diag_every = 1 << 30;
  return c;
}

// 4 * integral of the (1,1) bump of eta_0 against x1 x2 / |x|^4: Gauss-Legendre in
// the bump radius, trapezoid in angle.
double eta0_b_oracle(double r) {
  // 64-point Gauss-Legendre nodes on [0, 1] via Newton on P_n.
  const int m = 64;
  std::vector<double> xs(m), ws(m);
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (m + 0.5)), pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = m * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    xs[i] = 0.5 * (1.0 - z);
    ws[i] = 1.0 / ((1.0 - z * z) * pp * pp);
  }
  const int nt = 256;
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    const double rho = r * xs[i];
    const double phi = mollifier(xs[i]);
    double ang = 0.0;
    for (int k = 0; k < nt; ++k) {
      const double th = 2.0 * kPi * k / nt;
      const double x1 = 1.0 + rho * std::cos(th), x2 = 1.0 + rho * std::sin(th);
      const double q = x1 * x1 + x2 * x2;
      ang += x1 * x2 / (q * q);
    }
    acc += ws[i] * r * rho * phi * ang * (2.0 * kPi / nt);
  }
  return 4.0 * acc;
}

}  // namespace

TEST_CASE("exact interpolation reproduces the trigonometric interpolant") {
  GridSpec2D g(32, 5.0);
  auto f = random_band_limited(g, 10, 3);
  ScalarInterpolator exact(f, InterpMethod::Exact);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int i = 0; i < 20; ++i) {
    const Vec2 x(u(rng), u(rng));
    CHECK(exact(x)(0) == doctest::Approx(trig_eval(f, x(0), x(1))).epsilon(1e-11).scale(f.max_abs()));
  }
  // derivatives against the spectral derivative at grid nodes
  auto d1 = derivative(f, 1);
  CHECK(exact(Vec2(g.coord(5), g.coord(9)))(1) == doctest::Approx(d1(5, 9)).scale(d1.max_abs()).epsilon(1e-12));
}

TEST_CASE("upsampled Lagrange interpolation against the exact interpolant") {
  GridSpec2D g(64, 8.0);
  auto w = dealias(random_band_limited(g, 21, 5));
  FlowInterpolator ex(g, w.coeffs(), InterpMethod::Exact);
  FlowInterpolator lg(g, w.coeffs(), InterpMethod::Lagrange);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double err = 0.0, scale = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Vec2 x(u(rng), u(rng));
    const auto a = ex(x), b = lg(x);
    err = std::max({err, (a.u - b.u).cwiseAbs().maxCoeff(), (a.du - b.du).cwiseAbs().maxCoeff()});
    scale = std::max({scale, a.u.cwiseAbs().maxCoeff(), a.du.cwiseAbs().maxCoeff()});
  }
  MESSAGE("lagrange relative error " << err / scale);
  // Worst case: random data with flat spectrum up to the 2/3 edge.
  CHECK(err <= 1e-4 * scale);

  // Exact at the nodes of the upsampled grid, hence at the original nodes.
  auto du = velocity_gradient(w);
  auto vel = biot_savart(w);
  const auto s = lg(Vec2(g.coord(7), g.coord(40)));
  CHECK(s.u(0) == doctest::Approx(vel.u1(7, 40)).epsilon(1e-12).scale(vel.u1.max_abs()));
  CHECK(s.du(1, 0) == doctest::Approx(du.d1u2(7, 40)).epsilon(1e-12).scale(du.d1u2.max_abs()));
}

TEST_CASE("smooth data: Lagrange interpolation is near machine accuracy") {
  GridSpec2D g(128, 16.0);
  auto w = make_seed(g, gaussian_spec());
  FlowInterpolator ex(g, w.coeffs(), InterpMethod::Exact);
  FlowInterpolator lg(g, w.coeffs(), InterpMethod::Lagrange);
  double err = 0.0;
  for (double x1 : {-1.3, 0.21, 0.77, 2.05})
    for (double x2 : {-0.9, 0.013, 1.51}) {
      const auto a = ex(Vec2(x1, x2)), b = lg(Vec2(x1, x2));
      err = std::max({err, (a.u - b.u).cwiseAbs().maxCoeff(), (a.du - b.du).cwiseAbs().maxCoeff()});
    }
  CHECK(err <= 1e-10);
}

TEST_CASE("zero flow: identity map") {
  auto seeds = make_seed_layout(1.0, 4, 1);
  auto ens = advect_analytic(zero_flow(), seeds, 1.0, 0.1);
  for (std::size_t i = 0; i < seeds.points.size(); ++i) {
    CHECK(ens.final_positions()[i] == seeds.points[i]);
    CHECK(ens.final_jacobians()[i] == Mat2::Identity());
  }
  CHECK(ens.max_deformation() == 1.0);
}

TEST_CASE("solid rotation preserves radii and rotates by the elapsed angle") {
  auto seeds = points({Vec2(1, 0), Vec2(0.3, -0.7), Vec2(-2, 1)});
  auto ens = advect_analytic(solid_rotation(1.0), seeds, 1.0, 0.01);
  for (std::size_t i = 0; i < 3; ++i) {
    const Vec2 x = seeds.points[i], p = ens.final_positions()[i];
    CHECK(std::abs(p.norm() - x.norm()) <= 1e-10);
    const Vec2 rot(std::cos(1.0) * x(0) - std::sin(1.0) * x(1), std::sin(1.0) * x(0) + std::cos(1.0) * x(1));
    CHECK((p - rot).norm() <= 1e-9);
    CHECK(std::abs(ens.final_jacobians()[i].determinant() - 1.0) <= 1e-10);
  }
}

TEST_CASE("linear strain gives diag(e^-at, e^at)") {
  const double a = 1.3, t = 1.0;
  auto ens = advect_analytic(linear_strain(a), points({Vec2(0.5, 0.2), Vec2::Zero()}), t, 1e-3);
  for (const auto& J : ens.final_jacobians()) {
    CHECK(J(0, 0) == doctest::Approx(std::exp(-a * t)).epsilon(1e-8));
    CHECK(J(1, 1) == doctest::Approx(std::exp(a * t)).epsilon(1e-8));
    CHECK(std::abs(J(0, 1)) <= 1e-14);
    CHECK(std::abs(J(1, 0)) <= 1e-14);
  }
  CHECK(ens.final_positions()[1].norm() == 0.0);
}

TEST_CASE("D phi agrees with centered differences of phi") {
  GridSpec2D g(64, 2 * kPi);
  auto w = dealias(random_band_limited(g, 6, 8));
  w = w * (1.0 / biot_savart(w).u1.max_abs());
  const double eps = 1e-4;
  std::vector<Vec2> p;
  const std::vector<Vec2> centers{Vec2(0.4, -0.3), Vec2(1.7, 2.2)};
  for (const auto& c : centers)
    for (const Vec2& d : {Vec2(0, 0), Vec2(eps, 0), Vec2(-eps, 0), Vec2(0, eps), Vec2(0, -eps)}) p.push_back(c + d);
  FlowMapOptions opt;
  opt.interp.method = InterpMethod::Exact;
  auto run = run_with_flowmap(config(g, 0.01, 1.0), w, points(p), opt);
  const auto& X = run.ensemble.final_positions();
  const auto& J = run.ensemble.final_jacobians();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const std::size_t b = 5 * c;
    Mat2 fd;
    fd.col(0) = (X[b + 1] - X[b + 2]) / (2 * eps);
    fd.col(1) = (X[b + 3] - X[b + 4]) / (2 * eps);
    CHECK(max_abs_entry(fd - J[b]) <= 1e-3 * max_abs_entry(J[b]));
    CHECK(std::abs(J[b].determinant() - 1.0) <= 1e-6);
  }
}

TEST_CASE("stored trajectory matches the coupled integration") {
  GridSpec2D g(64, 2 * kPi);
  auto w = dealias(random_band_limited(g, 6, 12));
  w = w * (1.0 / biot_savart(w).u1.max_abs());
  VelocityTrajectory traj;
  traj.grid = g;
  auto cfg = config(g, 0.005, 0.5);
  run2d(cfg, w, [&](const SimState2D& s) {
    traj.times.push_back(s.t());
    traj.omega_hat.push_back(s.omega().coeffs());
  });
  auto seeds = points({Vec2(0.4, -0.3), Vec2(1.7, 2.2), Vec2(-2.0, 0.1)});
  FlowMapOptions opt;
  opt.interp.method = InterpMethod::Exact;
  auto stored = deformation(traj, seeds, opt);
  auto coupled = run_with_flowmap(config(g, 0.01, 0.5), w, seeds, opt);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK((stored.final_positions()[i] - coupled.ensemble.final_positions()[i]).norm() <= 1e-7);
    CHECK(max_abs_entry(stored.final_jacobians()[i] - coupled.ensemble.final_jacobians()[i]) <= 1e-6);
  }
  auto pos_only = advect(traj, seeds, opt);
  CHECK((pos_only.final_positions()[0] - stored.final_positions()[0]).norm() == 0.0);
  CHECK(pos_only.final_jacobians()[0] == Mat2::Identity());

  traj.times.pop_back();
  traj.omega_hat.pop_back();
  CHECK_THROWS_AS(deformation(traj, seeds, opt), ValidationError);
}

TEST_CASE("b functional") {
  GridSpec2D g(256, 16.0);
  CHECK(b_functional(make_seed(g, gaussian_spec())) == doctest::Approx(kPi / 8).epsilon(1e-4));
  CHECK(b_functional(make_seed(g, gaussian_spec(2.0, 0.7))) == doctest::Approx(kPi / 4).epsilon(1e-4));
  CHECK(b_functional(SpectralField2D::zero(g)) == 0.0);

  GridSpec2D e(512, 8.0);
  const double r = 0.25;
  const double oracle = eta0_b_oracle(r);
  MESSAGE("eta0 B oracle " << oracle);
  CHECK(oracle > 0.0);
  CHECK(b_functional(make_eta0(e, r)) == doctest::Approx(oracle).epsilon(1e-4));

  auto odd_even = remove_mean(SpectralField2D::sample(g, [](double x1, double x2) {
    return x1 * std::exp(-(x1 * x1 + x2 * x2));
  }));
  CHECK_THROWS_AS(b_functional(odd_even), ValidationError);
  CHECK_THROWS_AS(b_functional(make_seed(g, gaussian_spec(-1.0))), ValidationError);
}

TEST_CASE("certificate bounds in closed form") {
  CHECK(deformation_lower_bound(kPi / 4, 1.0) == doctest::Approx(std::pow(1.0 / std::log(2.0), 0.25)));
  CHECK(deformation_lower_bound(kPi / 4, 1.0) == doctest::Approx(1.09593).epsilon(1e-4));
  CHECK(deformation_integral_bound(1.0, 0.0) == 0.0);
  CHECK(deformation_lower_bound(1.0, 0.0) == 1.0);

  FlowMapEnsemble ens;
  ens.sup_times = {0.0};
  ens.sup_series = {1.0};
  ens.det_drift = {0.0};
  auto c = check_deformation_growth(ens, 0.5);
  CHECK(c.pass);
  CHECK(c.integral_margin[0] == 0.0);
  CHECK_THROWS_AS(check_deformation_growth(ens, 0.0), ValidationError);
  ens.det_drift = {0.5};
  CHECK_THROWS_AS(check_deformation_growth(ens, 0.5), ValidationError);
}

TEST_CASE("reflected Gaussian: certificate, stagnation and hyperbolicity") {
  GridSpec2D g(128, 16.0);
  auto w = make_seed(g, gaussian_spec());
  const double B = b_functional(w);
  auto seeds = grid_aligned_layout(g, 3.0, 2, 4);
  FlowMapOptions opt;
  opt.odd_data = true;
  auto run = run_with_flowmap(config(g, 0.01, 0.5), w, seeds, opt);
  const auto& ens = run.ensemble;
  auto cert = check_deformation_growth(ens, B);
  MESSAGE("final lhs " << cert.lhs.back() << " rhs " << cert.rhs.back() << " maxdef " << cert.max_def.back()
                       << " lower " << cert.lower_bound.back());
  CHECK(cert.pass);
  REQUIRE(ens.origin);
  CHECK(ens.final_positions()[*ens.origin].norm() <= 1e-10);
  CHECK(ens.quadrant_violation <= 1e-8);
  CHECK(ens.max_det_drift() <= 1e-4);
  CHECK_FALSE(ens.left_central_box);

  auto hyp = hyperbolicity_at_origin(run.origin, ens, B);
  CHECK(hyp.max_offdiag <= 1e-8);
  CHECK(hyp.min_bound_ratio >= 0.95);
  CHECK(hyp.series.front().lambda == doctest::Approx(-B / kPi).epsilon(1e-2));
}

TEST_CASE("hyperbolicity contract for non-odd and zero data") {
  GridSpec2D g(64, 16.0);
  auto w = make_seed(g, gaussian_spec());
  auto bump = SpectralField2D::sample(g, [](double x1, double x2) {
    return std::exp(-((x1 - 0.5) * (x1 - 0.5) + x2 * x2) * 2.0);
  });
  auto mixed = remove_mean(w + bump * 0.2);
  auto run = run_with_flowmap(config(g, 0.02, 0.1), mixed, points({Vec2::Zero()}));
  auto hyp = hyperbolicity_at_origin(run.origin, run.ensemble, 1.0);
  CHECK(hyp.max_offdiag > 1e-4);

  auto zero = run_with_flowmap(config(g, 0.02, 0.1), SpectralField2D::zero(g), points({Vec2::Zero()}));
  for (const auto& o : zero.origin) CHECK(o.lambda == 0.0);
}

TEST_CASE("Lagrangian H1 pullback") {
  GridSpec2D g(128, 8.0);
  auto f = prepare_initial(make_eta0(g, 0.5)).first;
  const double h1sq = std::pow(sobolev_norm(f, 1.0), 2);
  auto seeds = grid_aligned_layout(g, 4.0, 1, 0);

  SUBCASE("identity at t = 0") {
    auto ens = advect_analytic(zero_flow(), seeds, 0.0, 0.1);
    CHECK(lagrangian_h1(f, ens, 0) == doctest::Approx(h1sq).epsilon(1e-10));
  }
  SUBCASE("rotation invariance") {
    auto ens = advect_analytic(solid_rotation(2.0), seeds, 1.0, 0.01);
    CHECK(lagrangian_h1(f, ens, ens.times.size() - 1) == doctest::Approx(h1sq).epsilon(1e-8));
  }
  SUBCASE("coverage is enforced") {
    auto small = grid_aligned_layout(g, 2.0, 1, 0);
    auto ens = advect_analytic(zero_flow(), small, 0.0, 0.1);
    CHECK_THROWS_AS(lagrangian_h1(f, ens, 0), ValidationError);
  }
  SUBCASE("evolved eta_0 against the spectral norm") {
    auto w = make_eta0(g, 0.5, 20.0);
    auto init = prepare_initial(w).first;
    auto run = run_with_flowmap(config(g, 0.005, 0.25), w, seeds);
    const double spectral = std::pow(sobolev_norm(run.run.final_state.omega(), 1.0), 2);
    const double lag = lagrangian_h1(init, run.ensemble, run.ensemble.times.size() - 1);
    MESSAGE("lagrangian " << lag << " spectral " << spectral << " initial " << std::pow(sobolev_norm(init, 1.0), 2));
    CHECK(lag == doctest::Approx(spectral).epsilon(0.02));
  }
}

TEST_CASE("ODE perturbation constants are stable in eps") {
  // Hyperbolic base flow and a bounded smooth perturbation with |v| + |Dv| = 1 on the seed region.
  AnalyticFlow v{[](double, const Vec2& x) {
    FlowSample s;
    s.u = Vec2(std::sin(x(1)), std::cos(x(0))) * 0.5;
    s.du << 0.0, 0.5 * std::cos(x(1)), -0.5 * std::sin(x(0)), 0.0;
    return s;
  }};
  auto seeds = make_seed_layout(1.0, 5, 1);
  auto c = ode_perturbation_constants(linear_strain(1.0), v, seeds, 1.0, 0.01, {1e-2, 1e-3, 1e-4});
  MESSAGE("C = " << c[0] << " " << c[1] << " " << c[2]);
  for (double x : c) {
    CHECK(x > 0.0);
    CHECK(std::abs(x / c[2] - 1.0) <= 0.2);
  }
}

TEST_CASE("inflation experiment plumbing") {
  GridSpec2D g(128, 16.0);
  auto w = make_seed(g, gaussian_spec(4.0, 0.5));
  auto seeds = grid_aligned_layout(g, 2.0, 4, 2);
  InflationConfig ic;
  ic.k_sweep = {8.0};
  ic.delta = 0.5;
  ic.m_threshold = 100.0;
  CHECK_THROWS_AS(inflation_experiment(config(g, 0.01, 0.3), w, seeds, ic), ValidationError);

  ic.m_threshold = 1.0;
  ic.beta_scale = 0.0;
  auto rep = inflation_experiment(config(g, 0.01, 0.3), w, seeds, ic);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rep.M >= 1.0);
  CHECK(rep.t0 > 0.0);
}
