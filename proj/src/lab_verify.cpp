#include "eulab/lab.hpp"

#include "eulab/snapshot.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace eulab {

namespace {

void check_le(VerifyLedger& l, const std::string& name, double value, double tol) {
  l.checks.push_back({name, value, tol, std::isfinite(value) && value <= tol});
}

RunConfig2D config2d(const GridSpec2D& g, double dt, double t_end) {
  RunConfig2D c;
  c.grid = g;
  c.dt = dt;
  c.t_end = t_end;
  c.diag_every = 1 << 30;
  return c;
}

SeedSpec gaussian(double amplitude, double width) {
  SeedSpec s;
  s.family = Family::ReflectedGaussian;
  s.amplitude = amplitude;
  s.width = width;
  return s;
}

// Ring pair of opposite signs at r = 0.6, z = +-0.5.
double ring_pair(double r, double z, double amp) {
  auto bump = [](double rr, double zz) {
    const double d2 = ((rr - 0.6) * (rr - 0.6) + zz * zz) / 0.04;
    return d2 < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - d2)) : 0.0;
  };
  return amp * (bump(r, z - 0.5) - bump(r, z + 0.5));
}

VerifyLedger conservation_suite(std::uint64_t) {
  VerifyLedger l{"conservation", {}};
  // Largest radius that keeps the four bumps disjoint: 14 cells per radius.
  const GridSpec2D g(256, 16.0);
  const auto w0 = make_eta0(g, 0.9);
  const auto res = run2d(config2d(g, 1e-3, 1.0), w0);
  const auto c = conservation_report(SimState2D(prepare_initial(w0).first), res.final_state);
  check_le(l, "drift L2(omega)", c.l2, 1e-6);
  check_le(l, "drift L2(u)", c.u_l2, 1e-6);
  check_le(l, "drift L1(omega)", c.l1, 1e-4);
  check_le(l, "drift Linf(omega)", c.linf, 1e-3);
  return l;
}

VerifyLedger symmetry_suite(std::uint64_t) {
  VerifyLedger l{"symmetry", {}};
  const GridSpec2D g(128, 8.0);
  const auto w0 = make_eta0(g, 0.5);
  SeedLayout seeds;
  seeds.points = {Vec2::Zero(), Vec2(0.5, 0.25)};
  seeds.origin = 0;
  FlowMapOptions opt;
  opt.interp.method = InterpMethod::Exact;
  double offdiag = 0.0;
  const auto run = run_with_flowmap(config2d(g, 0.01, 0.5), w0, seeds, opt);
  for (const auto& o : run.origin) offdiag = std::max(offdiag, o.offdiag);
  const auto sym = symmetry_report(run.run.final_state);
  check_le(l, "odd in x1 (relative)", sym.odd_x1, 1e-8);
  check_le(l, "odd in x2 (relative)", sym.odd_x2, 1e-8);
  check_le(l, "|phi(t, 0)|", run.ensemble.final_positions()[0].norm(), 1e-8);
  check_le(l, "offdiag Du(t, 0) / max |Du|", offdiag, 1e-8);
  return l;
}

double fourier_sum(const SpectralField2D& f, double s) {
  const auto& g = f.grid();
  const int n = g.n();
  double acc = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Complex c = b < g.half() ? f.coeffs()(a, b) : std::conj(f.coeffs()((n - a) % n, n - b));
      const double k = g.k0() * std::hypot(double(g.mode(a)), double(g.mode(b)));
      if (k > 0.0) acc += std::pow(k, 2 * s) * std::norm(c);
    }
  return std::sqrt(acc * g.cell_area() / (double(n) * n));
}

VerifyLedger norms_suite(std::uint64_t seed) {
  VerifyLedger l{"norms", {}};
  const GridSpec2D g(64, 2.0 * kPi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  ComplexArray2 c = ComplexArray2::Zero(g.n(), g.half());
  for (int a = 0; a < g.n(); ++a) {
    if (std::abs(g.mode(a)) > 12) continue;
    for (int b = 0; b <= 12; ++b) c(a, b) = Complex(nd(rng), nd(rng));
  }
  c(0, 0) = 0.0;
  const auto f = SpectralField2D::from_coeffs(g, c);
  for (double s : {0.5, 1.0, 1.5}) {
    const double oracle = fourier_sum(f, s);
    check_le(l, "Hdot^" + format_number(s) + " vs Fourier sum (relative)", std::abs(sobolev_norm(f, s) - oracle) / oracle,
             1e-10);
  }
  // Indicator of m cells: ||1_E||_{L^{3,1}} = 3 m^{1/3}.
  std::vector<double> v(1000, 0.0);
  std::fill(v.begin(), v.begin() + 137, 1.0);
  const double m = 137 * 1e-3;
  check_le(l, "L^{3,1} of an indicator vs 3 m^(1/3)",
           std::abs(lorentz_norm(std::span<const double>(v), 1e-3, 3.0, 1.0) - 3.0 * std::cbrt(m)) / (3.0 * std::cbrt(m)),
           1e-3);
  return l;
}

VerifyLedger snapshot_suite(std::uint64_t) {
  VerifyLedger l{"snapshot", {}};
  const GridSpec2D g(64, 6.0);
  const auto w = make_eta0(g, 0.75);
  const std::string a = encode_snapshot(snapshot_2d(w, 0.25, {{"suite", "snapshot"}}));
  const std::string b = encode_snapshot(decode_snapshot(a));
  l.checks.push_back({"2D write-read-write byte identical", a == b ? 0.0 : 1.0, 0.0, a == b});
  const AxiGrid ag(32, 64, 2.0, 4.0);
  const auto s = axi_state_from_omega(ag, sample_axi(ag, [](double r, double z) { return ring_pair(r, z, 1.0); }));
  const std::string c = encode_snapshot(snapshot_axi(s));
  const std::string d = encode_snapshot(decode_snapshot(c));
  l.checks.push_back({"axi write-read-write byte identical", c == d ? 0.0 : 1.0, 0.0, c == d});
  const auto back = field_from_snapshot(decode_snapshot(a));
  check_le(l, "2D payload round trip", (back.values() - w.values()).abs().maxCoeff(), 0.0);
  return l;
}

VerifyLedger flowmap_suite(std::uint64_t) {
  VerifyLedger l{"flowmap", {}};
  const double a = 0.7, t = 1.0;
  const auto seeds = make_seed_layout(1.0, 4, 1);
  const auto strain = advect_analytic(linear_strain(a), seeds, t, 0.01);
  double err = 0.0;
  for (const auto& J : strain.final_jacobians())
    err = std::max(err, max_abs_entry(J - Mat2(Eigen::Vector2d(std::exp(-a * t), std::exp(a * t)).asDiagonal())));
  check_le(l, "linear strain D phi vs diag(e^-at, e^at)", err, 1e-8);
  const auto rot = advect_analytic(solid_rotation(1.0), seeds, t, 0.01);
  double rerr = 0.0;
  for (std::size_t i = 0; i < seeds.points.size(); ++i)
    rerr = std::max(rerr, std::abs(rot.final_positions()[i].norm() - seeds.points[i].norm()));
  check_le(l, "solid rotation | |phi| - |x| |", rerr, 1e-10);
  check_le(l, "solid rotation det drift", rot.max_det_drift(), 1e-10);
  return l;
}

VerifyLedger axisymmetric_suite(std::uint64_t) {
  VerifyLedger l{"axisymmetric", {}};
  AxiRunConfig cfg;
  cfg.grid = AxiGrid(128, 256, 2.0, 4.0);
  cfg.dt = 5e-3;
  cfg.t_end = 0.1;
  cfg.diag_every = 1 << 30;
  const auto s0 = axi_state_from_omega(cfg.grid, sample_axi(cfg.grid, [](double r, double z) { return ring_pair(r, z, 5.0); }));
  const auto res = axi_run(cfg, s0);
  const auto& g = cfg.grid;
  const auto& st = res.final_state;
  const double l31 = axi_lorentz_norm(g, s0.q(), 3.0, 1.0);
  check_le(l, "drift L^{3,1}(q)", std::abs(axi_lorentz_norm(g, st.q(), 3.0, 1.0) - l31) / l31, 1e-3);
  const double l2 = axi_lp_norm(g, s0.q(), 2.0);
  check_le(l, "drift L2(q)", std::abs(axi_lp_norm(g, st.q(), 2.0) - l2) / l2, 1e-3);
  check_le(l, "odd in z (relative)", odd_z_residual(g, st.q()), 1e-10);
  const auto reg = axis_regularity(g, st.velocity());
  check_le(l, "axis: |u^r/r| first cell / third cell", reg.third > 0 ? reg.first / reg.third : 0.0, 2.0);
  check_le(l, "|u^r/r|_inf / |q|_{L^{3,1}}", ur_over_r_max(g, st.velocity()) / l31, 10.0);
  return l;
}

VerifyLedger certificate_suite(std::uint64_t) {
  VerifyLedger l{"certificate", {}};
  const GridSpec2D g(128, 16.0);
  const auto w = make_seed(g, gaussian(1.0, 1.0));
  const double B = b_functional(w);
  FlowMapOptions opt;
  opt.odd_data = true;
  const auto run = run_with_flowmap(config2d(g, 0.01, 0.5), w, grid_aligned_layout(g, 3.0, 2, 4), opt);
  const auto cert = check_deformation_growth(run.ensemble, B);
  double worst_int = 0.0, worst_growth = 0.0;
  for (std::size_t i = 1; i < cert.t.size(); ++i) {
    worst_int = std::max(worst_int, cert.lhs[i] / cert.rhs[i] - 1.0);
    worst_growth = std::max(worst_growth, 1.0 - cert.max_def[i] / cert.lower_bound[i]);
  }
  check_le(l, "integral bound excess (relative)", worst_int, cert.slack);
  check_le(l, "growth bound shortfall (relative)", worst_growth, cert.slack);
  const auto hyp = hyperbolicity_at_origin(run.origin, run.ensemble, B);
  check_le(l, "1 - min(-pi lambda sup^4 / B)", 1.0 - hyp.min_bound_ratio, 0.05);
  check_le(l, "det D phi drift", run.ensemble.max_det_drift(), 1e-4);
  return l;
}

const std::map<std::string, std::function<VerifyLedger(std::uint64_t)>>& registry() {
  static const std::map<std::string, std::function<VerifyLedger(std::uint64_t)>> r{
      {"axisymmetric", axisymmetric_suite}, {"certificate", certificate_suite}, {"conservation", conservation_suite},
      {"flowmap", flowmap_suite},           {"norms", norms_suite},             {"snapshot", snapshot_suite},
      {"symmetry", symmetry_suite}};
  return r;
}

}  // namespace

bool VerifyLedger::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

json VerifyLedger::to_json() const {
  json j{{"format_version", 1}, {"suite", suite}, {"pass", pass()}, {"checks", json::array()}};
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  return j;
}

std::vector<std::string> verify_suites() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

VerifyLedger run_verify(const std::string& suite, std::uint64_t seed) {
  const auto& r = registry();
  const auto it = r.find(suite);
  if (it == r.end()) throw ValidationError("verify: unknown suite '" + suite + "'");
  return it->second(seed);
}

}  // namespace eulab
