#include "eulab/lab.hpp"

#include "eulab/snapshot.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace eulab {

namespace {

constexpr const char* kGenerator = "eulab 1.0";

json scheme_versions() {
  return {{"euler2d", "rk4/dealias-2/3/v1"},
          {"axisym3d", "rk4/upwind5-r/spectral-z/v1"},
          {"flowmap", "rk4-coupled/v1"},
          {"snapshot", kSnapshotVersion}};
}

json generator_modes(const json& cfg) {
  auto one = [](const json& s) {
    json g{{"family", s["family"]}};
    if (s.contains("mode")) g["mode"] = s["mode"];
    if (s.contains("lab_constant")) g["lab_constant"] = s["lab_constant"];
    return g;
  };
  if (cfg.contains("seed")) return one(cfg["seed"]);
  json arr = json::array();
  for (const auto& p : cfg["layout"]["patches"]) arr.push_back(one(p["seed"]));
  return arr;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + p.string());
  os << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  std::ifstream is(p);
  if (!is) throw ValidationError("cannot read " + p.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

json provenance(const LabContext& ctx, const std::string& command) {
  return {{"generator", kGenerator}, {"command", command}, {"config_hash", ctx.hash}};
}

NormReport analyze_axi(const AxiState& s, const std::vector<NormDescriptor>& which) {
  const auto& g = s.grid();
  const AxiField w = s.omega();
  NormReport r;
  r.time = s.t();
  for (const auto& d : which) {
    switch (d.kind) {
      case NormDescriptor::Kind::Lebesgue: r.add(d, axi_lp_norm(g, w, d.p)); break;
      case NormDescriptor::Kind::Lorentz: r.add(d, axi_lorentz_norm(g, w, d.p, d.q)); break;
      case NormDescriptor::Kind::Sobolev: {
        if (!d.homogeneous) throw ValidationError("analyze: axisymmetric data supports homogeneous Sobolev norms only");
        const double box = std::min(g.l_z(), 2.0 * g.r_max());
        r.add(d, raster_sobolev_norm(raster_to_3d(s, 64, box), d.s));
        break;
      }
      case NormDescriptor::Kind::Besov:
        throw ValidationError("analyze: Besov norms of axisymmetric data are not supported (" + d.key() + ")");
    }
  }
  r.entries["q:L:p=2"] = axi_lp_norm(g, s.q(), 2.0);
  r.entries["q:Lorentz:p=3:q=1"] = axi_lorentz_norm(g, s.q(), 3.0, 1.0);
  r.entries["q:L:p=inf"] = axi_lp_norm(g, s.q(), kInf);
  return r;
}

std::vector<NormDescriptor> axi_default_norms(const json& cfg) {
  if (cfg.contains("analyze") && cfg["analyze"].contains("norms")) return norm_list(cfg);
  std::vector<NormDescriptor> out;
  for (const char* k : {"L:p=1", "L:p=2", "L:p=inf", "Lorentz:p=3:q=1"}) out.push_back(NormDescriptor::parse(k));
  return out;
}

int snapshot_every(const json& cfg) {
  return cfg.contains("output") ? cfg["output"].value("snapshot_every", 0) : 0;
}

std::string step_name(long step) {
  std::ostringstream os;
  os << "snap_" << std::setw(6) << std::setfill('0') << step << ".eulb";
  return os.str();
}

json drift_ledger(const ConservationReport& c) {
  return {{"drift_l1", c.l1}, {"drift_l2", c.l2}, {"drift_linf", c.linf}, {"drift_u_l2", c.u_l2}};
}

// Latest snapshot written by a command, newest first.
fs::path latest_snapshot(const LabContext& ctx) {
  for (const char* f : {"final.eulb", "initial.eulb"})
    if (fs::exists(ctx.dir / f)) return ctx.dir / f;
  throw ValidationError("analyze: no snapshot in " + ctx.dir.string() + " (run gen or a simulation first)");
}

}  // namespace

LabContext LabContext::make(json config, std::uint64_t seed, const fs::path& out_root, int threads) {
  validate_config(config);
  LabContext c;
  c.config = std::move(config);
  c.seed = seed;
  c.out_root = out_root;
  c.threads = threads;
  c.hash = config_hash(c.config, seed);
  c.dir = out_root / c.hash;
  return c;
}

fs::path default_out_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("EULAB_OUT"); env && *env) return env;
  return "eulab_out";
}

json load_manifest(const LabContext& ctx) {
  const fs::path p = ctx.dir / "manifest.json";
  if (fs::exists(p)) return read_json(p);
  json m;
  m["format_version"] = 1;
  m["config_hash"] = ctx.hash;
  m["seed"] = ctx.seed;
  m["config"] = ctx.config;
  m["generator"] = {{"program", kGenerator}, {"modes", generator_modes(ctx.config)}};
  if (ctx.config.contains("grid")) m["grid"] = ctx.config["grid"];
  if (ctx.config.contains("axi_grid")) m["grid"] = ctx.config["axi_grid"];
  m["scheme_versions"] = scheme_versions();
  m["files"] = json::object();
  m["ledger"] = json::object();
  return m;
}

void update_manifest(const LabContext& ctx, const std::string& key, const std::string& file, const json& ledger) {
  fs::create_directories(ctx.dir);
  json m = load_manifest(ctx);
  if (!file.empty()) m["files"][key] = file;
  for (const auto& [k, v] : ledger.items()) m["ledger"][k] = v;
  write_json(ctx.dir / "manifest.json", m);
}

LabContext context_from_run(const fs::path& run_dir) {
  const json m = read_json(run_dir / "manifest.json");
  LabContext c = LabContext::make(m.at("config"), m.at("seed").get<std::uint64_t>(), run_dir.parent_path());
  if (c.hash != m.value("config_hash", "")) throw ValidationError("manifest: config hash does not match its config");
  c.dir = run_dir;
  return c;
}

int cmd_gen(const LabContext& ctx, std::ostream& log) {
  NormReport norms;
  json ledger;
  if (is_axi_config(ctx.config)) {
    const AxiState s = initial_state_axi(ctx.config);
    fs::create_directories(ctx.dir);
    write_snapshot(ctx.dir / "initial.eulb", snapshot_axi(s, provenance(ctx, "gen")));
    norms = analyze_axi(s, axi_default_norms(ctx.config));
    ledger = {{"initial_ur_over_r", ur_over_r_max(s.grid(), s.velocity())}};
  } else {
    const SpectralField2D w = initial_field_2d(ctx.config);
    fs::create_directories(ctx.dir);
    write_snapshot(ctx.dir / "initial.eulb", snapshot_2d(w, 0.0, provenance(ctx, "gen")));
    norms = analyze(w, norm_list(ctx.config));
    const auto sym = symmetry_report(SimState2D(w));
    ledger = {{"initial_odd_odd", sym.odd_odd}};
  }
  json nj = norms.to_json();
  write_json(ctx.dir / "norms_initial.json", nj);
  update_manifest(ctx, "initial_snapshot", "initial.eulb", ledger);
  update_manifest(ctx, "initial_norms", "norms_initial.json");
  log << "gen: wrote " << (ctx.dir / "initial.eulb").string() << "\n";
  return kExitOk;
}

int cmd_run2d(const LabContext& ctx, std::ostream& log) {
  const RunConfig2D cfg = run_config_2d(ctx.config);
  const SpectralField2D w0 = initial_field_2d(ctx.config);
  fs::create_directories(ctx.dir);
  const int every = snapshot_every(ctx.config);
  const json prov = provenance(ctx, "run2d");
  const RunResult res = run2d(cfg, w0, [&](const SimState2D& s) {
    if (every > 0 && s.step_count() % every == 0)
      write_snapshot(ctx.dir / step_name(s.step_count()), snapshot_2d(s.omega(), s.t(), prov));
  });
  std::ostringstream csv;
  write_csv_header(csv);
  for (const auto& r : res.diagnostics) write_csv_row(csv, r);
  write_text(ctx.dir / "diagnostics.csv", csv.str());
  write_snapshot(ctx.dir / "final.eulb", snapshot_2d(res.final_state.omega(), res.final_state.t(), prov));
  const SimState2D s0(prepare_initial(w0).first);
  json ledger = drift_ledger(conservation_report(s0, res.final_state));
  ledger["dealias_removed"] = res.dealias_removed;
  ledger["steps"] = res.final_state.step_count();
  update_manifest(ctx, "diagnostics", "diagnostics.csv", ledger);
  update_manifest(ctx, "final_snapshot", "final.eulb");
  log << "run2d: t = " << res.final_state.t() << ", " << res.final_state.step_count() << " steps, L2 drift "
      << ledger["drift_l2"].get<double>() << "\n";
  return kExitOk;
}

int cmd_run_axi(const LabContext& ctx, std::ostream& log) {
  const AxiRunConfig cfg = run_config_axi(ctx.config);
  const AxiState s0 = initial_state_axi(ctx.config);
  fs::create_directories(ctx.dir);
  const int every = snapshot_every(ctx.config);
  const json prov = provenance(ctx, "run-axi");
  const AxiRunResult res = axi_run(cfg, s0, [&](const AxiState& s) {
    if (every > 0 && s.step_count() % every == 0) write_snapshot(ctx.dir / step_name(s.step_count()), snapshot_axi(s, prov));
  });
  std::ostringstream csv;
  write_axi_csv_header(csv);
  for (const auto& r : res.diagnostics) write_axi_csv_row(csv, r);
  write_text(ctx.dir / "diagnostics.csv", csv.str());
  write_snapshot(ctx.dir / "final.eulb", snapshot_axi(res.final_state, prov));
  const auto& d0 = res.diagnostics.front();
  const auto& d1 = res.diagnostics.back();
  const auto reg = axis_regularity(cfg.grid, res.final_state.velocity());
  json ledger{{"drift_q_l2", std::abs(d1.q_l2 - d0.q_l2) / d0.q_l2},
              {"drift_q_l31", std::abs(d1.q_l31 - d0.q_l31) / d0.q_l31},
              {"axis_regular", reg.ok},
              {"odd_z", d1.odd_z},
              {"steps", res.final_state.step_count()}};
  update_manifest(ctx, "diagnostics", "diagnostics.csv", ledger);
  update_manifest(ctx, "final_snapshot", "final.eulb");
  log << "run-axi: t = " << res.final_state.t() << ", L^{3,1} drift " << ledger["drift_q_l31"].get<double>() << "\n";
  return kExitOk;
}

int cmd_flowmap(const LabContext& ctx, std::ostream& log) {
  const json prov = provenance(ctx, "flowmap");
  std::ostringstream def;
  json ledger;
  if (is_axi_config(ctx.config)) {
    const AxiRunConfig cfg = run_config_axi(ctx.config);
    const AxiState s0 = initial_state_axi(ctx.config);
    const auto seeds = seed_layout_axi(ctx.config);
    fs::create_directories(ctx.dir);
    const int rec = ctx.config.contains("output") ? ctx.config["output"].value("record_every", 1) : 1;
    const AxiCoupledRun cr = axi_run_with_flowmap(cfg, s0, seeds, rec);
    const auto& e = cr.ensemble;
    def << "t,sup_def,det_identity\n";
    for (std::size_t i = 0; i < e.sup_series.size(); ++i)
      def << format_number(e.sup_times[i]) << ',' << format_number(e.sup_series[i]) << ','
          << format_number(e.det_identity[i]) << '\n';
    const auto mf = metric_factor_check(s0, e, cr.run.final_state);
    ledger = {{"max_det_identity", e.max_det_identity()},
              {"max_deformation", e.max_deformation()},
              {"metric_factor_residual", mf.residual}};
    std::ostringstream csv;
    write_axi_csv_header(csv);
    for (const auto& r : cr.run.diagnostics) write_axi_csv_row(csv, r);
    write_text(ctx.dir / "diagnostics.csv", csv.str());
    write_snapshot(ctx.dir / "final.eulb", snapshot_axi(cr.run.final_state, prov));
    Snapshot es;
    es.metadata = {{"geometry", {{"type", "axi-tracers"}}}, {"time", cr.run.final_state.t()}, {"provenance", prov}};
    const std::int64_t n = static_cast<std::int64_t>(seeds.size());
    SnapshotField sf{"seeds", {n, 2}, {}}, pf{"positions", {n, 2}, {}}, jf{"jacobians", {n, 4}, {}};
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto& x = e.positions.back()[i];
      const auto& J = e.jacobians.back()[i];
      sf.data.insert(sf.data.end(), {seeds[i](0), seeds[i](1)});
      pf.data.insert(pf.data.end(), {x(0), x(1)});
      jf.data.insert(jf.data.end(), {J(0, 0), J(0, 1), J(1, 0), J(1, 1)});
    }
    es.fields = {sf, pf, jf};
    write_snapshot(ctx.dir / "ensemble.eulb", es);
  } else {
    const RunConfig2D cfg = run_config_2d(ctx.config);
    const SpectralField2D w0 = initial_field_2d(ctx.config);
    const SeedLayout layout = seed_layout_2d(ctx.config, cfg.grid);
    const FlowMapOptions opt = flowmap_options(ctx.config);
    fs::create_directories(ctx.dir);
    const CoupledRun cr = run_with_flowmap(cfg, w0, layout, opt);
    const auto& e = cr.ensemble;
    const bool with_origin = cr.origin.size() == e.sup_series.size();
    def << "t,sup_def,det_drift" << (with_origin ? ",lambda0,offdiag0" : "") << '\n';
    for (std::size_t i = 0; i < e.sup_series.size(); ++i) {
      def << format_number(e.sup_times[i]) << ',' << format_number(e.sup_series[i]) << ','
          << format_number(e.det_drift[i]);
      if (with_origin) def << ',' << format_number(cr.origin[i].lambda) << ',' << format_number(cr.origin[i].offdiag);
      def << '\n';
    }
    ledger = {{"max_det_drift", e.max_det_drift()},
              {"max_deformation", e.max_deformation()},
              {"left_central_box", e.left_central_box},
              {"seed_count", e.seeds.size()}};
    const auto sym = symmetry_report(SimState2D(prepare_initial(w0).first), true);
    if (sym.odd_odd && sym.sign_preserved) ledger["B"] = b_functional(w0);
    std::ostringstream csv;
    write_csv_header(csv);
    for (const auto& r : cr.run.diagnostics) write_csv_row(csv, r);
    write_text(ctx.dir / "diagnostics.csv", csv.str());
    write_snapshot(ctx.dir / "final.eulb", snapshot_2d(cr.run.final_state.omega(), cr.run.final_state.t(), prov));
    Snapshot es;
    es.metadata = {{"geometry", {{"type", "tracers2d"}}}, {"time", cr.run.final_state.t()}, {"provenance", prov}};
    const std::int64_t n = static_cast<std::int64_t>(e.seeds.size());
    SnapshotField sf{"seeds", {n, 2}, {}}, pf{"positions", {n, 2}, {}}, jf{"jacobians", {n, 4}, {}};
    for (std::size_t i = 0; i < e.seeds.size(); ++i) {
      const auto& x = e.final_positions()[i];
      const auto& J = e.final_jacobians()[i];
      sf.data.insert(sf.data.end(), {e.seeds[i](0), e.seeds[i](1)});
      pf.data.insert(pf.data.end(), {x(0), x(1)});
      jf.data.insert(jf.data.end(), {J(0, 0), J(0, 1), J(1, 0), J(1, 1)});
    }
    es.fields = {sf, pf, jf};
    write_snapshot(ctx.dir / "ensemble.eulb", es);
  }
  write_text(ctx.dir / "deformation.csv", def.str());
  update_manifest(ctx, "deformation", "deformation.csv", ledger);
  update_manifest(ctx, "diagnostics", "diagnostics.csv");
  update_manifest(ctx, "final_snapshot", "final.eulb");
  update_manifest(ctx, "ensemble", "ensemble.eulb");
  log << "flowmap: max deformation " << ledger["max_deformation"].get<double>() << "\n";
  return kExitOk;
}

int cmd_analyze(const LabContext& ctx, const fs::path& input, std::ostream& log) {
  const fs::path in = input.empty() ? latest_snapshot(ctx) : input;
  const Snapshot snap = read_snapshot(in);
  const std::string type = snap.metadata.at("geometry").value("type", "");
  NormReport r;
  if (type == "axi") {
    r = analyze_axi(axi_state_from_snapshot(snap), axi_default_norms(ctx.config));
  } else if (type == "periodic2d") {
    double t = 0.0;
    const SpectralField2D w = field_from_snapshot(snap, &t);
    r = analyze(w, norm_list(ctx.config), t);
  } else {
    throw ValidationError("analyze: snapshot geometry '" + type + "' carries no vorticity");
  }
  json j = r.to_json();
  j["source"] = fs::relative(in, ctx.dir).generic_string();
  fs::create_directories(ctx.dir);
  write_json(ctx.dir / "norms.json", j);
  update_manifest(ctx, "norms", "norms.json");
  for (const auto& [k, v] : r.entries) log << k << " = " << format_number(v) << "\n";
  return kExitOk;
}

int cmd_certify(const LabContext& ctx, std::ostream& log) {
  if (is_axi_config(ctx.config))
    throw ValidationError("certify: the deformation certificate applies to 2D odd-odd data");
  if (!fs::exists(ctx.dir / "deformation.csv")) cmd_flowmap(ctx, log);
  const json m = load_manifest(ctx);
  if (!m["ledger"].contains("B"))
    throw ValidationError("certify: initial data is not odd in both variables and nonnegative on the first quadrant");
  const double B = m["ledger"]["B"].get<double>();
  const double slack = ctx.config.contains("certify") ? ctx.config["certify"].value("slack", 0.05) : 0.05;
  const double frac =
      ctx.config.contains("certify") ? ctx.config["certify"].value("hyperbolicity_fraction", 0.95) : 0.95;
  const CsvTable def = read_csv(ctx.dir / "deformation.csv");
  const auto& t = def.column("t");
  const auto& sup = def.column("sup_def");
  double drift = 0.0;
  for (double d : def.column("det_drift")) drift = std::max(drift, d);
  const DeformationCertificate c = check_deformation_growth(t, sup, drift, B, slack);

  double min_int = 1e300, min_growth = 1e300;
  bool int_ok = true, growth_ok = true;
  for (std::size_t i = 0; i < c.t.size(); ++i) {
    if (c.t[i] <= 0.0) continue;
    min_int = std::min(min_int, c.integral_margin[i]);
    min_growth = std::min(min_growth, c.growth_margin[i]);
    int_ok = int_ok && c.lhs[i] <= (1.0 + slack) * c.rhs[i];
    growth_ok = growth_ok && c.max_def[i] >= (1.0 - slack) * c.lower_bound[i];
  }
  json hyp = nullptr;
  bool hyp_ok = true;
  if (std::find(def.header.begin(), def.header.end(), "lambda0") != def.header.end()) {
    std::vector<OriginSample> origin;
    FlowMapEnsemble ens;
    for (std::size_t i = 0; i < t.size(); ++i) {
      origin.push_back({t[i], def.column("lambda0")[i], def.column("offdiag0")[i], 0.0});
      ens.sup_series.push_back(sup[i]);
      ens.sup_times.push_back(t[i]);
    }
    const HyperbolicityReport h = hyperbolicity_at_origin(origin, ens, B);
    hyp_ok = h.min_bound_ratio >= frac;
    hyp = {{"pass", hyp_ok}, {"min_bound_ratio", h.min_bound_ratio}, {"threshold", frac},
           {"max_offdiag", h.max_offdiag}};
  }
  const bool pass = c.pass && hyp_ok;
  json j{{"format_version", 1},
         {"B", B},
         {"slack", slack},
         {"det_drift", drift},
         {"pass", pass},
         {"integral", {{"pass", int_ok}, {"min_margin", min_int}}},
         {"growth", {{"pass", growth_ok}, {"min_margin", min_growth}}},
         {"hyperbolicity", hyp},
         {"series",
          {{"t", c.t}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"max_def", c.max_def}, {"lower_bound", c.lower_bound},
           {"integral_margin", c.integral_margin}, {"growth_margin", c.growth_margin}}}};
  write_json(ctx.dir / "certificate.json", j);
  update_manifest(ctx, "certificate", "certificate.json", {{"certificate", pass ? "PASS" : "FAIL"}});
  log << "certify: " << (pass ? "PASS" : "FAIL") << " (integral margin " << min_int << ", growth margin "
      << min_growth << ")\n";
  return pass ? kExitOk : kExitFail;
}

int cmd_report(const LabContext& ctx, std::ostream& log) {
  const json m = load_manifest(ctx);
  std::ostringstream md;
  md << "# Run " << ctx.hash << "\n\n";
  md << "Generator: " << m["generator"].dump() << "\n\n";
  md << "Grid: " << m.value("grid", json()).dump() << "\n\n";
  md << "| ledger entry | value |\n|---|---|\n";
  for (const auto& [k, v] : m["ledger"].items()) md << "| " << k << " | " << v.dump() << " |\n";
  md << "\n| artifact | file |\n|---|---|\n";
  for (const auto& [k, v] : m["files"].items()) md << "| " << k << " | " << v.get<std::string>() << " |\n";
  if (fs::exists(ctx.dir / "norms.json")) {
    const json n = read_json(ctx.dir / "norms.json");
    md << "\n| norm (t = " << n["time"].dump() << ") | value |\n|---|---|\n";
    for (const auto& [k, v] : n["entries"].items()) md << "| " << k << " | " << v.dump() << " |\n";
  }
  if (fs::exists(ctx.dir / "certificate.json")) {
    const json c = read_json(ctx.dir / "certificate.json");
    md << "\nCertificate: " << (c["pass"].get<bool>() ? "PASS" : "FAIL") << ", B = " << c["B"].dump()
       << ", integral margin " << c["integral"]["min_margin"].dump() << ", growth margin "
       << c["growth"]["min_margin"].dump() << "\n";
  }
  fs::create_directories(ctx.dir);
  write_text(ctx.dir / "report.md", md.str());
  update_manifest(ctx, "report", "report.md");
  log << md.str();
  return kExitOk;
}

int cmd_plot(const fs::path& out_dir, const fs::path& diagnostics_csv, const fs::path& deformation_csv,
             const fs::path& norms_json, std::ostream& log) {
  if (diagnostics_csv.empty() && deformation_csv.empty() && norms_json.empty())
    throw ValidationError("plot: nothing to plot (give a diagnostics CSV, a deformation CSV or a norms JSON)");
  fs::create_directories(out_dir);
  if (!deformation_csv.empty()) {
    const CsvTable t = read_csv(deformation_csv);
    write_text(out_dir / "sup_deformation.svg",
               svg_line_chart({"sup |D phi|_inf", "t", "sup |D phi|"}, {{"sup_def", t.column("t"), t.column("sup_def")}}));
    log << "plot: " << (out_dir / "sup_deformation.svg").string() << "\n";
  }
  if (!diagnostics_csv.empty()) {
    const CsvTable t = read_csv(diagnostics_csv);
    if (std::find(t.header.begin(), t.header.end(), "Hdot1") == t.header.end())
      throw ValidationError("plot: " + diagnostics_csv.string() + " has no Hdot1 column");
    write_text(out_dir / "hdot1.svg",
               svg_line_chart({"Hdot^1 norm of the vorticity", "t", "Hdot^1"}, {{"Hdot1", t.column("t"), t.column("Hdot1")}}));
    log << "plot: " << (out_dir / "hdot1.svg").string() << "\n";
  }
  if (!norms_json.empty()) {
    const NormReport r = NormReport::from_json(read_json(norms_json));
    if (r.band_profiles.empty()) throw ValidationError("plot: " + norms_json.string() + " has no band profile");
    std::vector<Series> s;
    for (const auto& [k, bands] : r.band_profiles) {
      Series one{k, {}, {}};
      for (const auto& b : bands)
        if (b.value > 0.0) {
          one.x.push_back(b.N);
          one.y.push_back(b.value);
        }
      s.push_back(std::move(one));
    }
    std::ostringstream title;
    title << "band profile at t = " << format_number(r.time);
    write_text(out_dir / "band_profile.svg", svg_line_chart({title.str(), "N", "N^s |P_N f|_p", true, true}, s));
    log << "plot: " << (out_dir / "band_profile.svg").string() << "\n";
  }
  return kExitOk;
}

}  // namespace eulab
