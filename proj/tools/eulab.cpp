// eulab: command-line front end for the Euler lab.

#include "eulab/lab.hpp"

#include "eulab/fft.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <fstream>
#include <iostream>

using namespace eulab;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  int threads = 0;
  std::uint64_t seed = 0;
  std::string run;
  std::string input;
  std::string csv, deformation, norms;
  std::string suite;
};

LabContext context(const Options& o, bool allow_run) {
  if (allow_run && !o.run.empty()) {
    if (!o.config.empty()) throw ValidationError("give either --run or --config, not both");
    return context_from_run(o.run);
  }
  if (o.config.empty()) throw ValidationError(allow_run ? "--config or --run is required" : "--config is required");
  return LabContext::make(load_config(o.config, o.sets), o.seed, default_out_root(o.out), o.threads);
}

int dispatch(const std::string& cmd, const Options& o) {
  if (o.threads > 0) {
    omp_set_num_threads(o.threads);
    set_fft_threads(o.threads);
  }
  if (cmd == "verify") {
    if (o.suite.empty()) {
      for (const auto& s : verify_suites()) std::cout << s << "\n";
      return kExitOk;
    }
    const VerifyLedger l = run_verify(o.suite, o.seed);
    const json j = l.to_json();
    std::cout << j.dump(2) << "\n";
    if (!o.out.empty()) {
      fs::create_directories(o.out);
      std::ofstream(fs::path(o.out) / ("verify_" + o.suite + ".json")) << j.dump(2) << "\n";
    }
    return l.pass() ? kExitOk : kExitFail;
  }
  if (cmd == "plot") {
    fs::path csv = o.csv, def = o.deformation, norms = o.norms, dir = o.out;
    if (!o.run.empty()) {
      const fs::path r = o.run;
      if (csv.empty() && fs::exists(r / "diagnostics.csv")) csv = r / "diagnostics.csv";
      if (def.empty() && fs::exists(r / "deformation.csv")) def = r / "deformation.csv";
      if (norms.empty() && fs::exists(r / "norms.json")) norms = r / "norms.json";
      if (dir.empty()) dir = r;
    }
    if (dir.empty()) dir = ".";
    return cmd_plot(dir, csv, def, norms, std::cerr);
  }
  const bool run_ok = cmd == "analyze" || cmd == "certify" || cmd == "report";
  const LabContext ctx = context(o, run_ok);
  if (cmd == "gen") return cmd_gen(ctx, std::cerr);
  if (cmd == "run2d") return cmd_run2d(ctx, std::cerr);
  if (cmd == "run-axi") return cmd_run_axi(ctx, std::cerr);
  if (cmd == "flowmap") return cmd_flowmap(ctx, std::cerr);
  if (cmd == "analyze") return cmd_analyze(ctx, o.input, std::cerr);
  if (cmd == "certify") return cmd_certify(ctx, std::cerr);
  if (cmd == "report") return cmd_report(ctx, std::cerr);
  throw ValidationError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eulab: critical-norm experiments for incompressible Euler"};
  app.require_subcommand(1, 1);
  Options o;
  app.add_option("--config", o.config, "run configuration (JSON)");
  app.add_option("--set", o.sets, "dot-path override key=value (repeatable)")->take_all();
  app.add_option("--out", o.out, "output root (default $EULAB_OUT or ./eulab_out)");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", o.seed, "random seed");

  struct Cmd {
    const char* name;
    const char* help;
  };
  const Cmd cmds[] = {{"gen", "sample initial data: snapshot + norm report"},
                      {"run2d", "2D Euler run: diagnostics CSV and snapshots"},
                      {"run-axi", "axisymmetric run: diagnostics CSV and snapshots"},
                      {"flowmap", "run with tracers: deformation CSV and ensemble"},
                      {"analyze", "norm report of a snapshot"},
                      {"certify", "deformation-growth certificate (exit 4 on FAIL)"},
                      {"report", "markdown summary of a run directory"},
                      {"plot", "SVG charts from diagnostics, deformation and norm files"},
                      {"verify", "run a verification suite (no name: list suites)"}};
  for (const auto& c : cmds) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->fallthrough();
    const std::string n = c.name;
    if (n == "analyze" || n == "certify" || n == "report" || n == "plot")
      sub->add_option("--run", o.run, "existing run directory");
    if (n == "analyze") sub->add_option("--input", o.input, "snapshot to analyze");
    if (n == "plot") {
      sub->add_option("--csv", o.csv, "diagnostics CSV");
      sub->add_option("--deformation", o.deformation, "deformation CSV");
      sub->add_option("--norms", o.norms, "norm report JSON");
    }
    if (n == "verify") sub->add_option("suite", o.suite, "suite name");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    return dispatch(cmd, o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalFault& e) {
    std::cerr << "numerical fault: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const CertificateFailure& e) {
    std::cerr << "FAIL: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
