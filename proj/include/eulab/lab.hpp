#pragma once

// Orchestration behind the eulab command line: strict JSON configs, output
// directories keyed by the config hash, run manifests, SVG plots and the
// verification suites.

#include "eulab/axisym3d.hpp"
#include "eulab/constructions.hpp"
#include "eulab/euler2d.hpp"
#include "eulab/flowmap.hpp"
#include "eulab/norms.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace eulab {

namespace fs = std::filesystem;
using nlohmann::json;

/// Certificate or verification failure (CLI exit code 4).
class CertificateFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitFail = 4 };

// ---- configuration ----------------------------------------------------------

/// The shipped schema (schema/config.schema.json), embedded at build time.
const json& config_schema();

/// Checks `doc` against a draft-07 schema subset (type, enum, required,
/// properties, additionalProperties, minimum/maximum, exclusive bounds, items,
/// minItems/maxItems, local $ref). Returns "path: message" strings.
std::vector<std::string> schema_errors(const json& doc, const json& schema);

/// Schema check plus the cross-field rules the schema cannot express. Throws
/// ValidationError listing every problem.
void validate_config(const json& cfg);

/// `a.b.c=value`; value parsed as JSON, falling back to a plain string.
void apply_override(json& cfg, const std::string& assignment);
json load_config(const fs::path& path, const std::vector<std::string>& overrides = {});

/// FNV-1a 64 over the canonical dump of the config and the seed, as 16 hex digits.
std::string config_hash(const json& cfg, std::uint64_t seed);

SeedSpec seed_from_json(const json& j);
json seed_to_json(const SeedSpec& s);
PatchLayout layout_from_json(const json& j);
json layout_to_json(const PatchLayout& l);

RunConfig2D run_config_2d(const json& cfg);
AxiRunConfig run_config_axi(const json& cfg);
FlowMapOptions flowmap_options(const json& cfg);
SeedLayout seed_layout_2d(const json& cfg, const GridSpec2D& g);
std::vector<Vec2> seed_layout_axi(const json& cfg);
std::vector<NormDescriptor> norm_list(const json& cfg);

/// True when the config describes axisymmetric data.
bool is_axi_config(const json& cfg);
/// Initial vorticity for 2D configs (seed or layout); ValidationError with the
/// minimal feasible n when unresolved.
SpectralField2D initial_field_2d(const json& cfg);
AxiState initial_state_axi(const json& cfg);

// ---- run directories and manifests ------------------------------------------

struct LabContext {
  json config;
  std::uint64_t seed = 0;
  fs::path out_root;
  int threads = 0;  // 0: library default
  std::string hash;
  fs::path dir;     // out_root / hash

  /// Validates the config and derives hash and dir (created on demand).
  static LabContext make(json config, std::uint64_t seed, const fs::path& out_root, int threads = 0);
};

/// `--out` if given, else $EULAB_OUT, else ./eulab_out.
fs::path default_out_root(const std::string& flag);

/// Reads <dir>/manifest.json or starts a fresh one.
json load_manifest(const LabContext& ctx);
/// Records `file` under key and merges `ledger` entries; writes manifest.json.
void update_manifest(const LabContext& ctx, const std::string& key, const std::string& file,
                     const json& ledger = json::object());

/// Recovers the context of an existing run directory from its manifest.
LabContext context_from_run(const fs::path& run_dir);

// ---- commands (each returns an exit code; exceptions map to codes in main) ----

int cmd_gen(const LabContext& ctx, std::ostream& log);
int cmd_run2d(const LabContext& ctx, std::ostream& log);
int cmd_run_axi(const LabContext& ctx, std::ostream& log);
int cmd_flowmap(const LabContext& ctx, std::ostream& log);
/// Norms of `input` (a snapshot) or of the run's latest snapshot.
int cmd_analyze(const LabContext& ctx, const fs::path& input, std::ostream& log);
int cmd_certify(const LabContext& ctx, std::ostream& log);
int cmd_report(const LabContext& ctx, std::ostream& log);
/// Plots from a diagnostics CSV, a deformation CSV and a norms JSON (any subset).
int cmd_plot(const fs::path& out_dir, const fs::path& diagnostics_csv, const fs::path& deformation_csv,
             const fs::path& norms_json, std::ostream& log);

// ---- plots -------------------------------------------------------------------

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string title, x_label, y_label;
  bool log_x = false;
  bool log_y = false;
};

std::string svg_line_chart(const ChartSpec& spec, const std::vector<Series>& series);

/// Columns of a numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
  const std::vector<double>& column(const std::string& name) const;
};
CsvTable read_csv(const fs::path& path);

// ---- verification suites -----------------------------------------------------

struct VerifyCheck {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyLedger {
  std::string suite;
  std::vector<VerifyCheck> checks;
  bool pass() const;
  json to_json() const;
};

std::vector<std::string> verify_suites();
/// ValidationError for unknown names.
VerifyLedger run_verify(const std::string& suite, std::uint64_t seed = 1);

}  // namespace eulab
