#include "eulab/lab.hpp"

#include "config_schema.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace eulab {

const json& config_schema() {
  static const json schema = json::parse(kConfigSchemaText);
  return schema;
}

namespace {

std::string type_name(const json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
  if (v.is_number()) return "number";
  return v.type_name();
}

bool has_type(const json& v, const std::string& t) {
  if (t == "integer") {
    if (v.is_number_integer() || v.is_number_unsigned()) return true;
    return v.is_number_float() && std::isfinite(v.get<double>()) && std::floor(v.get<double>()) == v.get<double>();
  }
  if (t == "number") return v.is_number();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "null") return v.is_null();
  return false;
}

void check_node(const json& v, const json& schema, const json& root, const std::string& path,
                std::vector<std::string>& errors) {
  const std::string where = path.empty() ? "(root)" : path;
  if (schema.contains("$ref")) {
    const std::string ref = schema["$ref"];
    if (ref.rfind("#", 0) != 0) {
      errors.push_back(where + ": unsupported $ref " + ref);
      return;
    }
    check_node(v, root.at(json::json_pointer(ref.substr(1))), root, path, errors);
    return;
  }
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_array()) {
      for (const auto& e : t) ok = ok || has_type(v, e.get<std::string>());
    } else {
      ok = has_type(v, t.get<std::string>());
    }
    if (!ok) {
      errors.push_back(where + ": expected " + t.dump() + ", got " + type_name(v));
      return;
    }
  }
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) errors.push_back(where + ": value " + v.dump() + " not in " + schema["enum"].dump());
  }
  if (v.is_number()) {
    const double x = v.get<double>();
    if (schema.contains("minimum") && x < schema["minimum"].get<double>())
      errors.push_back(where + ": " + v.dump() + " < minimum " + schema["minimum"].dump());
    if (schema.contains("maximum") && x > schema["maximum"].get<double>())
      errors.push_back(where + ": " + v.dump() + " > maximum " + schema["maximum"].dump());
    if (schema.contains("exclusiveMinimum") && x <= schema["exclusiveMinimum"].get<double>())
      errors.push_back(where + ": " + v.dump() + " must be > " + schema["exclusiveMinimum"].dump());
    if (schema.contains("exclusiveMaximum") && x >= schema["exclusiveMaximum"].get<double>())
      errors.push_back(where + ": " + v.dump() + " must be < " + schema["exclusiveMaximum"].dump());
  }
  if (v.is_object()) {
    if (schema.contains("required"))
      for (const auto& r : schema["required"])
        if (!v.contains(r.get<std::string>())) errors.push_back(where + ": missing required key '" + r.get<std::string>() + "'");
    const json props = schema.value("properties", json::object());
    for (const auto& [key, child] : v.items()) {
      const std::string sub = path.empty() ? key : path + "." + key;
      if (props.contains(key)) {
        check_node(child, props[key], root, sub, errors);
      } else if (schema.contains("additionalProperties")) {
        const auto& ap = schema["additionalProperties"];
        if (ap.is_boolean() && !ap.get<bool>())
          errors.push_back(sub + ": unknown key");
        else if (ap.is_object())
          check_node(child, ap, root, sub, errors);
      }
    }
  }
  if (v.is_array()) {
    if (schema.contains("minItems") && v.size() < schema["minItems"].get<std::size_t>())
      errors.push_back(where + ": needs at least " + schema["minItems"].dump() + " items");
    if (schema.contains("maxItems") && v.size() > schema["maxItems"].get<std::size_t>())
      errors.push_back(where + ": allows at most " + schema["maxItems"].dump() + " items");
    if (schema.contains("items"))
      for (std::size_t i = 0; i < v.size(); ++i)
        check_node(v[i], schema["items"], root, path + "[" + std::to_string(i) + "]", errors);
  }
}

// Keys each family reads; anything else in the seed object is rejected.
struct FamilyKeys {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

FamilyKeys family_keys(Family f) {
  switch (f) {
    case Family::Eta0: return {{"radius", "amplitude"}, {"center"}};
    case Family::EtaK: return {{"k", "radius", "amplitude"}, {"center"}};
    case Family::HA2D: return {{"A", "mode", "radius", "ha_norm"}, {"lab_constant", "zoom", "center"}};
    case Family::GA2DCompact: return {{"A", "mode", "radius"}, {"lab_constant", "zoom", "center"}};
    case Family::GA3D:
    case Family::TildeGA3D: return {{"A", "mode", "radius"}, {"lab_constant", "zoom"}};
    case Family::BesovSeed: return {{"A", "mode", "radius", "q"}, {"lab_constant", "zoom", "center"}};
    case Family::ReflectedGaussian: return {{"amplitude", "width"}, {"center"}};
  }
  return {};
}

void check_seed(const json& s, const std::string& path, std::vector<std::string>& errors) {
  const Family f = family_from_string(s.at("family").get<std::string>());
  const FamilyKeys keys = family_keys(f);
  std::set<std::string> allowed{"family"};
  for (const auto& k : keys.required) {
    allowed.insert(k);
    if (!s.contains(k)) errors.push_back(path + ": family " + to_string(f) + " requires '" + k + "'");
  }
  for (const auto& k : keys.optional) allowed.insert(k);
  if (s.value("mode", "") == "lab") {
    if (!s.contains("lab_constant")) errors.push_back(path + ": lab mode requires 'lab_constant'");
  } else if (s.contains("lab_constant")) {
    errors.push_back(path + ": 'lab_constant' only applies in lab mode");
  }
  for (const auto& [k, v] : s.items())
    if (!allowed.count(k)) errors.push_back(path + "." + k + ": not used by family " + to_string(f));
}

}  // namespace

std::vector<std::string> schema_errors(const json& doc, const json& schema) {
  std::vector<std::string> errors;
  check_node(doc, schema, schema, "", errors);
  return errors;
}

void validate_config(const json& cfg) {
  std::vector<std::string> errors = schema_errors(cfg, config_schema());
  if (errors.empty()) {
    const bool has_seed = cfg.contains("seed"), has_layout = cfg.contains("layout");
    if (has_seed == has_layout) errors.push_back("(root): exactly one of 'seed' and 'layout' is required");
    if (has_seed) check_seed(cfg["seed"], "seed", errors);
    bool axi = false;
    if (has_layout) {
      const auto& patches = cfg["layout"]["patches"];
      for (std::size_t i = 0; i < patches.size(); ++i) {
        const std::string p = "layout.patches[" + std::to_string(i) + "].seed";
        check_seed(patches[i]["seed"], p, errors);
        if (patches[i]["seed"].contains("center")) errors.push_back(p + ".center: use the patch center");
        if (is_axisymmetric(family_from_string(patches[i]["seed"]["family"])))
          errors.push_back(p + ": layouts take 2D families only");
      }
    } else if (has_seed) {
      axi = is_axisymmetric(family_from_string(cfg["seed"]["family"]));
    }
    if (axi) {
      if (!cfg.contains("axi_grid")) errors.push_back("(root): axisymmetric families require 'axi_grid'");
      if (cfg.contains("grid")) errors.push_back("grid: axisymmetric families use 'axi_grid'");
    } else {
      if (!cfg.contains("grid")) errors.push_back("(root): 2D families require 'grid'");
      if (cfg.contains("axi_grid")) errors.push_back("axi_grid: only for axisymmetric families");
    }
    if (cfg.contains("run")) {
      const auto& f = cfg["run"]["filter"];
      if (f["enabled"].get<bool>() && (!f.contains("order") || !f.contains("strength")))
        errors.push_back("run.filter: an enabled filter requires 'order' and 'strength'");
    }
    if (cfg.contains("analyze") && cfg["analyze"].contains("norms")) {
      for (const auto& k : cfg["analyze"]["norms"]) {
        try {
          NormDescriptor::parse(k.get<std::string>());
        } catch (const std::exception& e) {
          errors.push_back("analyze.norms: " + std::string(e.what()));
        }
      }
    }
    if (cfg.contains("flowmap") && cfg["flowmap"].contains("axi_seeds")) {
      const auto& a = cfg["flowmap"]["axi_seeds"];
      if (a["r_lo"].get<double>() > a["r_hi"].get<double>() || a["z_lo"].get<double>() > a["z_hi"].get<double>())
        errors.push_back("flowmap.axi_seeds: empty seed box");
    }
  }
  if (!errors.empty()) {
    std::ostringstream os;
    os << "config: " << errors.size() << " problem" << (errors.size() > 1 ? "s" : "");
    for (const auto& e : errors) os << "\n  " << e;
    throw ValidationError(os.str());
  }
}

void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &cfg;
  std::stringstream ks(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ks, part, '.')) {
    if (part.empty()) throw ValidationError("--set: empty path component in '" + key + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ValidationError("--set: '" + parts[i] + "' is not an object in '" + key + "'");
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ValidationError("--set: cannot assign into a non-object at '" + key + "'");
  (*node)[parts.back()] = value;
}

json load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream is(path);
  if (!is) throw ValidationError("config: cannot read " + path.string());
  json cfg;
  try {
    cfg = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  validate_config(cfg);
  return cfg;
}

std::string config_hash(const json& cfg, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  mix(cfg.dump());
  mix("#seed=" + std::to_string(seed));
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SeedSpec seed_from_json(const json& j) {
  SeedSpec s;
  s.family = family_from_string(j.at("family").get<std::string>());
  s.A = j.value("A", 0.0);
  s.k = j.value("k", 0);
  s.mode = j.value("mode", "lab") == "paper" ? PrefactorMode::Paper : PrefactorMode::Lab;
  s.lab_constant = j.value("lab_constant", 1.0);
  s.radius = j.value("radius", s.radius);
  s.amplitude = j.value("amplitude", 1.0);
  s.width = j.value("width", 1.0);
  s.q = j.value("q", 2.0);
  s.ha_norm = j.value("ha_norm", "sqrt_log") == "log" ? HANormalization::Log : HANormalization::SqrtLog;
  s.zoom = j.value("zoom", 1.0);
  return s;
}

json seed_to_json(const SeedSpec& s) {
  json j{{"family", to_string(s.family)}};
  const FamilyKeys keys = family_keys(s.family);
  auto used = [&](const std::string& k) {
    for (const auto& r : keys.required)
      if (r == k) return true;
    for (const auto& r : keys.optional)
      if (r == k) return true;
    return false;
  };
  if (used("A")) j["A"] = s.A;
  if (used("k")) j["k"] = s.k;
  if (used("mode")) j["mode"] = s.mode == PrefactorMode::Paper ? "paper" : "lab";
  if (used("lab_constant") && s.mode == PrefactorMode::Lab) j["lab_constant"] = s.lab_constant;
  if (used("radius")) j["radius"] = s.radius;
  if (used("amplitude")) j["amplitude"] = s.amplitude;
  if (used("width")) j["width"] = s.width;
  if (used("q")) j["q"] = s.q;
  if (used("ha_norm")) j["ha_norm"] = s.ha_norm == HANormalization::Log ? "log" : "sqrt_log";
  if (used("zoom") && s.zoom != 1.0) j["zoom"] = s.zoom;
  return j;
}

PatchLayout layout_from_json(const json& j) {
  PatchLayout l;
  l.min_distance = j.value("min_distance", 0.0);
  for (const auto& p : j.at("patches")) {
    const auto c = p.at("center").get<std::vector<double>>();
    l.patches.push_back({seed_from_json(p.at("seed")), Vec2(c[0], c[1]), p.value("amplitude", 1.0)});
  }
  return l;
}

json layout_to_json(const PatchLayout& l) {
  json j{{"min_distance", l.min_distance}, {"patches", json::array()}};
  for (const auto& p : l.patches)
    j["patches"].push_back(
        {{"seed", seed_to_json(p.seed)}, {"center", {p.center(0), p.center(1)}}, {"amplitude", p.amplitude}});
  return j;
}

namespace {

const json& require(const json& cfg, const std::string& key, const std::string& why) {
  if (!cfg.contains(key)) throw ValidationError("config: '" + key + "' is required for " + why);
  return cfg[key];
}

}  // namespace

RunConfig2D run_config_2d(const json& cfg) {
  const auto& g = require(cfg, "grid", "2D runs");
  const auto& r = require(cfg, "run", "2D runs");
  RunConfig2D c;
  c.grid = GridSpec2D(g["n"].get<int>(), g["L"].get<double>());
  c.dt = r["dt"].get<double>();
  c.t_end = r["t_end"].get<double>();
  c.max_cfl = r.value("max_cfl", 0.5);
  c.filter.enabled = r["filter"]["enabled"].get<bool>();
  if (c.filter.enabled) {
    c.filter.order = r["filter"]["order"].get<double>();
    c.filter.strength = r["filter"]["strength"].get<double>();
  }
  if (cfg.contains("output")) c.diag_every = cfg["output"].value("diag_every", c.diag_every);
  return c;
}

AxiRunConfig run_config_axi(const json& cfg) {
  const auto& g = require(cfg, "axi_grid", "axisymmetric runs");
  const auto& r = require(cfg, "run", "axisymmetric runs");
  if (r["filter"]["enabled"].get<bool>()) throw ValidationError("run.filter: the axisymmetric solver has no filter");
  AxiRunConfig c;
  c.grid = AxiGrid(g["n_r"].get<int>(), g["n_z"].get<int>(), g["r_max"].get<double>(), g["l_z"].get<double>());
  c.dt = r["dt"].get<double>();
  c.t_end = r["t_end"].get<double>();
  c.max_cfl = r.value("max_cfl", 0.5);
  if (cfg.contains("output")) c.diag_every = cfg["output"].value("diag_every", c.diag_every);
  return c;
}

FlowMapOptions flowmap_options(const json& cfg) {
  const auto& f = require(cfg, "flowmap", "flow-map runs");
  FlowMapOptions o;
  const std::string m = f["interp"];
  o.interp.method = m == "exact" ? InterpMethod::Exact : m == "lagrange" ? InterpMethod::Lagrange : InterpMethod::Auto;
  o.interp.upsample = f.value("upsample", o.interp.upsample);
  o.odd_data = f.value("odd_data", false);
  if (cfg.contains("output")) o.record_every = cfg["output"].value("record_every", o.record_every);
  return o;
}

SeedLayout seed_layout_2d(const json& cfg, const GridSpec2D& g) {
  const auto& f = require(cfg, "flowmap", "flow-map runs");
  return grid_aligned_layout(g, f.value("half_width", 0.5 * g.box_length()), f.value("stride", 1), f.value("levels", 4));
}

std::vector<Vec2> seed_layout_axi(const json& cfg) {
  const auto& f = require(cfg, "flowmap", "flow-map runs");
  if (!f.contains("axi_seeds")) throw ValidationError("config: flowmap.axi_seeds is required for axisymmetric tracers");
  const auto& a = f["axi_seeds"];
  return axi_seed_grid(a["r_lo"], a["r_hi"], a["z_lo"], a["z_hi"], a["n_r"], a["n_z"]);
}

std::vector<NormDescriptor> norm_list(const json& cfg) {
  std::vector<std::string> keys{"L:p=1", "L:p=2", "L:p=inf", "Hdot:s=1", "Lorentz:p=3:q=1", "Bdot:s=1:p=2:q=inf"};
  if (cfg.contains("analyze") && cfg["analyze"].contains("norms"))
    keys = cfg["analyze"]["norms"].get<std::vector<std::string>>();
  std::vector<NormDescriptor> out;
  for (const auto& k : keys) out.push_back(NormDescriptor::parse(k));
  return out;
}

bool is_axi_config(const json& cfg) {
  return cfg.contains("seed") && is_axisymmetric(family_from_string(cfg["seed"]["family"]));
}

SpectralField2D initial_field_2d(const json& cfg) {
  if (is_axi_config(cfg)) throw ValidationError("config: axisymmetric family in a 2D command");
  const auto& g = require(cfg, "grid", "2D data");
  const GridSpec2D grid(g["n"].get<int>(), g["L"].get<double>());
  if (cfg.contains("layout")) return make_layout(grid, layout_from_json(cfg["layout"]));
  Vec2 c = Vec2::Zero();
  if (cfg["seed"].contains("center")) {
    const auto v = cfg["seed"]["center"].get<std::vector<double>>();
    c = Vec2(v[0], v[1]);
  }
  return make_seed(grid, seed_from_json(cfg["seed"]), c);
}

AxiState initial_state_axi(const json& cfg) {
  if (!is_axi_config(cfg)) throw ValidationError("config: 2D family in an axisymmetric command");
  const auto& g = require(cfg, "axi_grid", "axisymmetric data");
  const AxiGrid grid(g["n_r"].get<int>(), g["n_z"].get<int>(), g["r_max"].get<double>(), g["l_z"].get<double>());
  return axi_state_from_omega(grid, make_axi_seed(grid, seed_from_json(cfg["seed"])));
}

}  // namespace eulab
