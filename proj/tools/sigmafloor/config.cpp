#include "config.hpp"

#include <array>
#include <fstream>
#include <set>

namespace sigmafloor::cli {

namespace {

using nlohmann::json;

constexpr std::array kOperationNames{
    std::pair{Operation::sigma_tail_curve, "sigma_tail_curve"},
    std::pair{Operation::bkappa_deviation_curve, "bkappa_deviation_curve"},
    std::pair{Operation::projection_moment_ratio, "projection_moment_ratio"},
    std::pair{Operation::distance_smallball_curve, "distance_smallball_curve"},
    std::pair{Operation::spread_infimum_proxy, "spread_infimum_proxy"},
    std::pair{Operation::bkappa, "bkappa"},
    std::pair{Operation::check_assumptions, "check_assumptions"},
};

struct Schema {
  std::set<std::string> required;
  std::set<std::string> optional;
};

Schema schema_for(Operation op) {
  Schema s;
  s.required = {"operation", "seed"};
  s.optional = {"out"};
  switch (op) {
    case Operation::sigma_tail_curve:
      s.required.insert({"ensemble", "epsilon_grid", "trials"});
      break;
    case Operation::bkappa_deviation_curve:
      s.required.insert({"ensemble", "kappa_grid", "trials", "C_factor", "beta"});
      break;
    case Operation::projection_moment_ratio:
      s.required.insert({"ensemble", "trials", "d"});
      s.optional.insert({"mode", "p"});
      break;
    case Operation::distance_smallball_curve:
      s.required.insert({"ensemble", "subspace_ensemble", "t_grid", "trials"});
      s.optional.insert("shift");
      break;
    case Operation::spread_infimum_proxy:
      s.required.insert({"ensemble", "columns", "probes", "trials"});
      break;
    case Operation::bkappa:
      s.required.insert({"matrix", "kappa"});
      break;
    case Operation::check_assumptions:
      s.required.insert({"ensemble", "trials"});
      break;
  }
  return s;
}

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

double get_number(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) fail(key, "expected a number");
  return v.get<double>();
}

std::uint64_t get_u64(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(key, "expected a nonnegative integer");
}

std::vector<double> get_grid(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a nonempty array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(key, "expected a nonempty array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<std::size_t> get_indices(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a nonempty array of indices");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_integer() || e.get<std::int64_t>() < 0) fail(key, "expected a nonempty array of indices");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

json get_source(const json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_object() && !v.is_string()) fail(key, "expected an inline object or a file path");
  return v;
}

}  // namespace

std::string_view to_string(Operation op) noexcept {
  for (const auto& [value, name] : kOperationNames) {
    if (value == op) return name;
  }
  return "unknown";
}

Operation operation_from_string(std::string_view name) {
  for (const auto& [value, label] : kOperationNames) {
    if (name == label) return value;
  }
  fail("operation", "unknown operation '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("operation")) fail("operation", "missing");
  if (!j.at("operation").is_string()) fail("operation", "expected a string");

  ExperimentConfig c;
  c.base_dir = base_dir;
  c.operation = operation_from_string(j.at("operation").get<std::string>());
  const Schema schema = schema_for(c.operation);
  for (const auto& [key, value] : j.items()) {
    if (!schema.required.contains(key) && !schema.optional.contains(key)) {
      fail(key, "unknown field for operation '" + std::string(to_string(c.operation)) + "'");
    }
  }
  for (const auto& key : schema.required) {
    if (!j.contains(key)) fail(key, "missing");
  }

  c.seed = get_u64(j, "seed");
  if (j.contains("out")) {
    if (!j.at("out").is_string()) fail("out", "expected a string");
    c.out = j.at("out").get<std::string>();
  }
  if (j.contains("ensemble")) c.ensemble = get_source(j, "ensemble");
  if (j.contains("subspace_ensemble")) c.subspace_ensemble = get_source(j, "subspace_ensemble");
  if (j.contains("trials")) {
    c.trials = get_u64(j, "trials");
    if (*c.trials == 0) fail("trials", "must be positive");
  }
  if (j.contains("epsilon_grid")) c.epsilon_grid = get_grid(j, "epsilon_grid");
  if (j.contains("kappa_grid")) c.kappa_grid = get_grid(j, "kappa_grid");
  if (j.contains("t_grid")) c.t_grid = get_grid(j, "t_grid");
  if (j.contains("C_factor")) c.c_factor = get_number(j, "C_factor");
  if (j.contains("beta")) c.beta = get_number(j, "beta");
  if (j.contains("d")) c.d = get_u64(j, "d");
  if (j.contains("mode")) {
    if (!j.at("mode").is_string()) fail("mode", "expected a string");
    c.mode = j.at("mode").get<std::string>();
    if (*c.mode != "coordinate" && *c.mode != "random") fail("mode", "expected 'coordinate' or 'random'");
  }
  if (j.contains("p")) c.p = get_number(j, "p");
  if (j.contains("shift")) c.shift = get_number(j, "shift");
  if (j.contains("columns")) c.columns = get_indices(j, "columns");
  if (j.contains("probes")) c.probes = get_u64(j, "probes");
  if (j.contains("matrix")) {
    const auto& m = j.at("matrix");
    if (!m.is_array() && !m.is_string()) fail("matrix", "expected an array of rows or a CSV path");
    c.matrix = m;
  }
  if (j.contains("kappa")) c.kappa = get_number(j, "kappa");

  // resolve now so that a bad ensemble is reported as a config error
  if (c.ensemble) resolve_ensemble(*c.ensemble, base_dir, "ensemble");
  if (c.subspace_ensemble) resolve_ensemble(*c.subspace_ensemble, base_dir, "subspace_ensemble");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"operation", to_string(c.operation)}, {"seed", c.seed}};
  auto put = [&j](const char* key, const auto& field) {
    if (field) j[key] = *field;
  };
  put("out", c.out);
  put("ensemble", c.ensemble);
  put("subspace_ensemble", c.subspace_ensemble);
  put("trials", c.trials);
  put("epsilon_grid", c.epsilon_grid);
  put("kappa_grid", c.kappa_grid);
  put("t_grid", c.t_grid);
  put("C_factor", c.c_factor);
  put("beta", c.beta);
  put("d", c.d);
  put("mode", c.mode);
  put("p", c.p);
  put("shift", c.shift);
  put("columns", c.columns);
  put("probes", c.probes);
  put("matrix", c.matrix);
  put("kappa", c.kappa);
  return j;
}

EnsembleSpec resolve_ensemble(const json& source, const std::filesystem::path& base_dir, const char* field) {
  json doc = source;
  if (source.is_string()) {
    std::filesystem::path path = source.get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    std::ifstream in(path);
    if (!in) fail(field, "cannot open '" + path.string() + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      fail(field, std::string("invalid JSON: ") + e.what());
    }
  }
  try {
    return ensemble_from_json(doc);
  } catch (const std::exception& e) {
    fail(field, e.what());
  }
}

}  // namespace sigmafloor::cli
