#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigmafloor/ensemble.hpp"

namespace sigmafloor::cli {

/// Malformed or inconsistent configuration. The message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Operation {
  sigma_tail_curve,
  bkappa_deviation_curve,
  projection_moment_ratio,
  distance_smallball_curve,
  spread_infimum_proxy,
  bkappa,
  check_assumptions,
};

std::string_view to_string(Operation op) noexcept;
Operation operation_from_string(std::string_view name);

/// A replayable experiment. Optional members are exactly the fields present
/// in the source document, so to_json(parse(j)) == j.
struct ExperimentConfig {
  Operation operation = Operation::sigma_tail_curve;
  std::uint64_t seed = 0;
  std::optional<std::string> out;

  /// Inline ensemble object or a path to a JSON file, as written.
  std::optional<nlohmann::json> ensemble;
  /// M for distance_smallball_curve.
  std::optional<nlohmann::json> subspace_ensemble;
  std::optional<std::uint64_t> trials;

  std::optional<std::vector<double>> epsilon_grid;
  std::optional<std::vector<double>> kappa_grid;
  std::optional<std::vector<double>> t_grid;

  std::optional<double> c_factor;  // "C_factor"
  std::optional<double> beta;
  std::optional<std::size_t> d;
  std::optional<std::string> mode;
  std::optional<double> p;
  std::optional<double> shift;
  std::optional<std::vector<std::size_t>> columns;
  std::optional<std::size_t> probes;
  /// Rows of numbers or a CSV path.
  std::optional<nlohmann::json> matrix;
  std::optional<double> kappa;

  /// Directory that relative paths are resolved against. Not serialized.
  std::filesystem::path base_dir;
};

/// Strict parse: unknown fields, missing required fields and fields that do
/// not belong to the operation are rejected with ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Resolves the ensemble field (inline or path) into a validated spec.
EnsembleSpec resolve_ensemble(const nlohmann::json& source, const std::filesystem::path& base_dir,
                              const char* field);

}  // namespace sigmafloor::cli
