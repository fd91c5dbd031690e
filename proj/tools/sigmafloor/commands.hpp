#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "checks.hpp"

namespace sigmafloor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// --workers, else SIGMAFLOOR_WORKERS, else the hardware thread count.
/// Throws ConfigError on a malformed value.
std::size_t resolve_workers(std::optional<long long> flag);

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t workers = 1;
};

/// Exit 0 on success, 2 on a config error, 3 on a numerical failure.
int command_run(const RunArgs& args, std::ostream& out, std::ostream& err);

int command_selftest(const CheckContext& ctx, std::ostream& out);

struct BkappaArgs {
  std::optional<std::string> matrix_path;  // CSV
  std::optional<std::string> y_json;       // JSON array of squared norms
  std::optional<double> kappa;
  std::optional<double> w;
};

/// Prints {"value","S","c","weights","log_w"}.
int command_bkappa(const BkappaArgs& args, std::ostream& out, std::ostream& err);

struct ClassifyArgs {
  std::optional<std::string> x;     // comma separated
  std::optional<std::string> path;  // CSV file with one vector
  double delta = 0.1;
  double rho = 0.2;
};

int command_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err);

struct ConcentrationArgs {
  std::string dist;
  double radius = 0.25;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double variance = 1.0;
  std::optional<double> alpha;
};

int command_concentration(const ConcentrationArgs& args, std::ostream& out, std::ostream& err);

}  // namespace sigmafloor::cli
