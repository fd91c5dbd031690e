#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "config.hpp"

namespace sigmafloor::cli {

struct OutputFile {
  /// Appended to the output prefix, e.g. ".csv".
  std::string suffix;
  std::string content;
};

struct ExperimentResult {
  std::vector<OutputFile> files;
  std::size_t rows = 0;
};

/// Runs the configured operation. File contents depend only on the config,
/// never on `workers` or the clock.
ExperimentResult execute(const ExperimentConfig& config, std::size_t workers);

/// Writes every file as prefix + suffix and returns the paths.
std::vector<std::string> write_outputs(const ExperimentResult& result, const std::string& prefix);

/// Prefix used when neither the config nor --out sets one.
std::string default_prefix(const ExperimentConfig& config);

}  // namespace sigmafloor::cli
