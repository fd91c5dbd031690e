#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sigmafloor/bkappa.hpp"

namespace sigmafloor::cli {

/// Signature of solve_weighted_min_log; swapped out in tests to inject faults.
using WeightedMinSolver = std::function<BkappaSolution(std::span<const double>, double)>;

struct CheckContext {
  std::uint64_t seed = 20240611;
  std::size_t workers = 1;
  WeightedMinSolver solver = solve_weighted_min_log;
};

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool passed = false;
  std::string measured;
  double seconds = 0.0;
  double limit_seconds = 0.0;
};

/// Sizes for each check. full() is the acceptance budget; reduced() is the
/// selftest budget.
struct CheckBudget {
  std::size_t oracle_instances = 1000;
  std::size_t invariant_instances = 10000;
  std::uint64_t projection_trials = 10000;
  std::size_t projection_repetitions = 20;
  std::uint64_t square_trials = 100000;
  std::uint64_t rectangular_trials = 100000;
  std::uint64_t deviation_trials = 100000;
  std::uint64_t uac_samples = 100000;
  std::size_t classifier_vectors = 1000;
  std::size_t spread_vectors = 1000;
  std::uint64_t distance_trials = 100000;
  std::uint64_t determinism_trials = 2000;

  static CheckBudget full() { return {}; }
  static CheckBudget reduced();
};

CheckResult check_bkappa_oracles(const CheckContext& ctx, std::size_t instances);
CheckResult check_bkappa_invariants(const CheckContext& ctx, std::size_t instances);
CheckResult check_projection_second_moment(const CheckContext& ctx, std::uint64_t trials, std::size_t repetitions);
CheckResult check_square_exponent(const CheckContext& ctx, std::uint64_t trials);
CheckResult check_rectangular_exponent(const CheckContext& ctx, std::uint64_t trials);
CheckResult check_deviation_bound(const CheckContext& ctx, std::uint64_t trials);
CheckResult check_uac_derivation(const CheckContext& ctx, std::uint64_t samples);
CheckResult check_classifier(const CheckContext& ctx, std::size_t vectors);
CheckResult check_spread_subset(const CheckContext& ctx, std::size_t vectors);
CheckResult check_distance_exponent(const CheckContext& ctx, std::uint64_t trials);
CheckResult check_determinism(const CheckContext& ctx, std::uint64_t trials);

/// All eleven criteria at the given budget, printing each line as it lands.
std::vector<CheckResult> run_acceptance(const CheckContext& ctx, const CheckBudget& budget, std::ostream& out);

/// Criteria 1-4, 6-9 and 11 at the reduced budget; the exponent fits 5 and 10
/// are left to the acceptance suite. Returns 0 iff every check passes.
int run_selftest(const CheckContext& ctx, std::ostream& out);

/// "PASS  1 name  measured  [1.23 s / 10 s]"
void print_result(std::ostream& out, const CheckResult& result);

}  // namespace sigmafloor::cli
