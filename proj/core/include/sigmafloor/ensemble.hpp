#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sigmafloor/distribution.hpp"
#include "sigmafloor/rng.hpp"
#include "sigmafloor/stats.hpp"

namespace sigmafloor {

enum class ProfileKind { constant, per_column, per_row, checkerboard };

std::string_view to_string(ProfileKind kind) noexcept;

/// Deterministic map (i, j) -> entry law.
///
/// constant uses entries[0]; per_column uses entries[j]; per_row uses
/// entries[i]; checkerboard uses entries[(i + j) % 2].
struct Profile {
  ProfileKind kind = ProfileKind::constant;
  std::vector<ScalarDistribution> entries;

  [[nodiscard]] const ScalarDistribution& at(std::size_t row, std::size_t col) const;
};

// Declared assumptions. Field names follow the JSON keys.
struct UacAssumption {
  double a = 0.0;
  double b = 0.0;
};
struct MomentAssumption {
  double beta = 0.0;
  double r = 0.0;
  double R = 0.0;
};
struct IsotropyAssumption {
  double c = 1.0;
};
struct VectorVarianceAssumption {
  /// The constant is not fixed by the model; when absent the measured value is
  /// only recorded.
  std::optional<double> c;
};
struct HsNormAssumption {
  double K = 1.0;
};

using Assumption = std::variant<UacAssumption, MomentAssumption, IsotropyAssumption,
                                VectorVarianceAssumption, HsNormAssumption>;

std::string assumption_name(const Assumption& assumption);

/// An N x n grid of independent entry laws plus the declared assumption set.
class EnsembleSpec {
 public:
  EnsembleSpec(std::size_t rows, std::size_t cols, Profile profile,
               std::vector<Assumption> assumptions = {});

  static EnsembleSpec constant(std::size_t rows, std::size_t cols, const ScalarDistribution& dist,
                               std::vector<Assumption> assumptions = {});

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  [[nodiscard]] const Profile& profile() const noexcept { return profile_; }
  [[nodiscard]] const std::vector<Assumption>& assumptions() const noexcept { return assumptions_; }
  [[nodiscard]] const ScalarDistribution& entry(std::size_t row, std::size_t col) const {
    return profile_.at(row, col);
  }

  /// E ||A||_HS^2 = sum of second raw moments.
  [[nodiscard]] double expected_hs_norm_sq() const;
  /// E ||A e_j||^2 for column j.
  [[nodiscard]] double expected_column_norm_sq(std::size_t col) const;
  /// True when all entries have mean 0 and one common variance.
  [[nodiscard]] bool is_isotropic() const;

  /// FNV-1a 64 of the canonical JSON, as 16 hex digits.
  [[nodiscard]] std::string digest() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  Profile profile_;
  std::vector<Assumption> assumptions_;
};

/// {"N":int,"n":int,"profile":{"kind":...,"entries":[...]},"assumptions":[...]}
/// Each assumption is an object {"kind":"UAC","a":..,"b":..} and similarly
/// MOM(beta,r,R), ISO(c), VEC2(c), HS(K). Unknown fields are rejected.
nlohmann::json ensemble_to_json(const EnsembleSpec& spec);
EnsembleSpec ensemble_from_json(const nlohmann::json& j);

/// Draws an N x n matrix. Entries are filled column by column from `stream`,
/// so identical (spec, stream state) pairs give bit-identical matrices.
Eigen::MatrixXd sample_matrix(const EnsembleSpec& spec, Stream& stream);

enum class AssumptionStatus {
  verified_analytic,
  verified_empirical,
  violated,
  /// VEC2 without a declared constant: the measured constant is recorded.
  recorded,
  unverifiable,
};

std::string_view to_string(AssumptionStatus status) noexcept;

struct AssumptionResult {
  std::string name;
  AssumptionStatus status = AssumptionStatus::unverifiable;
  std::map<std::string, double> witness;
  /// One-sided upper confidence bound for empirical checks.
  std::optional<double> upper_bound;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionResult> results;

  [[nodiscard]] bool all_hold() const;
};

nlohmann::json report_to_json(const AssumptionReport& report);

/// ISO, HS, MOM and VEC2 are decided from closed-form moments. UAC is decided
/// empirically: each distinct entry law is sampled `trials` times and the
/// 99% one-sided upper bound on its Levy concentration at radius a must not
/// exceed b.
AssumptionReport check_assumptions(const EnsembleSpec& spec, std::uint64_t trials, Stream& stream);

}  // namespace sigmafloor
