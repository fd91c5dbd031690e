#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "sigmafloor/rng.hpp"

namespace sigmafloor {

enum class Family {
  gaussian,
  rademacher,
  uniform_interval,
  /// Uniform on {-1, 0, +1}, rescaled.
  lattice_uniform,
  /// Symmetrized Pareto tail with a uniform core; finite moments below alpha.
  symmetric_pareto,
};

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);

/// A scalar entry law X = mean + stddev * Z where Z has mean 0 and variance 1.
///
/// Every family is symmetric about its mean, so odd central moments vanish.
/// The standardized symmetric Pareto law with tail index alpha has density
///   alpha / (1 + alpha) / (2 x0)                     on |z| <= x0,
///   alpha / (1 + alpha) * x0^alpha / 2 * |z|^{-alpha-1}  on |z| >  x0,
/// with x0 = sqrt(3 (alpha - 2) / alpha). The density is continuous at x0 and
/// E|Z|^p = x0^p * alpha / ((p + 1)(alpha - p)) for p < alpha.
class ScalarDistribution {
 public:
  static ScalarDistribution gaussian(double mean = 0.0, double variance = 1.0);
  /// Uniform on {mean - scale, mean + scale}.
  static ScalarDistribution rademacher(double scale = 1.0, double mean = 0.0);
  static ScalarDistribution uniform_interval(double lo, double hi);
  static ScalarDistribution lattice_uniform(double mean = 0.0, double variance = 1.0);
  /// Requires alpha > 2 so that the variance exists.
  static ScalarDistribution symmetric_pareto(double alpha, double mean = 0.0,
                                             double variance = 1.0);

  /// Generic constructor used by deserialization. `alpha` is ignored unless
  /// the family is symmetric_pareto.
  static ScalarDistribution make(Family family, double mean, double variance,
                                 double alpha = 0.0);

  [[nodiscard]] Family family() const noexcept { return family_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  [[nodiscard]] double variance() const noexcept { return scale_ * scale_; }
  [[nodiscard]] double stddev() const noexcept { return scale_; }
  /// Pareto tail index; +infinity for the light-tailed families.
  [[nodiscard]] double tail_index() const noexcept;

  /// E|X - EX|^p. +infinity when the moment diverges; nullopt when no closed
  /// form is known for the family. Requires p >= 1.
  [[nodiscard]] std::optional<double> central_moment(double p) const;
  /// E|X - EX|^{2+beta}.
  [[nodiscard]] std::optional<double> moment_2_plus_beta(double beta) const {
    return central_moment(2.0 + beta);
  }
  /// E X^2 = variance + mean^2.
  [[nodiscard]] double second_raw_moment() const noexcept {
    return variance() + mean_ * mean_;
  }
  /// E X^4 for the symmetric families. +infinity when it diverges.
  [[nodiscard]] double fourth_raw_moment() const;

  /// Supremum of the density of X; nullopt for laws with atoms.
  /// Gives the linear small-ball bound P(|X - z| <= t) <= 2 * sup_density * t.
  [[nodiscard]] std::optional<double> density_sup() const;

  [[nodiscard]] double sample(Stream& stream) const;
  /// Draw of the standardized Z.
  [[nodiscard]] double sample_standard(Stream& stream) const;

  [[nodiscard]] std::string describe() const;

  friend bool operator==(const ScalarDistribution&, const ScalarDistribution&) = default;

 private:
  ScalarDistribution(Family family, double mean, double scale, double alpha)
      : family_(family), mean_(mean), scale_(scale), alpha_(alpha) {}

  Family family_;
  double mean_;
  double scale_;
  double alpha_;
};

/// E|X - EX|^p for p >= 1. Total on valid distributions.
std::optional<double> analytic_moment(const ScalarDistribution& dist, double p);

/// JSON form: {"family": ..., "mean": ..., "variance": ..., "alpha": ...}.
/// "alpha" appears only for symmetric_pareto. uniform_interval also accepts
/// {"lo", "hi"} on input. Unknown keys are rejected.
nlohmann::json distribution_to_json(const ScalarDistribution& dist);
ScalarDistribution distribution_from_json(const nlohmann::json& j);

}  // namespace sigmafloor

namespace nlohmann {
template <>
struct adl_serializer<sigmafloor::ScalarDistribution> {
  static sigmafloor::ScalarDistribution from_json(const json& j) {
    return sigmafloor::distribution_from_json(j);
  }
  static void to_json(json& j, const sigmafloor::ScalarDistribution& d) {
    j = sigmafloor::distribution_to_json(d);
  }
};
}  // namespace nlohmann
