#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

namespace sigmafloor {

/// Raised when a numerical routine cannot deliver its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

inline constexpr double kZ95TwoSided = 1.959963984540054;
inline constexpr double kZ99OneSided = 2.3263478740408408;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z = kZ95TwoSided);

/// Upper end of the one-sided Wilson bound at the given z.
double wilson_upper(std::uint64_t hits, std::uint64_t trials, double z = kZ99OneSided);

/// Welford accumulator.
class RunningMoments {
 public:
  void add(double x) noexcept;
  void merge(const RunningMoments& other) noexcept;

  [[nodiscard]] std::uint64_t count() const noexcept { return count_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two samples.
  [[nodiscard]] double variance() const noexcept;
  [[nodiscard]] double standard_error() const noexcept;

 private:
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
};

/// Ordinary least squares fit of y on x. Needs at least two distinct x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace sigmafloor
