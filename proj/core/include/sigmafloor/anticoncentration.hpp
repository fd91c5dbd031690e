#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sigmafloor/distribution.hpp"
#include "sigmafloor/rng.hpp"
#include "sigmafloor/stats.hpp"

namespace sigmafloor {

/// Empirical Levy concentration Q(a) = sup_z P(|X - z| <= a).
struct ConcentrationEstimate {
  double radius = 0.0;
  double q_hat = 0.0;
  std::uint64_t samples = 0;
  /// Largest number of samples in one closed window of width 2 * radius.
  std::uint64_t max_count = 0;
  /// Center of a maximizing window.
  double center = 0.0;
  /// One-sided 99% Wilson upper bound on max_count / samples.
  double upper99 = 0.0;
};

/// Exact sup over z of the empirical measure of [z - a, z + a].
///
/// Some maximizing window can be slid right until its left edge meets a
/// sample, so scanning windows anchored at each sample is exhaustive. Uses a
/// two-pointer sweep over the sorted input. Throws on a <= 0, fewer than two
/// samples, or unsorted input.
ConcentrationEstimate levy_concentration(std::span<const double> sorted_samples, double radius);

/// Samples `count` draws of `dist`, sorts them and runs levy_concentration.
ConcentrationEstimate sample_levy_concentration(const ScalarDistribution& dist, double radius,
                                                std::uint64_t count, Stream& stream);

/// Constants produced by the truncation argument for a mean-0, variance-1
/// variable with E|X|^{2+beta} <= c_moment: sup_z P(|X - z| <= 1/4) <= b.
struct UacConstants {
  double m = 0.0;
  double a = 0.25;
  double b = 0.0;
  double beta = 0.0;
  double c_moment = 0.0;
};

/// All five conditions on the truncation level m:
///   C/m^beta + 2C/(beta m^beta) <= 1/8,  2C/m^{1+beta} <= 1/20,
///   C/m^{2+beta} < 1/(16 m^2),  16 m^2 > m + 1,  m > 3/4.
bool truncation_level_admissible(double m, double beta, double c_moment);

/// Smallest admissible m on the grid 0.75 * 1.001^k, and b = 1 - 1/(4 m^2).
UacConstants derive_uac_constants(double beta, double c_moment);

struct UacParameters {
  double a = 0.0;
  double b = 0.0;
};

/// Affine transfer to a variable with the given variance: a = sqrt(variance)/4.
/// The mean does not enter.
UacParameters rescale_uac(const UacConstants& constants, double variance, double mean);

struct SmallBallRow {
  double t = 0.0;
  std::size_t dim = 0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  Interval ci;
};

/// Empirical P(sum_{i<=d} |Y_i|^2 <= t^2 d) for i.i.d. Y_i ~ dist, for each
/// d in `dims` and t in `t_grid`. One set of draws per d is shared by all t.
/// Requires a law with a density (linear bound P(|Y| <= t) <= p t).
std::vector<SmallBallRow> check_tensorization(const ScalarDistribution& dist,
                                              std::span<const std::size_t> dims,
                                              std::span<const double> t_grid,
                                              std::uint64_t trials, Stream& stream);

struct LinearSmallBallRow {
  double epsilon = 0.0;
  double q_hat = 0.0;
  double upper99 = 0.0;
  /// q_hat * ||u||_2 / epsilon; roughly constant in the linear regime.
  double normalized = 0.0;
};

/// Empirical sup_z P(|<u, v> - z| <= eps) for v with i.i.d. entries ~ dist.
std::vector<LinearSmallBallRow> check_linear_smallball(std::span<const double> u,
                                                       const ScalarDistribution& dist,
                                                       std::span<const double> eps_grid,
                                                       std::uint64_t trials, Stream& stream);

}  // namespace sigmafloor
