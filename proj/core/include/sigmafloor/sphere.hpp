#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigmafloor/rng.hpp"

namespace sigmafloor {

inline constexpr double kDefaultDelta = 0.1;
inline constexpr double kDefaultRho = 0.2;
inline constexpr double kDefaultSpreadLow = 0.5;
inline constexpr double kDefaultSpreadHigh = 2.0;

struct SphereClassification {
  bool is_compressible = false;
  /// Distance to the nearest unit vector with at most floor(delta n) nonzeros.
  double sparse_distance = 0.0;
  /// Sparsity budget floor(delta n).
  std::size_t sparsity = 0;
  /// Coordinates with rho/sqrt(2n) <= |x_j| <= 1/sqrt(delta n); set only for
  /// incompressible x.
  std::optional<std::vector<std::size_t>> spread_subset;
  double delta = kDefaultDelta;
  double rho = kDefaultRho;
};

/// floor(delta n) with a 1e-9 guard against products like 0.29 * 100.
std::size_t sparsity_budget(double delta, std::size_t n);

/// Exact (delta, rho) classification of a unit vector.
///
/// The closest unit vector supported on a set T is x_T / ||x_T||, at distance
/// sqrt(2 - 2 ||x_T||), so the best T of size k holds the k largest |x_i|.
/// Throws when | ||x|| - 1 | > 1e-10, when delta or rho is outside (0, 1), or
/// when floor(delta n) == 0.
SphereClassification classify(std::span<const double> x, double delta = kDefaultDelta,
                              double rho = kDefaultRho);

/// Every index with rho/sqrt(2n) <= |x_j| <= 1/sqrt(delta n). Has at least
/// rho^2 delta n / 2 elements whenever x is (delta, rho)-incompressible.
std::vector<std::size_t> extract_spread_subset(std::span<const double> x, double delta = kDefaultDelta,
                                               double rho = kDefaultRho);

/// Unit vector in R^d with |v_i| in [low/sqrt(d), high/sqrt(d)]: magnitudes
/// uniform in the band, random signs, normalized, redrawn if normalization
/// leaves the band. Requires low <= 1 <= high and 0 < low.
std::vector<double> sample_spread(std::size_t d, double low, double high, Stream& stream);

/// Uniform on S^{n-1} (normalized gaussian).
std::vector<double> sample_sphere(std::size_t n, Stream& stream);

nlohmann::json classification_to_json(const SphereClassification& c);

}  // namespace sigmafloor
