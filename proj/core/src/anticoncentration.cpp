#include "sigmafloor/anticoncentration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sigmafloor {

ConcentrationEstimate levy_concentration(std::span<const double> sorted_samples, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("levy_concentration: radius must be positive");
  }
  if (sorted_samples.size() < 2) {
    throw std::invalid_argument("levy_concentration: need at least two samples");
  }
  if (!std::is_sorted(sorted_samples.begin(), sorted_samples.end())) {
    throw std::invalid_argument("levy_concentration: samples must be sorted");
  }
  const double width = 2.0 * radius;
  const std::size_t m = sorted_samples.size();
  std::size_t best = 0;
  std::size_t best_left = 0;
  std::size_t right = 0;
  for (std::size_t left = 0; left < m; ++left) {
    if (right < left) right = left;
    while (right < m && sorted_samples[right] - sorted_samples[left] <= width) ++right;
    if (right - left > best) {
      best = right - left;
      best_left = left;
    }
  }
  ConcentrationEstimate out;
  out.radius = radius;
  out.samples = m;
  out.max_count = best;
  out.q_hat = static_cast<double>(best) / static_cast<double>(m);
  out.center = sorted_samples[best_left] + radius;
  out.upper99 = wilson_upper(best, m, kZ99OneSided);
  return out;
}

ConcentrationEstimate sample_levy_concentration(const ScalarDistribution& dist, double radius,
                                                std::uint64_t count, Stream& stream) {
  std::vector<double> draws(count);
  for (auto& x : draws) x = dist.sample(stream);
  std::sort(draws.begin(), draws.end());
  return levy_concentration(draws, radius);
}

bool truncation_level_admissible(double m, double beta, double c_moment) {
  const double mb = std::pow(m, beta);
  const bool second_moment = c_moment / mb + 2.0 * c_moment / (beta * mb) <= 1.0 / 8.0;
  const bool first_moment = 2.0 * c_moment / (m * mb) <= 1.0 / 20.0;
  const bool tail = c_moment / (m * m * mb) < 1.0 / (16.0 * m * m);
  const bool margin = 16.0 * m * m > m + 1.0;
  return second_moment && first_moment && tail && margin && m > 0.75;
}

UacConstants derive_uac_constants(double beta, double c_moment) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("derive_uac_constants: beta must be positive");
  }
  if (!(c_moment >= 1.0) || !std::isfinite(c_moment)) {
    throw std::invalid_argument("derive_uac_constants: moment bound must be >= 1");
  }
  constexpr double kGridFactor = 1.001;
  // every condition is monotone in m, so the first admissible grid point is
  // the smallest one
  double m = 0.75;
  while (!truncation_level_admissible(m, beta, c_moment)) m *= kGridFactor;
  UacConstants out;
  out.m = m;
  out.a = 0.25;
  out.b = 1.0 - 1.0 / (4.0 * m * m);
  out.beta = beta;
  out.c_moment = c_moment;
  return out;
}

UacParameters rescale_uac(const UacConstants& constants, double variance, double /*mean*/) {
  if (!(variance > 0.0)) throw std::invalid_argument("rescale_uac: variance must be positive");
  return {std::sqrt(variance) / 4.0, constants.b};
}

std::vector<SmallBallRow> check_tensorization(const ScalarDistribution& dist,
                                              std::span<const std::size_t> dims,
                                              std::span<const double> t_grid,
                                              std::uint64_t trials, Stream& stream) {
  if (!dist.density_sup()) {
    throw std::invalid_argument("check_tensorization: law has atoms, no linear small-ball bound");
  }
  if (trials == 0) throw std::invalid_argument("check_tensorization: zero trials");
  std::vector<SmallBallRow> rows;
  for (const std::size_t d : dims) {
    if (d == 0) throw std::invalid_argument("check_tensorization: dimension must be >= 1");
    std::vector<std::uint64_t> hits(t_grid.size(), 0);
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
      double sum = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        const double y = dist.sample(stream);
        sum += y * y;
      }
      for (std::size_t k = 0; k < t_grid.size(); ++k) {
        if (sum <= t_grid[k] * t_grid[k] * static_cast<double>(d)) ++hits[k];
      }
    }
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      SmallBallRow row;
      row.t = t_grid[k];
      row.dim = d;
      row.trials = trials;
      row.hits = hits[k];
      row.p_hat = static_cast<double>(hits[k]) / static_cast<double>(trials);
      row.ci = wilson_interval(hits[k], trials);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<LinearSmallBallRow> check_linear_smallball(std::span<const double> u,
                                                       const ScalarDistribution& dist,
                                                       std::span<const double> eps_grid,
                                                       std::uint64_t trials, Stream& stream) {
  double norm_sq = 0.0;
  for (const double x : u) norm_sq += x * x;
  if (norm_sq == 0.0) throw std::invalid_argument("check_linear_smallball: u must be nonzero");
  std::vector<double> draws(trials);
  for (auto& s : draws) {
    double acc = 0.0;
    for (const double coeff : u) acc += coeff * dist.sample(stream);
    s = acc;
  }
  std::sort(draws.begin(), draws.end());
  const double norm = std::sqrt(norm_sq);
  std::vector<LinearSmallBallRow> rows;
  rows.reserve(eps_grid.size());
  for (const double eps : eps_grid) {
    const auto est = levy_concentration(draws, eps);
    rows.push_back({eps, est.q_hat, est.upper99, est.q_hat * norm / eps});
  }
  return rows;
}

}  // namespace sigmafloor
