#include "sigmafloor/bkappa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sigmafloor {

namespace {

constexpr double kTieTolerance = 1e-12;

void validate_y(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("weighted min: y must be nonempty");
  for (const double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("weighted min: y must be finite");
    if (v < 0.0) throw std::invalid_argument("weighted min: y must be nonnegative");
  }
}

BkappaSolution empty_subset_solution(std::span<const double> y, double log_w) {
  BkappaSolution s;
  s.value = std::accumulate(y.begin(), y.end(), 0.0);
  s.threshold = *std::max_element(y.begin(), y.end());
  s.weights.assign(y.size(), 1.0);
  s.log_w = log_w;
  s.w = std::exp(log_w);
  return s;
}

}  // namespace

BkappaSolution solve_weighted_min_log(std::span<const double> y, double log_w) {
  validate_y(y);
  if (!std::isfinite(log_w) || log_w > 0.0) {
    throw std::invalid_argument("weighted min: need 0 < w <= 1");
  }
  if (log_w == 0.0) return empty_subset_solution(y, log_w);

  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
  const auto positive = static_cast<std::size_t>(
      std::count_if(y.begin(), y.end(), [](double v) { return v > 0.0; }));
  if (positive == 0) return empty_subset_solution(y, log_w);

  // tail[k] = sum of the n - k smallest entries, accumulated small to large
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t k = n; k-- > 0;) tail[k] = tail[k + 1] + y[order[k]];

  struct Candidate {
    std::size_t size = 0;
    double level = 0.0;
    double value = std::numeric_limits<double>::infinity();
  };
  Candidate kkt;       // prefixes passing both water-filling conditions
  Candidate feasible;  // prefixes that only pass the membership condition

  double log_sum = 0.0;
  for (std::size_t k = 1; k <= positive; ++k) {
    const double yk = y[order[k - 1]];
    log_sum += std::log(yk);
    const double level = std::exp((log_w + log_sum) / static_cast<double>(k));
    if (yk < level * (1.0 - kTieTolerance)) continue;
    const double value = tail[k] + static_cast<double>(k) * level;
    if (value < feasible.value) feasible = {k, level, value};
    const double next = k < n ? y[order[k]] : 0.0;
    if (level >= next * (1.0 - kTieTolerance) && value < kkt.value) kkt = {k, level, value};
  }
  // the KKT prefix exists in exact arithmetic; the membership-only minimum is
  // the same optimum and covers rounding at the boundaries
  const Candidate best = std::isfinite(kkt.value) ? kkt : feasible;
  if (!std::isfinite(best.value)) {
    throw std::logic_error("weighted min: no admissible prefix");
  }

  BkappaSolution s;
  s.log_w = log_w;
  s.w = std::exp(log_w);
  s.threshold = best.level;
  s.value = best.value;
  s.weights.assign(n, 1.0);
  s.subset.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(best.size));
  std::sort(s.subset.begin(), s.subset.end());
  for (const std::size_t i : s.subset) s.weights[i] = std::min(1.0, best.level / y[i]);
  return s;
}

BkappaSolution solve_weighted_min(std::span<const double> y, double w) {
  if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("weighted min: need 0 < w <= 1");
  return solve_weighted_min_log(y, std::log(w));
}

std::vector<double> column_norms_sq(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  std::vector<double> y(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) y[static_cast<std::size_t>(j)] = m.col(j).squaredNorm();
  return y;
}

BkappaSolution bkappa(const Eigen::Ref<const Eigen::MatrixXd>& m, double kappa) {
  if (!(kappa > 1.0) || !std::isfinite(kappa)) throw std::invalid_argument("bkappa: need kappa > 1");
  if (m.cols() == 0) throw std::invalid_argument("bkappa: matrix has no columns");
  const auto y = column_norms_sq(m);
  const double log_w = -2.0 * static_cast<double>(y.size()) * std::log(kappa);
  return solve_weighted_min_log(y, log_w);
}

SubsetOracleResult oracle_subset(std::span<const double> y, double w) {
  validate_y(y);
  if (y.size() > 20) throw std::invalid_argument("oracle_subset: n > 20");
  if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("oracle_subset: need 0 < w <= 1");
  const std::size_t n = y.size();
  SubsetOracleResult best;
  best.value = std::accumulate(y.begin(), y.end(), 0.0);  // S empty
  for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
    double product = w;
    std::size_t size = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1U << i)) {
        product *= y[i];
        ++size;
      }
    }
    const double level = std::pow(product, 1.0 / static_cast<double>(size));
    bool member = true;
    double value = static_cast<double>(size) * level;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1U << i)) {
        member = member && y[i] > level;
      } else {
        value += y[i];
      }
    }
    if (member && value < best.value) {
      best.value = value;
      best.subset.clear();
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1U << i)) best.subset.push_back(i);
      }
    }
  }
  return best;
}

ContinuousOracleResult oracle_continuous(std::span<const double> y, double w,
                                         std::size_t max_sweeps, double tolerance) {
  if (y.empty()) throw std::invalid_argument("oracle_continuous: y must be nonempty");
  for (const double v : y) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("oracle_continuous: y must be positive");
  }
  if (!(w > 0.0 && w <= 1.0)) throw std::invalid_argument("oracle_continuous: need 0 < w <= 1");
  const std::size_t n = y.size();
  std::vector<double> t(n, std::log(w) / static_cast<double>(n));
  auto objective = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::exp(t[i]) * y[i];
    return total;
  };
  ContinuousOracleResult out;
  double current = objective();
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double s = t[i] + t[j];
        // stationary point of y_i e^{t_i} + y_j e^{s - t_i}, clamped to t_i, t_j <= 0
        double ti = 0.5 * (s + std::log(y[j] / y[i]));
        ti = std::clamp(ti, s, 0.0);
        t[i] = ti;
        t[j] = s - ti;
      }
    }
    const double next = objective();
    out.sweeps = sweep + 1;
    const double improvement = current - next;
    current = next;
    if (improvement <= tolerance * current) {
      out.converged = true;
      break;
    }
  }
  out.value = current;
  out.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.weights[i] = std::exp(t[i]);
  return out;
}

nlohmann::json solution_to_json(const BkappaSolution& solution) {
  return nlohmann::json{{"value", solution.value},
                        {"S", solution.subset},
                        {"c", solution.threshold},
                        {"weights", solution.weights},
                        {"log_w", solution.log_w}};
}

}  // namespace sigmafloor
