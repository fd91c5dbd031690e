#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace sigmafloor {

/// Minimizer of sum_i a_i y_i over a in [0,1]^n subject to prod_i a_i >= w.
///
/// The optimum has the water-filling form: on a set S of the largest y_i the
/// products a_i y_i share one level c and every other weight is 1, with
///   c = (w * prod_{i in S} y_i)^{1/|S|},   y_i > c on S,   y_i <= c off S,
///   value = sum_{i not in S} y_i + |S| c <= n c.
/// When S is empty (w == 1 or y == 0) the threshold is reported as max_i y_i.
struct BkappaSolution {
  double value = 0.0;
  /// Indices with weight < 1, ascending.
  std::vector<std::size_t> subset;
  double threshold = 0.0;
  std::vector<double> weights;
  /// Product floor. May underflow to 0 for large n; log_w is authoritative.
  double w = 1.0;
  double log_w = 0.0;
};

/// Exact solve. Throws std::invalid_argument for empty, negative or
/// non-finite y, or w outside (0, 1].
BkappaSolution solve_weighted_min(std::span<const double> y, double w);

/// Same problem with the floor given as log w <= 0, so that floors like
/// kappa^{-2n} do not underflow.
///
/// Works on the sorted order of y (descending, ties by index). For the k-th
/// prefix the level is c_k = exp((log w + sum_{i<=k} log y_(i)) / k); the
/// prefix is accepted when y_(k) >= c_k >= y_(k+1) (y_(n+1) = 0, boundary
/// ties within 1e-12 relative). The cheapest accepted candidate, or the empty
/// set, is returned. Zero entries never enter S.
BkappaSolution solve_weighted_min_log(std::span<const double> y, double log_w);

/// Regularized Hilbert-Schmidt norm
///   B_kappa(M) = min { sum_i alpha_i^2 ||M_i||^2 : alpha in [0,1]^n, prod alpha_i >= kappa^{-n} },
/// solved as solve_weighted_min(y, kappa^{-2n}) with y_i = ||M_i||^2 and
/// a_i = alpha_i^2. Requires kappa > 1.
BkappaSolution bkappa(const Eigen::Ref<const Eigen::MatrixXd>& m, double kappa);

/// Squared column norms.
std::vector<double> column_norms_sq(const Eigen::Ref<const Eigen::MatrixXd>& m);

struct SubsetOracleResult {
  double value = 0.0;
  std::vector<std::size_t> subset;
};

/// Enumerates all 2^n subsets S with y_i > (w prod_S y)^{1/|S|} for every
/// i in S and returns the cheapest closed-form objective. Linear-space
/// arithmetic, independent of the sorted/log-space solver. Rejects n > 20.
SubsetOracleResult oracle_subset(std::span<const double> y, double w);

struct ContinuousOracleResult {
  double value = 0.0;
  bool converged = false;
  std::size_t sweeps = 0;
  std::vector<double> weights;
};

/// Minimizes sum_i e^{t_i} y_i over t_i <= 0, sum_i t_i >= log w by pairwise
/// coordinate descent: each step re-optimizes one pair (t_i, t_j) with
/// t_i + t_j held fixed, which is solvable in closed form. Starts from the
/// feasible point t_i = log(w)/n. `converged` is false when the last sweep
/// still improved the objective by more than `tolerance` relative.
/// Requires strictly positive y.
ContinuousOracleResult oracle_continuous(std::span<const double> y, double w,
                                         std::size_t max_sweeps = 20000,
                                         double tolerance = 1e-15);

/// {"value":..,"S":[..],"c":..,"weights":[..],"log_w":..}
nlohmann::json solution_to_json(const BkappaSolution& solution);

}  // namespace sigmafloor
