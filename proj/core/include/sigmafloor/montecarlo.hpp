#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sigmafloor/ensemble.hpp"
#include "sigmafloor/sphere.hpp"
#include "sigmafloor/stats.hpp"

namespace sigmafloor {

inline constexpr const char* kVersion = "0.1.0";

/// Raised by fit_exponent when fewer than three rows survive the filter.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Calls fn(t) for every trial t in [0, trials) on `workers` threads and
/// returns the results in trial order. Each trial must draw only from streams
/// keyed by its own index; the output is then independent of `workers`.
std::vector<double> run_trials(std::uint64_t trials, std::size_t workers,
                               const std::function<double(std::uint64_t)>& fn);

/// Vector-valued variant: fn fills `width` values per trial. The result is
/// row-major, trials x width.
std::vector<double> run_trials_multi(
    std::uint64_t trials, std::size_t workers, std::size_t width,
    const std::function<void(std::uint64_t, std::span<double>)>& fn);

struct TailRow {
  double threshold = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  /// 95% Wilson interval.
  Interval ci;
};

struct CurveMetadata {
  std::string operation;
  std::string spec_digest;
  std::uint64_t seed = 0;
  std::size_t rows = 0;  // N
  std::size_t cols = 0;  // n
  /// Operation-specific extras (reference values, normalizations).
  nlohmann::json extra = nlohmann::json::object();
};

struct TailCurve {
  std::vector<TailRow> rows;
  CurveMetadata meta;
};

enum class TailSide { lower, upper };

/// Counts, for each threshold, the trials whose statistic is <= threshold
/// (lower) or >= threshold (upper). Thresholds must be strictly increasing.
std::vector<TailRow> count_hits(std::span<const double> statistics, std::span<const double> thresholds,
                                TailSide side = TailSide::lower);

struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::size_t rows_used = 0;
};

/// OLS of log p_hat on log threshold over rows with p_hat in [10/trials, 0.5].
ExponentFit fit_exponent(const TailCurve& curve);

/// P(sigma_n(A) <= eps (sqrt(N+1) - sqrt(n))) for each eps. One matrix and
/// one sigma_n per trial are shared by every threshold.
TailCurve sigma_tail_curve(const EnsembleSpec& spec, std::span<const double> eps_grid,
                           std::uint64_t trials, const RunOptions& options);

/// sqrt(N+1) - sqrt(n).
double sigma_scale(std::size_t rows, std::size_t cols);

struct DeviationRow {
  double kappa = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  Interval ci;
  /// 2^d e^{(1+beta/2) d/e} kappa^{-(2+beta) d}.
  double bound = 0.0;
};

struct DeviationTable {
  std::vector<DeviationRow> rows;
  double expected_hs_norm_sq = 0.0;
  /// Smallest C with E||W e_i||^{2+beta} <= (C E||W e_i||^2)^{1+beta/2} for all columns.
  double moment_constant = 0.0;
  CurveMetadata meta;
};

/// Explicit deviation bound for a d-column matrix.
double bkappa_deviation_bound(std::size_t d, double beta, double kappa);

/// Analytic E||X||^{2+beta} for column j of the spec. Available for beta = 2
/// (any family with a finite fourth moment) and for i.i.d. mean-0 gaussian
/// columns (any beta); nullopt otherwise.
std::optional<double> column_norm_moment(const EnsembleSpec& spec, std::size_t col, double beta);

/// P(B_kappa(W) >= c_factor * E||W||_HS^2) for W ~ spec and each kappa.
/// Throws std::invalid_argument when the column moments are not available in
/// closed form or c_factor is below the column moment constant.
DeviationTable bkappa_deviation_curve(const EnsembleSpec& spec, std::span<const double> kappa_grid,
                                      std::uint64_t trials, double c_factor, double beta,
                                      const RunOptions& options);

enum class SubspaceMode { coordinate, random };

struct ProjectionRatio {
  double estimate = 0.0;
  double standard_error = 0.0;
  /// d/n for the second-moment ratio; unset for the 2+beta ratio.
  std::optional<double> reference;
  std::size_t dim = 0;
  std::size_t codim = 0;
  double exponent = 2.0;
};

/// Moments of ||P_{H^perp} X|| for X drawn from the first column of `spec`
/// (an n x 1 ensemble) and H^perp of dimension d, either span{e_1..e_d} or
/// the span of an independent n x d gaussian matrix drawn per trial.
///   exponent == 2:  E||P X||^2 / E||X||^2, reference d/n (isotropic specs only);
///   exponent  > 2:  E||P X||^p / (E||P X||^2)^{p/2} with a delta-method error.
ProjectionRatio projection_moment_ratio(const EnsembleSpec& spec, SubspaceMode mode, std::size_t codim,
                                        double exponent, std::uint64_t trials, const RunOptions& options);

struct DistanceCurves {
  /// v = 0.
  TailCurve centered;
  /// A fixed shift v drawn once from the seed.
  TailCurve shifted;
};

/// P(||P_{H^perp} X - v|| <= t sqrt(d)) where H is spanned by the columns of
/// M ~ m_spec (N x (N - d)) and X ~ x_spec (N x 1) is independent of M.
/// `shift` is the expected norm of the random fixed v.
DistanceCurves distance_smallball_curve(const EnsembleSpec& x_spec, const EnsembleSpec& m_spec,
                                        std::span<const double> t_grid, std::uint64_t trials,
                                        const RunOptions& options, double shift = 0.25);

/// min over `probes` spread vectors x of dist(A_J x, span A_{J^c}), for one
/// draw of A from `stream`. An upper bound on the infimum over spread_d.
double spread_infimum_proxy(const EnsembleSpec& spec, std::span<const std::size_t> columns,
                            std::size_t probes, Stream& stream, double low = kDefaultSpreadLow,
                            double high = kDefaultSpreadHigh);

struct ProxyDistribution {
  std::vector<double> values;  // per trial, in trial order
  std::vector<std::pair<double, double>> quantiles;
  CurveMetadata meta;
};

/// Same on a given matrix.
double spread_infimum_proxy(const Eigen::Ref<const Eigen::MatrixXd>& a, std::span<const std::size_t> columns,
                            std::size_t probes, Stream& stream, double low = kDefaultSpreadLow,
                            double high = kDefaultSpreadHigh);

ProxyDistribution spread_proxy_distribution(const EnsembleSpec& spec, std::span<const std::size_t> columns,
                                            std::size_t probes, std::uint64_t trials,
                                            const RunOptions& options);

/// Header: epsilon,trials,hits,p_hat,wilson_lo,wilson_hi
void write_tail_csv(std::ostream& out, std::span<const TailRow> rows);
nlohmann::json metadata_to_json(const CurveMetadata& meta);
std::string format_double(double value);

}  // namespace sigmafloor
