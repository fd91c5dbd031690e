#include "sigmafloor/montecarlo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include <Eigen/Dense>

#include "sigmafloor/bkappa.hpp"
#include "sigmafloor/linalg.hpp"

namespace sigmafloor {

namespace {

// Lanes separate independent draws that belong to the same trial.
constexpr std::uint64_t kLaneMatrix = 0;
constexpr std::uint64_t kLaneSubspace = 1;
constexpr std::uint64_t kLaneShift = 2;

void run_blocks(std::uint64_t trials, std::size_t workers,
                const std::function<void(std::uint64_t, std::uint64_t)>& block) {
  if (workers == 0) throw std::invalid_argument("workers must be >= 1");
  const std::uint64_t used = std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1));
  if (used <= 1) {
    block(0, trials);
    return;
  }
  std::vector<std::exception_ptr> errors(used);
  std::vector<std::thread> pool;
  pool.reserve(used);
  const std::uint64_t chunk = trials / used;
  const std::uint64_t extra = trials % used;
  std::uint64_t begin = 0;
  for (std::uint64_t w = 0; w < used; ++w) {
    const std::uint64_t end = begin + chunk + (w < extra ? 1 : 0);
    pool.emplace_back([&, w, begin, end] {
      try {
        block(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void validate_grid(std::span<const double> grid, const char* name, bool allow_zero) {
  if (grid.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = grid[i];
    if (!std::isfinite(g) || g < 0.0 || (!allow_zero && g == 0.0)) {
      throw std::invalid_argument(std::string(name) + " grid entries must be finite and positive");
    }
    if (i > 0 && !(g > grid[i - 1])) {
      throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
    }
  }
}

void validate_trials(std::uint64_t trials) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
}

TailRow make_row(double threshold, std::uint64_t hits, std::uint64_t trials) {
  TailRow row;
  row.threshold = threshold;
  row.trials = trials;
  row.hits = hits;
  row.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  row.ci = wilson_interval(hits, trials);
  return row;
}

CurveMetadata base_metadata(std::string operation, const EnsembleSpec& spec, const RunOptions& options) {
  CurveMetadata meta;
  meta.operation = std::move(operation);
  meta.spec_digest = spec.digest();
  meta.seed = options.seed;
  meta.rows = spec.rows();
  meta.cols = spec.cols();
  return meta;
}

// E chi_N^p / sigma^p for N i.i.d. standard gaussians.
double chi_moment(std::size_t dim, double p) {
  const double n = static_cast<double>(dim);
  return std::exp(0.5 * p * std::log(2.0) + std::lgamma(0.5 * (n + p)) - std::lgamma(0.5 * n));
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::vector<double> run_trials(std::uint64_t trials, std::size_t workers,
                               const std::function<double(std::uint64_t)>& fn) {
  std::vector<double> out(trials);
  run_blocks(trials, workers, [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t t = begin; t < end; ++t) out[t] = fn(t);
  });
  return out;
}

std::vector<double> run_trials_multi(std::uint64_t trials, std::size_t workers, std::size_t width,
                                     const std::function<void(std::uint64_t, std::span<double>)>& fn) {
  std::vector<double> out(trials * width);
  run_blocks(trials, workers, [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t t = begin; t < end; ++t) fn(t, std::span<double>(out.data() + t * width, width));
  });
  return out;
}

std::vector<TailRow> count_hits(std::span<const double> statistics, std::span<const double> thresholds,
                                TailSide side) {
  if (statistics.empty()) throw std::invalid_argument("count_hits: no trials");
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw std::invalid_argument("count_hits: thresholds must increase");
  }
  std::vector<double> sorted(statistics.begin(), statistics.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<TailRow> rows;
  rows.reserve(thresholds.size());
  for (const double th : thresholds) {
    std::uint64_t hits = 0;
    if (side == TailSide::lower) {
      hits = static_cast<std::uint64_t>(std::upper_bound(sorted.begin(), sorted.end(), th) - sorted.begin());
    } else {
      hits = static_cast<std::uint64_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), th));
    }
    rows.push_back(make_row(th, hits, sorted.size()));
  }
  return rows;
}

ExponentFit fit_exponent(const TailCurve& curve) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& row : curve.rows) {
    if (row.trials == 0 || !(row.threshold > 0.0)) continue;
    const double floor = 10.0 / static_cast<double>(row.trials);
    if (row.p_hat >= floor && row.p_hat <= 0.5) {
      x.push_back(std::log(row.threshold));
      y.push_back(std::log(row.p_hat));
    }
  }
  if (x.size() < 3) {
    throw InsufficientData("insufficient data: " + std::to_string(x.size()) +
                           " rows with p_hat in [10/trials, 0.5], need 3");
  }
  const LineFit line = fit_line(x, y);
  return {line.slope, line.intercept, line.residual_rms, x.size()};
}

double sigma_scale(std::size_t rows, std::size_t cols) {
  return std::sqrt(static_cast<double>(rows) + 1.0) - std::sqrt(static_cast<double>(cols));
}

TailCurve sigma_tail_curve(const EnsembleSpec& spec, std::span<const double> eps_grid, std::uint64_t trials,
                           const RunOptions& options) {
  validate_grid(eps_grid, "epsilon", true);
  validate_trials(trials);
  const double scale = sigma_scale(spec.rows(), spec.cols());
  const auto sigmas = run_trials(trials, options.workers, [&](std::uint64_t t) {
    Stream stream = Stream::substream(options.seed, t, kLaneMatrix);
    return smallest_singular_value(sample_matrix(spec, stream));
  });
  std::vector<double> thresholds(eps_grid.size());
  std::transform(eps_grid.begin(), eps_grid.end(), thresholds.begin(), [&](double e) { return e * scale; });

  TailCurve curve;
  curve.rows = count_hits(sigmas, thresholds);
  for (std::size_t i = 0; i < eps_grid.size(); ++i) curve.rows[i].threshold = eps_grid[i];
  curve.meta = base_metadata("sigma_tail_curve", spec, options);
  curve.meta.extra["scale"] = scale;
  curve.meta.extra["d"] = spec.rows() - spec.cols() + 1;
  return curve;
}

double bkappa_deviation_bound(std::size_t d, double beta, double kappa) {
  const double dd = static_cast<double>(d);
  return std::exp(dd * std::log(2.0) + (1.0 + beta / 2.0) * dd / std::exp(1.0) -
                  (2.0 + beta) * dd * std::log(kappa));
}

std::optional<double> column_norm_moment(const EnsembleSpec& spec, std::size_t col, double beta) {
  if (col >= spec.cols()) throw std::out_of_range("column_norm_moment: column out of range");
  if (!(beta > 0.0)) throw std::invalid_argument("column_norm_moment: need beta > 0");
  const std::size_t rows = spec.rows();

  bool centered_gaussian = true;
  const double var0 = spec.entry(0, col).variance();
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& e = spec.entry(i, col);
    centered_gaussian = centered_gaussian && e.family() == Family::gaussian && e.mean() == 0.0 &&
                        e.variance() == var0;
  }
  if (centered_gaussian) return std::pow(var0, 1.0 + beta / 2.0) * chi_moment(rows, 2.0 + beta);

  if (beta == 2.0) {
    // E (sum x_i^2)^2 = sum E x_i^4 + sum_{i != j} E x_i^2 E x_j^2
    double m4 = 0.0;
    double m2 = 0.0;
    double m2sq = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const auto& e = spec.entry(i, col);
      const double fourth = e.fourth_raw_moment();
      if (!std::isfinite(fourth)) return std::nullopt;
      const double second = e.second_raw_moment();
      m4 += fourth;
      m2 += second;
      m2sq += second * second;
    }
    return m4 + m2 * m2 - m2sq;
  }
  return std::nullopt;
}

DeviationTable bkappa_deviation_curve(const EnsembleSpec& spec, std::span<const double> kappa_grid,
                                      std::uint64_t trials, double c_factor, double beta,
                                      const RunOptions& options) {
  validate_grid(kappa_grid, "kappa", false);
  validate_trials(trials);
  if (kappa_grid.front() <= 1.0) throw std::invalid_argument("kappa grid entries must exceed 1");
  if (!(c_factor > 0.0) || !std::isfinite(c_factor)) throw std::invalid_argument("C_factor must be positive");

  double moment_constant = 0.0;
  for (std::size_t j = 0; j < spec.cols(); ++j) {
    const auto moment = column_norm_moment(spec, j, beta);
    if (!moment) {
      throw std::invalid_argument("bkappa_deviation_curve: no closed form for E||W e_" + std::to_string(j) +
                                  "||^{2+beta}");
    }
    const double second = spec.expected_column_norm_sq(j);
    moment_constant = std::max(moment_constant, std::pow(*moment, 1.0 / (1.0 + beta / 2.0)) / second);
  }
  if (c_factor < moment_constant * (1.0 - 1e-12)) {
    throw std::invalid_argument("bkappa_deviation_curve: C_factor " + format_double(c_factor) +
                                " is below the column moment constant " + format_double(moment_constant));
  }

  const double expected = spec.expected_hs_norm_sq();
  const double target = c_factor * expected;
  const std::size_t width = kappa_grid.size();
  const auto values = run_trials_multi(trials, options.workers, width, [&](std::uint64_t t, std::span<double> out) {
    Stream stream = Stream::substream(options.seed, t, kLaneMatrix);
    const auto y = column_norms_sq(sample_matrix(spec, stream));
    const double d = static_cast<double>(y.size());
    for (std::size_t k = 0; k < width; ++k) {
      out[k] = solve_weighted_min_log(y, -2.0 * d * std::log(kappa_grid[k])).value;
    }
  });

  DeviationTable table;
  table.expected_hs_norm_sq = expected;
  table.moment_constant = moment_constant;
  for (std::size_t k = 0; k < width; ++k) {
    std::uint64_t hits = 0;
    for (std::uint64_t t = 0; t < trials; ++t) hits += values[t * width + k] >= target ? 1 : 0;
    const TailRow base = make_row(kappa_grid[k], hits, trials);
    table.rows.push_back({kappa_grid[k], trials, hits, base.p_hat, base.ci,
                          bkappa_deviation_bound(spec.cols(), beta, kappa_grid[k])});
  }
  table.meta = base_metadata("bkappa_deviation_curve", spec, options);
  table.meta.extra["C_factor"] = c_factor;
  table.meta.extra["beta"] = beta;
  table.meta.extra["expected_hs_norm_sq"] = expected;
  table.meta.extra["moment_constant"] = moment_constant;
  return table;
}

ProjectionRatio projection_moment_ratio(const EnsembleSpec& spec, SubspaceMode mode, std::size_t codim,
                                        double exponent, std::uint64_t trials, const RunOptions& options) {
  validate_trials(trials);
  if (spec.cols() != 1) throw std::invalid_argument("projection_moment_ratio: spec must have one column");
  const std::size_t n = spec.rows();
  if (codim < 1 || codim > n) throw std::invalid_argument("projection_moment_ratio: need 1 <= d <= n");
  if (!(exponent >= 2.0) || !std::isfinite(exponent)) {
    throw std::invalid_argument("projection_moment_ratio: exponent must be 2 or 2 + beta");
  }
  const bool second_moment = exponent == 2.0;
  if (second_moment && !spec.is_isotropic()) {
    throw std::invalid_argument("projection_moment_ratio: the d/n equality needs an isotropic spec");
  }
  if (second_moment && trials < 2) throw std::invalid_argument("projection_moment_ratio: need trials >= 2");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto d = static_cast<Eigen::Index>(codim);
  const auto sq = run_trials(trials, options.workers, [&](std::uint64_t t) {
    Stream xs = Stream::substream(options.seed, t, kLaneMatrix);
    const Eigen::VectorXd x = sample_matrix(spec, xs).col(0);
    if (mode == SubspaceMode::coordinate) return x.head(d).squaredNorm();
    Stream hs = Stream::substream(options.seed, t, kLaneSubspace);
    Eigen::MatrixXd g(rows, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = hs.normal();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, d);
    return (q.transpose() * x).squaredNorm();
  });

  ProjectionRatio out;
  out.dim = n;
  out.codim = codim;
  out.exponent = exponent;
  const double count = static_cast<double>(trials);
  if (second_moment) {
    RunningMoments acc;
    for (const double v : sq) acc.add(v);
    const double denom = spec.expected_column_norm_sq(0);
    out.estimate = acc.mean() / denom;
    out.standard_error = acc.standard_error() / denom;
    out.reference = static_cast<double>(codim) / static_cast<double>(n);
    return out;
  }

  // f(a, b) = a / b^q with a = mean ||PX||^p and b = mean ||PX||^2
  const double q = exponent / 2.0;
  double a = 0.0;
  double b = 0.0;
  for (const double v : sq) {
    a += std::pow(v, q);
    b += v;
  }
  a /= count;
  b /= count;
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  for (const double v : sq) {
    const double da = std::pow(v, q) - a;
    const double db = v - b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  const double dof = std::max(count - 1.0, 1.0);
  saa /= dof;
  sbb /= dof;
  sab /= dof;
  const double ga = 1.0 / std::pow(b, q);
  const double gb = -q * a / std::pow(b, q + 1.0);
  out.estimate = a * ga;
  out.standard_error = std::sqrt(std::max(0.0, ga * ga * saa + 2.0 * ga * gb * sab + gb * gb * sbb) / count);
  return out;
}

DistanceCurves distance_smallball_curve(const EnsembleSpec& x_spec, const EnsembleSpec& m_spec,
                                        std::span<const double> t_grid, std::uint64_t trials,
                                        const RunOptions& options, double shift) {
  validate_grid(t_grid, "t", true);
  validate_trials(trials);
  if (x_spec.cols() != 1) throw std::invalid_argument("distance_smallball_curve: X spec must have one column");
  if (x_spec.rows() != m_spec.rows()) throw std::invalid_argument("distance_smallball_curve: X and M row counts differ");
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw std::invalid_argument("distance_smallball_curve: bad shift");
  const std::size_t big_n = m_spec.rows();
  const std::size_t d = big_n - m_spec.cols();
  if (d < 1 || 2 * d > big_n) throw std::invalid_argument("distance_smallball_curve: need 1 <= d <= N/2");

  Eigen::VectorXd v(static_cast<Eigen::Index>(big_n));
  Stream vs = Stream::substream(options.seed, std::numeric_limits<std::uint64_t>::max(), kLaneShift);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = vs.normal();
  v *= shift / std::sqrt(static_cast<double>(big_n));

  const auto dists = run_trials_multi(trials, options.workers, 2, [&](std::uint64_t t, std::span<double> out) {
    Stream xs = Stream::substream(options.seed, t, kLaneMatrix);
    Stream ms = Stream::substream(options.seed, t, kLaneSubspace);
    const Eigen::VectorXd x = sample_matrix(x_spec, xs).col(0);
    const Eigen::MatrixXd q = complement_basis(sample_matrix(m_spec, ms));
    const Eigen::VectorXd px = q * (q.transpose() * x);
    out[0] = px.norm();
    out[1] = (px - v).norm();
  });

  const double root_d = std::sqrt(static_cast<double>(d));
  std::vector<double> thresholds(t_grid.size());
  std::transform(t_grid.begin(), t_grid.end(), thresholds.begin(), [&](double t) { return t * root_d; });
  std::vector<double> centered(trials);
  std::vector<double> shifted(trials);
  for (std::uint64_t t = 0; t < trials; ++t) {
    centered[t] = dists[2 * t];
    shifted[t] = dists[2 * t + 1];
  }

  DistanceCurves out;
  out.centered.rows = count_hits(centered, thresholds);
  out.shifted.rows = count_hits(shifted, thresholds);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    out.centered.rows[i].threshold = t_grid[i];
    out.shifted.rows[i].threshold = t_grid[i];
  }
  out.centered.meta = base_metadata("distance_smallball_curve", m_spec, options);
  out.centered.meta.extra["d"] = d;
  out.centered.meta.extra["x_spec_digest"] = x_spec.digest();
  out.shifted.meta = out.centered.meta;
  out.centered.meta.extra["shift_norm"] = 0.0;
  out.shifted.meta.extra["shift_norm"] = v.norm();
  return out;
}

double spread_infimum_proxy(const Eigen::Ref<const Eigen::MatrixXd>& a, std::span<const std::size_t> columns,
                            std::size_t probes, Stream& stream, double low, double high) {
  if (columns.empty()) throw std::invalid_argument("spread_infimum_proxy: J is empty");
  if (probes == 0) throw std::invalid_argument("spread_infimum_proxy: need at least one probe");
  const ProjectedSubmatrix w = projected_submatrix(a, columns);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < probes; ++k) {
    const auto x = sample_spread(columns.size(), low, high, stream);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    best = std::min(best, (w.w * xv).norm());
  }
  return best;
}

double spread_infimum_proxy(const EnsembleSpec& spec, std::span<const std::size_t> columns, std::size_t probes,
                            Stream& stream, double low, double high) {
  const Eigen::MatrixXd a = sample_matrix(spec, stream);
  return spread_infimum_proxy(a, columns, probes, stream, low, high);
}

ProxyDistribution spread_proxy_distribution(const EnsembleSpec& spec, std::span<const std::size_t> columns,
                                            std::size_t probes, std::uint64_t trials, const RunOptions& options) {
  validate_trials(trials);
  ProxyDistribution out;
  out.values = run_trials(trials, options.workers, [&](std::uint64_t t) {
    Stream stream = Stream::substream(options.seed, t, kLaneMatrix);
    return spread_infimum_proxy(spec, columns, probes, stream);
  });
  std::vector<double> sorted = out.values;
  std::sort(sorted.begin(), sorted.end());
  for (const double level : {0.0, 0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99, 1.0}) {
    out.quantiles.emplace_back(level, quantile_sorted(sorted, level));
  }
  out.meta = base_metadata("spread_infimum_proxy", spec, options);
  out.meta.extra["d"] = columns.size();
  out.meta.extra["probes"] = probes;
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void write_tail_csv(std::ostream& out, std::span<const TailRow> rows) {
  out << "epsilon,trials,hits,p_hat,wilson_lo,wilson_hi\n";
  for (const auto& r : rows) {
    out << format_double(r.threshold) << ',' << r.trials << ',' << r.hits << ',' << format_double(r.p_hat) << ','
        << format_double(r.ci.lo) << ',' << format_double(r.ci.hi) << '\n';
  }
}

nlohmann::json metadata_to_json(const CurveMetadata& meta) {
  nlohmann::json j{{"spec_digest", meta.spec_digest},
                   {"seed", meta.seed},
                   {"N", meta.rows},
                   {"n", meta.cols},
                   {"operation", meta.operation},
                   {"version", kVersion}};
  for (const auto& [key, value] : meta.extra.items()) j[key] = value;
  return j;
}

}  // namespace sigmafloor
