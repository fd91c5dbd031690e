#include "experiment.hpp"

#include <fstream>
#include <sstream>

#include "sigmafloor/bkappa.hpp"
#include "sigmafloor/linalg.hpp"
#include "sigmafloor/montecarlo.hpp"

namespace sigmafloor::cli {

namespace {

using nlohmann::json;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv(std::span<const TailRow> rows) {
  std::ostringstream out;
  write_tail_csv(out, rows);
  return out.str();
}

json fit_or_null(const TailCurve& curve) {
  try {
    const ExponentFit fit = fit_exponent(curve);
    return json{{"slope", fit.slope},
                {"intercept", fit.intercept},
                {"residual_rms", fit.residual_rms},
                {"rows_used", fit.rows_used}};
  } catch (const InsufficientData& e) {
    return json{{"error", e.what()}};
  }
}

Eigen::MatrixXd resolve_matrix(const json& source, const std::filesystem::path& base_dir) {
  if (source.is_string()) {
    std::filesystem::path path = source.get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    try {
      return read_csv_matrix_file(path.string());
    } catch (const std::exception& e) {
      throw ConfigError(std::string("field 'matrix': ") + e.what());
    }
  }
  const std::size_t rows = source.size();
  if (rows == 0 || !source.at(0).is_array() || source.at(0).empty()) {
    throw ConfigError("field 'matrix': expected a nonempty array of rows");
  }
  const std::size_t cols = source.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = source.at(i);
    if (!row.is_array() || row.size() != cols) throw ConfigError("field 'matrix': rows must have equal length");
    for (std::size_t j = 0; j < cols; ++j) {
      if (!row.at(j).is_number()) throw ConfigError("field 'matrix': entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row.at(j).get<double>();
    }
  }
  return m;
}

EnsembleSpec ensemble_of(const ExperimentConfig& c) { return resolve_ensemble(*c.ensemble, c.base_dir, "ensemble"); }

ExperimentResult run_sigma_tail(const ExperimentConfig& c, const RunOptions& options) {
  const TailCurve curve = sigma_tail_curve(ensemble_of(c), *c.epsilon_grid, *c.trials, options);
  json meta = metadata_to_json(curve.meta);
  meta["fit"] = fit_or_null(curve);
  return {{{".csv", csv(curve.rows)}, {".json", dump(meta)}}, curve.rows.size()};
}

ExperimentResult run_deviation(const ExperimentConfig& c, const RunOptions& options) {
  const DeviationTable table =
      bkappa_deviation_curve(ensemble_of(c), *c.kappa_grid, *c.trials, *c.c_factor, *c.beta, options);
  std::vector<TailRow> rows;
  json bounds = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({r.kappa, r.trials, r.hits, r.p_hat, r.ci});
    bounds.push_back({{"kappa", r.kappa}, {"bound", r.bound}, {"upper99", wilson_upper(r.hits, r.trials)}});
  }
  json meta = metadata_to_json(table.meta);
  meta["bounds"] = bounds;
  return {{{".csv", csv(rows)}, {".json", dump(meta)}}, rows.size()};
}

ExperimentResult run_projection(const ExperimentConfig& c, const RunOptions& options) {
  const EnsembleSpec spec = ensemble_of(c);
  const SubspaceMode mode = c.mode.value_or("coordinate") == "random" ? SubspaceMode::random : SubspaceMode::coordinate;
  const double exponent = c.p.value_or(2.0);
  const ProjectionRatio ratio = projection_moment_ratio(spec, mode, *c.d, exponent, *c.trials, options);
  CurveMetadata meta;
  meta.operation = "projection_moment_ratio";
  meta.spec_digest = spec.digest();
  meta.seed = options.seed;
  meta.rows = spec.rows();
  meta.cols = spec.cols();
  json j = metadata_to_json(meta);
  j["mode"] = mode == SubspaceMode::random ? "random" : "coordinate";
  j["d"] = ratio.codim;
  j["p"] = ratio.exponent;
  j["trials"] = *c.trials;
  j["estimate"] = ratio.estimate;
  j["standard_error"] = ratio.standard_error;
  j["reference"] = ratio.reference ? json(*ratio.reference) : json(nullptr);
  return {{{".json", dump(j)}}, 1};
}

ExperimentResult run_distance(const ExperimentConfig& c, const RunOptions& options) {
  const EnsembleSpec x = ensemble_of(c);
  const EnsembleSpec m = resolve_ensemble(*c.subspace_ensemble, c.base_dir, "subspace_ensemble");
  const DistanceCurves curves = distance_smallball_curve(x, m, *c.t_grid, *c.trials, options, c.shift.value_or(0.25));
  json meta = metadata_to_json(curves.centered.meta);
  meta["fit"] = fit_or_null(curves.centered);
  json shifted = metadata_to_json(curves.shifted.meta);
  shifted["fit"] = fit_or_null(curves.shifted);
  return {{{".csv", csv(curves.centered.rows)},
           {"_shifted.csv", csv(curves.shifted.rows)},
           {".json", dump(meta)},
           {"_shifted.json", dump(shifted)}},
          curves.centered.rows.size() + curves.shifted.rows.size()};
}

ExperimentResult run_spread_proxy(const ExperimentConfig& c, const RunOptions& options) {
  const ProxyDistribution dist = spread_proxy_distribution(ensemble_of(c), *c.columns, *c.probes, *c.trials, options);
  std::ostringstream table;
  table << "trial,proxy\n";
  for (std::size_t t = 0; t < dist.values.size(); ++t) table << t << ',' << format_double(dist.values[t]) << '\n';
  json meta = metadata_to_json(dist.meta);
  json q = json::array();
  for (const auto& [level, value] : dist.quantiles) q.push_back({{"level", level}, {"value", value}});
  meta["quantiles"] = q;
  meta["columns"] = *c.columns;
  return {{{".csv", table.str()}, {".json", dump(meta)}}, dist.values.size()};
}

ExperimentResult run_bkappa(const ExperimentConfig& c) {
  const Eigen::MatrixXd m = resolve_matrix(*c.matrix, c.base_dir);
  json j = solution_to_json(bkappa(m, *c.kappa));
  j["operation"] = "bkappa";
  j["kappa"] = *c.kappa;
  j["version"] = kVersion;
  return {{{".json", dump(j)}}, 1};
}

ExperimentResult run_check_assumptions(const ExperimentConfig& c) {
  const EnsembleSpec spec = ensemble_of(c);
  Stream stream = Stream::substream(c.seed, 0);
  const AssumptionReport report = check_assumptions(spec, *c.trials, stream);
  json j{{"operation", "check_assumptions"},
         {"spec_digest", spec.digest()},
         {"seed", c.seed},
         {"N", spec.rows()},
         {"n", spec.cols()},
         {"version", kVersion},
         {"all_hold", report.all_hold()},
         {"report", report_to_json(report)}};
  return {{{".json", dump(j)}}, report.results.size()};
}

}  // namespace

ExperimentResult execute(const ExperimentConfig& config, std::size_t workers) {
  const RunOptions options{config.seed, workers};
  switch (config.operation) {
    case Operation::sigma_tail_curve:
      return run_sigma_tail(config, options);
    case Operation::bkappa_deviation_curve:
      return run_deviation(config, options);
    case Operation::projection_moment_ratio:
      return run_projection(config, options);
    case Operation::distance_smallball_curve:
      return run_distance(config, options);
    case Operation::spread_infimum_proxy:
      return run_spread_proxy(config, options);
    case Operation::bkappa:
      return run_bkappa(config);
    case Operation::check_assumptions:
      return run_check_assumptions(config);
  }
  throw ConfigError("field 'operation': unsupported");
}

std::vector<std::string> write_outputs(const ExperimentResult& result, const std::string& prefix) {
  std::vector<std::string> paths;
  for (const auto& file : result.files) {
    const std::string path = prefix + file.suffix;
    std::ofstream out(path, std::ios::binary);
    out << file.content;
    if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
    paths.push_back(path);
  }
  return paths;
}

std::string default_prefix(const ExperimentConfig& config) {
  return "sigmafloor_" + std::string(to_string(config.operation));
}

}  // namespace sigmafloor::cli
