#include "commands.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "experiment.hpp"
#include "sigmafloor/anticoncentration.hpp"
#include "sigmafloor/bkappa.hpp"
#include "sigmafloor/linalg.hpp"
#include "sigmafloor/sphere.hpp"

namespace sigmafloor::cli {

namespace {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::out_of_range& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "invalid JSON: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

std::size_t parse_workers(long long value, const char* source) {
  if (value < 1 || value > 1024) {
    throw ConfigError(std::string(source) + ": workers must be in [1, 1024]");
  }
  return static_cast<std::size_t>(value);
}

}  // namespace

std::size_t resolve_workers(std::optional<long long> flag) {
  if (flag) return parse_workers(*flag, "--workers");
  if (const char* env = std::getenv("SIGMAFLOOR_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("SIGMAFLOOR_WORKERS: not an integer");
    return parse_workers(v, "SIGMAFLOOR_WORKERS");
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

int command_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto start = std::chrono::steady_clock::now();
    ExperimentConfig config = load_config(args.config);
    if (args.seed) config.seed = *args.seed;
    const std::string prefix = args.out ? *args.out : config.out ? *config.out : default_prefix(config);
    const ExperimentResult result = execute(config, args.workers);
    const auto paths = write_outputs(result, prefix);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out << to_string(config.operation) << ": rows=" << result.rows << " elapsed=" << std::fixed
        << std::setprecision(3) << elapsed << std::defaultfloat << "s out=";
    for (std::size_t i = 0; i < paths.size(); ++i) out << (i ? "," : "") << paths[i];
    out << '\n';
    return kExitOk;
  });
}

int command_selftest(const CheckContext& ctx, std::ostream& out) { return run_selftest(ctx, out); }

int command_bkappa(const BkappaArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.matrix_path.has_value() == args.y_json.has_value()) {
      throw ConfigError("give exactly one of --matrix and --y");
    }
    if (args.kappa.has_value() == args.w.has_value()) throw ConfigError("give exactly one of --kappa and --w");
    BkappaSolution solution;
    if (args.matrix_path) {
      const Eigen::MatrixXd m = read_csv_matrix_file(*args.matrix_path);
      if (args.kappa) {
        solution = bkappa(m, *args.kappa);
      } else {
        solution = solve_weighted_min(column_norms_sq(m), *args.w);
      }
    } else {
      const auto y = nlohmann::json::parse(*args.y_json).get<std::vector<double>>();
      if (args.kappa) {
        if (!(*args.kappa > 1.0)) throw std::invalid_argument("need kappa > 1");
        solution = solve_weighted_min_log(y, -2.0 * static_cast<double>(y.size()) * std::log(*args.kappa));
      } else {
        solution = solve_weighted_min(y, *args.w);
      }
    }
    out << solution_to_json(solution).dump() << '\n';
    return kExitOk;
  });
}

int command_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.x.has_value() == args.path.has_value()) throw ConfigError("give exactly one of --x and --input");
    std::vector<double> x;
    if (args.x) {
      x = parse_csv_line(*args.x);
    } else {
      std::ifstream in(*args.path);
      if (!in) throw std::ios_base::failure("cannot open '" + *args.path + "'");
      std::string line;
      while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto row = parse_csv_line(line);
        x.insert(x.end(), row.begin(), row.end());
      }
    }
    out << classification_to_json(classify(x, args.delta, args.rho)).dump() << '\n';
    return kExitOk;
  });
}

int command_concentration(const ConcentrationArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Family family = family_from_string(args.dist);
    if (family == Family::symmetric_pareto && !args.alpha) throw ConfigError("--alpha is required for pareto");
    const ScalarDistribution dist = ScalarDistribution::make(family, args.mean, args.variance, args.alpha.value_or(0.0));
    Stream stream(args.seed);
    const ConcentrationEstimate q = sample_levy_concentration(dist, args.radius, args.samples, stream);
    const nlohmann::json j{{"distribution", distribution_to_json(dist)},
                           {"radius", q.radius},
                           {"samples", q.samples},
                           {"q_hat", q.q_hat},
                           {"max_count", q.max_count},
                           {"center", q.center},
                           {"upper99", q.upper99},
                           {"seed", args.seed}};
    out << j.dump() << '\n';
    return kExitOk;
  });
}

}  // namespace sigmafloor::cli
