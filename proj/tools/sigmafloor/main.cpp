#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "sigmafloor/montecarlo.hpp"

namespace cli = sigmafloor::cli;

int main(int argc, char** argv) {
  CLI::App app{"Smallest singular value experiments and solvers"};
  app.set_version_flag("--version", std::string(sigmafloor::kVersion));
  app.require_subcommand(1);

  std::optional<long long> workers;
  std::optional<std::uint64_t> seed;

  cli::RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run_cmd->add_option("--config", run.config, "Experiment config (JSON)")->required();
  run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out", run.out, "Output path prefix");
  run_cmd->add_option("--workers", workers, "Worker threads (default: SIGMAFLOOR_WORKERS or all cores)");

  auto* selftest_cmd = app.add_subcommand("selftest", "Fast subset of the acceptance checks");
  selftest_cmd->add_option("--seed", seed, "Master seed for the checks");
  selftest_cmd->add_option("--workers", workers, "Worker threads");

  cli::BkappaArgs bk;
  auto* bkappa_cmd = app.add_subcommand("bkappa", "Regularized Hilbert-Schmidt norm of a matrix");
  bkappa_cmd->add_option("--matrix", bk.matrix_path, "CSV matrix");
  bkappa_cmd->add_option("--y", bk.y_json, "JSON array of squared column norms");
  bkappa_cmd->add_option("--kappa", bk.kappa, "kappa > 1 (product floor kappa^{-2n})");
  bkappa_cmd->add_option("--w", bk.w, "Product floor w in (0, 1]");

  cli::ClassifyArgs cl;
  auto* classify_cmd = app.add_subcommand("classify", "Compressible / incompressible classification");
  classify_cmd->add_option("--x", cl.x, "Comma separated unit vector");
  classify_cmd->add_option("--input", cl.path, "CSV file holding the vector");
  classify_cmd->add_option("--delta", cl.delta, "Sparsity fraction")->capture_default_str();
  classify_cmd->add_option("--rho", cl.rho, "Distance threshold")->capture_default_str();

  cli::ConcentrationArgs cc;
  auto* conc_cmd = app.add_subcommand("concentration", "Empirical Levy concentration of a scalar law");
  conc_cmd->add_option("--dist", cc.dist, "gaussian, rademacher, uniform, lattice or pareto")->required();
  conc_cmd->add_option("--radius", cc.radius, "Window half-width a")->capture_default_str();
  conc_cmd->add_option("--samples", cc.samples, "Sample count")->capture_default_str();
  conc_cmd->add_option("--seed", cc.seed, "Seed")->required();
  conc_cmd->add_option("--mean", cc.mean, "Mean")->capture_default_str();
  conc_cmd->add_option("--variance", cc.variance, "Variance")->capture_default_str();
  conc_cmd->add_option("--alpha", cc.alpha, "Pareto tail index (> 2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitConfig;
  }

  std::size_t resolved = 1;
  if (*run_cmd || *selftest_cmd) {
    try {
      resolved = cli::resolve_workers(workers);
    } catch (const cli::ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return cli::kExitConfig;
    }
  }

  if (*run_cmd) {
    run.seed = seed;
    run.workers = resolved;
    return cli::command_run(run, std::cout, std::cerr);
  }
  if (*selftest_cmd) {
    cli::CheckContext ctx;
    if (seed) ctx.seed = *seed;
    ctx.workers = resolved;
    return cli::command_selftest(ctx, std::cout);
  }
  if (*bkappa_cmd) return cli::command_bkappa(bk, std::cout, std::cerr);
  if (*classify_cmd) return cli::command_classify(cl, std::cout, std::cerr);
  return cli::command_concentration(cc, std::cout, std::cerr);
}
