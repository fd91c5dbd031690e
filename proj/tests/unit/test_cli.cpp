#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "checks.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "experiment.hpp"

namespace sigmafloor::cli {
namespace {

namespace fs = std::filesystem;

nlohmann::json gaussian_ensemble(int rows, int cols) {
  return {{"N", rows},
          {"n", cols},
          {"profile", {{"kind", "constant"}, {"entries", {{{"family", "gaussian"}}}}}}};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("sigmafloor_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const nlohmann::json& j, const std::string& name = "config.json") {
    const fs::path path = dir_ / name;
    std::ofstream(path) << j.dump(2);
    return path;
  }

  fs::path dir_;
};

TEST(Config, RoundTrip) {
  const nlohmann::json j{{"operation", "bkappa_deviation_curve"},
                         {"seed", 5},
                         {"ensemble", gaussian_ensemble(5, 3)},
                         {"kappa_grid", {1.5, 2.0}},
                         {"trials", 100},
                         {"C_factor", 2.0},
                         {"beta", 2.0},
                         {"out", "x"}};
  const auto config = parse_config(j);
  EXPECT_EQ(config.operation, Operation::bkappa_deviation_curve);
  EXPECT_EQ(*config.c_factor, 2.0);
  EXPECT_EQ(config_to_json(config), j);
}

TEST(Config, ErrorsNameTheField) {
  nlohmann::json j{{"operation", "sigma_tail_curve"},
                   {"seed", 1},
                   {"ensemble", gaussian_ensemble(3, 3)},
                   {"epsilon_grid", {0.1}},
                   {"trials", 10}};
  EXPECT_NO_THROW(parse_config(j));

  auto bad = j;
  bad["bogus"] = 1;
  try {
    parse_config(bad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus"), std::string::npos) << e.what();
  }

  bad = j;
  bad["operation"] = "frobnicate";
  try {
    parse_config(bad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("operation"), std::string::npos) << e.what();
  }

  bad = j;
  bad.erase("seed");
  try {
    parse_config(bad);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("seed"), std::string::npos) << e.what();
  }

  // kappa_grid does not belong to sigma_tail_curve
  bad = j;
  bad["kappa_grid"] = {2.0};
  EXPECT_THROW(parse_config(bad), ConfigError);

  bad = j;
  bad["trials"] = "many";
  EXPECT_THROW(parse_config(bad), ConfigError);
}

TEST_F(TempDir, EnsemblePathResolvesRelativeToConfig) {
  std::ofstream(dir_ / "ens.json") << gaussian_ensemble(4, 2).dump();
  const nlohmann::json j{{"operation", "check_assumptions"}, {"seed", 1}, {"ensemble", "ens.json"}, {"trials", 10}};
  const auto config = load_config(write_config(j));
  EXPECT_EQ(resolve_ensemble(*config.ensemble, config.base_dir, "ensemble").rows(), 4U);
}

TEST_F(TempDir, RunUnknownOperationExitsTwo) {
  const auto path = write_config({{"operation", "nope"}, {"seed", 1}});
  std::ostringstream out, err;
  EXPECT_EQ(command_run({path.string(), std::nullopt, std::nullopt, 1}, out, err), kExitConfig);
  EXPECT_NE(err.str().find("operation"), std::string::npos);
}

TEST_F(TempDir, RunMissingConfigExitsTwo) {
  std::ostringstream out, err;
  EXPECT_EQ(command_run({(dir_ / "absent.json").string(), std::nullopt, std::nullopt, 1}, out, err),
            kExitConfig);
}

TEST_F(TempDir, BkappaOperationOnDiagonalMatrix) {
  const auto path = write_config({{"operation", "bkappa"},
                                  {"seed", 0},
                                  {"matrix", {{2.0, 0.0}, {0.0, 1.0}}},
                                  {"kappa", std::sqrt(2.0)}});
  std::ostringstream out, err;
  const std::string prefix = (dir_ / "diag").string();
  ASSERT_EQ(command_run({path.string(), std::nullopt, prefix, 1}, out, err), kExitOk) << err.str();
  const auto j = nlohmann::json::parse(slurp(prefix + ".json"));
  EXPECT_NEAR(j.at("value").get<double>(), 2.0, 1e-14);
  EXPECT_EQ(j.at("S"), nlohmann::json::array({0}));
}

TEST_F(TempDir, ReplayIsByteIdenticalAcrossWorkers) {
  const auto path = write_config({{"operation", "sigma_tail_curve"},
                                  {"seed", 77},
                                  {"ensemble", gaussian_ensemble(6, 5)},
                                  {"epsilon_grid", {0.1, 0.2, 0.4}},
                                  {"trials", 3000}});
  std::ostringstream out, err;
  const std::string a = (dir_ / "a").string();
  const std::string b = (dir_ / "b").string();
  ASSERT_EQ(command_run({path.string(), std::nullopt, a, 1}, out, err), kExitOk) << err.str();
  ASSERT_EQ(command_run({path.string(), std::nullopt, b, 3}, out, err), kExitOk) << err.str();
  EXPECT_EQ(slurp(a + ".csv"), slurp(b + ".csv"));
  EXPECT_EQ(slurp(a + ".json"), slurp(b + ".json"));
  EXPECT_EQ(slurp(a + ".csv").substr(0, 46), "epsilon,trials,hits,p_hat,wilson_lo,wilson_hi\n");

  // --seed overrides the config seed
  const std::string c = (dir_ / "c").string();
  ASSERT_EQ(command_run({path.string(), 78, c, 1}, out, err), kExitOk);
  EXPECT_NE(slurp(a + ".csv"), slurp(c + ".csv"));
}

TEST(Execute, EveryOperationProducesFiles) {
  const auto ens = gaussian_ensemble(6, 3);
  const nlohmann::json configs[] = {
      {{"operation", "projection_moment_ratio"}, {"seed", 1}, {"ensemble", gaussian_ensemble(8, 1)},
       {"trials", 200}, {"d", 2}},
      {{"operation", "distance_smallball_curve"}, {"seed", 1}, {"ensemble", gaussian_ensemble(6, 1)},
       {"subspace_ensemble", gaussian_ensemble(6, 4)}, {"t_grid", {0.1, 0.5}}, {"trials", 200}},
      {{"operation", "spread_infimum_proxy"}, {"seed", 1}, {"ensemble", ens}, {"columns", {0, 1}},
       {"probes", 4}, {"trials", 50}},
      {{"operation", "check_assumptions"}, {"seed", 1}, {"ensemble", ens}, {"trials", 100}},
  };
  const std::size_t expected_files[] = {1, 4, 2, 1};
  for (std::size_t k = 0; k < std::size(configs); ++k) {
    const auto result = execute(parse_config(configs[k]), 2);
    EXPECT_EQ(result.files.size(), expected_files[k]) << configs[k].at("operation");
    for (const auto& f : result.files) EXPECT_FALSE(f.content.empty());
  }
  EXPECT_EQ(default_prefix(parse_config(configs[0])), "sigmafloor_projection_moment_ratio");
}

TEST(Commands, BkappaFromYAndW) {
  std::ostringstream out, err;
  EXPECT_EQ(command_bkappa({std::nullopt, "[4, 1]", std::nullopt, 0.25}, out, err), kExitOk) << err.str();
  EXPECT_NEAR(nlohmann::json::parse(out.str()).at("value").get<double>(), 2.0, 1e-15);
  std::ostringstream out2, err2;
  EXPECT_EQ(command_bkappa({std::nullopt, "[4, -1]", std::nullopt, 0.25}, out2, err2), kExitConfig);
  std::ostringstream out3, err3;
  EXPECT_EQ(command_bkappa({std::nullopt, "[4, 1]", 2.0, 0.25}, out3, err3), kExitConfig);
}

TEST(Commands, ClassifyAndConcentration) {
  std::ostringstream out, err;
  EXPECT_EQ(command_classify({"0.6,0.8", std::nullopt, 0.5, 0.7}, out, err), kExitOk) << err.str();
  EXPECT_EQ(nlohmann::json::parse(out.str()).at("is_compressible"), true);
  std::ostringstream out2, err2;
  EXPECT_EQ(command_classify({"1,1", std::nullopt, 0.5, 0.2}, out2, err2), kExitConfig);

  std::ostringstream out3, err3;
  ConcentrationArgs c;
  c.dist = "rademacher";
  c.radius = 0.5;
  c.samples = 10000;
  c.seed = 3;
  EXPECT_EQ(command_concentration(c, out3, err3), kExitOk) << err3.str();
  EXPECT_NEAR(nlohmann::json::parse(out3.str()).at("q_hat").get<double>(), 0.5, 0.03);
}

TEST(Workers, FlagThenEnvironment) {
  EXPECT_EQ(resolve_workers(3), 3U);
  EXPECT_THROW(resolve_workers(0), ConfigError);
  EXPECT_THROW(resolve_workers(5000), ConfigError);
  ::setenv("SIGMAFLOOR_WORKERS", "2", 1);
  EXPECT_EQ(resolve_workers(std::nullopt), 2U);
  EXPECT_EQ(resolve_workers(5), 5U);
  ::setenv("SIGMAFLOOR_WORKERS", "abc", 1);
  EXPECT_THROW(resolve_workers(std::nullopt), ConfigError);
  ::unsetenv("SIGMAFLOOR_WORKERS");
  EXPECT_GE(resolve_workers(std::nullopt), 1U);
}

TEST(Selftest, CorruptedSolverIsCaught) {
  CheckContext ctx;
  ctx.solver = [](std::span<const double> y, double log_w) {
    auto s = solve_weighted_min_log(y, log_w);
    s.value *= 1.001;
    return s;
  };
  const auto direct = check_bkappa_oracles(ctx, 50);
  EXPECT_FALSE(direct.passed);

  std::ostringstream out;
  EXPECT_EQ(command_selftest(ctx, out), kExitCheckFailed);
  EXPECT_NE(out.str().find("FAIL  1 bkappa_oracle_equivalence"), std::string::npos) << out.str();
}

TEST(Selftest, PassesWithTheRealSolver) {
  std::ostringstream out;
  EXPECT_EQ(command_selftest(CheckContext{}, out), kExitOk) << out.str();
}

TEST(PrintResult, Format) {
  std::ostringstream out;
  print_result(out, {3, "name", true, "ok", 1.234, 10.0});
  EXPECT_EQ(out.str().substr(0, 14), "PASS  3 name  ");
}

}  // namespace
}  // namespace sigmafloor::cli
