#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "sigmafloor/bkappa.hpp"
#include "sigmafloor/rng.hpp"

namespace sigmafloor {
namespace {

using Vec = std::vector<double>;
using Idx = std::vector<std::size_t>;

TEST(WeightedMin, Examples) {
  auto s = solve_weighted_min(Vec{4, 1}, 0.25);
  EXPECT_NEAR(s.value, 2.0, 1e-15);
  EXPECT_EQ(s.subset, Idx{0});
  EXPECT_NEAR(s.threshold, 1.0, 1e-15);

  s = solve_weighted_min(Vec{1, 0}, 0.25);
  EXPECT_NEAR(s.value, 0.25, 1e-15);
  EXPECT_EQ(s.subset, Idx{0});

  s = solve_weighted_min(Vec{1, 0, 0}, 0.3);
  EXPECT_NEAR(s.value, 0.3, 1e-15);

  // symmetric: both weights 1/2
  s = solve_weighted_min(Vec{1, 1}, 0.25);
  EXPECT_NEAR(s.value, 1.0, 1e-15);
  EXPECT_EQ(s.subset, (Idx{0, 1}));
  EXPECT_NEAR(s.weights[0], 0.5, 1e-15);
  EXPECT_NEAR(s.weights[1], 0.5, 1e-15);
}

TEST(WeightedMin, NoConstraintAtWOne) {
  const auto s = solve_weighted_min(Vec{3, 1, 2}, 1.0);
  EXPECT_DOUBLE_EQ(s.value, 6.0);
  EXPECT_TRUE(s.subset.empty());
  EXPECT_DOUBLE_EQ(s.threshold, 3.0);
}

TEST(WeightedMin, ZeroVector) {
  const auto s = solve_weighted_min(Vec{0, 0, 0}, 0.1);
  EXPECT_DOUBLE_EQ(s.value, 0.0);
  EXPECT_TRUE(s.subset.empty());
}

TEST(WeightedMin, ThreeLevelExample) {
  // S = everything, c = (0.1 * 30)^{1/3}
  const auto s = solve_weighted_min(Vec{5, 3, 2}, 0.1);
  EXPECT_NEAR(s.value, 3.0 * std::cbrt(3.0), 1e-14);
  EXPECT_EQ(s.subset, (Idx{0, 1, 2}));
}

TEST(WeightedMin, RejectsBadInput) {
  EXPECT_THROW(solve_weighted_min(Vec{1, -1}, 0.5), std::invalid_argument);
  EXPECT_THROW(solve_weighted_min(Vec{1}, 0.0), std::invalid_argument);
  EXPECT_THROW(solve_weighted_min(Vec{1}, 1.5), std::invalid_argument);
  EXPECT_THROW(solve_weighted_min(Vec{std::nan("")}, 0.5), std::invalid_argument);
  EXPECT_THROW(solve_weighted_min(Vec{}, 0.5), std::invalid_argument);
  EXPECT_THROW(solve_weighted_min_log(Vec{1}, 0.1), std::invalid_argument);
}

TEST(WeightedMin, LogFloorAvoidsUnderflow) {
  // kappa = 4, n = 300: w = 4^{-600} underflows a double
  Vec y(300);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 + static_cast<double>(i % 7);
  const double log_w = -600.0 * std::log(4.0);
  const auto s = solve_weighted_min_log(y, log_w);
  EXPECT_EQ(s.w, 0.0);
  EXPECT_DOUBLE_EQ(s.log_w, log_w);
  EXPECT_GT(s.value, 0.0);
  double log_prod = 0.0;
  for (const double a : s.weights) log_prod += std::log(a);
  EXPECT_GE(log_prod, log_w * (1.0 + 1e-12));
}

TEST(Bkappa, DiagonalExample) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 1.0;
  const auto s = bkappa(m, std::sqrt(2.0));
  EXPECT_NEAR(s.value, 2.0, 1e-14);
  EXPECT_EQ(s.subset, Idx{0});
  EXPECT_THROW(bkappa(m, 1.0), std::invalid_argument);
}

TEST(Bkappa, ApproachesHsNormAsKappaTendsToOne) {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const double hs = m.squaredNorm();
  EXPECT_NEAR(bkappa(m, 1.0 + 1e-9).value, hs, 1e-6 * hs);
  EXPECT_LT(bkappa(m, 2.0).value, hs);
}

TEST(Oracles, ContinuousExamples) {
  const auto two = oracle_continuous(Vec{1, 1}, std::exp(-2.0));
  EXPECT_TRUE(two.converged);
  EXPECT_NEAR(two.value, 2.0 / std::exp(1.0), 1e-12);
  const auto three = oracle_continuous(Vec{5, 3, 2}, 0.1);
  EXPECT_NEAR(three.value, 3.0 * std::cbrt(3.0), 1e-9);
}

TEST(Oracles, SubsetExamplesAndLimit) {
  const auto r = oracle_subset(Vec{4, 1}, 0.25);
  EXPECT_NEAR(r.value, 2.0, 1e-15);
  EXPECT_EQ(r.subset, Idx{0});
  EXPECT_THROW(oracle_subset(Vec(21, 1.0), 0.5), std::invalid_argument);
}

// Solver vs both oracles on random instances with ties and zeros
TEST(BkappaProperty, MatchesOracles) {
  Stream s(404);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(s.uniform() * 10);
    Vec y(n);
    for (auto& v : y) v = std::exp(2.0 * s.normal());
    if (n > 2 && trial % 5 == 0) y[1] = y[0];
    const double w = std::exp(-3.0 * s.uniform() * static_cast<double>(n));
    const auto sol = solve_weighted_min(y, w);
    const auto sub = oracle_subset(y, w);
    EXPECT_NEAR(sol.value, sub.value, 1e-10 * sub.value);
    const auto cont = oracle_continuous(y, w);
    EXPECT_NEAR(sol.value, cont.value, 1e-6 * cont.value);
  }
}

TEST(BkappaProperty, StructuralInvariants) {
  Stream s(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(s.uniform() * 25);
    Vec y(n);
    for (auto& v : y) v = s.uniform() < 0.1 ? 0.0 : std::abs(s.normal()) * 3.0;
    const double w = std::exp(-s.uniform() * static_cast<double>(n));
    const auto sol = solve_weighted_min(y, w);

    // feasibility and value identity
    double value = 0.0;
    double log_prod = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_GE(sol.weights[i], 0.0);
      ASSERT_LE(sol.weights[i], 1.0);
      value += sol.weights[i] * y[i];
      log_prod += std::log(sol.weights[i]);
    }
    EXPECT_NEAR(value, sol.value, 1e-12 * std::max(1.0, sol.value));
    EXPECT_GE(log_prod, std::log(w) - 1e-10);

    // S holds the largest y and the value is at most n c
    double min_in = std::numeric_limits<double>::infinity();
    double max_out = 0.0;
    std::vector<bool> in(n, false);
    for (const std::size_t i : sol.subset) in[i] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (in[i]) {
        min_in = std::min(min_in, y[i]);
      } else {
        max_out = std::max(max_out, y[i]);
      }
    }
    if (!sol.subset.empty()) {
      EXPECT_GE(min_in, max_out);
    }
    EXPECT_LE(sol.value, static_cast<double>(n) * sol.threshold * (1.0 + 1e-12));

    // homogeneous of degree 1 in y; monotone in w
    Vec scaled(y);
    for (auto& v : scaled) v *= 3.5;
    EXPECT_NEAR(solve_weighted_min(scaled, w).value, 3.5 * sol.value, 1e-12 * std::max(1.0, sol.value));
    EXPECT_LE(solve_weighted_min(y, w * 0.5).value, sol.value * (1.0 + 1e-12));
  }
}

TEST(Bkappa, SolutionJson) {
  const auto j = solution_to_json(solve_weighted_min(Vec{4, 1}, 0.25));
  EXPECT_DOUBLE_EQ(j.at("value").get<double>(), 2.0);
  EXPECT_EQ(j.at("S"), nlohmann::json::array({0}));
  EXPECT_DOUBLE_EQ(j.at("c").get<double>(), 1.0);
}

}  // namespace
}  // namespace sigmafloor
