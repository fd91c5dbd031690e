#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "sigmafloor/distribution.hpp"
#include "sigmafloor/stats.hpp"

namespace sigmafloor {
namespace {

std::vector<ScalarDistribution> all_families() {
  return {ScalarDistribution::gaussian(0.5, 2.0), ScalarDistribution::rademacher(1.5, -1.0),
          ScalarDistribution::uniform_interval(-1.0, 3.0), ScalarDistribution::lattice_uniform(2.0, 0.5),
          ScalarDistribution::symmetric_pareto(3.5, 1.0, 4.0)};
}

TEST(AnalyticMoment, SpecExamples) {
  EXPECT_NEAR(*analytic_moment(ScalarDistribution::gaussian(), 2.0), 1.0, 1e-14);
  EXPECT_NEAR(*analytic_moment(ScalarDistribution::rademacher(), 4.0), 1.0, 1e-14);
  const auto u = ScalarDistribution::uniform_interval(-std::sqrt(3.0), std::sqrt(3.0));
  EXPECT_NEAR(*analytic_moment(u, 4.0), 1.8, 1e-14);
}

TEST(AnalyticMoment, GaussianAbsoluteMoments) {
  const auto g = ScalarDistribution::gaussian();
  EXPECT_NEAR(*analytic_moment(g, 1.0), std::sqrt(2.0 / std::numbers::pi), 1e-14);
  EXPECT_NEAR(*analytic_moment(g, 3.0), 2.0 * std::sqrt(2.0 / std::numbers::pi), 1e-13);
  EXPECT_NEAR(*analytic_moment(g, 4.0), 3.0, 1e-13);
  // scales as sigma^p
  EXPECT_NEAR(*analytic_moment(ScalarDistribution::gaussian(7.0, 4.0), 4.0), 3.0 * 16.0, 1e-11);
}

TEST(AnalyticMoment, LatticeAtoms) {
  // atoms 0 and +-sqrt(3/2) with equal mass: E|X|^p = (2/3) 1.5^{p/2}
  const auto l = ScalarDistribution::lattice_uniform();
  EXPECT_NEAR(*analytic_moment(l, 2.0), 1.0, 1e-14);
  EXPECT_NEAR(*analytic_moment(l, 4.0), 1.5, 1e-14);
}

TEST(AnalyticMoment, ParetoMomentsAndDivergence) {
  const double alpha = 3.5;
  const auto p = ScalarDistribution::symmetric_pareto(alpha);
  EXPECT_NEAR(*analytic_moment(p, 2.0), 1.0, 1e-13);
  const double x0 = std::sqrt(3.0 * (alpha - 2.0) / alpha);
  EXPECT_NEAR(*analytic_moment(p, 2.5), std::pow(x0, 2.5) * alpha / (3.5 * (alpha - 2.5)), 1e-12);
  EXPECT_TRUE(std::isinf(*analytic_moment(p, 3.5)));
  EXPECT_TRUE(std::isinf(*analytic_moment(p, 4.0)));
}

TEST(AnalyticMoment, RejectsOrderBelowOne) {
  EXPECT_THROW(analytic_moment(ScalarDistribution::gaussian(), 0.5), std::invalid_argument);
}

TEST(Distribution, FactoriesValidate) {
  EXPECT_THROW(ScalarDistribution::gaussian(0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(ScalarDistribution::uniform_interval(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ScalarDistribution::symmetric_pareto(2.0), std::invalid_argument);
  EXPECT_THROW(ScalarDistribution::rademacher(-1.0), std::invalid_argument);
}

TEST(Distribution, UniformIntervalMeanVariance) {
  const auto u = ScalarDistribution::uniform_interval(-1.0, 3.0);
  EXPECT_DOUBLE_EQ(u.mean(), 1.0);
  EXPECT_NEAR(u.variance(), 16.0 / 12.0, 1e-14);
}

TEST(Distribution, EmpiricalMomentsMatchWithinFiveStandardErrors) {
  constexpr int kCount = 100000;
  Stream s(2024);
  for (const auto& d : all_families()) {
    RunningMoments m;
    RunningMoments sq;
    for (int i = 0; i < kCount; ++i) {
      const double x = d.sample(s);
      m.add(x);
      sq.add((x - d.mean()) * (x - d.mean()));
    }
    EXPECT_NEAR(m.mean(), d.mean(), 5.0 * d.stddev() / std::sqrt(kCount)) << d.describe();
    // SE of the variance estimate from the empirical fourth moment
    EXPECT_NEAR(sq.mean(), d.variance(), 5.0 * sq.standard_error()) << d.describe();
  }
}

TEST(Distribution, ParetoTailIsHeavy) {
  // E|X|^2.5 is finite for alpha = 3.5: empirical values agree across sample sizes
  const auto p = ScalarDistribution::symmetric_pareto(3.5);
  const double exact = *analytic_moment(p, 2.5);
  Stream s(77);
  double sum = 0.0;
  constexpr int kCount = 400000;
  for (int i = 0; i < kCount; ++i) sum += std::pow(std::abs(p.sample(s)), 2.5);
  EXPECT_NEAR(sum / kCount, exact, 0.1 * exact);
  EXPECT_EQ(p.tail_index(), 3.5);
  EXPECT_TRUE(std::isinf(ScalarDistribution::gaussian().tail_index()));
}

TEST(Distribution, ParetoCdfMatchesInverseSampler) {
  // P(|Z| <= x0) is the core mass alpha / (1 + alpha)
  const double alpha = 4.0;
  const auto p = ScalarDistribution::symmetric_pareto(alpha);
  const double x0 = std::sqrt(3.0 * (alpha - 2.0) / alpha);
  Stream s(8);
  int core = 0;
  constexpr int kCount = 100000;
  for (int i = 0; i < kCount; ++i) core += std::abs(p.sample_standard(s)) <= x0 ? 1 : 0;
  const double mass = alpha / (1.0 + alpha);
  EXPECT_NEAR(core / static_cast<double>(kCount), mass, 5.0 * std::sqrt(mass * (1 - mass) / kCount));
}

TEST(Distribution, DensitySup) {
  EXPECT_NEAR(*ScalarDistribution::gaussian().density_sup(), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(*ScalarDistribution::uniform_interval(-1.0, 1.0).density_sup(), 0.5, 1e-15);
  EXPECT_FALSE(ScalarDistribution::rademacher().density_sup().has_value());
  EXPECT_FALSE(ScalarDistribution::lattice_uniform().density_sup().has_value());
}

TEST(Distribution, FourthRawMoment) {
  EXPECT_NEAR(ScalarDistribution::gaussian().fourth_raw_moment(), 3.0, 1e-13);
  // mean 1, variance 1 gaussian: E X^4 = 1 + 6 + 3
  EXPECT_NEAR(ScalarDistribution::gaussian(1.0, 1.0).fourth_raw_moment(), 10.0, 1e-12);
  EXPECT_TRUE(std::isinf(ScalarDistribution::symmetric_pareto(3.5).fourth_raw_moment()));
}

TEST(Distribution, RademacherSupport) {
  const auto r = ScalarDistribution::rademacher(2.0, 1.0);
  Stream s(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = r.sample(s);
    ASSERT_TRUE(x == 3.0 || x == -1.0);
  }
}

TEST(DistributionJson, RoundTrip) {
  for (const auto& d : all_families()) {
    const auto j = distribution_to_json(d);
    const auto back = distribution_from_json(j);
    EXPECT_EQ(back.family(), d.family());
    EXPECT_NEAR(back.mean(), d.mean(), 1e-15);
    EXPECT_NEAR(back.variance(), d.variance(), 1e-14);
    EXPECT_EQ(back.tail_index(), d.tail_index());
  }
}

TEST(DistributionJson, AcceptsUniformBoundsAndAliases) {
  const auto u = distribution_from_json({{"family", "uniform"}, {"lo", -2.0}, {"hi", 2.0}});
  EXPECT_EQ(u.family(), Family::uniform_interval);
  EXPECT_NEAR(u.variance(), 16.0 / 12.0, 1e-14);
  EXPECT_EQ(family_from_string("pareto"), Family::symmetric_pareto);
  EXPECT_EQ(family_from_string("lattice"), Family::lattice_uniform);
}

TEST(DistributionJson, RejectsUnknownKeysAndFamilies) {
  EXPECT_THROW(distribution_from_json({{"family", "gaussian"}, {"sigma", 1.0}}), std::invalid_argument);
  EXPECT_THROW(distribution_from_json({{"family", "cauchy"}}), std::invalid_argument);
  EXPECT_THROW(distribution_from_json({{"family", "symmetric_pareto"}, {"mean", 0.0}, {"variance", 1.0}}),
               std::invalid_argument);
}

}  // namespace
}  // namespace sigmafloor
