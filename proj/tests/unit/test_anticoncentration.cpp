#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "sigmafloor/anticoncentration.hpp"

namespace sigmafloor {
namespace {

using Vec = std::vector<double>;

// Quadratic oracle: every window [x_i, x_i + 2a] counted directly
std::uint64_t rescan_max_count(const Vec& sorted, double a) {
  std::uint64_t best = 0;
  for (const double left : sorted) {
    std::uint64_t count = 0;
    for (const double x : sorted) count += (x >= left && x <= left + 2.0 * a) ? 1 : 0;
    best = std::max(best, count);
  }
  return best;
}

TEST(LevyConcentration, Examples) {
  const Vec x{0.0, 0.1, 0.2, 1.0, 5.0};
  auto est = levy_concentration(x, 0.1);
  EXPECT_EQ(est.max_count, 3U);
  EXPECT_DOUBLE_EQ(est.q_hat, 0.6);
  est = levy_concentration(x, 0.04);
  EXPECT_EQ(est.max_count, 1U);
  est = levy_concentration(x, 10.0);
  EXPECT_EQ(est.max_count, 5U);
  EXPECT_DOUBLE_EQ(est.upper99, 1.0);
}

TEST(LevyConcentration, RejectsBadInput) {
  EXPECT_THROW(levy_concentration(Vec{0, 1}, 0.0), std::invalid_argument);
  EXPECT_THROW(levy_concentration(Vec{0, 1}, -1.0), std::invalid_argument);
  EXPECT_THROW(levy_concentration(Vec{0}, 1.0), std::invalid_argument);
  EXPECT_THROW(levy_concentration(Vec{1, 0}, 1.0), std::invalid_argument);
}

TEST(LevyConcentrationProperty, MatchesQuadraticRescan) {
  Stream s(71);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(s.uniform() * 998);
    Vec x(m);
    // lattice-valued draws create exact ties at window edges
    for (auto& v : x) v = trial % 2 == 0 ? s.normal() : std::round(s.normal() * 4.0) / 4.0;
    std::sort(x.begin(), x.end());
    for (const double a : {0.01, 0.125, 0.5, 2.0}) {
      const auto est = levy_concentration(x, a);
      EXPECT_EQ(est.max_count, rescan_max_count(x, a)) << "m=" << m << " a=" << a;
      const auto inside = std::count_if(x.begin(), x.end(), [&](double v) {
        return std::abs(v - est.center) <= a * (1.0 + 1e-12);
      });
      EXPECT_GE(static_cast<std::uint64_t>(inside), est.max_count);
    }
  }
}

TEST(LevyConcentration, RademacherAtoms) {
  Stream s(72);
  const auto est = sample_levy_concentration(ScalarDistribution::rademacher(), 0.5, 40000, s);
  EXPECT_NEAR(est.q_hat, 0.5, 5.0 * 0.5 / std::sqrt(40000.0));
  const auto wide = sample_levy_concentration(ScalarDistribution::rademacher(), 1.0, 1000, s);
  EXPECT_DOUBLE_EQ(wide.q_hat, 1.0);
}

TEST(UacConstants, BetaTwoMomentThree) {
  const auto c = derive_uac_constants(2.0, 3.0);
  EXPECT_NEAR(c.m / std::sqrt(48.0), 1.0, 1e-3);
  EXPECT_NEAR(c.b, 1.0 - 1.0 / 192.0, 1e-5);
  EXPECT_DOUBLE_EQ(c.a, 0.25);
  EXPECT_LT(c.b, 1.0);
  EXPECT_TRUE(truncation_level_admissible(c.m, 2.0, 3.0));
  EXPECT_FALSE(truncation_level_admissible(c.m / 1.002, 2.0, 3.0));
}

TEST(UacConstants, BetaOneMomentOne) {
  const auto c = derive_uac_constants(1.0, 1.0);
  EXPECT_NEAR(c.m / 24.0, 1.0, 1e-3);
  EXPECT_LT(c.b, 1.0);
  EXPECT_THROW(derive_uac_constants(0.0, 3.0), std::invalid_argument);
  EXPECT_THROW(derive_uac_constants(1.0, 0.5), std::invalid_argument);
}

TEST(UacConstantsProperty, AdmissibilityIsMonotoneOnTheGrid) {
  for (const double beta : {0.5, 1.0, 2.0, 3.0}) {
    for (const double cm : {1.0, 2.0, 10.0}) {
      const auto c = derive_uac_constants(beta, cm);
      for (int k = 1; k < 200; k += 7) {
        EXPECT_TRUE(truncation_level_admissible(c.m * std::pow(1.001, k), beta, cm));
      }
    }
  }
}

TEST(RescaleUac, AffineTransfer) {
  const auto c = derive_uac_constants(2.0, 3.0);
  auto p = rescale_uac(c, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(p.a, 0.25);
  EXPECT_DOUBLE_EQ(p.b, c.b);
  p = rescale_uac(c, 16.0, 3.0);
  EXPECT_DOUBLE_EQ(p.a, 1.0);
  EXPECT_DOUBLE_EQ(p.b, c.b);
  EXPECT_THROW(rescale_uac(c, 0.0, 0.0), std::invalid_argument);
}

TEST(RescaleUac, HoldsForShiftedGaussian) {
  const auto c = derive_uac_constants(2.0, 3.0);
  const auto p = rescale_uac(c, 4.0, 5.0);
  EXPECT_DOUBLE_EQ(p.a, 0.5);
  Stream s(73);
  const auto est = sample_levy_concentration(ScalarDistribution::gaussian(5.0, 4.0), p.a, 50000, s);
  // exact value 2 Phi(1/4) - 1 = 0.1974
  EXPECT_NEAR(est.q_hat, std::erf(0.25 / std::numbers::sqrt2), 0.01);
  EXPECT_LE(est.upper99, p.b);
}

TEST(Tensorization, UniformExamples) {
  Stream s(74);
  const std::vector<std::size_t> dims{1, 2, 6};
  const Vec t_grid{0.3};
  const auto rows = check_tensorization(ScalarDistribution::uniform_interval(-1.0, 1.0), dims, t_grid,
                                        100000, s);
  ASSERT_EQ(rows.size(), 3U);
  EXPECT_TRUE(rows[0].ci.contains(0.3));
  // disk of radius sqrt(0.18) inside the square: pi 0.18 / 4
  EXPECT_NEAR(rows[1].p_hat, std::numbers::pi * 0.18 / 4.0, 0.005);
  for (const auto& r : rows) {
    // p = 2 sup density = 1
    EXPECT_LE(r.ci.lo, std::pow(std::numbers::e * 0.3, static_cast<double>(r.dim))) << "d=" << r.dim;
  }
  EXPECT_THROW(check_tensorization(ScalarDistribution::rademacher(), dims, t_grid, 10, s),
               std::invalid_argument);
}

TEST(LinearSmallBall, GaussianRate) {
  Stream s(75);
  const Vec u{3.0, 4.0};
  const Vec eps{0.05, 0.1};
  const auto rows = check_linear_smallball(u, ScalarDistribution::gaussian(), eps, 200000, s);
  for (const auto& r : rows) {
    // <u, g> ~ N(0, 25): sup_z P(|X - z| <= eps) ~ 2 phi(0) eps / 5
    EXPECT_NEAR(r.normalized, 2.0 / std::sqrt(2.0 * std::numbers::pi), 0.05);
  }
  // scale invariance of the normalized value
  const Vec v{0.3, 0.4};
  const Vec eps_small{0.005, 0.01};
  Stream t(75);
  const auto scaled = check_linear_smallball(v, ScalarDistribution::gaussian(), eps_small, 200000, t);
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_NEAR(scaled[k].normalized, rows[k].normalized, 1e-9);
}

TEST(LinearSmallBall, RademacherBinomialAtom) {
  Stream s(76);
  const Vec u(10, 1.0);
  const Vec eps{0.5};
  const auto rows = check_linear_smallball(u, ScalarDistribution::rademacher(), eps, 100000, s);
  // largest atom of a sum of 10 signs: C(10, 5) / 2^10
  const double atom = 252.0 / 1024.0;
  EXPECT_NEAR(rows[0].q_hat, atom, 5.0 * std::sqrt(atom * (1 - atom) / 100000.0));
  EXPECT_THROW(check_linear_smallball(Vec{0, 0}, ScalarDistribution::gaussian(), eps, 10, s),
               std::invalid_argument);
}

}  // namespace
}  // namespace sigmafloor
