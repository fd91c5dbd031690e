#include <algorithm>
#include <vector>

#include <benchmark/benchmark.h>

#include "sigmafloor/anticoncentration.hpp"
#include "sigmafloor/bkappa.hpp"
#include "sigmafloor/ensemble.hpp"
#include "sigmafloor/linalg.hpp"

namespace {

using namespace sigmafloor;

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Stream s(seed);
  return sample_matrix(EnsembleSpec::constant(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols),
                                              ScalarDistribution::gaussian()),
                       s);
}

void BM_SmallestSingularValue(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd a = gaussian_matrix(n + 2, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(smallest_singular_value(a));
}
BENCHMARK(BM_SmallestSingularValue)->Arg(10)->Arg(20)->Arg(50)->Arg(100);

void BM_WeightedMin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Stream s(2);
  std::vector<double> y(n);
  for (auto& v : y) v = s.normal() * s.normal() + 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(solve_weighted_min_log(y, -2.0 * static_cast<double>(n) * 0.7));
}
BENCHMARK(BM_WeightedMin)->Arg(3)->Arg(12)->Arg(100)->Arg(1000);

void BM_SubsetOracle(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Stream s(3);
  std::vector<double> y(n);
  for (auto& v : y) v = s.normal() * s.normal() + 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(oracle_subset(y, 0.01));
}
BENCHMARK(BM_SubsetOracle)->Arg(8)->Arg(12);

void BM_LevyScan(benchmark::State& state) {
  Stream s(4);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = s.normal();
  std::sort(x.begin(), x.end());
  for (auto _ : state) benchmark::DoNotOptimize(levy_concentration(x, 0.25));
}
BENCHMARK(BM_LevyScan)->Arg(10000)->Arg(100000);

void BM_ComplementProjection(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd m = gaussian_matrix(n, n - 3, 5);
  const Eigen::VectorXd x = gaussian_matrix(n, 1, 6).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(distance_to_span(x, m));
}
BENCHMARK(BM_ComplementProjection)->Arg(20)->Arg(30)->Arg(60);

void BM_ProjectedSubmatrix(benchmark::State& state) {
  const Eigen::MatrixXd a = gaussian_matrix(20, 18, 7);
  const std::vector<std::size_t> j{0, 1, 2};
  for (auto _ : state) benchmark::DoNotOptimize(projected_submatrix(a, j));
}
BENCHMARK(BM_ProjectedSubmatrix);

}  // namespace

BENCHMARK_MAIN();
