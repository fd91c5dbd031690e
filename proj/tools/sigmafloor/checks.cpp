#include "checks.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "config.hpp"
#include "experiment.hpp"
#include "sigmafloor/anticoncentration.hpp"
#include "sigmafloor/montecarlo.hpp"
#include "sigmafloor/sphere.hpp"

namespace sigmafloor::cli {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

template <class Body>
CheckResult timed(int criterion, std::string name, double limit_seconds, Body&& body) {
  const auto start = Clock::now();
  CheckResult r;
  r.criterion = criterion;
  r.name = std::move(name);
  r.limit_seconds = limit_seconds;
  try {
    std::tie(r.passed, r.measured) = body();
  } catch (const std::exception& e) {
    r.passed = false;
    r.measured = std::string("threw: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.seconds >= limit_seconds) {
    r.passed = false;
    r.measured += "; over the time limit";
  }
  return r;
}

Stream check_stream(const CheckContext& ctx, int criterion, std::uint64_t lane = 0) {
  return Stream::substream(ctx.seed, static_cast<std::uint64_t>(criterion), lane);
}

std::uint64_t check_seed(const CheckContext& ctx, int criterion, std::uint64_t lane) {
  return substream_key(ctx.seed, static_cast<std::uint64_t>(criterion), lane);
}

std::size_t uniform_index(Stream& s, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(s() % (hi - lo + 1));
}

/// Squared norms of independent gaussian columns of random length in [1, 6].
std::vector<double> gaussian_norms(Stream& s, std::size_t n) {
  std::vector<double> y(n);
  for (auto& v : y) {
    const std::size_t len = uniform_index(s, 1, 6);
    v = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double g = s.normal();
      v += g * g;
    }
  }
  return y;
}

std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int k = 0; lo + k * step <= hi + 1e-12; ++k) g.push_back(lo + k * step);
  return g;
}

}  // namespace

CheckBudget CheckBudget::reduced() {
  CheckBudget b;
  b.oracle_instances = 300;
  b.invariant_instances = 2000;
  b.projection_trials = 1000;
  b.projection_repetitions = 20;
  b.square_trials = 20000;
  b.deviation_trials = 100000;
  b.uac_samples = 20000;
  b.classifier_vectors = 300;
  b.spread_vectors = 300;
  b.determinism_trials = 500;
  return b;
}

CheckResult check_bkappa_oracles(const CheckContext& ctx, std::size_t instances) {
  return timed(1, "bkappa_oracle_equivalence", 10.0, [&] {
    Stream s = check_stream(ctx, 1);
    const double kappas[] = {1.1, std::numbers::e, 10.0};
    double worst_subset = 0.0;
    double worst_continuous = 0.0;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < instances; ++i) {
      const auto y = gaussian_norms(s, uniform_index(s, 1, 12));
      for (const double kappa : kappas) {
        const double log_w = -2.0 * static_cast<double>(y.size()) * std::log(kappa);
        const double w = std::exp(log_w);
        const double value = ctx.solver(y, log_w).value;
        const SubsetOracleResult exact = oracle_subset(y, w);
        const ContinuousOracleResult descent = oracle_continuous(y, w);
        const double rel_subset = std::abs(value - exact.value) / exact.value;
        const double rel_continuous = std::abs(value - descent.value) / exact.value;
        worst_subset = std::max(worst_subset, rel_subset);
        worst_continuous = std::max(worst_continuous, rel_continuous);
        if (!(rel_subset <= 1e-10) || !(rel_continuous <= 1e-4)) ++failures;
      }
    }
    return std::pair{failures == 0, std::to_string(3 * instances) + " solves, max rel err subset=" +
                                         num(worst_subset, 3) + " continuous=" + num(worst_continuous, 3) +
                                         ", failures=" + std::to_string(failures)};
  });
}

CheckResult check_bkappa_invariants(const CheckContext& ctx, std::size_t instances) {
  return timed(2, "bkappa_structural_invariants", 10.0, [&] {
    Stream s = check_stream(ctx, 2);
    std::size_t prefix = 0, bound = 0, feasible = 0, monotone = 0, homogeneous = 0;
    for (std::size_t i = 0; i < instances; ++i) {
      const std::size_t n = uniform_index(s, 1, 30);
      auto y = gaussian_norms(s, n);
      // occasional zeros and ties
      if (s() % 8 == 0) y[uniform_index(s, 0, n - 1)] = 0.0;
      if (n > 1 && s() % 8 == 0) y[uniform_index(s, 0, n - 1)] = y[0];
      const double kappa = 1.0 + 9.0 * s.uniform_open();
      const double kappa2 = kappa * (1.0 + s.uniform_open());
      const double scale = std::exp(std::log(10.0) * (2.0 * s.uniform() - 1.0));
      const double dn = static_cast<double>(n);
      const double log_w = -2.0 * dn * std::log(kappa);

      const BkappaSolution a = ctx.solver(y, log_w);
      std::vector<bool> in_s(n, false);
      for (const std::size_t k : a.subset) in_s[k] = true;
      double min_in = std::numeric_limits<double>::infinity();
      double max_out = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (in_s[k]) {
          min_in = std::min(min_in, y[k]);
        } else {
          max_out = std::max(max_out, y[k]);
        }
      }
      if (!a.subset.empty() && min_in < max_out) ++prefix;

      if (a.value > dn * a.threshold * (1.0 + 1e-12)) ++bound;

      double log_prod = 0.0, sum = 0.0;
      bool box = a.weights.size() == n;
      for (std::size_t k = 0; box && k < n; ++k) {
        box = a.weights[k] >= 0.0 && a.weights[k] <= 1.0;
        if (a.weights[k] < 1.0) log_prod += std::log(a.weights[k]);
        sum += a.weights[k] * y[k];
      }
      if (!box || log_prod < log_w - 1e-9 * std::abs(log_w) || std::abs(sum - a.value) > 1e-12 * std::max(a.value, 1e-300)) {
        ++feasible;
      }

      const BkappaSolution b = ctx.solver(y, -2.0 * dn * std::log(kappa2));
      if (b.value > a.value * (1.0 + 1e-12)) ++monotone;

      std::vector<double> scaled(y);
      for (auto& v : scaled) v *= scale * scale;
      const double expect = scale * scale * a.value;
      if (std::abs(ctx.solver(scaled, log_w).value - expect) > 1e-12 * expect) ++homogeneous;
    }
    const std::size_t failures = prefix + bound + feasible + monotone + homogeneous;
    return std::pair{failures == 0, std::to_string(instances) + " instances; failures prefix=" + std::to_string(prefix) +
                                         " value<=n*c=" + std::to_string(bound) + " feasible=" + std::to_string(feasible) +
                                         " monotone=" + std::to_string(monotone) +
                                         " homogeneous=" + std::to_string(homogeneous)};
  });
}

CheckResult check_projection_second_moment(const CheckContext& ctx, std::uint64_t trials, std::size_t repetitions) {
  return timed(3, "projection_second_moment", 120.0, [&] {
    constexpr std::size_t n = 40;
    const auto spec = EnsembleSpec::constant(n, 1, ScalarDistribution::gaussian());
    bool ok = true;
    std::string detail;
    std::uint64_t lane = 0;
    for (const SubspaceMode mode : {SubspaceMode::coordinate, SubspaceMode::random}) {
      for (const std::size_t d : {1, 4, 10}) {
        std::size_t inside = 0;
        for (std::size_t rep = 0; rep < repetitions; ++rep) {
          const RunOptions options{check_seed(ctx, 3, lane++), ctx.workers};
          const ProjectionRatio r = projection_moment_ratio(spec, mode, d, 2.0, trials, options);
          if (std::abs(r.estimate - *r.reference) <= 3.0 * r.standard_error) ++inside;
        }
        const bool pass = static_cast<double>(inside) >= 0.95 * static_cast<double>(repetitions);
        ok = ok && pass;
        detail += std::string(detail.empty() ? "" : " ") + (mode == SubspaceMode::random ? "random" : "coord") +
                  " d=" + std::to_string(d) + ":" + std::to_string(inside) + "/" + std::to_string(repetitions);
      }
    }
    return std::pair{ok, "within 3 SE of d/n: " + detail};
  });
}

CheckResult check_square_exponent(const CheckContext& ctx, std::uint64_t trials) {
  return timed(4, "tail_exponent_square", 300.0, [&] {
    const auto spec = EnsembleSpec::constant(20, 20, ScalarDistribution::gaussian());
    const std::vector<double> grid{0.05, 0.1, 0.2, 0.4};
    const TailCurve curve = sigma_tail_curve(spec, grid, trials, {check_seed(ctx, 4, 0), ctx.workers});
    const ExponentFit fit = fit_exponent(curve);
    return std::pair{fit.slope >= 0.7 && fit.slope <= 1.3,
                     "N=n=20 slope=" + num(fit.slope) + " (band [0.7, 1.3], rows=" + std::to_string(fit.rows_used) + ")"};
  });
}

CheckResult check_rectangular_exponent(const CheckContext& ctx, std::uint64_t trials) {
  return timed(5, "tail_exponent_rectangular", 300.0, [&] {
    const std::vector<double> grid = linear_grid(0.1, 0.5, 0.05);
    std::vector<double> with_atom{1e-8};
    with_atom.insert(with_atom.end(), grid.begin(), grid.end());
    bool ok = true;
    std::string detail = "N=12 n=10";
    std::uint64_t lane = 0;
    for (const auto& dist : {ScalarDistribution::gaussian(), ScalarDistribution::rademacher()}) {
      const auto spec = EnsembleSpec::constant(12, 10, dist);
      TailCurve curve = sigma_tail_curve(spec, with_atom, trials, {check_seed(ctx, 5, lane++), ctx.workers});
      const double atom = curve.rows.front().p_hat;
      curve.rows.erase(curve.rows.begin());
      const ExponentFit fit = fit_exponent(curve);
      const bool pass = fit.slope >= 2.3 && fit.slope <= 3.7;
      ok = ok && pass;
      detail += std::string(" ") + std::string(to_string(dist.family())) + " slope=" + num(fit.slope) +
                " P(sigma_n<=1e-8)=" + num(atom, 3);
    }
    return std::pair{ok, detail + " (band [2.3, 3.7])"};
  });
}

CheckResult check_deviation_bound(const CheckContext& ctx, std::uint64_t trials) {
  return timed(6, "bkappa_deviation_bound", 300.0, [&] {
    // W = P A_J has 2d - 1 rows for d = 3 columns
    const auto spec = EnsembleSpec::constant(5, 3, ScalarDistribution::gaussian());
    const std::vector<double> kappas{1.5, 2.0, 3.0};
    const DeviationTable table =
        bkappa_deviation_curve(spec, kappas, trials, 2.0, 2.0, {check_seed(ctx, 6, 0), ctx.workers});
    bool ok = true;
    std::string detail = "moment C=" + num(table.moment_constant);
    for (const auto& r : table.rows) {
      const double upper = wilson_upper(r.hits, r.trials);
      ok = ok && upper <= r.bound;
      detail += " | kappa=" + num(r.kappa) + " hits=" + std::to_string(r.hits) + " upper99=" + num(upper, 3) +
                " bound=" + num(r.bound, 3);
    }
    return std::pair{ok, detail};
  });
}

CheckResult check_uac_derivation(const CheckContext& ctx, std::uint64_t samples) {
  return timed(7, "uac_derivation", 60.0, [&] {
    struct Case {
      ScalarDistribution dist;
      double beta;
    };
    const Case cases[] = {
        {ScalarDistribution::gaussian(), 2.0},
        {ScalarDistribution::rademacher(), 2.0},
        {ScalarDistribution::uniform_interval(-std::sqrt(3.0), std::sqrt(3.0)), 2.0},
        {ScalarDistribution::lattice_uniform(), 2.0},
        {ScalarDistribution::symmetric_pareto(5.0), 2.0},
        {ScalarDistribution::symmetric_pareto(3.5), 1.0},
    };
    const UacConstants anchor = derive_uac_constants(2.0, 3.0);
    const double anchor_err = std::abs(anchor.m - std::sqrt(48.0)) / std::sqrt(48.0);
    bool ok = anchor_err <= 1e-3;
    std::string detail = "m(2,3)=" + num(anchor.m, 6) + " rel err " + num(anchor_err, 2);
    std::uint64_t lane = 0;
    for (const auto& c : cases) {
      const double moment = *analytic_moment(c.dist, 2.0 + c.beta);
      const UacConstants k = derive_uac_constants(c.beta, moment);
      Stream s = check_stream(ctx, 7, lane++);
      const ConcentrationEstimate q = sample_levy_concentration(c.dist, 0.25, samples, s);
      ok = ok && q.upper99 <= k.b;
      detail += " | " + std::string(to_string(c.dist.family())) + " Q=" + num(q.q_hat, 3) + " up=" + num(q.upper99, 3) +
                " b=" + num(k.b, 5);
    }
    return std::pair{ok, detail};
  });
}

CheckResult check_classifier(const CheckContext& ctx, std::size_t vectors) {
  return timed(8, "compressible_classifier", 60.0, [&] {
    Stream s = check_stream(ctx, 8);
    const double deltas[] = {0.2, 0.35, 0.5};
    const double rhos[] = {0.1, 0.3, 0.5};
    std::size_t mismatches = 0, compressible = 0, comparisons = 0;
    double worst = 0.0;
    for (std::size_t v = 0; v < vectors; ++v) {
      const std::size_t n = uniform_index(s, 5, 12);
      std::vector<double> x(n);
      const double noise = std::exp(std::log(1e-3) * s.uniform());
      const std::size_t spikes = uniform_index(s, 0, n / 2);
      for (std::size_t i = 0; i < n; ++i) x[i] = (i < spikes ? 1.0 : noise) * s.normal();
      double norm = 0.0;
      for (const double e : x) norm += e * e;
      norm = std::sqrt(norm);
      for (auto& e : x) e /= norm;

      for (const double delta : deltas) {
        const auto k = static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
          if (static_cast<std::size_t>(std::popcount(mask)) > k) continue;
          double mass = 0.0;
          for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1U << i)) mass += x[i] * x[i];
          }
          best = std::min(best, std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(mass))));
        }
        for (const double rho : rhos) {
          const SphereClassification c = classify(x, delta, rho);
          ++comparisons;
          compressible += c.is_compressible ? 1 : 0;
          worst = std::max(worst, std::abs(c.sparse_distance - best));
          if (c.is_compressible != (best <= rho) || std::abs(c.sparse_distance - best) > 1e-12) ++mismatches;
        }
      }
    }
    return std::pair{mismatches == 0, std::to_string(comparisons) + " comparisons (" + std::to_string(compressible) +
                                          " compressible), mismatches=" + std::to_string(mismatches) +
                                          ", max distance diff=" + num(worst, 2)};
  });
}

CheckResult check_spread_subset(const CheckContext& ctx, std::size_t vectors) {
  return timed(9, "spread_subset_size", 60.0, [&] {
    constexpr std::size_t n = 100;
    const double required = kDefaultRho * kDefaultRho * kDefaultDelta * static_cast<double>(n) / 2.0;
    const double low = kDefaultRho / std::sqrt(2.0 * n);
    const double high = 1.0 / std::sqrt(kDefaultDelta * n);
    Stream s = check_stream(ctx, 9);
    std::size_t accepted = 0, rejected = 0, failures = 0, smallest = n;
    while (accepted < vectors) {
      // gaussian direction plus a few spikes, so that some draws sit near the boundary
      std::vector<double> x(n);
      for (auto& e : x) e = s.normal();
      const double spike = std::exp(std::log(30.0) * s.uniform());
      const std::size_t spikes = uniform_index(s, 0, 15);
      for (std::size_t k = 0; k < spikes; ++k) x[uniform_index(s, 0, n - 1)] += spike * s.normal();
      double norm = 0.0;
      for (const double e : x) norm += e * e;
      norm = std::sqrt(norm);
      for (auto& e : x) e /= norm;

      const SphereClassification c = classify(x);
      if (c.is_compressible) {
        ++rejected;
        continue;
      }
      ++accepted;
      const auto& j = *c.spread_subset;
      smallest = std::min(smallest, j.size());
      bool ok = static_cast<double>(j.size()) >= required;
      for (const std::size_t i : j) ok = ok && std::abs(x[i]) >= low && std::abs(x[i]) <= high;
      if (!ok) ++failures;
    }
    return std::pair{failures == 0, std::to_string(accepted) + " vectors (" + std::to_string(rejected) +
                                        " compressible rejected), min |J|=" + std::to_string(smallest) +
                                        " vs rho^2 delta n/2=" + num(required) + ", failures=" + std::to_string(failures)};
  });
}

CheckResult check_distance_exponent(const CheckContext& ctx, std::uint64_t trials) {
  return timed(10, "distance_smallball_exponent", 300.0, [&] {
    constexpr std::size_t big_n = 30;
    const std::vector<double> grid{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5};
    const auto x = EnsembleSpec::constant(big_n, 1, ScalarDistribution::gaussian());
    bool ok = true;
    std::string detail = "N=30";
    std::uint64_t lane = 0;
    for (const std::size_t d : {1, 3}) {
      const auto m = EnsembleSpec::constant(big_n, big_n - d, ScalarDistribution::gaussian());
      const DistanceCurves curves = distance_smallball_curve(x, m, grid, trials, {check_seed(ctx, 10, lane++), ctx.workers});
      const ExponentFit fit = fit_exponent(curves.centered);
      ok = ok && std::abs(fit.slope - static_cast<double>(d)) <= 0.7;
      detail += " | d=" + std::to_string(d) + " slope=" + num(fit.slope);
      if (d == 1) {
        const double density = 2.0 / std::sqrt(2.0 * std::numbers::pi);
        double worst = 0.0;
        for (const auto& r : curves.centered.rows) {
          if (r.threshold > 0.3 + 1e-12) continue;
          worst = std::max(worst, std::abs(r.p_hat / (density * r.threshold) - 1.0));
        }
        ok = ok && worst <= 0.1;
        detail += " max |p/(2 phi(0) t) - 1| over t<=0.3 = " + num(worst, 3);
      }
    }
    return std::pair{ok, detail};
  });
}

CheckResult check_determinism(const CheckContext& ctx, std::uint64_t trials) {
  return timed(11, "determinism", 60.0, [&] {
    using nlohmann::json;
    const json gaussian{{"family", "gaussian"}, {"mean", 0.0}, {"variance", 1.0}};
    auto ensemble = [&](std::size_t rows, std::size_t cols) {
      return json{{"N", rows}, {"n", cols}, {"profile", {{"kind", "constant"}, {"entries", json::array({gaussian})}}}};
    };
    const auto t = static_cast<std::int64_t>(trials);
    const std::vector<json> configs{
        {{"operation", "sigma_tail_curve"}, {"seed", ctx.seed}, {"ensemble", ensemble(12, 10)},
         {"epsilon_grid", {0.1, 0.2, 0.3, 0.5}}, {"trials", t}},
        {{"operation", "bkappa_deviation_curve"}, {"seed", ctx.seed + 1}, {"ensemble", ensemble(5, 3)},
         {"kappa_grid", {1.05, 1.2, 1.5}}, {"trials", t}, {"C_factor", 2.0}, {"beta", 2.0}},
        {{"operation", "projection_moment_ratio"}, {"seed", ctx.seed + 2}, {"ensemble", ensemble(40, 1)}, {"d", 4},
         {"mode", "random"}, {"trials", t}},
        {{"operation", "distance_smallball_curve"}, {"seed", ctx.seed + 3}, {"ensemble", ensemble(20, 1)},
         {"subspace_ensemble", ensemble(20, 17)}, {"t_grid", {0.2, 0.4, 0.8}}, {"trials", t / 2}},
        {{"operation", "spread_infimum_proxy"}, {"seed", ctx.seed + 4}, {"ensemble", ensemble(20, 18)},
         {"columns", {0, 1, 2}}, {"probes", 50}, {"trials", t / 10}},
        {{"operation", "check_assumptions"}, {"seed", ctx.seed + 5}, {"ensemble", ensemble(6, 4)}, {"trials", t}},
        {{"operation", "bkappa"}, {"seed", ctx.seed + 6}, {"matrix", {{2.0, 0.0}, {0.0, 1.0}}}, {"kappa", std::sqrt(2.0)}},
    };
    std::size_t mismatches = 0;
    std::string failed;
    for (const auto& j : configs) {
      const ExperimentConfig config = parse_config(j);
      const ExperimentResult serial = execute(config, 1);
      const ExperimentResult again = execute(config, 1);
      const ExperimentResult parallel = execute(config, 4);
      bool same = serial.files.size() == again.files.size() && serial.files.size() == parallel.files.size();
      for (std::size_t f = 0; same && f < serial.files.size(); ++f) {
        same = serial.files[f].content == again.files[f].content && serial.files[f].content == parallel.files[f].content;
      }
      if (!same) {
        ++mismatches;
        failed += " " + std::string(to_string(config.operation));
      }
    }
    return std::pair{mismatches == 0, std::to_string(configs.size()) +
                                          " experiments, rerun and 4 workers vs serial, mismatches=" +
                                          std::to_string(mismatches) + failed};
  });
}

std::vector<CheckResult> run_acceptance(const CheckContext& ctx, const CheckBudget& b, std::ostream& out) {
  std::vector<CheckResult> results;
  auto record = [&](CheckResult r) {
    print_result(out, r);
    out.flush();
    results.push_back(std::move(r));
  };
  record(check_bkappa_oracles(ctx, b.oracle_instances));
  record(check_bkappa_invariants(ctx, b.invariant_instances));
  record(check_projection_second_moment(ctx, b.projection_trials, b.projection_repetitions));
  record(check_square_exponent(ctx, b.square_trials));
  record(check_rectangular_exponent(ctx, b.rectangular_trials));
  record(check_deviation_bound(ctx, b.deviation_trials));
  record(check_uac_derivation(ctx, b.uac_samples));
  record(check_classifier(ctx, b.classifier_vectors));
  record(check_spread_subset(ctx, b.spread_vectors));
  record(check_distance_exponent(ctx, b.distance_trials));
  record(check_determinism(ctx, b.determinism_trials));
  return results;
}

int run_selftest(const CheckContext& ctx, std::ostream& out) {
  const CheckBudget b = CheckBudget::reduced();
  std::vector<CheckResult> results;
  results.push_back(check_bkappa_oracles(ctx, b.oracle_instances));
  results.push_back(check_bkappa_invariants(ctx, b.invariant_instances));
  results.push_back(check_projection_second_moment(ctx, b.projection_trials, b.projection_repetitions));
  results.push_back(check_square_exponent(ctx, b.square_trials));
  results.push_back(check_deviation_bound(ctx, b.deviation_trials));
  results.push_back(check_uac_derivation(ctx, b.uac_samples));
  results.push_back(check_classifier(ctx, b.classifier_vectors));
  results.push_back(check_spread_subset(ctx, b.spread_vectors));
  results.push_back(check_determinism(ctx, b.determinism_trials));
  std::size_t failed = 0;
  for (const auto& r : results) {
    print_result(out, r);
    failed += r.passed ? 0 : 1;
  }
  out << "selftest: " << results.size() - failed << "/" << results.size() << " passed\n";
  return failed == 0 ? 0 : 1;
}

void print_result(std::ostream& out, const CheckResult& r) {
  out << (r.passed ? "PASS " : "FAIL ") << std::setw(2) << r.criterion << ' ' << r.name << "  " << r.measured << "  ["
      << std::fixed << std::setprecision(2) << r.seconds << " s / " << std::setprecision(0) << r.limit_seconds
      << " s]\n"
      << std::defaultfloat;
}

}  // namespace sigmafloor::cli
