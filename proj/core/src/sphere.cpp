#include "sigmafloor/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace sigmafloor {

namespace {

constexpr double kUnitTolerance = 1e-10;
constexpr double kBandSlack = 1e-12;
constexpr int kMaxSpreadAttempts = 1'000'000;

void validate_parameters(double delta, double rho) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in (0, 1)");
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (const double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

std::size_t sparsity_budget(double delta, std::size_t n) {
  return static_cast<std::size_t>(std::floor(delta * static_cast<double>(n) + 1e-9));
}

std::vector<std::size_t> extract_spread_subset(std::span<const double> x, double delta, double rho) {
  validate_parameters(delta, rho);
  const double n = static_cast<double>(x.size());
  const double low = rho / std::sqrt(2.0 * n);
  const double high = 1.0 / std::sqrt(delta * n);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double m = std::abs(x[j]);
    if (m >= low && m <= high) out.push_back(j);
  }
  return out;
}

SphereClassification classify(std::span<const double> x, double delta, double rho) {
  validate_parameters(delta, rho);
  if (x.empty()) throw std::invalid_argument("classify: empty vector");
  if (std::abs(norm2(x) - 1.0) > kUnitTolerance) throw std::invalid_argument("classify: x is not a unit vector");
  const std::size_t k = sparsity_budget(delta, x.size());
  if (k == 0) throw std::invalid_argument("classify: floor(delta n) must be at least 1");

  std::vector<double> mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(), [](double v) { return v * v; });
  std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k - 1), mags.end(),
                   std::greater<>());
  double top = 0.0;
  for (std::size_t i = 0; i < k; ++i) top += mags[i];

  SphereClassification out;
  out.delta = delta;
  out.rho = rho;
  out.sparsity = k;
  out.sparse_distance = std::sqrt(std::max(0.0, 2.0 - 2.0 * std::sqrt(top)));
  out.is_compressible = out.sparse_distance <= rho;
  if (!out.is_compressible) out.spread_subset = extract_spread_subset(x, delta, rho);
  return out;
}

std::vector<double> sample_spread(std::size_t d, double low, double high, Stream& stream) {
  if (d == 0) throw std::invalid_argument("sample_spread: d must be >= 1");
  if (!(low > 0.0 && low <= 1.0 && high >= 1.0 && std::isfinite(high))) {
    throw std::invalid_argument("sample_spread: need 0 < low <= 1 <= high");
  }
  const double root = std::sqrt(static_cast<double>(d));
  std::vector<double> v(d);
  for (int attempt = 0; attempt < kMaxSpreadAttempts; ++attempt) {
    for (auto& x : v) x = stream.sign() * (low + (high - low) * stream.uniform()) / root;
    const double norm = norm2(v);
    bool inside = true;
    for (auto& x : v) {
      x /= norm;
      const double scaled = std::abs(x) * root;
      inside = inside && scaled >= low * (1.0 - kBandSlack) && scaled <= high * (1.0 + kBandSlack);
    }
    if (inside) return v;
  }
  throw std::runtime_error("sample_spread: rejection sampler exhausted its budget");
}

std::vector<double> sample_sphere(std::size_t n, Stream& stream) {
  if (n == 0) throw std::invalid_argument("sample_sphere: n must be >= 1");
  std::vector<double> v(n);
  double norm = 0.0;
  do {
    for (auto& x : v) x = stream.normal();
    norm = norm2(v);
  } while (norm == 0.0);
  for (auto& x : v) x /= norm;
  return v;
}

nlohmann::json classification_to_json(const SphereClassification& c) {
  nlohmann::json j{{"is_compressible", c.is_compressible},
                   {"sparse_distance", c.sparse_distance},
                   {"sparsity", c.sparsity},
                   {"delta", c.delta},
                   {"rho", c.rho}};
  j["spread_subset"] = c.spread_subset ? nlohmann::json(*c.spread_subset) : nlohmann::json(nullptr);
  return j;
}

}  // namespace sigmafloor
