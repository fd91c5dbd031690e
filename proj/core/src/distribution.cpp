#include "sigmafloor/distribution.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sigmafloor {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt3 = std::sqrt(3.0);
const double kLatticeAtom = std::sqrt(1.5);

void require_positive_finite(double value, const char* what) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw std::invalid_argument(std::string("ScalarDistribution: ") + what +
                                " must be positive and finite");
  }
}

double pareto_core_edge(double alpha) { return std::sqrt(3.0 * (alpha - 2.0) / alpha); }
double pareto_core_mass(double alpha) { return alpha / (1.0 + alpha); }

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::gaussian: return "gaussian";
    case Family::rademacher: return "rademacher";
    case Family::uniform_interval: return "uniform_interval";
    case Family::lattice_uniform: return "lattice_uniform";
    case Family::symmetric_pareto: return "symmetric_pareto";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "gaussian") return Family::gaussian;
  if (name == "rademacher") return Family::rademacher;
  if (name == "uniform_interval" || name == "uniform") return Family::uniform_interval;
  if (name == "lattice_uniform" || name == "lattice") return Family::lattice_uniform;
  if (name == "symmetric_pareto" || name == "pareto") return Family::symmetric_pareto;
  throw std::invalid_argument("unknown distribution family '" + std::string(name) + "'");
}

ScalarDistribution ScalarDistribution::make(Family family, double mean, double variance,
                                            double alpha) {
  if (!std::isfinite(mean)) throw std::invalid_argument("ScalarDistribution: mean must be finite");
  require_positive_finite(variance, "variance");
  if (family == Family::symmetric_pareto) {
    if (!(std::isfinite(alpha) && alpha > 2.0)) {
      throw std::invalid_argument("symmetric_pareto: tail index alpha must exceed 2");
    }
  } else {
    alpha = 0.0;
  }
  return ScalarDistribution(family, mean, std::sqrt(variance), alpha);
}

ScalarDistribution ScalarDistribution::gaussian(double mean, double variance) {
  return make(Family::gaussian, mean, variance);
}

ScalarDistribution ScalarDistribution::rademacher(double scale, double mean) {
  require_positive_finite(scale, "scale");
  return make(Family::rademacher, mean, scale * scale);
}

ScalarDistribution ScalarDistribution::uniform_interval(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw std::invalid_argument("uniform_interval: need finite lo < hi");
  }
  const double width = hi - lo;
  return make(Family::uniform_interval, 0.5 * (lo + hi), width * width / 12.0);
}

ScalarDistribution ScalarDistribution::lattice_uniform(double mean, double variance) {
  return make(Family::lattice_uniform, mean, variance);
}

ScalarDistribution ScalarDistribution::symmetric_pareto(double alpha, double mean,
                                                        double variance) {
  return make(Family::symmetric_pareto, mean, variance, alpha);
}

double ScalarDistribution::tail_index() const noexcept {
  return family_ == Family::symmetric_pareto ? alpha_ : kInf;
}

std::optional<double> ScalarDistribution::central_moment(double p) const {
  if (!(p >= 1.0)) throw std::invalid_argument("central_moment: order must be >= 1");
  double standard = 0.0;
  switch (family_) {
    case Family::gaussian:
      standard = std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) /
                 std::sqrt(std::numbers::pi);
      break;
    case Family::rademacher:
      standard = 1.0;
      break;
    case Family::uniform_interval:
      standard = std::pow(kSqrt3, p) / (p + 1.0);
      break;
    case Family::lattice_uniform:
      standard = 2.0 / 3.0 * std::pow(kLatticeAtom, p);
      break;
    case Family::symmetric_pareto: {
      if (p >= alpha_) return kInf;
      const double x0 = pareto_core_edge(alpha_);
      standard = std::pow(x0, p) * alpha_ / ((p + 1.0) * (alpha_ - p));
      break;
    }
  }
  return std::pow(scale_, p) * standard;
}

double ScalarDistribution::fourth_raw_moment() const {
  const double m4 = *central_moment(4.0);
  if (std::isinf(m4)) return kInf;
  const double mu2 = mean_ * mean_;
  return mu2 * mu2 + 6.0 * mu2 * variance() + m4;
}

std::optional<double> ScalarDistribution::density_sup() const {
  switch (family_) {
    case Family::gaussian:
      return 1.0 / (scale_ * std::sqrt(2.0 * std::numbers::pi));
    case Family::uniform_interval:
      return 1.0 / (2.0 * kSqrt3 * scale_);
    case Family::symmetric_pareto:
      return pareto_core_mass(alpha_) / (2.0 * pareto_core_edge(alpha_) * scale_);
    case Family::rademacher:
    case Family::lattice_uniform:
      return std::nullopt;
  }
  return std::nullopt;
}

double ScalarDistribution::sample_standard(Stream& stream) const {
  switch (family_) {
    case Family::gaussian:
      return stream.normal();
    case Family::rademacher:
      return stream.sign();
    case Family::uniform_interval:
      return kSqrt3 * (2.0 * stream.uniform() - 1.0);
    case Family::lattice_uniform: {
      const auto k = static_cast<int>(3.0 * stream.uniform());
      return static_cast<double>(k - 1) * kLatticeAtom;
    }
    case Family::symmetric_pareto: {
      // inverse CDF of |Z|
      const double core = pareto_core_mass(alpha_);
      const double x0 = pareto_core_edge(alpha_);
      const double v = stream.uniform_open();
      const double magnitude =
          v < core ? x0 * v / core : x0 * std::pow((1.0 - v) / (1.0 - core), -1.0 / alpha_);
      return stream.sign() * magnitude;
    }
  }
  return 0.0;
}

double ScalarDistribution::sample(Stream& stream) const {
  return mean_ + scale_ * sample_standard(stream);
}

std::string ScalarDistribution::describe() const {
  std::ostringstream out;
  out.precision(6);
  out << to_string(family_) << "(mean=" << mean_ << ", variance=" << variance();
  if (family_ == Family::symmetric_pareto) out << ", alpha=" << alpha_;
  out << ")";
  return out.str();
}

std::optional<double> analytic_moment(const ScalarDistribution& dist, double p) {
  return dist.central_moment(p);
}

nlohmann::json distribution_to_json(const ScalarDistribution& dist) {
  nlohmann::json j;
  j["family"] = std::string(to_string(dist.family()));
  j["mean"] = dist.mean();
  j["variance"] = dist.variance();
  if (dist.family() == Family::symmetric_pareto) j["alpha"] = dist.tail_index();
  return j;
}

ScalarDistribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("distribution must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "family" && key != "mean" && key != "variance" && key != "alpha" &&
        key != "lo" && key != "hi") {
      throw std::invalid_argument("distribution: unknown field '" + key + "'");
    }
  }
  if (!j.contains("family")) throw std::invalid_argument("distribution: missing 'family'");
  const Family family = family_from_string(j.at("family").get<std::string>());
  const bool has_bounds = j.contains("lo") || j.contains("hi");
  if (has_bounds) {
    if (family != Family::uniform_interval) {
      throw std::invalid_argument("distribution: 'lo'/'hi' only apply to uniform_interval");
    }
    if (!j.contains("lo") || !j.contains("hi") || j.contains("mean") || j.contains("variance")) {
      throw std::invalid_argument("distribution: give both 'lo' and 'hi', or 'mean'/'variance'");
    }
    return ScalarDistribution::uniform_interval(j.at("lo").get<double>(), j.at("hi").get<double>());
  }
  if (j.contains("alpha") && family != Family::symmetric_pareto) {
    throw std::invalid_argument("distribution: 'alpha' only applies to symmetric_pareto");
  }
  if (family == Family::symmetric_pareto && !j.contains("alpha")) {
    throw std::invalid_argument("distribution: symmetric_pareto requires 'alpha'");
  }
  const double mean = j.value("mean", 0.0);
  const double variance = j.value("variance", 1.0);
  const double alpha = j.value("alpha", 0.0);
  return ScalarDistribution::make(family, mean, variance, alpha);
}

}  // namespace sigmafloor
