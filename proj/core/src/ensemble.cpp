#include "sigmafloor/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sigmafloor/anticoncentration.hpp"

namespace sigmafloor {

namespace {

constexpr double kMomentRelTol = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "constant") return ProfileKind::constant;
  if (name == "per_column") return ProfileKind::per_column;
  if (name == "per_row") return ProfileKind::per_row;
  if (name == "checkerboard") return ProfileKind::checkerboard;
  throw std::invalid_argument("unknown profile kind '" + name + "'");
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return key == k; })) {
      throw std::invalid_argument(where + ": unknown field '" + key + "'");
    }
  }
}

double required_number(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(where + ": missing numeric field '" + key + "'");
  }
  return j.at(key).get<double>();
}

std::vector<ScalarDistribution> distinct_entries(const Profile& profile) {
  std::vector<ScalarDistribution> out;
  for (const auto& d : profile.entries) {
    if (std::find(out.begin(), out.end(), d) == out.end()) out.push_back(d);
  }
  return out;
}

bool close_rel(double a, double b) {
  return std::abs(a - b) <= kMomentRelTol * std::max(std::abs(a), std::abs(b));
}

AssumptionResult check_iso(const EnsembleSpec& spec, const IsotropyAssumption& iso) {
  AssumptionResult r;
  r.name = "ISO";
  double min_var = std::numeric_limits<double>::infinity();
  double max_var = 0.0;
  double max_abs_mean = 0.0;
  bool ok = iso.c > 0.0;
  for (const auto& d : spec.profile().entries) {
    min_var = std::min(min_var, d.variance());
    max_var = std::max(max_var, d.variance());
    max_abs_mean = std::max(max_abs_mean, std::abs(d.mean()));
    if (!close_rel(d.variance(), iso.c) || d.mean() != 0.0) ok = false;
  }
  r.status = ok ? AssumptionStatus::verified_analytic : AssumptionStatus::violated;
  r.witness = {{"c", iso.c}, {"min_variance", min_var}, {"max_variance", max_var},
               {"max_abs_mean", max_abs_mean}};
  r.detail = ok ? "every entry has mean 0 and variance c"
                : "E A_j A_j^T = c I needs mean-0 entries of variance c";
  return r;
}

AssumptionResult check_hs(const EnsembleSpec& spec, const HsNormAssumption& hs) {
  AssumptionResult r;
  r.name = "HS";
  const double expected = spec.expected_hs_norm_sq();
  const double bound = hs.K * static_cast<double>(spec.rows()) * static_cast<double>(spec.cols());
  r.status = expected <= bound ? AssumptionStatus::verified_analytic : AssumptionStatus::violated;
  r.witness = {{"K", hs.K}, {"expected_hs_norm_sq", expected}, {"bound", bound}};
  return r;
}

AssumptionResult check_mom(const EnsembleSpec& spec, const MomentAssumption& mom) {
  AssumptionResult r;
  r.name = "MOM";
  r.witness = {{"beta", mom.beta}, {"r", mom.r}, {"R", mom.R}};
  if (!(mom.beta > 0.0)) {
    r.status = AssumptionStatus::violated;
    r.detail = "beta must be positive";
    return r;
  }
  double min_var = std::numeric_limits<double>::infinity();
  double required_R = 0.0;
  for (const auto& d : distinct_entries(spec.profile())) {
    const auto moment = d.moment_2_plus_beta(mom.beta);
    if (!moment) {
      r.status = AssumptionStatus::unverifiable;
      r.detail = "no closed-form moment for " + d.describe();
      return r;
    }
    min_var = std::min(min_var, d.variance());
    // smallest R with E|X-EX|^{2+beta} <= (R var)^{1+beta/2}
    const double needed = std::pow(*moment, 1.0 / (1.0 + mom.beta / 2.0)) / d.variance();
    required_R = std::max(required_R, needed);
  }
  r.witness["min_variance"] = min_var;
  r.witness["required_R"] = required_R;
  const bool ok = min_var >= mom.r && std::isfinite(required_R) &&
                  required_R <= mom.R * (1.0 + kMomentRelTol);
  r.status = ok ? AssumptionStatus::verified_analytic : AssumptionStatus::violated;
  if (!std::isfinite(required_R)) r.detail = "2+beta moment diverges";
  return r;
}

AssumptionResult check_vec2(const EnsembleSpec& spec, const VectorVarianceAssumption& vec) {
  AssumptionResult r;
  r.name = "VEC2";
  double worst = 0.0;
  for (std::size_t j = 0; j < spec.cols(); ++j) worst = std::max(worst, spec.expected_column_norm_sq(j));
  const double dim = static_cast<double>(spec.rows());
  const double measured = worst / (dim * dim);
  r.witness["measured_c"] = measured;
  if (vec.c) {
    r.witness["c"] = *vec.c;
    r.status = measured <= *vec.c ? AssumptionStatus::verified_analytic : AssumptionStatus::violated;
  } else {
    r.status = AssumptionStatus::recorded;
    r.detail = "no constant declared; measured max_j E|A e_j|^2 / N^2 recorded";
  }
  return r;
}

AssumptionResult check_uac(const EnsembleSpec& spec, const UacAssumption& uac,
                           std::uint64_t trials, Stream& stream) {
  AssumptionResult r;
  r.name = "UAC";
  r.witness = {{"a", uac.a}, {"b", uac.b}};
  if (trials < 2 || !(uac.a > 0.0)) {
    r.status = AssumptionStatus::unverifiable;
    r.detail = trials < 2 ? "empirical check needs at least two trials" : "radius must be positive";
    return r;
  }
  double worst_q = 0.0;
  double worst_upper = 0.0;
  for (const auto& d : distinct_entries(spec.profile())) {
    const auto est = sample_levy_concentration(d, uac.a, trials, stream);
    worst_q = std::max(worst_q, est.q_hat);
    worst_upper = std::max(worst_upper, est.upper99);
  }
  r.witness["q_hat"] = worst_q;
  r.upper_bound = worst_upper;
  r.status = worst_upper <= uac.b ? AssumptionStatus::verified_empirical : AssumptionStatus::violated;
  return r;
}

}  // namespace

std::string_view to_string(ProfileKind kind) noexcept {
  switch (kind) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::per_column: return "per_column";
    case ProfileKind::per_row: return "per_row";
    case ProfileKind::checkerboard: return "checkerboard";
  }
  return "unknown";
}

std::string_view to_string(AssumptionStatus status) noexcept {
  switch (status) {
    case AssumptionStatus::verified_analytic: return "verified_analytic";
    case AssumptionStatus::verified_empirical: return "verified_empirical";
    case AssumptionStatus::violated: return "violated";
    case AssumptionStatus::recorded: return "recorded";
    case AssumptionStatus::unverifiable: return "unverifiable";
  }
  return "unknown";
}

const ScalarDistribution& Profile::at(std::size_t row, std::size_t col) const {
  switch (kind) {
    case ProfileKind::constant: return entries.at(0);
    case ProfileKind::per_column: return entries.at(col);
    case ProfileKind::per_row: return entries.at(row);
    case ProfileKind::checkerboard: return entries.at((row + col) % 2);
  }
  throw std::logic_error("Profile::at: bad kind");
}

std::string assumption_name(const Assumption& assumption) {
  return std::visit(overloaded{
                        [](const UacAssumption&) { return std::string("UAC"); },
                        [](const MomentAssumption&) { return std::string("MOM"); },
                        [](const IsotropyAssumption&) { return std::string("ISO"); },
                        [](const VectorVarianceAssumption&) { return std::string("VEC2"); },
                        [](const HsNormAssumption&) { return std::string("HS"); },
                    },
                    assumption);
}

EnsembleSpec::EnsembleSpec(std::size_t rows, std::size_t cols, Profile profile,
                           std::vector<Assumption> assumptions)
    : rows_(rows), cols_(cols), profile_(std::move(profile)), assumptions_(std::move(assumptions)) {
  if (cols_ < 1) throw std::invalid_argument("EnsembleSpec: need n >= 1");
  if (rows_ < cols_) throw std::invalid_argument("EnsembleSpec: need N >= n");
  std::size_t expected = 0;
  switch (profile_.kind) {
    case ProfileKind::constant: expected = 1; break;
    case ProfileKind::per_column: expected = cols_; break;
    case ProfileKind::per_row: expected = rows_; break;
    case ProfileKind::checkerboard: expected = 2; break;
  }
  if (profile_.entries.size() != expected) {
    throw std::invalid_argument("EnsembleSpec: profile '" + std::string(to_string(profile_.kind)) +
                                "' needs " + std::to_string(expected) + " entries, got " +
                                std::to_string(profile_.entries.size()));
  }
}

EnsembleSpec EnsembleSpec::constant(std::size_t rows, std::size_t cols,
                                    const ScalarDistribution& dist,
                                    std::vector<Assumption> assumptions) {
  return EnsembleSpec(rows, cols, Profile{ProfileKind::constant, {dist}}, std::move(assumptions));
}

double EnsembleSpec::expected_column_norm_sq(std::size_t col) const {
  double total = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) total += entry(i, col).second_raw_moment();
  return total;
}

double EnsembleSpec::expected_hs_norm_sq() const {
  double total = 0.0;
  for (std::size_t j = 0; j < cols_; ++j) total += expected_column_norm_sq(j);
  return total;
}

bool EnsembleSpec::is_isotropic() const {
  const double v = profile_.entries.front().variance();
  return std::all_of(profile_.entries.begin(), profile_.entries.end(), [&](const auto& d) {
    return d.mean() == 0.0 && close_rel(d.variance(), v);
  });
}

std::string EnsembleSpec::digest() const {
  const std::string text = ensemble_to_json(*this).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json ensemble_to_json(const EnsembleSpec& spec) {
  nlohmann::json j;
  j["N"] = spec.rows();
  j["n"] = spec.cols();
  j["profile"] = {{"kind", std::string(to_string(spec.profile().kind))},
                  {"entries", spec.profile().entries}};
  nlohmann::json list = nlohmann::json::array();
  for (const auto& a : spec.assumptions()) {
    list.push_back(std::visit(
        overloaded{
            [](const UacAssumption& x) { return nlohmann::json{{"kind", "UAC"}, {"a", x.a}, {"b", x.b}}; },
            [](const MomentAssumption& x) {
              return nlohmann::json{{"kind", "MOM"}, {"beta", x.beta}, {"r", x.r}, {"R", x.R}};
            },
            [](const IsotropyAssumption& x) { return nlohmann::json{{"kind", "ISO"}, {"c", x.c}}; },
            [](const VectorVarianceAssumption& x) {
              nlohmann::json o{{"kind", "VEC2"}};
              if (x.c) o["c"] = *x.c;
              return o;
            },
            [](const HsNormAssumption& x) { return nlohmann::json{{"kind", "HS"}, {"K", x.K}}; },
        },
        a));
  }
  j["assumptions"] = std::move(list);
  return j;
}

EnsembleSpec ensemble_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("ensemble must be a JSON object");
  reject_unknown_keys(j, {"N", "n", "profile", "assumptions"}, "ensemble");
  for (const char* key : {"N", "n"}) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
      throw std::invalid_argument(std::string("ensemble: '") + key + "' must be a nonnegative integer");
    }
  }
  if (!j.contains("profile")) throw std::invalid_argument("ensemble: missing 'profile'");
  const auto& pj = j.at("profile");
  reject_unknown_keys(pj, {"kind", "entries"}, "ensemble.profile");
  if (!pj.contains("kind") || !pj.contains("entries") || !pj.at("entries").is_array()) {
    throw std::invalid_argument("ensemble.profile: needs 'kind' and an 'entries' array");
  }
  Profile profile;
  profile.kind = profile_kind_from_string(pj.at("kind").get<std::string>());
  for (const auto& e : pj.at("entries")) profile.entries.push_back(distribution_from_json(e));

  std::vector<Assumption> assumptions;
  if (j.contains("assumptions")) {
    if (!j.at("assumptions").is_array()) throw std::invalid_argument("ensemble: 'assumptions' must be an array");
    for (const auto& aj : j.at("assumptions")) {
      if (!aj.is_object() || !aj.contains("kind")) {
        throw std::invalid_argument("ensemble.assumptions: each entry needs a 'kind'");
      }
      const auto kind = aj.at("kind").get<std::string>();
      const std::string where = "assumption " + kind;
      if (kind == "UAC") {
        reject_unknown_keys(aj, {"kind", "a", "b"}, where);
        assumptions.emplace_back(UacAssumption{required_number(aj, "a", where), required_number(aj, "b", where)});
      } else if (kind == "MOM") {
        reject_unknown_keys(aj, {"kind", "beta", "r", "R"}, where);
        assumptions.emplace_back(MomentAssumption{required_number(aj, "beta", where),
                                                  required_number(aj, "r", where),
                                                  required_number(aj, "R", where)});
      } else if (kind == "ISO") {
        reject_unknown_keys(aj, {"kind", "c"}, where);
        assumptions.emplace_back(IsotropyAssumption{required_number(aj, "c", where)});
      } else if (kind == "VEC2") {
        reject_unknown_keys(aj, {"kind", "c"}, where);
        VectorVarianceAssumption v;
        if (aj.contains("c")) v.c = required_number(aj, "c", where);
        assumptions.emplace_back(v);
      } else if (kind == "HS") {
        reject_unknown_keys(aj, {"kind", "K"}, where);
        assumptions.emplace_back(HsNormAssumption{required_number(aj, "K", where)});
      } else {
        throw std::invalid_argument("ensemble.assumptions: unknown kind '" + kind + "'");
      }
    }
  }
  return EnsembleSpec(j.at("N").get<std::size_t>(), j.at("n").get<std::size_t>(), std::move(profile),
                      std::move(assumptions));
}

Eigen::MatrixXd sample_matrix(const EnsembleSpec& spec, Stream& stream) {
  Eigen::MatrixXd a(spec.rows(), spec.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      a(i, j) = spec.entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).sample(stream);
    }
  }
  return a;
}

bool AssumptionReport::all_hold() const {
  return std::all_of(results.begin(), results.end(), [](const AssumptionResult& r) {
    return r.status == AssumptionStatus::verified_analytic ||
           r.status == AssumptionStatus::verified_empirical ||
           r.status == AssumptionStatus::recorded;
  });
}

nlohmann::json report_to_json(const AssumptionReport& report) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : report.results) {
    nlohmann::json o{{"assumption", r.name}, {"status", std::string(to_string(r.status))},
                     {"witness", r.witness}};
    if (r.upper_bound) o["upper99"] = *r.upper_bound;
    if (!r.detail.empty()) o["detail"] = r.detail;
    out.push_back(std::move(o));
  }
  return out;
}

AssumptionReport check_assumptions(const EnsembleSpec& spec, std::uint64_t trials, Stream& stream) {
  AssumptionReport report;
  for (const auto& assumption : spec.assumptions()) {
    report.results.push_back(std::visit(
        overloaded{
            [&](const UacAssumption& x) { return check_uac(spec, x, trials, stream); },
            [&](const MomentAssumption& x) { return check_mom(spec, x); },
            [&](const IsotropyAssumption& x) { return check_iso(spec, x); },
            [&](const VectorVarianceAssumption& x) { return check_vec2(spec, x); },
            [&](const HsNormAssumption& x) { return check_hs(spec, x); },
        },
        assumption));
  }
  return report;
}

}  // namespace sigmafloor
