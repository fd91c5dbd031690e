#include "sigmafloor/linalg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sigmafloor {

namespace {

using PreconditionedSvd = Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner>;

Eigen::MatrixXd select_columns(const Eigen::Ref<const Eigen::MatrixXd>& a,
                               std::span<const std::size_t> columns) {
  Eigen::MatrixXd out(a.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out.col(static_cast<Eigen::Index>(k)) = a.col(static_cast<Eigen::Index>(columns[k]));
  }
  return out;
}

std::size_t rank_from_singular_values(const Eigen::VectorXd& sv) {
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = kRankTolerance * sv(0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++r;
  }
  return r;
}

}  // namespace

double smallest_singular_value(const Eigen::Ref<const Eigen::MatrixXd>& a) {
  if (a.cols() < 1) throw std::invalid_argument("smallest_singular_value: need n >= 1");
  if (a.rows() < a.cols()) throw std::invalid_argument("smallest_singular_value: need N >= n");
  if (!a.allFinite()) throw std::invalid_argument("smallest_singular_value: non-finite entry");
  const PreconditionedSvd svd(a);
  return svd.singularValues()(a.cols() - 1);
}

double hs_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& a) noexcept { return a.squaredNorm(); }

std::size_t numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.cols() == 0 || m.rows() == 0) return 0;
  const PreconditionedSvd svd(m);
  return rank_from_singular_values(svd.singularValues());
}

Eigen::MatrixXd complement_basis(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() == 0) return Eigen::MatrixXd::Identity(n, n);
  if (!m.allFinite()) throw std::invalid_argument("complement_basis: non-finite entry");
  const PreconditionedSvd svd(m, Eigen::ComputeFullU);
  const auto r = static_cast<Eigen::Index>(rank_from_singular_values(svd.singularValues()));
  return svd.matrixU().rightCols(n - r);
}

Eigen::VectorXd project_to_complement(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (x.size() != m.rows()) throw std::invalid_argument("project_to_complement: dimension mismatch");
  const Eigen::MatrixXd q = complement_basis(m);
  return q * (q.transpose() * x);
}

double distance_to_span(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (x.size() != m.rows()) throw std::invalid_argument("distance_to_span: dimension mismatch");
  const Eigen::MatrixXd q = complement_basis(m);
  return (q.transpose() * x).norm();
}

std::vector<std::size_t> complement_columns(std::size_t n, std::span<const std::size_t> columns) {
  std::vector<bool> chosen(n, false);
  for (const std::size_t c : columns) {
    if (c >= n) throw std::invalid_argument("column index out of range");
    if (chosen[c]) throw std::invalid_argument("duplicate column index");
    chosen[c] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t c = 0; c < n; ++c) {
    if (!chosen[c]) rest.push_back(c);
  }
  return rest;
}

double default_perturbation(const Eigen::Ref<const Eigen::MatrixXd>& a) noexcept {
  if (a.size() == 0) return kDefaultPerturbation;
  const double rms = std::sqrt(a.squaredNorm() / static_cast<double>(a.size()));
  return kDefaultPerturbation * (rms > 0.0 ? rms : 1.0);
}

ProjectedSubmatrix projected_submatrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                       std::span<const std::size_t> columns,
                                       std::optional<double> perturbation, Stream* stream) {
  const auto n = static_cast<std::size_t>(a.cols());
  const auto rest = complement_columns(n, columns);
  Eigen::MatrixXd work = a;
  if (perturbation) {
    if (stream == nullptr) throw std::invalid_argument("projected_submatrix: perturbation needs a stream");
    if (!(*perturbation >= 0.0)) throw std::invalid_argument("projected_submatrix: negative perturbation");
    for (Eigen::Index j = 0; j < work.cols(); ++j) {
      for (Eigen::Index i = 0; i < work.rows(); ++i) work(i, j) += *perturbation * stream->normal();
    }
  }
  const Eigen::MatrixXd q = complement_basis(select_columns(work, rest));
  ProjectedSubmatrix out;
  out.columns.assign(columns.begin(), columns.end());
  out.complement_rank = static_cast<std::size_t>(q.cols());
  out.w = q * (q.transpose() * select_columns(work, columns));
  return out;
}

std::vector<double> parse_csv_line(const std::string& line) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t comma = std::min(line.find(',', pos), line.size());
    std::string field = line.substr(pos, comma - pos);
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    if (first == std::string::npos) throw std::invalid_argument("csv: empty field");
    field = field.substr(first, last - first + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
      throw std::invalid_argument("csv: cannot parse '" + field + "'");
    }
    values.push_back(value);
    pos = comma + 1;
  }
  return values;
}

Eigen::MatrixXd read_csv_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    rows.push_back(parse_csv_line(line));
    if (rows.back().size() != rows.front().size()) throw std::invalid_argument("csv: ragged rows");
  }
  if (rows.empty()) throw std::invalid_argument("csv: no rows");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return a;
}

Eigen::MatrixXd read_csv_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  return read_csv_matrix(in);
}

void write_csv_matrix(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& a) {
  char buf[32];
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ',';
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, a(i, j));
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace sigmafloor
