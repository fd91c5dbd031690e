#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigmafloor/rng.hpp"

namespace sigmafloor {

/// Rank decisions count singular values above this multiple of the largest.
inline constexpr double kRankTolerance = 1e-10;
/// Magnitude of the independence-forcing perturbation, relative to the RMS entry.
inline constexpr double kDefaultPerturbation = 1e-9;

/// sigma_n(A) = min over unit x of ||A x||_2 for an N x n matrix with N >= n.
///
/// One-sided Jacobi SVD behind a column-pivoted QR: singular values come out
/// with high relative accuracy, well inside 1e-8 for condition numbers up to
/// 1e6. Throws std::invalid_argument when N < n, n == 0, or an entry is not
/// finite.
double smallest_singular_value(const Eigen::Ref<const Eigen::MatrixXd>& a);

/// Sum of squared entries.
double hs_norm_sq(const Eigen::Ref<const Eigen::MatrixXd>& a) noexcept;

/// Orthonormal basis (N x (N - r)) of span(M)^perp with r the numerical rank
/// of M. A rank-deficient M yields a larger complement; k == 0 gives I_N.
Eigen::MatrixXd complement_basis(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Numerical rank of M at kRankTolerance.
std::size_t numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// ||P_{span(M)^perp} x||_2, the distance from x to span(M).
double distance_to_span(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& m);

/// P_{span(M)^perp} x.
Eigen::VectorXd project_to_complement(const Eigen::Ref<const Eigen::VectorXd>& x,
                                      const Eigen::Ref<const Eigen::MatrixXd>& m);

/// W = P_{H^perp} A_J where H is spanned by the columns of A outside J.
struct ProjectedSubmatrix {
  Eigen::MatrixXd w;
  /// Source columns of A, in the order they appear in w.
  std::vector<std::size_t> columns;
  /// dim of H^perp.
  std::size_t complement_rank = 0;
};

/// Builds W from the columns J (0-based, distinct, in range). When
/// `perturbation` is set, A is first shifted by i.i.d. N(0, perturbation^2)
/// noise drawn from `stream` so that the columns are almost surely linearly
/// independent; `stream` must then be non-null.
ProjectedSubmatrix projected_submatrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                       std::span<const std::size_t> columns,
                                       std::optional<double> perturbation = std::nullopt,
                                       Stream* stream = nullptr);

/// kDefaultPerturbation times the RMS entry of A.
double default_perturbation(const Eigen::Ref<const Eigen::MatrixXd>& a) noexcept;

/// Columns of A not in J, ascending.
std::vector<std::size_t> complement_columns(std::size_t n, std::span<const std::size_t> columns);

// CSV matrices: one row per line, comma separated, no header.
Eigen::MatrixXd read_csv_matrix(std::istream& in);
Eigen::MatrixXd read_csv_matrix_file(const std::string& path);
/// Writes the shortest decimal form of each entry that round-trips exactly.
void write_csv_matrix(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& a);
/// Parses one comma-separated line of numbers.
std::vector<double> parse_csv_line(const std::string& line);

}  // namespace sigmafloor
