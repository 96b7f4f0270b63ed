#pragma once

#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace relproj {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised for malformed input: shape mismatches, out-of-range parameters,
/// empty collections where one is required.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Relative rank tolerance shared by the kernel routines. A singular value
/// (or pivot) is treated as zero when it falls below this multiple of the
/// largest one.
inline constexpr double kRankTol = 1e-10;

/// Orthonormal basis (d x k) of span(vectors); k is the numerical rank.
/// Column-pivoted Householder QR. An empty list yields the d x 0 matrix.
Matrix orthonormalize(std::span<const Vector> vectors, Index dim, double tol = kRankTol);

/// Same as above, with the spanning vectors stored as the columns of `columns`.
Matrix orthonormalize_columns(const Matrix& columns, double tol = kRankTol);

struct LeastSquaresResult {
  Vector solution;       // minimum-norm minimizer of ||M x - b||
  double residual_norm;  // ||M solution - b||
};

LeastSquaresResult least_squares(const Matrix& m, const Vector& b, double tol = kRankTol);

/// Largest singular value of `m`. Computed from the symmetric eigenproblem of
/// the smaller Gram matrix, so it is independent of the SVD routines below.
double operator_norm(const Matrix& m);

/// Orthonormal basis of {x : m x = 0}; singular values below tol * sigma_max
/// count as zero.
Matrix nullspace(const Matrix& m, double tol = kRankTol);

/// Orthonormal basis of the orthogonal complement of span(basis columns).
/// `basis` must have orthonormal columns.
Matrix complement_basis(const Matrix& basis);

bool all_finite(const Matrix& m);

}  // namespace relproj
