#include "relproj/linops.hpp"

#include <algorithm>
#include <string>

namespace relproj {

Matrix orthonormalize(std::span<const Vector> vectors, Index dim, double tol) {
  if (dim < 1) throw InputError("orthonormalize: ambient dimension must be >= 1");
  Matrix columns(dim, static_cast<Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw InputError("orthonormalize: vector " + std::to_string(i) + " has dimension " +
                       std::to_string(vectors[i].size()) + ", expected " + std::to_string(dim));
    }
    columns.col(static_cast<Index>(i)) = vectors[i];
  }
  return orthonormalize_columns(columns, tol);
}

Matrix orthonormalize_columns(const Matrix& columns, double tol) {
  if (tol <= 0) throw InputError("orthonormalize: tol must be positive");
  const Index d = columns.rows();
  if (columns.cols() == 0) return Matrix(d, 0);

  const double scale = columns.colwise().norm().maxCoeff();
  if (scale == 0.0) return Matrix(d, 0);

  Eigen::ColPivHouseholderQR<Matrix> qr(columns);
  // Rank from the pivoted R diagonal, relative to the largest column norm.
  const auto& r = qr.matrixR();
  Index rank = 0;
  const Index diag = std::min(d, columns.cols());
  for (Index i = 0; i < diag; ++i) {
    if (std::abs(r(i, i)) > tol * scale) ++rank;
  }
  Matrix q = qr.householderQ() * Matrix::Identity(d, rank);

  // One pass of re-orthogonalization keeps Q^T Q = I at ~1e-15 for
  // ill-conditioned inputs.
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    q.col(j).normalize();
  }
  return q;
}

LeastSquaresResult least_squares(const Matrix& m, const Vector& b, double tol) {
  if (m.rows() != b.size()) {
    throw InputError("least_squares: matrix has " + std::to_string(m.rows()) +
                     " rows but rhs has length " + std::to_string(b.size()));
  }
  if (m.cols() == 0) return {Vector(0), b.norm()};
  if (m.rows() == 0) return {Vector::Zero(m.cols()), 0.0};

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
  const double scale = m.colwise().norm().maxCoeff();
  if (scale == 0.0) return {Vector::Zero(m.cols()), b.norm()};
  cod.setThreshold(tol);
  Vector x = cod.solve(b);
  return {x, (m * x - b).norm()};
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Matrix gram = m.rows() < m.cols() ? Matrix(m * m.transpose()) : Matrix(m.transpose() * m);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

Matrix nullspace(const Matrix& m, double tol) {
  if (tol <= 0) throw InputError("nullspace: tol must be positive");
  const Index q = m.cols();
  if (m.rows() == 0) return Matrix::Identity(q, q);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  Index rank = 0;
  if (smax > 0) {
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > tol * smax) ++rank;
    }
  }
  return svd.matrixV().rightCols(q - rank);
}

Matrix complement_basis(const Matrix& basis) {
  const Index d = basis.rows();
  if (basis.cols() == 0) return Matrix::Identity(d, d);
  return nullspace(basis.transpose());
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace relproj
