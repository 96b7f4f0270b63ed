#pragma once

#include <span>
#include <vector>

#include "relproj/linops.hpp"

namespace relproj {

/// A linear subspace of R^d held as a d x k matrix with orthonormal columns.
/// k = 0 is the zero subspace, k = d the whole space.
class LinearSubspace {
 public:
  /// Validates orthonormality (B^T B = I to 1e-10).
  static LinearSubspace from_orthonormal(Matrix basis);
  /// Orthonormalizes the given spanning vectors.
  static LinearSubspace span(std::span<const Vector> vectors, Index dim, double tol = kRankTol);
  static LinearSubspace span_columns(const Matrix& columns, double tol = kRankTol);
  static LinearSubspace zero(Index dim);
  static LinearSubspace full(Index dim);

  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }

  Vector project(const Vector& x) const;
  /// x - P_L x, i.e. the projection onto the orthogonal complement.
  Vector residual(const Vector& x) const;
  double distance(const Vector& x) const { return residual(x).norm(); }
  /// Dense d x d projector B B^T.
  Matrix projector() const { return basis_ * basis_.transpose(); }
  LinearSubspace orthogonal_complement() const;
  bool contains(const Vector& x, double tol = 1e-10) const;

 private:
  explicit LinearSubspace(Matrix basis) : basis_(std::move(basis)) {}
  Matrix basis_;
};

/// A = a + L with the translation a kept in L^perp (canonical form). Every
/// constructor canonicalizes, so translation() is the point of A nearest to 0.
class AffineSubspace {
 public:
  /// Any point of A plus its direction space.
  AffineSubspace(LinearSubspace direction, const Vector& point);

  const LinearSubspace& direction() const { return direction_; }
  const Vector& translation() const { return translation_; }
  Index ambient_dim() const { return direction_.ambient_dim(); }

  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = 1e-10) const;

 private:
  LinearSubspace direction_;
  Vector translation_;
};

/// R_{A,lambda} = (1 - lambda) Id + lambda P_A.
class RelaxedProjector {
 public:
  RelaxedProjector(AffineSubspace target, double lambda);

  const AffineSubspace& target() const { return target_; }
  double lambda() const { return lambda_; }

  Vector apply(const Vector& x) const;

 private:
  AffineSubspace target_;
  double lambda_;
};

struct SineCosine {
  double sin;
  double cos;
};

Vector project_linear(const LinearSubspace& l, const Vector& x);
Vector project_affine(const AffineSubspace& a, const Vector& x);
Vector apply_relaxed(const RelaxedProjector& r, const Vector& x);

/// Relaxed projector onto a linear subspace: (1 - lambda) x + lambda P_L x.
Vector apply_relaxed_linear(const LinearSubspace& l, double lambda, const Vector& x);

/// Sine and cosine of the angle between x and P_L x. x = 0 gives (0, 1).
SineCosine sine_cosine(const LinearSubspace& l, const Vector& x);

/// Intersection of the subspaces, as the nullspace of the stacked
/// complement projectors [I - P_1; I - P_2; ...].
LinearSubspace intersect(std::span<const LinearSubspace> subspaces, double tol = kRankTol);

/// Canonical affine subspace through `point` with direction span(spanning).
AffineSubspace canonicalize_affine(const Vector& point, std::span<const Vector> spanning);

}  // namespace relproj
