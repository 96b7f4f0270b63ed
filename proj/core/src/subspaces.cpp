#include "relproj/subspaces.hpp"

#include <cmath>
#include <string>

namespace relproj {

namespace {

void check_dim(Index expected, Index got, const char* where) {
  if (expected != got) {
    throw InputError(std::string(where) + ": dimension mismatch (expected " +
                     std::to_string(expected) + ", got " + std::to_string(got) + ")");
  }
}

}  // namespace

LinearSubspace LinearSubspace::from_orthonormal(Matrix basis) {
  if (basis.rows() < 1) throw InputError("LinearSubspace: ambient dimension must be >= 1");
  if (basis.cols() > basis.rows()) throw InputError("LinearSubspace: more basis vectors than dimensions");
  if (!basis.allFinite()) throw InputError("LinearSubspace: non-finite basis entries");
  const Matrix gram = basis.transpose() * basis;
  const double err =
      basis.cols() == 0 ? 0.0 : (gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw InputError("LinearSubspace: basis is not orthonormal (error " + std::to_string(err) + ")");
  return LinearSubspace(std::move(basis));
}

LinearSubspace LinearSubspace::span(std::span<const Vector> vectors, Index dim, double tol) {
  return LinearSubspace(orthonormalize(vectors, dim, tol));
}

LinearSubspace LinearSubspace::span_columns(const Matrix& columns, double tol) {
  if (columns.rows() < 1) throw InputError("LinearSubspace: ambient dimension must be >= 1");
  return LinearSubspace(orthonormalize_columns(columns, tol));
}

LinearSubspace LinearSubspace::zero(Index dim) {
  if (dim < 1) throw InputError("LinearSubspace: ambient dimension must be >= 1");
  return LinearSubspace(Matrix(dim, 0));
}

LinearSubspace LinearSubspace::full(Index dim) {
  if (dim < 1) throw InputError("LinearSubspace: ambient dimension must be >= 1");
  return LinearSubspace(Matrix::Identity(dim, dim));
}

Vector LinearSubspace::project(const Vector& x) const {
  check_dim(ambient_dim(), x.size(), "project_linear");
  if (dim() == 0) return Vector::Zero(x.size());
  return basis_ * (basis_.transpose() * x);
}

Vector LinearSubspace::residual(const Vector& x) const { return x - project(x); }

LinearSubspace LinearSubspace::orthogonal_complement() const {
  return LinearSubspace(complement_basis(basis_));
}

bool LinearSubspace::contains(const Vector& x, double tol) const {
  return distance(x) <= tol * (1.0 + x.norm());
}

AffineSubspace::AffineSubspace(LinearSubspace direction, const Vector& point)
    : direction_(std::move(direction)) {
  check_dim(direction_.ambient_dim(), point.size(), "AffineSubspace");
  if (!point.allFinite()) throw InputError("AffineSubspace: non-finite point");
  translation_ = direction_.residual(point);
}

Vector AffineSubspace::project(const Vector& x) const {
  check_dim(ambient_dim(), x.size(), "project_affine");
  return translation_ + direction_.project(x);
}

bool AffineSubspace::contains(const Vector& x, double tol) const {
  return (x - project(x)).norm() <= tol * (1.0 + x.norm());
}

RelaxedProjector::RelaxedProjector(AffineSubspace target, double lambda)
    : target_(std::move(target)), lambda_(lambda) {
  if (!(lambda >= 0.0 && lambda <= 2.0)) {
    throw InputError("RelaxedProjector: lambda must lie in [0, 2], got " + std::to_string(lambda));
  }
}

Vector RelaxedProjector::apply(const Vector& x) const {
  return (1.0 - lambda_) * x + lambda_ * target_.project(x);
}

Vector project_linear(const LinearSubspace& l, const Vector& x) { return l.project(x); }

Vector project_affine(const AffineSubspace& a, const Vector& x) { return a.project(x); }

Vector apply_relaxed(const RelaxedProjector& r, const Vector& x) { return r.apply(x); }

Vector apply_relaxed_linear(const LinearSubspace& l, double lambda, const Vector& x) {
  return (1.0 - lambda) * x + lambda * l.project(x);
}

SineCosine sine_cosine(const LinearSubspace& l, const Vector& x) {
  check_dim(l.ambient_dim(), x.size(), "sine_cosine");
  const double nx = x.norm();
  if (nx == 0.0) return {0.0, 1.0};
  const Vector p = l.project(x);
  double s = (x - p).norm() / nx;
  double c = p.norm() / nx;
  // Renormalize so sin^2 + cos^2 = 1 survives rounding in either term.
  const double r = std::hypot(s, c);
  if (r > 0) {
    s /= r;
    c /= r;
  }
  return {s, c};
}

LinearSubspace intersect(std::span<const LinearSubspace> subspaces, double tol) {
  if (subspaces.empty()) throw InputError("intersect: empty list of subspaces");
  const Index d = subspaces.front().ambient_dim();
  for (const auto& l : subspaces) check_dim(d, l.ambient_dim(), "intersect");
  if (subspaces.size() == 1) return subspaces.front();

  Matrix stacked(d * static_cast<Index>(subspaces.size()), d);
  for (std::size_t i = 0; i < subspaces.size(); ++i) {
    stacked.middleRows(static_cast<Index>(i) * d, d) = Matrix::Identity(d, d) - subspaces[i].projector();
  }
  return LinearSubspace::from_orthonormal(nullspace(stacked, tol));
}

AffineSubspace canonicalize_affine(const Vector& point, std::span<const Vector> spanning) {
  if (point.size() < 1) throw InputError("canonicalize_affine: empty point");
  return AffineSubspace(LinearSubspace::span(spanning, point.size()), point);
}

}  // namespace relproj
