#pragma once

#include <optional>
#include <span>
#include <vector>

#include "relproj/subspaces.hpp"

namespace relproj {

/// x -> W x + v.
struct AffineMap {
  Matrix linear;
  Vector offset;

  static AffineMap identity(Index dim);

  Index dim() const { return linear.rows(); }
  Vector apply(const Vector& x) const { return linear * x + offset; }
  /// The map x -> this(first(x)).
  AffineMap after(const AffineMap& first) const;
  /// The linear map obtained by dropping every translation (offset = 0).
  AffineMap linear_part() const;
};

/// The affine map of a single relaxed projector.
AffineMap to_affine_map(const RelaxedProjector& r);

/// Composition applying projectors[0] first: x -> R_k(...R_1(x)).
AffineMap compose(std::span<const RelaxedProjector> projectors);

/// Composition of the same word with every affine target replaced by its
/// parallel linear subspace.
AffineMap compose_linear(std::span<const RelaxedProjector> projectors);

/// Fix Q = {x : (I - W) x = v}.
struct FixedPointSet {
  Vector particular;           // minimum-norm solution of (I - W) x = v
  LinearSubspace directions;   // ker(I - W)
  bool consistent;
  double residual;             // ||(I - W) particular - v||
};

/// `tol` defaults to 1e-8 (1 + ||v||).
FixedPointSet fixed_points(const AffineMap& q, std::optional<double> tol = std::nullopt);

/// Nearest fixed point to x0. Throws InputError on an inconsistent set.
Vector project_onto_fix(const FixedPointSet& fps, const Vector& x0);

struct RateEstimate {
  double rate;
  std::vector<double> residuals;  // ||Q^n x0 - x_star||, n = 0 .. n_steps
};

inline constexpr double kResidualFloor = 1e-13;

/// Geometric mean of consecutive residual ratios over the last half of the
/// run, skipping residuals below kResidualFloor. Falls back to the whole run
/// when the last half has underflowed; 0 when every residual has.
RateEstimate linear_rate(const AffineMap& q, const Vector& x0, const Vector& x_star, std::size_t n_steps);

}  // namespace relproj
