#pragma once

// Test-only generators and independent oracles. Nothing here calls the
// routine it is used to check.

#include <cmath>
#include <numbers>
#include <vector>

#include "relproj/engine.hpp"
#include "relproj/random.hpp"
#include "relproj/subspaces.hpp"

namespace relproj::testing {

inline LinearSubspace random_subspace(Index d, Index k, CounterRng& rng) {
  if (k == 0) return LinearSubspace::zero(d);
  return LinearSubspace::span_columns(rng.normal_matrix(d, k));
}

/// Random affine subspace of dimension k whose translation has norm ~ scale.
inline AffineSubspace random_affine(Index d, Index k, CounterRng& rng, double scale = 1.0) {
  return AffineSubspace(random_subspace(d, k, rng), scale * rng.normal_vector(d));
}

inline LinearSubspace line_at_angle(double theta) {
  Matrix b(2, 1);
  b << std::cos(theta), std::sin(theta);
  return LinearSubspace::from_orthonormal(b);
}

/// Brute-force regularity constant of a collection of subspaces of R^2
/// meeting only at 0: sup over a uniform grid of the unit circle of
/// 1 / max_L d_L(x).
inline double grid_kappa_r2(const std::vector<LinearSubspace>& collection, std::size_t points = 100000) {
  double best = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double phi = std::numbers::pi * static_cast<double>(i) / static_cast<double>(points);
    Vector x(2);
    x << std::cos(phi), std::sin(phi);
    double dmax = 0.0;
    for (const auto& l : collection) {
      const Matrix& b = l.basis();
      const Vector r = x - b * (b.transpose() * x);
      dmax = std::max(dmax, r.norm());
    }
    best = std::max(best, 1.0 / dmax);
  }
  return best;
}

/// Spectral norm from a full SVD.
inline double svd_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Dense matrix of the relaxed projector onto the linear subspace.
inline Matrix relaxed_matrix(const LinearSubspace& l, double lambda) {
  const Index d = l.ambient_dim();
  return (1.0 - lambda) * Matrix::Identity(d, d) + lambda * l.basis() * l.basis().transpose();
}

/// q(n, 0) = sum_{j=0}^{n} R_n ... R_{j+1} a_j as the literal double sum.
inline Vector literal_tail(const std::vector<AffineSubspace>& collection, const std::vector<std::size_t>& indices,
                           double lambda, std::size_t n) {
  const Index d = collection.front().ambient_dim();
  Vector sum = Vector::Zero(d);
  for (std::size_t j = 0; j <= n; ++j) {
    Vector term = collection[indices[j]].translation();
    for (std::size_t s = j + 1; s <= n; ++s) term = relaxed_matrix(collection[indices[s]].direction(), lambda) * term;
    sum += term;
  }
  return sum;
}

/// R_n ... R_0 x0 as an explicit matrix product.
inline Vector literal_linear(const std::vector<AffineSubspace>& collection, const std::vector<std::size_t>& indices,
                             double lambda, std::size_t n, const Vector& x0) {
  const Index d = collection.front().ambient_dim();
  Matrix prod = Matrix::Identity(d, d);
  for (std::size_t s = 0; s <= n; ++s) prod = relaxed_matrix(collection[indices[s]].direction(), lambda) * prod;
  return prod * x0;
}

/// Brute force: does any contiguous sub-word of `word` satisfy the cycle
/// definition?
inline bool contains_cycle(const std::vector<std::size_t>& word, std::size_t ell) {
  for (std::size_t b = 0; b < word.size(); ++b) {
    std::vector<std::size_t> counts(ell, 0);
    for (std::size_t e = b; e < word.size(); ++e) {
      ++counts[word[e]];
      bool covered = true, once = false;
      for (auto c : counts) {
        covered = covered && c >= 1;
        once = once || c == 1;
      }
      if (covered && once) return true;
    }
  }
  return false;
}

inline double rel_err(const Vector& a, const Vector& b) { return (a - b).norm() / (1.0 + b.norm()); }

}  // namespace relproj::testing
