#include "relproj/fixpoint.hpp"

#include <cmath>
#include <string>

namespace relproj {

AffineMap AffineMap::identity(Index dim) { return {Matrix::Identity(dim, dim), Vector::Zero(dim)}; }

AffineMap AffineMap::after(const AffineMap& first) const {
  if (first.dim() != dim()) throw InputError("AffineMap: dimension mismatch in composition");
  return {linear * first.linear, linear * first.offset + offset};
}

AffineMap AffineMap::linear_part() const { return {linear, Vector::Zero(offset.size())}; }

AffineMap to_affine_map(const RelaxedProjector& r) {
  const auto& target = r.target();
  const Index d = target.ambient_dim();
  const double lam = r.lambda();
  return {(1.0 - lam) * Matrix::Identity(d, d) + lam * target.direction().projector(),
          lam * target.translation()};
}

AffineMap compose(std::span<const RelaxedProjector> projectors) {
  if (projectors.empty()) throw InputError("compose: empty list of projectors");
  const Index d = projectors.front().target().ambient_dim();
  AffineMap q = AffineMap::identity(d);
  for (const auto& r : projectors) {
    if (r.target().ambient_dim() != d) throw InputError("compose: projectors differ in ambient dimension");
    q = to_affine_map(r).after(q);
  }
  return q;
}

AffineMap compose_linear(std::span<const RelaxedProjector> projectors) { return compose(projectors).linear_part(); }

FixedPointSet fixed_points(const AffineMap& q, std::optional<double> tol) {
  const Index d = q.dim();
  if (q.offset.size() != d) throw InputError("fixed_points: offset length does not match the linear part");
  const double threshold = tol.value_or(1e-8 * (1.0 + q.offset.norm()));
  if (!(threshold > 0.0)) throw InputError("fixed_points: tol must be positive");

  const Matrix system = Matrix::Identity(d, d) - q.linear;
  const auto ls = least_squares(system, q.offset);
  return {ls.solution, LinearSubspace::from_orthonormal(nullspace(system)), ls.residual_norm <= threshold,
          ls.residual_norm};
}

Vector project_onto_fix(const FixedPointSet& fps, const Vector& x0) {
  if (!fps.consistent) {
    throw InputError("project_onto_fix: fixed-point set is inconsistent (residual " + std::to_string(fps.residual) +
                     ")");
  }
  return fps.particular + fps.directions.project(x0 - fps.particular);
}

RateEstimate linear_rate(const AffineMap& q, const Vector& x0, const Vector& x_star, std::size_t n_steps) {
  if (n_steps < 10) throw InputError("linear_rate: n_steps must be >= 10");
  if (x0.size() != q.dim() || x_star.size() != q.dim()) throw InputError("linear_rate: dimension mismatch");

  RateEstimate out;
  out.residuals.reserve(n_steps + 1);
  Vector x = x0;
  out.residuals.push_back((x - x_star).norm());
  for (std::size_t n = 0; n < n_steps; ++n) {
    x = q.apply(x);
    out.residuals.push_back((x - x_star).norm());
  }

  auto mean_log_ratio = [&](std::size_t from, double& value) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t n = std::max<std::size_t>(from, 1); n <= n_steps; ++n) {
      const double prev = out.residuals[n - 1];
      const double cur = out.residuals[n];
      if (prev < kResidualFloor || cur < kResidualFloor) continue;
      sum += std::log(cur / prev);
      ++count;
    }
    if (count == 0) return false;
    value = std::exp(sum / static_cast<double>(count));
    return true;
  };

  double rate = 0.0;
  if (!mean_log_ratio(n_steps / 2 + 1, rate) && !mean_log_ratio(1, rate)) rate = 0.0;
  out.rate = rate;
  return out;
}

}  // namespace relproj
