#include "relproj/regularity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "relproj/random.hpp"

namespace relproj {

const char* to_string(KappaMethod m) {
  switch (m) {
    case KappaMethod::empirical:
      return "empirical";
    case KappaMethod::pair_closed_form:
      return "pair_closed_form";
  }
  return "unknown";
}

std::vector<std::size_t> mask_members(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1U) out.push_back(i);
  }
  return out;
}

namespace {

void check_collection(std::span<const LinearSubspace> collection, const char* where) {
  if (collection.empty()) throw InputError(std::string(where) + ": empty collection");
  const Index d = collection.front().ambient_dim();
  for (const auto& l : collection) {
    if (l.ambient_dim() != d) throw InputError(std::string(where) + ": subspaces differ in ambient dimension");
  }
}

// Largest squared distance to the collection for x = C z, using the
// restricted Gram forms M_i = C^T (I - P_i) C.
double max_sq_distance(const std::vector<Matrix>& forms, const Vector& z) {
  double f = 0.0;
  for (const auto& m : forms) f = std::max(f, z.dot(m * z));
  return f;
}

// Local descent of max_i z^T M_i z on the unit sphere. A softmax-weighted
// gradient handles the kinks where several distances tie; a step is taken
// only when it lowers the maximum.
double refine(const std::vector<Matrix>& forms, Vector z, double fz, std::size_t steps) {
  double eta = 0.25;
  std::vector<double> vals(forms.size());
  for (std::size_t step = 0; step < steps; ++step) {
    double vmax = 0.0;
    for (std::size_t i = 0; i < forms.size(); ++i) {
      vals[i] = z.dot(forms[i] * z);
      vmax = std::max(vmax, vals[i]);
    }
    const double beta = 50.0 * static_cast<double>(step + 1) / std::max(vmax, 1e-300);
    Vector g = Vector::Zero(z.size());
    double wsum = 0.0;
    for (std::size_t i = 0; i < forms.size(); ++i) {
      const double w = std::exp(beta * (vals[i] - vmax));
      g += w * 2.0 * (forms[i] * z);
      wsum += w;
    }
    g /= wsum;
    g -= g.dot(z) * z;
    const double gn = g.norm();
    if (gn < 1e-15) break;
    g /= gn;

    bool moved = false;
    while (eta > 1e-14) {
      Vector trial = (z - eta * g).normalized();
      const double ft = max_sq_distance(forms, trial);
      if (ft < fz) {
        z = std::move(trial);
        fz = ft;
        eta = std::min(1.0, eta * 1.5);
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return fz;
}

double min_eigenvalue(const std::vector<Matrix>& forms, const std::vector<double>& t, Vector* vec = nullptr) {
  Matrix s = Matrix::Zero(forms.front().rows(), forms.front().cols());
  for (std::size_t i = 0; i < forms.size(); ++i) s += t[i] * forms[i];
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, vec ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (vec) *vec = eig.eigenvectors().col(0);
  return eig.eigenvalues()(0);
}

// max over the simplex of lambda_min(sum_i t_i M_i). Every t gives a lower
// bound on min_z max_i z^T M_i z; for two forms the maximum equals it.
double dual_bound(const std::vector<Matrix>& forms) {
  const std::size_t ell = forms.size();
  if (ell == 2) {
    // lambda_min is concave in t: golden-section search on [0, 1].
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    auto h = [&](double t) { return min_eigenvalue(forms, {t, 1.0 - t}); };
    double lo = 0.0, hi = 1.0;
    double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    double ha = h(a), hb = h(b);
    for (int it = 0; it < 80; ++it) {
      if (ha < hb) {
        lo = a;
        a = b;
        ha = hb;
        b = lo + g * (hi - lo);
        hb = h(b);
      } else {
        hi = b;
        b = a;
        hb = ha;
        a = hi - g * (hi - lo);
        ha = h(a);
      }
    }
    return std::max({ha, hb, h(0.0), h(1.0)});
  }

  // Exponentiated supergradient ascent; the supergradient at t is
  // (v^T M_i v)_i for a unit bottom eigenvector v.
  std::vector<double> t(ell, 1.0 / static_cast<double>(ell));
  double best = -std::numeric_limits<double>::infinity();
  Vector v;
  for (int it = 0; it < 600; ++it) {
    const double val = min_eigenvalue(forms, t, &v);
    best = std::max(best, val);
    std::vector<double> grad(ell);
    double gmax = 0.0;
    for (std::size_t i = 0; i < ell; ++i) {
      grad[i] = v.dot(forms[i] * v);
      gmax = std::max(gmax, grad[i]);
    }
    if (gmax <= 0.0) break;
    const double eta = 2.0 / (gmax * std::sqrt(static_cast<double>(it + 1)));
    double total = 0.0;
    for (std::size_t i = 0; i < ell; ++i) {
      t[i] *= std::exp(eta * (grad[i] - gmax));
      total += t[i];
    }
    for (auto& ti : t) ti /= total;
  }
  return best;
}

}  // namespace

RegularityReport estimate_kappa(std::span<const LinearSubspace> collection, const KappaOptions& options) {
  check_collection(collection, "estimate_kappa");
  if (options.n_samples < 1) throw InputError("estimate_kappa: n_samples must be >= 1");

  RegularityReport report;
  report.method = KappaMethod::empirical;
  if (collection.size() == 1) {
    // d_L(x) <= 1 * d_L(x): the inequality is an identity.
    report.kappa = 1.0;
    return report;
  }

  const LinearSubspace cap = intersect(collection);
  const Matrix comp = complement_basis(cap.basis());
  const Index m = comp.cols();
  if (m == 0) {
    // cap L = R^d: both sides vanish everywhere.
    report.kappa = 1.0;
    return report;
  }

  std::vector<Matrix> forms;
  forms.reserve(collection.size());
  for (const auto& l : collection) {
    const Matrix lc = l.basis().transpose() * comp;
    forms.push_back(Matrix::Identity(m, m) - lc.transpose() * lc);
  }

  // Multistart: keep the few starts with the smallest max-distance.
  CounterRng rng(options.seed, 1);
  std::vector<std::pair<double, Vector>> best;
  const std::size_t keep = std::max<std::size_t>(1, options.refine_starts);
  for (std::size_t s = 0; s < options.n_samples; ++s) {
    Vector z = rng.normal_vector(m);
    const double nz = z.norm();
    if (nz == 0.0) continue;
    z /= nz;
    const double f = max_sq_distance(forms, z);
    if (best.size() < keep || f < best.back().first) {
      best.emplace_back(f, std::move(z));
      std::sort(best.begin(), best.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      if (best.size() > keep) best.pop_back();
    }
  }

  double fmin = std::numeric_limits<double>::infinity();
  for (auto& [f, z] : best) fmin = std::min(fmin, refine(forms, z, f, options.refine_steps));
  fmin = std::max(fmin, 1e-300);
  const double sampled = std::max(1.0, 1.0 / std::sqrt(fmin));
  const double h = dual_bound(forms);
  const double dual = h > 0.0 ? std::max(1.0, 1.0 / std::sqrt(h)) : std::numeric_limits<double>::infinity();
  report.kappa_sampled = sampled;
  report.kappa_dual = dual;
  report.kappa = std::max(sampled, std::isfinite(dual) ? dual : sampled) * options.safety;

  // Validation on a fresh, seed-shifted stream, computed in the ambient space.
  CounterRng vrng(options.seed, 2);
  double worst_ratio = 0.0;
  auto validate = [&](double kappa) {
    double violation = -std::numeric_limits<double>::infinity();
    CounterRng local = vrng;
    for (std::size_t s = 0; s < options.n_validation; ++s) {
      Vector z = local.normal_vector(m);
      const double nz = z.norm();
      if (nz == 0.0) continue;
      const Vector x = comp * (z / nz);
      const double dcap = cap.distance(x);
      double dmax = 0.0;
      for (const auto& l : collection) dmax = std::max(dmax, l.distance(x));
      violation = std::max(violation, dcap - kappa * dmax);
      if (dmax > 0) worst_ratio = std::max(worst_ratio, dcap / dmax);
    }
    return options.n_validation == 0 ? 0.0 : violation;
  };
  report.max_violation = validate(report.kappa);
  if (report.max_violation > 0.0) {
    // The fresh sample beat the search; adopt its ratio and re-check.
    report.kappa = std::max(report.kappa, worst_ratio * options.safety);
    report.max_violation = validate(report.kappa);
  }
  report.samples_checked = options.n_validation;
  report.kappa_star = std::max(report.kappa, kKappaStarFloor);
  return report;
}

double pair_kappa_closed_form(const LinearSubspace& u, const LinearSubspace& v, double angle_tol) {
  if (u.ambient_dim() != v.ambient_dim()) throw InputError("pair_kappa_closed_form: dimension mismatch");
  if (u.dim() == 0 || v.dim() == 0) return 1.0;
  const Matrix cross = u.basis().transpose() * v.basis();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeThinU);
  const auto& cosines = svd.singularValues();
  // Angles from atan2(sin, cos) so that near-zero angles (shared directions)
  // are resolved to rounding level rather than sqrt(eps).
  double smallest = -1.0;
  for (Index i = 0; i < cosines.size(); ++i) {
    const Vector ui = u.basis() * svd.matrixU().col(i);
    const double theta = std::atan2(v.distance(ui), cosines(i));
    if (theta > angle_tol && (smallest < 0 || theta < smallest)) smallest = theta;
  }
  if (smallest < 0) return 1.0;
  return 1.0 / std::sin(smallest / 2.0);
}

KappaStarTable::KappaStarTable(std::vector<LinearSubspace> collection, KappaOptions options, std::size_t guard)
    : collection_(std::move(collection)), options_(options) {
  check_collection(collection_, "kappa_star");
  if (collection_.size() > guard) {
    throw GuardExceeded("kappa_star: collection has " + std::to_string(collection_.size()) +
                        " subspaces, above the enumeration guard of " + std::to_string(guard) +
                        " (raise it with --guard-override)");
  }
  if (collection_.size() > 31) throw GuardExceeded("kappa_star: at most 31 subspaces are supported");
}

const LinearSubspace& KappaStarTable::intersection(std::uint32_t mask) {
  auto it = intersections_.find(mask);
  if (it != intersections_.end()) return it->second;
  std::vector<LinearSubspace> members;
  for (auto i : mask_members(mask)) members.push_back(collection_.at(i));
  return intersections_.emplace(mask, intersect(members)).first->second;
}

double KappaStarTable::pair_kappa(std::uint32_t first, std::uint32_t second) {
  if (first > second) std::swap(first, second);
  const auto key = std::make_pair(first, second);
  if (auto it = pairs_.find(key); it != pairs_.end()) return it->second;

  double kappa = 1.0;
  // Nested masks give nested intersections, whose pair constant is exactly 1.
  if ((first & second) != first && (first & second) != second) {
    const std::vector<LinearSubspace> pair{intersection(first), intersection(second)};
    KappaOptions opts = options_;
    opts.seed = mix64(options_.seed ^ (static_cast<std::uint64_t>(first) << 32 | second));
    const RegularityReport r = estimate_kappa(pair, opts);
    kappa = r.kappa;
    samples_checked_ += r.samples_checked;
    max_violation_ = pairs_.empty() ? r.max_violation : std::max(max_violation_, r.max_violation);
  }
  pairs_.emplace(key, kappa);
  return kappa;
}

double KappaStarTable::kappa_star(std::uint32_t mask) {
  if (auto it = star_.find(mask); it != star_.end()) return it->second;
  double k = 1.0;
  // Unordered pairs of distinct nonempty submasks of `mask`.
  for (std::uint32_t a = mask; a != 0; a = (a - 1) & mask) {
    for (std::uint32_t b = (a - 1) & mask; b != 0; b = (b - 1) & mask) k = std::max(k, pair_kappa(b, a));
  }
  k = std::max(k, kKappaStarFloor);
  star_.emplace(mask, k);
  return k;
}

RegularityReport kappa_star(std::span<const LinearSubspace> collection, const KappaOptions& options,
                            std::size_t guard) {
  KappaStarTable table(std::vector<LinearSubspace>(collection.begin(), collection.end()), options, guard);
  const std::uint32_t full = collection.size() >= 32 ? 0xffffffffU : ((1U << collection.size()) - 1U);

  RegularityReport report = estimate_kappa(collection, options);
  report.kappa_star = table.kappa_star(full);
  report.method = KappaMethod::empirical;
  report.samples_checked += table.samples_checked();
  report.max_violation = std::max(report.max_violation, table.max_violation());
  for (const auto& [key, k] : table.pair_ledger()) report.pairs.push_back({key.first, key.second, k});
  return report;
}

ContractionFactor contraction_factor(double lambda, int ell, double kappa_star) {
  if (!(lambda > 0.0 && lambda < 2.0)) {
    throw InputError("contraction_factor: lambda must lie in ]0, 2[, got " + std::to_string(lambda));
  }
  if (ell < 1) throw InputError("contraction_factor: ell must be >= 1");
  if (!(kappa_star >= 1.0)) throw InputError("contraction_factor: kappa_star must be >= 1");
  const double shrink = lambda * (2.0 - lambda) * std::pow(kappa_star, -2.0 * (ell - 1));
  return {std::sqrt(std::max(0.0, 1.0 - shrink)), lambda, ell, kappa_star};
}

}  // namespace relproj
