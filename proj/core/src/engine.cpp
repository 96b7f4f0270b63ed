#include "relproj/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "relproj/random.hpp"

namespace relproj {

const char* to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::cyclic:
      return "cyclic";
    case ScheduleKind::random_uniform:
      return "random";
    case ScheduleKind::explicit_word:
      return "explicit";
  }
  return "unknown";
}

Schedule Schedule::cyclic(double lambda) {
  Schedule s;
  s.kind = ScheduleKind::cyclic;
  s.lambda = lambda;
  return s;
}

Schedule Schedule::random(std::uint64_t seed, double lambda) {
  Schedule s;
  s.kind = ScheduleKind::random_uniform;
  s.seed = seed;
  s.lambda = lambda;
  return s;
}

Schedule Schedule::explicit_word(std::vector<std::size_t> word, double lambda) {
  Schedule s;
  s.kind = ScheduleKind::explicit_word;
  s.word = std::move(word);
  s.lambda = lambda;
  return s;
}

Schedule& Schedule::with_varying(std::vector<double> lambdas) {
  varying = std::move(lambdas);
  return *this;
}

std::size_t Schedule::index_at(std::size_t step, std::size_t ell) const {
  switch (kind) {
    case ScheduleKind::cyclic:
      return step % ell;
    case ScheduleKind::random_uniform: {
      return static_cast<std::size_t>(mulhi64(CounterRng(seed, 0x5c4ed0).at(step), ell));
    }
    case ScheduleKind::explicit_word:
      return word[step % word.size()];
  }
  return 0;
}

void Schedule::validate(std::size_t ell, std::size_t n_steps) const {
  if (ell == 0) throw InputError("schedule: empty collection");
  if (!(lambda > 0.0 && lambda < 2.0)) {
    throw InputError("schedule: lambda must lie in ]0, 2[, got " + std::to_string(lambda));
  }
  if (kind == ScheduleKind::explicit_word) {
    if (word.empty() && n_steps > 0) throw InputError("schedule: explicit word is empty");
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (word[i] >= ell) {
        throw InputError("schedule: explicit index " + std::to_string(word[i]) + " at position " +
                         std::to_string(i) + " is out of range for a collection of " + std::to_string(ell));
      }
    }
  }
  if (is_varying()) {
    if (varying.size() < n_steps) {
      throw InputError("schedule: " + std::to_string(varying.size()) + " relaxation parameters for " +
                       std::to_string(n_steps) + " steps");
    }
    for (std::size_t i = 0; i < n_steps; ++i) {
      if (!(varying[i] >= 0.0 && varying[i] <= lambda)) {
        throw InputError("schedule: varying lambda " + std::to_string(varying[i]) + " at step " +
                         std::to_string(i) + " is outside [0, " + std::to_string(lambda) + "]");
      }
    }
  }
}

std::vector<double> uniform_lambdas(std::size_t n, double cap, std::uint64_t seed) {
  CounterRng rng(seed, 0x1a4bda);
  std::vector<double> out(n);
  for (auto& v : out) v = cap * rng.uniform();
  return out;
}

namespace {

void check_collection(std::span<const AffineSubspace> collection, Index dim) {
  if (collection.empty()) throw InputError("empty collection of affine subspaces");
  for (const auto& a : collection) {
    if (a.ambient_dim() != dim) {
      throw InputError("affine subspace has ambient dimension " + std::to_string(a.ambient_dim()) +
                       ", expected " + std::to_string(dim));
    }
  }
}

// x <- (1 - lambda) x + lambda (a + B B^T x), allocation-free.
struct Stepper {
  std::vector<const Matrix*> bases;
  std::vector<const Vector*> translations;
  Vector coeffs;
  Vector proj;

  explicit Stepper(std::span<const AffineSubspace> collection) {
    for (const auto& a : collection) {
      bases.push_back(&a.direction().basis());
      translations.push_back(&a.translation());
    }
    proj.resize(collection.front().ambient_dim());
  }

  void linear(std::size_t i, double lambda, Vector& x) {
    const Matrix& b = *bases[i];
    if (b.cols() == 0) {
      proj.setZero();
    } else {
      coeffs.noalias() = b.transpose() * x;
      proj.noalias() = b * coeffs;
    }
    x = (1.0 - lambda) * x + lambda * proj;
  }

  void affine(std::size_t i, double lambda, Vector& x) {
    linear(i, lambda, x);
    x += lambda * *translations[i];
  }
};

}  // namespace

IterationTrace iterate(std::span<const AffineSubspace> collection, const Schedule& schedule, const Vector& x0,
                       std::size_t n_steps, TraceStorage storage, const StepObserver& observer) {
  check_collection(collection, x0.size());
  schedule.validate(collection.size(), n_steps);

  IterationTrace trace;
  const bool full = storage == TraceStorage::full;
  if (full) trace.iterates.reserve(n_steps + 1);
  trace.chosen_indices.reserve(n_steps);
  trace.lambdas.reserve(n_steps);
  trace.norms.reserve(n_steps + 1);

  Stepper stepper(collection);
  Vector x = x0;
  if (full) trace.iterates.push_back(x);
  trace.norms.push_back(x.norm());
  if (observer) observer(0, x);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const std::size_t i = schedule.index_at(n, collection.size());
    const double lam = schedule.lambda_at(n);
    stepper.affine(i, lam, x);
    trace.chosen_indices.push_back(i);
    trace.lambdas.push_back(lam);
    trace.norms.push_back(x.norm());
    if (full) trace.iterates.push_back(x);
    if (observer) observer(n + 1, x);
  }
  trace.sup_norm = *std::max_element(trace.norms.begin(), trace.norms.end());
  trace.final_iterate = std::move(x);
  return trace;
}

UnrolledForm unrolled(std::span<const AffineSubspace> collection, const Schedule& schedule, const Vector& x0,
                      std::size_t n) {
  check_collection(collection, x0.size());
  if (schedule.is_varying()) throw InputError("unrolled form requires a fixed relaxation parameter");
  schedule.validate(collection.size(), n + 1);

  Stepper stepper(collection);
  Vector linear = x0;
  Vector tail = Vector::Zero(x0.size());
  for (std::size_t s = 0; s <= n; ++s) {
    const std::size_t i = schedule.index_at(s, collection.size());
    stepper.linear(i, schedule.lambda, linear);
    stepper.linear(i, schedule.lambda, tail);
    tail += collection[i].translation();
  }
  return {linear, tail};
}

Vector unrolled_tail(std::span<const AffineSubspace> collection, const Schedule& schedule, std::size_t n) {
  if (collection.empty()) throw InputError("empty collection of affine subspaces");
  return unrolled(collection, schedule, Vector::Zero(collection.front().ambient_dim()), n).tail;
}

std::vector<double> tail_norms(std::span<const AffineSubspace> collection, const Schedule& schedule,
                               std::size_t n) {
  if (collection.empty()) throw InputError("empty collection of affine subspaces");
  check_collection(collection, collection.front().ambient_dim());
  if (schedule.is_varying()) throw InputError("tail_norms requires a fixed relaxation parameter");
  schedule.validate(collection.size(), n + 1);

  Stepper stepper(collection);
  Vector tail = Vector::Zero(collection.front().ambient_dim());
  std::vector<double> out;
  out.reserve(n + 1);
  for (std::size_t s = 0; s <= n; ++s) {
    const std::size_t i = schedule.index_at(s, collection.size());
    stepper.linear(i, schedule.lambda, tail);
    tail += collection[i].translation();
    out.push_back(tail.norm());
  }
  return out;
}

bool is_cycle(std::span<const std::size_t> word, std::size_t ell) {
  if (ell == 0) return false;
  std::vector<std::size_t> counts(ell, 0);
  for (auto i : word) {
    if (i >= ell) throw InputError("is_cycle: index " + std::to_string(i) + " out of range");
    ++counts[i];
  }
  const bool covered = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c >= 1; });
  const bool some_once = std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 1; });
  return covered && some_once;
}

Segmentation segment_cycles(std::span<const std::size_t> word, std::size_t ell) {
  if (ell == 0) throw InputError("segment_cycles: ell must be >= 1");
  Segmentation seg;
  std::vector<bool> seen(ell, false);
  std::size_t covered = 0;
  std::size_t start = 0;
  for (std::size_t t = 0; t < word.size(); ++t) {
    if (word[t] >= ell) throw InputError("segment_cycles: index " + std::to_string(word[t]) + " out of range");
    if (!seen[word[t]]) {
      seen[word[t]] = true;
      ++covered;
    }
    // First full coverage: the element just added occurs once in the segment.
    if (covered == ell) {
      seg.cycle_segments.emplace_back(start, t + 1);
      start = t + 1;
      std::fill(seen.begin(), seen.end(), false);
      covered = 0;
    }
  }
  seg.remainder = {start, word.size()};
  seg.k = seg.cycle_segments.size();

  const std::size_t n = word.size();
  seg.boundaries.assign(seg.k + 1, 0);
  seg.boundaries[seg.k] = n;
  for (std::size_t c = 0; c < seg.k; ++c) {
    // The c-th segment from the left ends at p_{k-c-1}.
    seg.boundaries[seg.k - c - 1] = n - seg.cycle_segments[c].second;
  }
  return seg;
}

std::vector<LinearSubspace> directions_of(std::span<const AffineSubspace> collection) {
  std::vector<LinearSubspace> out;
  out.reserve(collection.size());
  for (const auto& a : collection) out.push_back(a.direction());
  return out;
}

BoundCertificate bound_certificate(std::span<const AffineSubspace> collection, double lambda,
                                   const KappaOracle& kappa_oracle, std::size_t guard) {
  if (collection.empty()) throw InputError("bound_certificate: empty collection");
  check_collection(collection, collection.front().ambient_dim());
  if (!(lambda > 0.0 && lambda < 2.0)) {
    throw InputError("bound_certificate: lambda must lie in ]0, 2[, got " + std::to_string(lambda));
  }
  if (collection.size() > guard || collection.size() > 31) {
    throw GuardExceeded("bound_certificate: collection has " + std::to_string(collection.size()) +
                        " members, above the subcollection guard of " + std::to_string(guard) +
                        " (raise it with --guard-override)");
  }

  const std::uint32_t full = (1U << collection.size()) - 1U;
  std::vector<double> norms;
  for (const auto& a : collection) norms.push_back(a.translation().norm());

  BoundCertificate cert;
  cert.lambda = lambda;
  cert.ell = collection.size();

  // Masks in increasing order visit every proper submask before its supersets.
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int size = std::popcount(mask);
    double tau = 0.0;
    for (auto i : mask_members(mask)) tau = std::max(tau, norms[i]);
    double c = 0.0;
    double d = 0.0;
    double kstar = 1.0;
    if (size == 1) {
      // sup_n |1 - (1 - lambda)^(n + 1)| / lambda is 1 / lambda only for lambda <= 1.
      c = tau / std::min(lambda, 1.0);
    } else {
      for (std::uint32_t sub = (mask - 1) & mask; sub != 0; sub = (sub - 1) & mask) {
        d = std::max(d, cert.subcollection_ledger.at(sub));
      }
      kstar = kappa_oracle(mask);
      const double factor = contraction_factor(lambda, size, kstar).value;
      c = (tau + d) / (1.0 - factor);
    }
    cert.subcollection_ledger[mask] = c;
    if (mask == full) {
      cert.tau = tau;
      cert.D = d;
      cert.kappa_star = kstar;
      cert.C = c;
    }
  }
  return cert;
}

BoundCertificate bound_certificate(std::span<const AffineSubspace> collection, double lambda,
                                   const KappaOptions& options, std::size_t guard) {
  if (collection.size() > guard) {
    throw GuardExceeded("bound_certificate: collection has " + std::to_string(collection.size()) +
                        " members, above the subcollection guard of " + std::to_string(guard) +
                        " (raise it with --guard-override)");
  }
  KappaStarTable table(directions_of(collection), options, guard);
  return bound_certificate(collection, lambda, [&table](std::uint32_t mask) { return table.kappa_star(mask); },
                           guard);
}

BoundednessCheck verify_boundedness(const IterationTrace& trace, const BoundCertificate& cert, const Vector& x0) {
  const double radius = x0.norm() + cert.lambda * cert.C;
  return {trace.sup_norm <= radius + 1e-8 * (1.0 + cert.C), radius - trace.sup_norm};
}

}  // namespace relproj
