#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "relproj/regularity.hpp"
#include "relproj/subspaces.hpp"

namespace relproj {

enum class ScheduleKind { cyclic, random_uniform, explicit_word };

const char* to_string(ScheduleKind k);

/// Which member of the collection is used at each step, and with which
/// relaxation parameter.
///
/// With a fixed rule every step uses `lambda`. With a varying rule step n uses
/// varying[n], each in [0, lambda]; `lambda` is then the cap that the bound
/// certificate is computed for.
struct Schedule {
  ScheduleKind kind = ScheduleKind::cyclic;
  std::uint64_t seed = 0;
  std::vector<std::size_t> word;  // explicit schedules repeat this word periodically
  double lambda = 1.0;
  std::vector<double> varying;

  static Schedule cyclic(double lambda);
  static Schedule random(std::uint64_t seed, double lambda);
  static Schedule explicit_word(std::vector<std::size_t> word, double lambda);

  Schedule& with_varying(std::vector<double> lambdas);

  bool is_varying() const { return !varying.empty(); }
  std::size_t index_at(std::size_t step, std::size_t ell) const;
  double lambda_at(std::size_t step) const { return is_varying() ? varying[step] : lambda; }

  /// Throws InputError if the schedule cannot drive `n_steps` steps over a
  /// collection of size `ell`.
  void validate(std::size_t ell, std::size_t n_steps) const;
};

/// n draws uniform on [0, cap], reproducible from `seed`.
std::vector<double> uniform_lambdas(std::size_t n, double cap, std::uint64_t seed);

enum class TraceStorage { full, norms_only };

struct IterationTrace {
  std::vector<Vector> iterates;  // x_0 .. x_N (empty in norms_only mode)
  std::vector<std::size_t> chosen_indices;
  std::vector<double> lambdas;
  std::vector<double> norms;     // ||x_n||, always recorded
  double sup_norm = 0.0;
  Vector final_iterate;
};

/// Called after each step with (n + 1, x_{n+1}); and once with (0, x_0).
using StepObserver = std::function<void(std::size_t, const Vector&)>;

/// x_{n+1} = R_{A_{i_n}, lambda_n} x_n.
IterationTrace iterate(std::span<const AffineSubspace> collection, const Schedule& schedule, const Vector& x0,
                       std::size_t n_steps, TraceStorage storage = TraceStorage::full,
                       const StepObserver& observer = {});

/// Both halves of x_{n+1} = R_n...R_0 x_0 + lambda q(n, 0), where the R_j are
/// the relaxed projectors onto the parallel linear subspaces.
struct UnrolledForm {
  Vector linear;  // R_n ... R_0 x_0
  Vector tail;    // q(n, 0) = sum_j R_n ... R_{j+1} a_j
};

/// Fixed-lambda schedules only.
UnrolledForm unrolled(std::span<const AffineSubspace> collection, const Schedule& schedule, const Vector& x0,
                      std::size_t n);

/// q(n, 0), accumulated as q(s, 0) = R_s q(s-1, 0) + a_s with q(0, 0) = a_0.
Vector unrolled_tail(std::span<const AffineSubspace> collection, const Schedule& schedule, std::size_t n);

/// ||q(m, 0)|| for m = 0 .. n in one pass.
std::vector<double> tail_norms(std::span<const AffineSubspace> collection, const Schedule& schedule,
                               std::size_t n);

/// Every index in [0, ell) occurs, and at least one occurs exactly once.
bool is_cycle(std::span<const std::size_t> word, std::size_t ell);

/// A word split into cycles by a greedy left-to-right scan.
///
/// The word lists the operator indices of R_n ... R_1 in scan order, so word
/// position t corresponds to operator index n - t with n = word.size().
struct Segmentation {
  std::vector<std::pair<std::size_t, std::size_t>> cycle_segments;  // [begin, end) word positions
  std::pair<std::size_t, std::size_t> remainder;                    // [begin, end), possibly empty
  std::size_t k = 0;                                                 // number of cycles
  std::vector<std::size_t> boundaries;                               // p_0 .. p_k, p_k = n
};

Segmentation segment_cycles(std::span<const std::size_t> word, std::size_t ell);

/// Maps a subcollection (bit mask over collection indices) to its kappa_star.
using KappaOracle = std::function<double(std::uint32_t)>;

struct BoundCertificate {
  double tau = 0.0;        // largest translation norm
  double D = 0.0;          // largest constant among proper subcollections
  double kappa_star = 1.0;
  std::size_t ell = 0;
  double lambda = 0.0;
  double C = 0.0;
  std::map<std::uint32_t, double> subcollection_ledger;  // mask -> its constant
};

/// C({A}) = ||a|| / min(lambda, 1); for larger collections
/// C = (tau + D) / (1 - sqrt(1 - lambda (2 - lambda) kappa_star^(-2 (ell - 1)))),
/// evaluated recursively over the subcollection lattice.
BoundCertificate bound_certificate(std::span<const AffineSubspace> collection, double lambda,
                                   const KappaOracle& kappa_oracle,
                                   std::size_t guard = kDefaultSubcollectionGuard);

/// Same, with kappa_star values from a KappaStarTable over the parallel spaces.
BoundCertificate bound_certificate(std::span<const AffineSubspace> collection, double lambda,
                                   const KappaOptions& options = {},
                                   std::size_t guard = kDefaultSubcollectionGuard);

struct BoundednessCheck {
  bool ok;
  double margin;  // (||x0|| + lambda C) - sup ||x_n||
};

BoundednessCheck verify_boundedness(const IterationTrace& trace, const BoundCertificate& cert, const Vector& x0);

std::vector<LinearSubspace> directions_of(std::span<const AffineSubspace> collection);

}  // namespace relproj
