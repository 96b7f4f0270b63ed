#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "relproj/subspaces.hpp"

namespace relproj {

/// Thrown when an exponential enumeration over subcollections would exceed
/// the configured collection-size guard.
class GuardExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultSubcollectionGuard = 8;

/// Lower clamp for the aggregated constant (it must exceed 1 strictly).
inline constexpr double kKappaStarFloor = 1.0 + 1e-6;

enum class KappaMethod { empirical, pair_closed_form };

const char* to_string(KappaMethod m);

struct KappaOptions {
  std::size_t n_samples = 4096;      // random starts on the unit sphere of (cap L)^perp
  std::size_t refine_starts = 4;     // best starts handed to local refinement
  std::size_t refine_steps = 200;    // ascent steps per refined start
  std::size_t n_validation = 100000; // fresh sample checked against the returned constant
  double safety = 1.01;              // multiplicative inflation of the sampled supremum
  std::uint64_t seed = 0;
};

/// Regularity constant of one pair of subcollection intersections.
struct PairKappa {
  std::uint32_t first_mask;
  std::uint32_t second_mask;
  double kappa;
};

struct RegularityReport {
  double kappa = 1.0;       // constant of d_{cap L}(x) <= kappa max_L d_L(x)
  double kappa_sampled = 1.0;  // largest ratio actually attained by the search (a lower bound)
  double kappa_dual = 1.0;     // Lagrangian upper bound (exact for pairs)
  double kappa_star = kKappaStarFloor;
  KappaMethod method = KappaMethod::empirical;
  std::size_t samples_checked = 0;
  double max_violation = 0.0;  // max of d_cap(x) - kappa max d_L(x) over the validation sample
  std::vector<PairKappa> pairs;  // filled by kappa_star only
};

/// Regularity constant of a collection. With M_i the forms of d_{L_i}^2 on
/// (cap L)^perp, the search for min_x max_i x^T M_i x over unit x gives a
/// lower bound on the constant, and any t in the simplex gives the upper
/// bound 1 / sqrt(lambda_min(sum_i t_i M_i)); the two meet for pairs. The
/// larger value, inflated by options.safety, is checked on a fresh sample.
RegularityReport estimate_kappa(std::span<const LinearSubspace> collection, const KappaOptions& options = {});

/// Exact regularity constant of a pair {U, V}: 1 / sin(theta / 2), theta the
/// smallest nonzero principal angle (the Friedrichs angle); 1 if there is none.
double pair_kappa_closed_form(const LinearSubspace& u, const LinearSubspace& v, double angle_tol = 1e-9);

/// Aggregated constant over all pairs of subcollection intersections
/// {cap L_1, cap L_2}, clamped to at least kKappaStarFloor.
RegularityReport kappa_star(std::span<const LinearSubspace> collection, const KappaOptions& options = {},
                            std::size_t guard = kDefaultSubcollectionGuard);

/// Memoized pair constants over the subcollection lattice of one collection.
/// Subcollections are bit masks over collection indices.
class KappaStarTable {
 public:
  KappaStarTable(std::vector<LinearSubspace> collection, KappaOptions options,
                 std::size_t guard = kDefaultSubcollectionGuard);

  std::size_t size() const { return collection_.size(); }

  /// kappa_star restricted to the subcollection `mask` (clamped).
  double kappa_star(std::uint32_t mask);
  double pair_kappa(std::uint32_t first, std::uint32_t second);
  const LinearSubspace& intersection(std::uint32_t mask);

  std::size_t samples_checked() const { return samples_checked_; }
  double max_violation() const { return max_violation_; }
  const std::map<std::pair<std::uint32_t, std::uint32_t>, double>& pair_ledger() const { return pairs_; }

 private:
  std::vector<LinearSubspace> collection_;
  KappaOptions options_;
  std::map<std::uint32_t, LinearSubspace> intersections_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> pairs_;
  std::map<std::uint32_t, double> star_;
  std::size_t samples_checked_ = 0;
  double max_violation_ = 0.0;
};

struct ContractionFactor {
  double value;
  double lambda;
  int ell;
  double kappa_star;
};

/// sqrt(1 - lambda (2 - lambda) kappa_star^(-2 (ell - 1))).
ContractionFactor contraction_factor(double lambda, int ell, double kappa_star);

/// Members of a subcollection mask, ascending.
std::vector<std::size_t> mask_members(std::uint32_t mask);

}  // namespace relproj
