// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "relproj/cli.hpp"
#include "relproj/fixpoint.hpp"
#include "relproj/kaczmarz.hpp"
#include "relproj/random.hpp"
#include "support.hpp"

using namespace relproj;
using relproj::testing::random_affine;
using relproj::testing::random_subspace;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = o.detail;
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    detail += "; runtime over budget " + std::to_string(budget_s) + " s";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double max_sine(const std::vector<LinearSubspace>& c, const Vector& x) {
  double m = 0.0;
  for (const auto& l : c) m = std::max(m, sine_cosine(l, x).sin);
  return m;
}

std::vector<AffineSubspace> random_collection(CounterRng& rng, Index d, std::size_t ell) {
  std::vector<AffineSubspace> c;
  for (std::size_t i = 0; i < ell; ++i)
    c.push_back(random_affine(d, static_cast<Index>(rng.below(static_cast<std::uint64_t>(d))), rng, 2.0));
  return c;
}

// ---------------------------------------------------------------- 1

Outcome identities() {
  CounterRng rng(1001);
  const int n = 2000;
  double decomposition = 0, pythagoras = 0, reflection = 0, sine_identity = 0, commute = 0;
  long mismatches = 0, monotone_violations = 0;
  for (int trial = 0; trial < n; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(7));
    const auto l = random_subspace(d, static_cast<Index>(rng.below(static_cast<std::uint64_t>(d + 1))), rng);
    const Vector x = rng.normal_vector(d);
    const double lam = 2.0 * (rng.uniform() * 0.998 + 0.001);
    const double nx2 = x.squaredNorm();
    const Vector p = l.project(x);

    decomposition = std::max(decomposition, (x - p - l.orthogonal_complement().project(x)).norm() / x.norm());
    pythagoras = std::max(pythagoras, std::abs(nx2 - p.squaredNorm() - (x - p).squaredNorm()) / nx2);

    const Vector r = apply_relaxed_linear(l, lam, x);
    reflection = std::max(reflection, std::abs((nx2 - r.squaredNorm()) / (lam * (2 - lam)) - (x - p).squaredNorm()) / nx2);

    const double s = sine_cosine(l, x).sin;
    sine_identity = std::max(sine_identity, std::abs(r.squaredNorm() / nx2 - (1 - lam * (2 - lam) * s * s)));
    for (int k = 0; k <= 20; ++k) {
      const double eps = k / 20.0;
      if (std::abs(s - eps) <= 1e-9) continue;
      const bool lhs = s >= eps;
      const bool rhs = r.norm() <= std::sqrt(1 - lam * (2 - lam) * eps * eps) * x.norm();
      if (lhs != rhs) ++mismatches;
    }

    // Nested pair L1 in L2.
    const Index k2 = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(d)));
    const Matrix big = rng.normal_matrix(d, k2);
    const auto l2 = LinearSubspace::span_columns(big);
    const Index k1 = static_cast<Index>(rng.below(static_cast<std::uint64_t>(k2 + 1)));
    const auto l1 = k1 == 0 ? LinearSubspace::zero(d) : LinearSubspace::span_columns(big * rng.normal_matrix(k2, k1));
    const auto l1p = l1.orthogonal_complement();
    const auto l2p = l2.orthogonal_complement();
    const Vector p1 = l1.project(x);
    const Vector r2 = apply_relaxed_linear(l2, lam, x);
    const double nx = x.norm();
    for (double e : {(l1.project(l2.project(x)) - p1).norm(), (l2.project(p1) - p1).norm(),
                     (l1p.project(l2.project(x)) - l2.project(l1p.project(x))).norm(),
                     (l1.project(l2p.project(x)) - l2p.project(p1)).norm(), (l1.project(r2) - p1).norm(),
                     (apply_relaxed_linear(l2, lam, p1) - p1).norm(),
                     (l1p.project(r2) - apply_relaxed_linear(l2, lam, l1p.project(x))).norm(),
                     (l1.project(apply_relaxed_linear(l2p, lam, x)) - apply_relaxed_linear(l2p, lam, p1)).norm()}) {
      commute = std::max(commute, e / nx);
    }
    if (sine_cosine(l1, r2).sin > sine_cosine(l1, x).sin + 1e-9) ++monotone_violations;
  }
  const double worst = std::max({decomposition, pythagoras, reflection, sine_identity, commute});
  const bool ok = worst <= 1e-9 && mismatches == 0 && monotone_violations == 0;
  return {ok, std::to_string(n) + " triples per identity; max rel err decomposition " + fmt("%.1e", decomposition) +
                  ", pythagoras " + fmt("%.1e", pythagoras) + ", reflection " + fmt("%.1e", reflection) +
                  ", sine identity " + fmt("%.1e", sine_identity) + ", commute " + fmt("%.1e", commute) +
                  "; sine equivalence mismatches " + std::to_string(mismatches) + "; monotonicity violations " +
                  std::to_string(monotone_violations)};
}

// ---------------------------------------------------------------- 2

Outcome unrolled_equivalence() {
  CounterRng rng(1002);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(5));
    const std::size_t ell = 1 + rng.below(4);
    const auto c = random_collection(rng, d, ell);
    const Vector x0 = rng.normal_vector(d);
    const std::size_t n = rng.below(201);
    const double lam = std::array<double, 3>{0.3, 1.0, 1.7}[trial % 3];
    const auto sched = Schedule::random(static_cast<std::uint64_t>(trial), lam);
    const auto trace = iterate(c, sched, x0, n + 1);
    const Vector literal = relproj::testing::literal_linear(c, trace.chosen_indices, lam, n, x0) +
                           lam * relproj::testing::literal_tail(c, trace.chosen_indices, lam, n);
    const auto form = unrolled(c, sched, x0, n);
    worst = std::max({worst, relproj::testing::rel_err(literal, trace.iterates[n + 1]),
                      relproj::testing::rel_err(form.linear + lam * form.tail, trace.iterates[n + 1])});
  }
  return {worst <= 1e-9, "200 instances, max relative error " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 3 and 4

struct CertificateRun {
  long iterate_violations = 0;
  long tail_violations = 0;
  long varying_violations = 0;
  double min_margin = 1e300;
  double min_varying_margin = 1e300;
  int certificates = 0;
};

CertificateRun certificate_runs() {
  CertificateRun out;
  CounterRng rng(1003);
  KappaOptions o;
  o.n_validation = 20000;
  const std::size_t steps = 100000;
  for (int trial = 0; trial < 100; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(4));
    const std::size_t ell = 1 + rng.below(3);
    const auto c = random_collection(rng, d, ell);
    const Vector x0 = rng.normal_vector(d);
    o.seed = static_cast<std::uint64_t>(trial);
    KappaStarTable table(directions_of(c), o);
    const KappaOracle oracle = [&table](std::uint32_t mask) { return table.kappa_star(mask); };
    for (double lam : {0.25, 1.0, 1.75}) {
      const auto cert = bound_certificate(c, lam, oracle);
      ++out.certificates;
      const auto sched = Schedule::random(1000 + static_cast<std::uint64_t>(trial), lam);
      const double radius = x0.norm() + lam * cert.C;
      const auto trace = iterate(c, sched, x0, steps, TraceStorage::norms_only);
      for (double nrm : trace.norms) {
        if (nrm > radius + 1e-8 * (1 + cert.C)) ++out.iterate_violations;
        out.min_margin = std::min(out.min_margin, radius - nrm);
      }
      for (double t : tail_norms(c, sched, steps - 1))
        if (t > cert.C + 1e-8 * (1 + cert.C)) ++out.tail_violations;

      auto varying = Schedule::random(2000 + static_cast<std::uint64_t>(trial), lam);
      varying.with_varying(uniform_lambdas(steps, lam, 3000 + static_cast<std::uint64_t>(trial)));
      const auto vtrace = iterate(c, varying, x0, steps, TraceStorage::norms_only);
      for (double nrm : vtrace.norms) {
        if (nrm > radius + 1e-8 * (1 + cert.C)) ++out.varying_violations;
        out.min_varying_margin = std::min(out.min_varying_margin, radius - nrm);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- 5

Outcome cycle_contraction() {
  CounterRng rng(1005);
  int words = 0;
  double worst_gap = -1e300;
  int violations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t ell = 2 + static_cast<std::size_t>(trial % 2);
    std::vector<LinearSubspace> c;
    for (std::size_t i = 0; i < ell; ++i) c.push_back(random_subspace(4, 1 + static_cast<Index>(rng.below(3)), rng));
    KappaOptions o;
    o.seed = static_cast<std::uint64_t>(trial);
    const double kstar = kappa_star(c, o).kappa_star;
    const Matrix comp = Matrix::Identity(4, 4) - intersect(c).projector();
    for (double lam : {0.5, 1.0, 1.5}) {
      for (int w = 0; w < 3; ++w) {
        std::vector<std::size_t> word;
        do {
          word.assign(ell + rng.below(8), 0);
          for (auto& i : word) i = rng.below(ell);
        } while (!is_cycle(word, ell));
        std::vector<RelaxedProjector> rs;
        for (auto i : word) rs.emplace_back(AffineSubspace(c[i], Vector::Zero(4)), lam);
        const double norm = operator_norm(compose_linear(rs).linear * comp);
        const double bound = contraction_factor(lam, static_cast<int>(ell), kstar).value;
        worst_gap = std::max(worst_gap, norm - bound);
        if (norm > bound + 1e-8) ++violations;
        ++words;
      }
    }
  }
  return {violations == 0 && words >= 50, std::to_string(words) + " cycle words, violations " +
                                               std::to_string(violations) + ", max(norm - bound) " +
                                               fmt("%.3e", worst_gap)};
}

// ---------------------------------------------------------------- 6

Outcome segmentation() {
  CounterRng rng(1006);
  long bad_segments = 0, bad_remainders = 0, bad_partition = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t ell = 1 + rng.below(4);
    std::vector<std::size_t> word(rng.below(21));
    for (auto& w : word) w = rng.below(ell);
    const auto seg = segment_cycles(word, ell);
    std::size_t pos = 0;
    for (const auto& [b, e] : seg.cycle_segments) {
      if (b != pos || e <= b) ++bad_partition;
      if (!is_cycle(std::span<const std::size_t>(word).subspan(b, e - b), ell)) ++bad_segments;
      pos = e;
    }
    if (seg.remainder.first != pos || seg.remainder.second != word.size()) ++bad_partition;
    const std::vector<std::size_t> rest(word.begin() + static_cast<std::ptrdiff_t>(pos), word.end());
    bool suffix_cycle = false;
    for (std::size_t s = 0; s < rest.size(); ++s)
      suffix_cycle = suffix_cycle || is_cycle(std::span<const std::size_t>(rest).subspan(s), ell);
    if (suffix_cycle || relproj::testing::contains_cycle(rest, ell)) ++bad_remainders;
  }
  return {bad_segments == 0 && bad_remainders == 0 && bad_partition == 0,
          "1000 words; non-cycle segments " + std::to_string(bad_segments) + ", remainders containing a cycle " +
              std::to_string(bad_remainders) + ", partition errors " + std::to_string(bad_partition)};
}

// ---------------------------------------------------------------- 7

double r_squared(const std::vector<double>& residuals) {
  std::vector<double> xs, ys;
  for (std::size_t n = 0; n < residuals.size(); ++n) {
    if (residuals[n] < kResidualFloor) continue;
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(residuals[n]));
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  return syy == 0 ? 1.0 : sxy * sxy / (sxx * syy);
}

struct GaussianSystem {
  bool empty_intersection = true;
  bool bounded = true;
  bool converged = true;
  std::string detail;
};

GaussianSystem gaussian_system_instance(std::uint64_t seed) {
  const auto inst = cli::gaussian_instance(15, 10, seed);
  const auto c = blocks_to_affine(BlockSystem::singletons(inst.m, inst.b));
  const double lsq = least_squares(inst.m, inst.b).residual_norm;
  const Vector x0 = Vector::Zero(10);
  GaussianSystem out;
  out.empty_intersection = lsq > 1e-6;
  out.detail = "lsq residual " + fmt("%.3f", lsq);

  for (double lam : {0.5, 1.0, 1.5}) {
    for (const auto& sched : {Schedule::random(7, lam), Schedule::cyclic(lam)}) {
      const auto trace = iterate(c, sched, x0, 3000);
      double early = 0, late = 0;
      for (std::size_t n = 1000; n <= 2000; ++n) early = std::max(early, trace.norms[n]);
      for (std::size_t n = 2000; n <= 3000; ++n) late = std::max(late, trace.norms[n]);
      out.bounded = out.bounded && std::isfinite(trace.sup_norm) && std::abs(late - early) <= 0.01 * early;
      out.detail += std::string("; ") + to_string(sched.kind) + " " + fmt("%.1f", lam) + ": sup " +
                    fmt("%.3f", trace.sup_norm) + ", late/early " + fmt("%.4f", late / early);

      if (sched.kind == ScheduleKind::cyclic) {
        std::vector<RelaxedProjector> rs;
        for (const auto& a : c) rs.emplace_back(a, lam);
        const AffineMap q = compose(rs);
        const auto fps = fixed_points(q);
        const Vector star = project_onto_fix(fps, x0);
        const auto est = linear_rate(q, x0, star, 200);
        const double at_200 = (trace.iterates[3000] - star).norm();
        const double r2 = r_squared(est.residuals);
        out.converged = out.converged && fps.consistent && at_200 <= 1e-6 && r2 >= 0.99 && est.rate < 1.0 &&
                        std::abs(est.residuals[200] - at_200) <= 1e-9;
        out.detail += ", |Q^200 x0 - x*| " + fmt("%.2e", at_200) + ", R^2 " + fmt("%.4f", r2) + ", rate " +
                      fmt("%.4f", est.rate);
      }
    }
  }
  return out;
}

Outcome gaussian_system() {
  const auto r = gaussian_system_instance(42);
  return {r.empty_intersection && r.bounded && r.converged, r.detail};
}

// Not a criterion: how often the same checks hold on other instances.
void gaussian_system_survey() {
  int bounded = 0, converged = 0;
  const int seeds = 20;
  for (int s = 1; s <= seeds; ++s) {
    const auto r = gaussian_system_instance(static_cast<std::uint64_t>(s));
    bounded += r.bounded ? 1 : 0;
    converged += r.converged ? 1 : 0;
  }
  std::printf("       survey over %d further instances: window check held on %d, cyclic convergence on %d\n", seeds,
              bounded, converged);
}

// ---------------------------------------------------------------- 8

Outcome two_line_rate() {
  double worst = 0.0;
  std::string detail;
  for (double theta : {kPi / 6, kPi / 4, kPi / 3}) {
    Matrix u(2, 1), v(2, 1);
    u << 1, 0;
    v << std::cos(theta), std::sin(theta);
    const std::vector<RelaxedProjector> rs{
        RelaxedProjector(AffineSubspace(LinearSubspace::from_orthonormal(u), Vector::Zero(2)), 1.0),
        RelaxedProjector(AffineSubspace(LinearSubspace::from_orthonormal(v), Vector::Zero(2)), 1.0)};
    Vector x0(2);
    x0 << 0.3, 1.0;
    const auto est = linear_rate(compose(rs), x0, Vector::Zero(2), 12);
    const double expected = std::cos(theta) * std::cos(theta);
    worst = std::max(worst, std::abs(est.rate - expected));
    detail += (detail.empty() ? "" : ", ") + fmt("rate %.9f", est.rate) + fmt(" vs %.9f", expected);
  }
  return {worst <= 1e-6, detail + "; max error " + fmt("%.1e", worst)};
}

// ---------------------------------------------------------------- 9

Outcome kappa_blowup() {
  std::vector<double> est, grid;
  std::string detail;
  bool within = true;
  for (double div : {2.0, 4.0, 8.0, 16.0}) {
    const std::vector<LinearSubspace> c{relproj::testing::line_at_angle(0), relproj::testing::line_at_angle(kPi / div)};
    est.push_back(estimate_kappa(c).kappa);
    grid.push_back(relproj::testing::grid_kappa_r2(c));
    within = within && est.back() >= grid.back() && est.back() <= 1.02 * grid.back();
    detail += (detail.empty() ? "" : ", ") + fmt("pi/%.0f: ", div) + fmt("%.4f", est.back()) +
              fmt(" (grid %.4f)", grid.back());
  }
  bool increasing = true;
  for (std::size_t i = 1; i < est.size(); ++i) increasing = increasing && est[i] > est[i - 1] && grid[i] > grid[i - 1];
  const double ratio = grid.back() / grid.front();
  return {increasing && within && ratio > 5 && est.back() / est.front() > 5,
          detail + "; ratio " + fmt("%.3f", ratio)};
}

// ---------------------------------------------------------------- 10

Outcome kaczmarz_criteria() {
  CounterRng rng(1010);
  const Matrix m = rng.normal_matrix(5, 3);
  const Vector b = m * rng.normal_vector(3);
  const auto consistent = solve(BlockSystem::singletons(m, b), Schedule::cyclic(1.0), Vector::Zero(3), 10000,
                                TraceStorage::norms_only);
  const double final_res = consistent.residuals.back();
  bool ok = consistent.consistent && final_res <= 1e-8;
  std::string detail = "consistent 5x3: residual " + fmt("%.2e", final_res);

  const auto inst = cli::gaussian_instance(15, 10, 42);
  const auto sys = BlockSystem::singletons(inst.m, inst.b);
  for (const auto& sched : {Schedule::random(7, 1.0), Schedule::cyclic(1.0)}) {
    const auto r = solve(sys, sched, Vector::Zero(10), 3000, TraceStorage::norms_only);
    double min_res = 1e300;
    for (double x : r.residuals) min_res = std::min(min_res, x);
    ok = ok && !r.consistent && min_res >= r.lsq_residual - 1e-6 && std::isfinite(r.trace.sup_norm);
    detail += std::string("; inconsistent ") + to_string(sched.kind) + ": min residual " + fmt("%.4f", min_res) +
              " >= lsq " + fmt("%.4f", r.lsq_residual) + ", sup " + fmt("%.3f", r.trace.sup_norm);
  }
  return {ok, detail};
}

}  // namespace

int main() {
  criterion(1, "identity suite", 10, identities);
  criterion(2, "unrolled iteration equivalence", 0, unrolled_equivalence);

  CertificateRun runs;
  criterion(3, "boundedness certificate", 300, [&runs] {
    runs = certificate_runs();
    return Outcome{runs.iterate_violations == 0 && runs.tail_violations == 0,
                   std::to_string(runs.certificates) + " certificates x 1e5 steps; iterate violations " +
                       std::to_string(runs.iterate_violations) + ", tail violations " +
                       std::to_string(runs.tail_violations) + ", min margin " + fmt("%.3e", runs.min_margin)};
  });
  criterion(4, "varying relaxation", 0, [&runs] {
    return Outcome{runs.certificates == 300 && runs.varying_violations == 0,
                   "lambda_n uniform on [0, lambda]; violations " + std::to_string(runs.varying_violations) +
                       ", min margin " + fmt("%.3e", runs.min_varying_margin)};
  });
  criterion(5, "cycle contraction on the complement", 0, cycle_contraction);
  criterion(6, "cycle segmentation oracle", 0, segmentation);
  criterion(7, "inconsistent Gaussian 15x10 system", 60, gaussian_system);
  gaussian_system_survey();
  criterion(8, "two-line alternating projection rate", 0, two_line_rate);
  criterion(9, "kappa blow-up", 0, kappa_blowup);
  criterion(10, "block Kaczmarz", 0, kaczmarz_criteria);

  std::printf("%s: %d of 10 criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
