#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "srgpair/resolve.hpp"

namespace srgpair {

enum class IterationStatus { converged, max_iterations, diverged };

// How much history a run keeps. Full iterate storage is meant for short runs
// that feed Fejer or equivalence checks; long circuit sweeps should stay on
// counters or residuals.
enum class TraceMode { counters, residuals, full };

struct IterationOptions {
  double tol = 1e-10;
  std::int64_t max_iterations = 100'000;
  double relaxation = 1.0;
  TraceMode trace = TraceMode::residuals;
  /// Replaces the fixed-point residual in stopping tests and traces. Lets a
  /// caller stop on the quantity it actually certifies (for circuits, the
  /// complementarity residual) instead of the iterate displacement.
  std::function<double(const Vec&)> residual_override;
};

struct IterationTrace {
  std::vector<Vec> iterates;
  std::vector<double> residuals;
  IterationStatus status = IterationStatus::max_iterations;
  std::int64_t iterations_used = 0;
  double final_residual = std::numeric_limits<double>::infinity();
  Vec last;
};

using IterationMap = std::function<Vec(const Vec&)>;

// Krasnoselskii--Mann loop x <- x + relaxation * (T(x) - x), stopping on the
// fixed-point residual ||T(x) - x||.
[[nodiscard]] IterationTrace km_iterate(const IterationMap& map, const Vec& start,
                                        const IterationOptions& options = {});

// Distances sqrt((x_k - reference)^T metric (x_k - reference)) for each stored
// iterate.
[[nodiscard]] std::vector<double> fejer_distances(const std::vector<Vec>& iterates, const Mat& metric,
                                                  const Vec& reference);

// Preconditioned proximal point in transformed coordinates:
//   x^{k+1} = F((A + P F)^{-1} P x^k)
// with a symmetric positive definite preconditioner P.
[[nodiscard]] IterationTrace transformed_ppa(const OpPtr& a, const OpPtr& f, const Mat& p, const Vec& start,
                                             const IterationOptions& options = {},
                                             const InclusionOptions& inclusion = {});

// Saddle structure 0 in [a(i); b(v)] + [[0, I], [-I, 0]](i; v) + (s_v; s_i),
// solved by the coupled two-step recursion with step sizes gamma and tau. The
// matrix r is the gain associated with b.
struct PrimalDualProblem {
  Mat a;
  OpPtr b;
  Mat r;
  double gamma = 1e-3;
  double tau = 100.0;
  Vec s_v;
  Vec s_i;
};

struct PreconditionReport {
  double step_product = 0.0;
  bool step_ok = false;
  double sym_min_eigenvalue = 0.0;
  bool monotonicity_ok = false;
  [[nodiscard]] bool ok() const { return step_ok && monotonicity_ok; }
};

// step_product is gamma*tau*||r||^2 (spectral norm), required below 1;
// sym_min_eigenvalue is the smallest eigenvalue of a^T r^{-1} + r^{-T} a,
// required nonnegative.
[[nodiscard]] PreconditionReport check_primal_dual_preconditions(const PrimalDualProblem& problem);

struct PrimalDualResult {
  IterationTrace trace;
  Vec i;
  Vec v;
  Vec i_candidate;
  Vec v_candidate;
};

// Runs the recursion
//   ibar^k = (a + gamma^{-1} r^{-1})^{-1} (gamma^{-1} i^k - r^T v^k - s_v)
//   vbar^k = (b + tau^{-1} r^{-T})^{-1} (-r i^k + tau^{-1} v^k + 2 ibar^k - s_i)
//   i^{k+1} = r^{-1} ibar^k,  v^{k+1} = r^{-T} vbar^k
// and stops once the candidate pair (r i^k, r^T v^k) satisfies the saddle
// inclusion to within options.tol. Trace iterates are the stacked (i, v).
[[nodiscard]] PrimalDualResult primal_dual_iterate(const PrimalDualProblem& problem, const Vec& i0,
                                                   const Vec& v0, const IterationOptions& options = {});

}  // namespace srgpair
