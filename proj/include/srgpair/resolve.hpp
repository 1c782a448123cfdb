#pragma once

#include <cstdint>
#include <memory>

#include "srgpair/ops.hpp"

namespace srgpair {

/// Forced sub-solver choice; `automatic` picks from operator structure.
enum class SolverHint { automatic, affine, active_set, separable, newton };

struct InclusionOptions {
  /// A-posteriori bound on dist(y - F(x), gamma*A(x)) asserted by solve().
  double residual_tol = 1e-10;
  /// Residual tolerance of the Newton sub-solvers.
  double newton_tol = 1e-12;
  int max_newton_iterations = 120;
  /// Slack for active-set feasibility (v <= slack, u >= -slack).
  double feasibility_tol = 1e-9;
  SolverHint hint = SolverHint::automatic;
};

/// Solves y in gamma*A(x) + F(x) for x. The sub-solver is fixed at
/// construction from the operators' structure: both affine (one LU),
/// diode-linear A with affine F (exhaustive diode-state enumeration),
/// both separable (bracketed scalar Newton per component), or both smooth
/// (damped vector Newton). Solves are pure and thread-compatible except for
/// the boundary-tie counter.
class InclusionSolver {
 public:
  InclusionSolver(OpPtr a, OpPtr f, double gamma, InclusionOptions options = {});
  ~InclusionSolver();
  InclusionSolver(InclusionSolver&&) noexcept;
  InclusionSolver& operator=(InclusionSolver&&) noexcept;
  InclusionSolver(const InclusionSolver&) = delete;
  InclusionSolver& operator=(const InclusionSolver&) = delete;

  [[nodiscard]] Vec solve(const Vec& y) const;
  /// Newton paths start from `start`; structure-exact paths ignore it.
  [[nodiscard]] Vec solve(const Vec& y, const Vec& start) const;

  /// dist(y - F(x), gamma*A(x)), exact over diode rays for the structured
  /// paths and taken over representative outputs otherwise.
  [[nodiscard]] double residual(const Vec& x, const Vec& y) const;

  /// Number of solves where several diode states were simultaneously
  /// consistent (boundary inputs); resolved to the smallest active set.
  [[nodiscard]] std::uint64_t boundary_ties() const;

  [[nodiscard]] const char* method_name() const;
  [[nodiscard]] Index dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Exact distance from `target` to gain*u + linear*x + offset over all
/// admissible diode outputs u at the point x, combined with the worst
/// complementarity violation of the recovered u. Used as the solver-agnostic
/// inclusion residual for diode-built operators.
[[nodiscard]] double diode_inclusion_residual(const DiodeLinearForm& form, const Vec& x, const Vec& target);

/// x -> F((gamma*A + F)^{-1}(x)). Firmly nonexpansive when (A, F) is a
/// monotone pair; points where the inner inclusion is infeasible are treated
/// as outside the domain.
[[nodiscard]] OpPtr transformed_resolvent(OpPtr a, OpPtr f, double gamma, InclusionOptions options = {});

/// x -> (gamma*A + F)^{-1}(F(x)); fixed points are the zeros of A.
[[nodiscard]] OpPtr warped_resolvent(OpPtr a, OpPtr f, double gamma, InclusionOptions options = {});

struct CongruentPair {
  OpPtr a;  ///< (M^{-1})^T o A o M^{-1}
  OpPtr f;  ///< M o F o M^{-1}
};

/// Congruence transform preserving pair monotonicity; M must be invertible
/// and F single-valued.
[[nodiscard]] CongruentPair congruence_transform(const OpPtr& a, const OpPtr& f, const Mat& m);

}  // namespace srgpair
