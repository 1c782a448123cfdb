#include <doctest.h>

#include <cmath>

#include "srgpair/iterate.hpp"

using namespace srgpair;

namespace {

Vec vec1(double a) {
  Vec v(1);
  v << a;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// One-dimensional saddle with an ideal diode dual block: the unique solution
// is i = 2, v = 0.
PrimalDualProblem tiny_saddle() {
  PrimalDualProblem problem;
  problem.a = Mat::Identity(1, 1);
  problem.b = ideal_diode();
  problem.r = Mat::Identity(1, 1);
  problem.gamma = 0.5;
  problem.tau = 0.5;
  problem.s_v = vec1(-2.0);
  problem.s_i = Vec::Zero(1);
  return problem;
}

// The same saddle stacked into one diode-built operator on (i, v).
OpPtr tiny_saddle_op() {
  DiodeLinearForm form;
  form.dim = 2;
  form.diode_inputs = {1};
  form.gain = Mat(2, 1);
  form.gain << 0.0, 1.0;
  form.linear = Mat(2, 2);
  form.linear << 1.0, 1.0, -1.0, 0.0;
  form.offset = vec2(-2.0, 0.0);
  return diode_linear_op(form, "tiny_saddle");
}

}  // namespace

TEST_CASE("contraction converges with the expected iteration count") {
  const IterationMap half = [](const Vec& x) { return Vec(0.5 * x); };
  IterationOptions options;
  options.trace = TraceMode::full;
  const IterationTrace trace = km_iterate(half, vec1(1.0), options);
  CHECK(trace.status == IterationStatus::converged);
  // Residual 0.5^(k+1) first drops below 1e-10 at k = 33.
  CHECK(trace.iterations_used == 33);
  CHECK(trace.final_residual <= 1e-10);
  CHECK(std::abs(trace.last[0]) < 3e-10);
  CHECK(trace.iterates.size() == trace.residuals.size());
  CHECK(trace.iterates.front()[0] == 1.0);
}

TEST_CASE("fixed point at the start converges without stepping") {
  const IterationMap id = [](const Vec& x) { return x; };
  const IterationTrace trace = km_iterate(id, vec2(0.3, -0.7));
  CHECK(trace.status == IterationStatus::converged);
  CHECK(trace.iterations_used == 0);
  CHECK(trace.final_residual == 0.0);
  CHECK((trace.last - vec2(0.3, -0.7)).norm() == 0.0);
}

TEST_CASE("expansion is reported as divergence") {
  const IterationMap twice = [](const Vec& x) { return Vec(2.0 * x); };
  IterationOptions options;
  options.max_iterations = 5000;
  const IterationTrace trace = km_iterate(twice, vec1(1.0), options);
  CHECK(trace.status == IterationStatus::diverged);
}

TEST_CASE("iteration budget is respected") {
  const IterationMap slow = [](const Vec& x) { return Vec(x + vec1(1e-3)); };
  IterationOptions options;
  options.max_iterations = 10;
  const IterationTrace trace = km_iterate(slow, vec1(0.0), options);
  CHECK(trace.status == IterationStatus::max_iterations);
  CHECK(trace.iterations_used == 10);
}

TEST_CASE("relaxation averages the update") {
  // T(x) = -x with relaxation 1/2 lands on the fixed point in one step.
  const IterationMap flip = [](const Vec& x) { return Vec(-x); };
  IterationOptions options;
  options.relaxation = 0.5;
  const IterationTrace trace = km_iterate(flip, vec1(1.0), options);
  CHECK(trace.status == IterationStatus::converged);
  CHECK(trace.iterations_used <= 1);
  CHECK(std::abs(trace.last[0]) < 1e-12);
}

TEST_CASE("residual override controls the stopping test") {
  const IterationMap half = [](const Vec& x) { return Vec(0.5 * x); };
  IterationOptions options;
  options.tol = 1e-6;
  options.residual_override = [](const Vec& x) { return std::abs(x[0]); };
  const IterationTrace trace = km_iterate(half, vec1(1.0), options);
  CHECK(trace.status == IterationStatus::converged);
  CHECK(std::abs(trace.last[0]) <= 1e-6);
  CHECK(trace.final_residual == doctest::Approx(std::abs(trace.last[0])));
}

TEST_CASE("trace modes bound what gets stored") {
  const IterationMap half = [](const Vec& x) { return Vec(0.5 * x); };
  IterationOptions counters;
  counters.trace = TraceMode::counters;
  const IterationTrace a = km_iterate(half, vec1(1.0), counters);
  CHECK(a.iterates.empty());
  CHECK(a.residuals.empty());
  CHECK(a.final_residual <= 1e-10);

  IterationOptions residuals;
  residuals.trace = TraceMode::residuals;
  const IterationTrace b = km_iterate(half, vec1(1.0), residuals);
  CHECK(b.iterates.empty());
  CHECK(b.residuals.size() == static_cast<std::size_t>(b.iterations_used) + 1);
}

TEST_CASE("weighted distances to a reference point") {
  Mat metric(2, 2);
  metric << 4.0, 0.0, 0.0, 1.0;
  const std::vector<Vec> iterates = {vec2(1.0, 0.0), vec2(0.5, 0.0), vec2(0.0, 2.0)};
  const auto d = fejer_distances(iterates, metric, vec2(0.0, 0.0));
  REQUIRE(d.size() == 3);
  CHECK(d[0] == doctest::Approx(2.0));
  CHECK(d[1] == doctest::Approx(1.0));
  CHECK(d[2] == doctest::Approx(2.0));
}

TEST_CASE("precondition report pins the amplifier numbers") {
  PrimalDualProblem problem;
  problem.a = Mat::Zero(2, 2);
  problem.a(0, 0) = 300.0;
  problem.a(1, 1) = 30.0;
  problem.b = ideal_diode();
  problem.r = npn_gain(0.98, 0.5);
  problem.gamma = 1e-3;
  problem.tau = 100.0;
  const PreconditionReport report = check_primal_dual_preconditions(problem);
  CHECK(report.step_product == doctest::Approx(0.31272272796504).epsilon(1e-12));
  CHECK(report.step_ok);
  CHECK(report.sym_min_eigenvalue == doctest::Approx(11.436903742582189).epsilon(1e-9));
  CHECK(report.monotonicity_ok);
  CHECK(report.ok());

  problem.tau = 1e4;
  const PreconditionReport too_fast = check_primal_dual_preconditions(problem);
  CHECK_FALSE(too_fast.step_ok);
  CHECK_FALSE(too_fast.ok());
}

TEST_CASE("saddle iteration reaches the complementarity solution") {
  const PrimalDualProblem problem = tiny_saddle();
  IterationOptions options;
  options.tol = 1e-10;
  options.max_iterations = 5000;
  const PrimalDualResult result = primal_dual_iterate(problem, vec1(0.0), vec1(0.0), options);
  CHECK(result.trace.status == IterationStatus::converged);
  CHECK(result.i_candidate[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(std::abs(result.v_candidate[0]) < 1e-8);
  CHECK(result.trace.final_residual <= 1e-10);
}

TEST_CASE("saddle step sizes and monotonicity are validated") {
  PrimalDualProblem problem = tiny_saddle();
  problem.gamma = 2.0;
  problem.tau = 2.0;
  CHECK_THROWS_AS((void)primal_dual_iterate(problem, vec1(0.0), vec1(0.0), {}), Error);

  PrimalDualProblem negative = tiny_saddle();
  negative.a = -Mat::Identity(1, 1);
  CHECK_THROWS_AS((void)primal_dual_iterate(negative, vec1(0.0), vec1(0.0), {}), Error);
}

TEST_CASE("transformed proximal point reproduces the saddle iterates") {
  const PrimalDualProblem problem = tiny_saddle();
  IterationOptions options;
  options.tol = 1e-14;
  options.max_iterations = 40;
  options.trace = TraceMode::full;
  const PrimalDualResult direct = primal_dual_iterate(problem, vec1(0.4), vec1(-0.3), options);

  Mat p(2, 2);
  p << 1.0 / problem.gamma, -1.0, -1.0, 1.0 / problem.tau;
  const IterationTrace ppa = transformed_ppa(tiny_saddle_op(), identity_op(2), p, vec2(0.4, -0.3), options);

  REQUIRE(direct.trace.iterates.size() == ppa.iterates.size());
  for (std::size_t k = 0; k < ppa.iterates.size(); ++k)
    CHECK((direct.trace.iterates[k] - ppa.iterates[k]).norm() < 1e-11);
}

TEST_CASE("transformed proximal point validates its preconditioner") {
  Mat skew(2, 2);
  skew << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS((void)transformed_ppa(tiny_saddle_op(), identity_op(2), skew, vec2(0.0, 0.0), {}), Error);

  Mat indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS((void)transformed_ppa(tiny_saddle_op(), identity_op(2), indefinite, vec2(0.0, 0.0), {}),
                  Error);
}

TEST_CASE("saddle distances in the preconditioner norm are fejer monotone") {
  const PrimalDualProblem problem = tiny_saddle();
  IterationOptions options;
  options.tol = 1e-12;
  options.max_iterations = 2000;
  options.trace = TraceMode::full;
  const PrimalDualResult result = primal_dual_iterate(problem, vec1(1.5), vec1(-1.0), options);
  REQUIRE(result.trace.status == IterationStatus::converged);

  Mat p(2, 2);
  p << 1.0 / problem.gamma, -1.0, -1.0, 1.0 / problem.tau;
  const auto distances = fejer_distances(result.trace.iterates, p, result.trace.last);
  for (std::size_t k = 1; k < distances.size(); ++k) CHECK(distances[k] <= distances[k - 1] + 1e-10);
}
