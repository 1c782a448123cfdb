#include <doctest.h>

#include <cmath>
#include <string>

#include "srgpair/resolve.hpp"

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

}  // namespace

TEST_CASE("affine path solves the linear system exactly") {
  Mat m(2, 2);
  m << 2.0, 0.0, 0.0, 2.0;
  const OpPtr a = translate_op(linear_op(m), vec2(1.0, -1.0));
  const InclusionSolver solver(a, identity_op(2), 0.5);
  CHECK(std::string(solver.method_name()) == "affine");

  // 0.5 * (2x + t) + x = y  =>  x = (y - 0.5 t) / 2.
  const Vec x = solver.solve(vec2(3.0, 1.0));
  CHECK(x[0] == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(solver.residual(x, vec2(3.0, 1.0)) < 1e-12);

  CHECK_THROWS_AS(InclusionSolver(linear_op(Mat::Zero(2, 2)), linear_op(Mat::Zero(2, 2)), 1.0), Error);
}

TEST_CASE("diode resolvent clamps at the kink") {
  const InclusionSolver solver(ideal_diode(), identity_op(1), 1.0);
  CHECK(std::string(solver.method_name()) == "active_set");

  CHECK(solver.solve(vec1(-1.0))[0] == doctest::Approx(-1.0));
  CHECK(solver.solve(vec1(3.0))[0] == doctest::Approx(0.0));
  CHECK(solver.solve(vec1(0.0))[0] == doctest::Approx(0.0));
  CHECK(solver.solve(vec1(-1e-14))[0] == doctest::Approx(-1e-14).epsilon(1e-3));

  // y = 0 satisfies both diode states at once.
  CHECK(solver.boundary_ties() >= 1);
}

TEST_CASE("pure diode inclusion without a forward part") {
  const InclusionSolver solver(ideal_diode(), linear_op(Mat::Zero(1, 1)), 1.0);
  CHECK(solver.solve(vec1(2.0))[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS((void)solver.solve(vec1(-1.0)), Error);
  try {
    (void)solver.solve(vec1(-1.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::solver_failure);
  }
}

TEST_CASE("coupled diode pair against its partner") {
  const OpPtr npn = npn_transistor(0.98, 0.5);
  const OpPtr partner = linear_op(npn_partner_matrix(0.98, 0.5));
  const InclusionSolver solver(npn, partner, 0.7);
  CHECK(std::string(solver.method_name()) == "active_set");

  SampleStream stream(31);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec y = vec2(stream.uniform(-3.0, 3.0), stream.uniform(-3.0, 3.0));
    const Vec x = solver.solve(y);
    CHECK(solver.residual(x, y) < 1e-10);
    CHECK(x[0] <= 1e-9);
    CHECK(x[1] <= 1e-9);
  }
}

TEST_CASE("diode inclusion residual measures distance and complementarity") {
  DiodeLinearForm form;
  form.dim = 1;
  form.diode_inputs = {0};
  form.gain = Mat::Identity(1, 1);
  form.linear = Mat::Identity(1, 1);
  form.offset = Vec::Zero(1);

  // Blocking branch: u = 0, value = x.
  CHECK(diode_inclusion_residual(form, vec1(-1.0), vec1(-1.0)) < 1e-14);
  // Conducting branch at the kink: x = 0, u = target.
  CHECK(diode_inclusion_residual(form, vec1(0.0), vec1(2.0)) < 1e-14);
  // Negative diode output is a complementarity violation.
  CHECK(diode_inclusion_residual(form, vec1(0.0), vec1(-0.5)) == doctest::Approx(0.5));
  // Positive input with positive output violates u * v = 0.
  CHECK(diode_inclusion_residual(form, vec1(1.0), vec1(2.0)) == doctest::Approx(1.0));
}

TEST_CASE("separable path matches a scalar bisection oracle") {
  const OpPtr a = shockley_diode(1.0, 1.0);
  const InclusionSolver solver(a, identity_op(1), 0.5);
  CHECK(std::string(solver.method_name()) == "separable");

  for (double y : {-2.0, -0.5, 0.0, 0.3, 1.7}) {
    const Vec x = solver.solve(vec1(y));
    // Oracle: g(x) = 0.5 (e^x - 1) + x - y is strictly increasing.
    double lo = -40.0;
    double hi = 40.0;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double g = 0.5 * (std::exp(mid) - 1.0) + mid - y;
      (g > 0.0 ? hi : lo) = mid;
    }
    CHECK(x[0] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    CHECK(solver.residual(x, vec1(y)) < 1e-10);
  }
}

TEST_CASE("separable and newton paths agree on a smooth cubic") {
  const OpPtr a = quartic_gradient();
  const OpPtr f = identity_op(2);
  const InclusionSolver separable(a, f, 0.8);
  CHECK(std::string(separable.method_name()) == "separable");

  InclusionOptions forced;
  forced.hint = SolverHint::newton;
  const InclusionSolver newton(a, f, 0.8, forced);
  CHECK(std::string(newton.method_name()) == "newton");

  SampleStream stream(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec y = vec2(stream.uniform(-4.0, 4.0), stream.uniform(-4.0, 4.0));
    const Vec xs = separable.solve(y);
    const Vec xn = newton.solve(y, Vec::Zero(2));
    CHECK((xs - xn).norm() < 1e-9);
    CHECK(separable.residual(xs, y) < 1e-10);
    CHECK(newton.residual(xn, y) < 1e-10);
  }
}

TEST_CASE("transformed resolvent of the diode is the negative clamp") {
  const OpPtr t = transformed_resolvent(ideal_diode(), identity_op(1), 1.0);
  CHECK(t->single_valued());
  CHECK(t->eval(vec1(-2.0))[0][0] == doctest::Approx(-2.0));
  CHECK(t->eval(vec1(1.5))[0][0] == doctest::Approx(0.0));

  const OpPtr w = warped_resolvent(ideal_diode(), identity_op(1), 1.0);
  CHECK(w->eval(vec1(-2.0))[0][0] == doctest::Approx(-2.0));
  CHECK(w->eval(vec1(1.5))[0][0] == doctest::Approx(0.0));
}

TEST_CASE("infeasible inner inclusions surface as empty evaluations") {
  // gamma A + F with A the pure diode and F = 0 has no solution for y < 0.
  const OpPtr t = transformed_resolvent(ideal_diode(), linear_op(Mat::Zero(1, 1)), 1.0);
  CHECK(t->eval(vec1(-1.0)).empty());
  CHECK_FALSE(t->eval(vec1(1.0)).empty());
}

TEST_CASE("transformed resolvent of a monotone pair is firmly nonexpansive") {
  const OpPtr t = transformed_resolvent(quartic_gradient(), identity_op(2), 1.0);
  SampleStream stream(13);
  for (int trial = 0; trial < 60; ++trial) {
    const Vec x = vec2(stream.uniform(-2.0, 2.0), stream.uniform(-2.0, 2.0));
    const Vec y = vec2(stream.uniform(-2.0, 2.0), stream.uniform(-2.0, 2.0));
    const Vec tx = t->eval(x)[0];
    const Vec ty = t->eval(y)[0];
    const double lhs = (tx - ty).squaredNorm();
    const double rhs = (tx - ty).dot(x - y);
    CHECK(lhs <= rhs + 1e-11);
  }
}

TEST_CASE("congruence transform preserves pairing inner products") {
  Mat m(2, 2);
  m << 1.5, 0.4, -0.2, 0.9;
  const OpPtr a = quartic_gradient();
  const OpPtr f = identity_op(2);
  const CongruentPair pair = congruence_transform(a, f, m);

  SampleStream stream(19);
  for (int trial = 0; trial < 40; ++trial) {
    const Vec x = vec2(stream.uniform(-1.5, 1.5), stream.uniform(-1.5, 1.5));
    const Vec xb = vec2(stream.uniform(-1.5, 1.5), stream.uniform(-1.5, 1.5));
    const Vec da = pair.a->eval(m * x)[0] - pair.a->eval(m * xb)[0];
    const Vec df = pair.f->eval(m * x)[0] - pair.f->eval(m * xb)[0];
    const Vec da0 = a->eval(x)[0] - a->eval(xb)[0];
    const Vec df0 = f->eval(x)[0] - f->eval(xb)[0];
    CHECK(da.dot(df) == doctest::Approx(da0.dot(df0)).epsilon(1e-10));
  }

  CHECK_THROWS_AS((void)congruence_transform(a, f, Mat::Zero(2, 2)), Error);
  CHECK_THROWS_AS((void)congruence_transform(a, ideal_diode(), Mat::Identity(1, 1)), Error);
}

TEST_CASE("solver hints can force and forbid paths") {
  InclusionOptions want_newton;
  want_newton.hint = SolverHint::newton;
  CHECK_THROWS_AS(InclusionSolver(ideal_diode(), identity_op(1), 1.0, want_newton), Error);

  InclusionOptions want_affine;
  want_affine.hint = SolverHint::affine;
  CHECK_THROWS_AS(InclusionSolver(quartic_gradient(), identity_op(2), 1.0, want_affine), Error);

  InclusionOptions want_active;
  want_active.hint = SolverHint::active_set;
  const InclusionSolver forced(npn_transistor(0.98, 0.5), identity_op(2), 1.0, want_active);
  CHECK(std::string(forced.method_name()) == "active_set");
}

TEST_CASE("dimension mismatches are rejected up front") {
  CHECK_THROWS_AS(InclusionSolver(identity_op(2), identity_op(3), 1.0), Error);
}
