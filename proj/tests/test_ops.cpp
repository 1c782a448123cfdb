#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "srgpair/ops.hpp"

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

TEST_CASE("identity and linear operators") {
  const OpPtr id = identity_op(3);
  CHECK(id->dim() == 3);
  CHECK(id->single_valued());
  Vec x(3);
  x << 1.0, -2.0, 0.5;
  const auto out = id->eval(x);
  REQUIRE(out.size() == 1);
  CHECK((out[0] - x).norm() == 0.0);
  REQUIRE(id->affine_form().has_value());
  CHECK(id->affine_form()->matrix.isIdentity(0.0));

  Mat m(2, 2);
  m << 1.0, 2.0, -0.5, 0.25;
  const OpPtr lin = linear_op(m);
  const auto lout = lin->eval(vec2(1.0, 1.0));
  REQUIRE(lout.size() == 1);
  CHECK(lout[0][0] == doctest::Approx(3.0));
  CHECK(lout[0][1] == doctest::Approx(-0.25));
  CHECK(lin->differentiable());
  CHECK((lin->jacobian(vec2(0.0, 0.0)) - m).norm() == 0.0);
}

TEST_CASE("ideal diode branches") {
  const OpPtr diode = ideal_diode();
  CHECK(diode->dim() == 1);
  CHECK_FALSE(diode->single_valued());

  const auto blocking = diode->eval(vec1(-1.0));
  REQUIRE(blocking.size() == 1);
  CHECK(blocking[0][0] == 0.0);

  const auto kink = diode->eval(vec1(0.0));
  REQUIRE(kink.size() == 5);
  CHECK(kink.front()[0] == doctest::Approx(0.0));
  CHECK(kink.back()[0] == doctest::Approx(2.0));
  for (std::size_t k = 1; k < kink.size(); ++k) CHECK(kink[k][0] > kink[k - 1][0]);

  CHECK(diode->eval(vec1(0.5)).empty());

  REQUIRE(diode->diode_linear_form().has_value());
  const DiodeLinearForm form = *diode->diode_linear_form();
  CHECK(form.dim == 1);
  CHECK(form.gain(0, 0) == 1.0);
  CHECK(form.linear(0, 0) == 0.0);
}

TEST_CASE("ideal diode sampler hits the kink") {
  const OpPtr diode = ideal_diode();
  const auto points = diode->sample_domain(200, 11);
  CHECK(points.size() == 200);
  int at_kink = 0;
  for (const Vec& p : points) {
    CHECK(p[0] <= 0.0);
    if (p[0] == 0.0) ++at_kink;
  }
  CHECK(at_kink > 20);
  CHECK(at_kink < 180);
}

TEST_CASE("smooth diode pinned values and domain cutoff") {
  const OpPtr d = shockley_diode(0.5, 0.5);
  const auto out = d->eval(vec1(0.3));
  REQUIRE(out.size() == 1);
  CHECK(out[0][0] == doctest::Approx(0.41105940019525444).epsilon(1e-14));
  CHECK(d->single_valued());
  CHECK(d->differentiable());
  CHECK(d->jacobian(vec1(0.3))(0, 0) == doctest::Approx(std::exp(0.6)).epsilon(1e-14));
  CHECK(d->separable());

  const OpPtr tiny = shockley_diode(1e-12, 0.025852);
  CHECK(tiny->eval(vec1(0.5))[0][0] == doctest::Approx(0.0002509748698983043).epsilon(1e-12));
  CHECK(tiny->eval(vec1(20.0)).empty());
}

TEST_CASE("coupled diode pair routes both branches through the gain") {
  const OpPtr npn = npn_transistor(0.98, 0.5);
  CHECK(npn->dim() == 2);

  // First input blocking, second at its kink: u = (0, u2) with u2 on the ray.
  const auto outs = npn->eval(vec2(-1.0, 0.0));
  REQUIRE(outs.size() == 5);
  for (const Vec& o : outs) {
    CHECK(o[0] == doctest::Approx(-0.5 * o[1]).epsilon(1e-14));
    CHECK(o[1] >= 0.0);
    CHECK(o[1] <= 2.0);
  }

  CHECK(npn->eval(vec2(0.5, 0.0)).empty());

  REQUIRE(npn->diode_linear_form().has_value());
  CHECK((npn->diode_linear_form()->gain - npn_gain(0.98, 0.5)).norm() == 0.0);
}

TEST_CASE("gain and partner matrices of the coupled diode pair") {
  const Mat r = npn_gain(0.98, 0.5);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == -0.5);
  CHECK(r(1, 0) == -0.98);
  CHECK(r(1, 1) == 1.0);
  CHECK(r.determinant() == doctest::Approx(0.51).epsilon(1e-14));

  const Mat b = npn_partner_matrix(0.98, 0.5);
  CHECK(b(0, 0) == 1.0);
  CHECK(b(0, 1) == 0.98);
  CHECK(b(1, 0) == 0.5);
  CHECK(b(1, 1) == 1.0);

  // R^T B = det(R) I is what makes the partner cancel the coupling.
  const Mat prod = r.transpose() * b;
  CHECK((prod - 0.51 * Mat::Identity(2, 2)).norm() < 1e-14);

  const Mat sym = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  CHECK(eig.eigenvalues().minCoeff() == doctest::Approx(0.26).epsilon(1e-13));
}

TEST_CASE("gradient and preconditioner maps") {
  const OpPtr grad = quartic_gradient();
  const auto g = grad->eval(vec2(2.0, -1.0));
  REQUIRE(g.size() == 1);
  CHECK(g[0][0] == doctest::Approx(8.0));
  CHECK(g[0][1] == doctest::Approx(-1.0));
  CHECK(grad->jacobian(vec2(2.0, -1.0))(0, 0) == doctest::Approx(12.0));
  CHECK(grad->separable());

  const OpPtr clip = preconditioner(PreconditionerKind::clip);
  const auto c = clip->eval(vec2(2.0, -0.5));
  CHECK(c[0][0] == doctest::Approx(1.0));
  CHECK(c[0][1] == doctest::Approx(-0.5));

  const OpPtr arc = preconditioner(PreconditionerKind::arcsinh);
  const auto a = arc->eval(vec2(1.0, -2.0));
  CHECK(a[0][0] == doctest::Approx(std::asinh(1.0)).epsilon(1e-14));
  CHECK(a[0][1] == doctest::Approx(std::asinh(-2.0)).epsilon(1e-14));

  const OpPtr ident = preconditioner(PreconditionerKind::identity);
  CHECK(ident->eval(vec2(0.7, 0.7))[0][0] == 0.7);
}

TEST_CASE("combinators keep evaluation and structure consistent") {
  Mat m(2, 2);
  m << 2.0, 1.0, 0.0, 3.0;
  const OpPtr lin = linear_op(m);
  const Vec x = vec2(1.0, -1.0);

  const OpPtr scaled = scale_op(-0.5, lin);
  CHECK(scaled->eval(x)[0][0] == doctest::Approx(-0.5));
  REQUIRE(scaled->affine_form().has_value());
  CHECK((scaled->affine_form()->matrix + 0.5 * m).norm() < 1e-15);

  const OpPtr sum = add_op(lin, identity_op(2));
  CHECK(sum->eval(x)[0][1] == doctest::Approx(-4.0));
  REQUIRE(sum->affine_form().has_value());

  const OpPtr shifted = translate_op(lin, vec2(10.0, 20.0));
  CHECK(shifted->eval(x)[0][0] == doctest::Approx(11.0));

  const OpPtr chained = compose_op(lin, lin);
  CHECK((chained->eval(x)[0] - m * (m * x)).norm() < 1e-14);
  REQUIRE(chained->affine_form().has_value());
  CHECK((chained->affine_form()->matrix - m * m).norm() < 1e-14);

  Mat img(2, 2);
  img << 0.0, 1.0, 1.0, 0.0;
  const OpPtr imaged = linear_image_op(img, lin);
  CHECK((imaged->eval(x)[0] - img * (m * x)).norm() < 1e-14);

  const OpPtr resid = id_minus(lin);
  CHECK((resid->eval(x)[0] - (x - m * x)).norm() < 1e-14);

  const OpPtr inv = inverse_op(shifted);
  const Vec y = shifted->eval(x)[0];
  CHECK((inv->eval(y)[0] - x).norm() < 1e-12);

  CHECK_THROWS_AS((void)inverse_op(ideal_diode()), Error);
}

TEST_CASE("sum with a linear leakage keeps the diode structure") {
  const OpPtr leaky = sum_with_linear(npn_transistor(0.98, 0.5), 0.1 * Mat::Identity(2, 2));
  REQUIRE(leaky->diode_linear_form().has_value());
  const DiodeLinearForm form = *leaky->diode_linear_form();
  CHECK((form.linear - 0.1 * Mat::Identity(2, 2)).norm() < 1e-15);

  const auto outs = leaky->eval(vec2(-1.0, -2.0));
  REQUIRE(outs.size() == 1);
  CHECK(outs[0][0] == doctest::Approx(-0.1));
  CHECK(outs[0][1] == doctest::Approx(-0.2));
}

TEST_CASE("generic diode linear realization evaluates its form") {
  DiodeLinearForm form;
  form.dim = 2;
  form.diode_inputs = {1};
  form.gain = Mat(2, 1);
  form.gain << 0.5, 1.0;
  form.linear = Mat(2, 2);
  form.linear << 1.0, 0.0, -0.5, 2.0;
  form.offset = vec2(0.1, -0.1);
  const OpPtr op = diode_linear_op(form, "lattice");
  CHECK(op->tag() == "lattice");

  const Vec x = vec2(0.7, -0.3);
  const auto outs = op->eval(x);
  REQUIRE(outs.size() == 1);
  CHECK((outs[0] - (form.linear * x + form.offset)).norm() < 1e-15);

  CHECK(op->eval(vec2(0.0, 0.2)).empty());
  CHECK(op->sample_domain(64, 3).size() == 64);
}

TEST_CASE("seed mixing separates streams") {
  CHECK(mix_seed(1, 2) != mix_seed(1, 3));
  CHECK(mix_seed(1, 2) != mix_seed(2, 2));
  CHECK(mix_seed(1, 2) == mix_seed(1, 2));
}
