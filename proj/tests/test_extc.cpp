#include <doctest.h>

#include <cmath>
#include <complex>

#include "srgpair/extc.hpp"

using namespace srgpair;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_CASE("extended complex basics") {
  const ExtendedComplex z = ExtendedComplex::finite(1.5, -2.0);
  CHECK_FALSE(z.is_infinite());
  CHECK(z.re() == 1.5);
  CHECK(z.im() == -2.0);
  CHECK(z.value() == std::complex<double>(1.5, -2.0));

  const ExtendedComplex inf = ExtendedComplex::infinity();
  CHECK(inf.is_infinite());
  CHECK_THROWS_AS((void)inf.value(), Error);

  CHECK(z == ExtendedComplex::finite(1.5, -2.0));
  CHECK_FALSE(z == inf);
  CHECK(inf == ExtendedComplex::infinity());
  CHECK_THROWS_AS(ExtendedComplex::finite(std::nan(""), 0.0), Error);
}

TEST_CASE("polar kernel on aligned and orthogonal differences") {
  // Same direction: modulus ratio, zero angle.
  const ZPair aligned = z_pair(vec2(2.0, 0.0), vec2(1.0, 0.0));
  CHECK(aligned.plus.re() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(aligned.plus.im() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(aligned.minus.re() == doctest::Approx(2.0).epsilon(1e-14));

  // Orthogonal directions of equal length: the conjugate pair +-i.
  const ZPair ortho = z_pair(vec2(1.0, 2.0), vec2(2.0, -1.0));
  CHECK(std::abs(ortho.plus.re()) < 1e-15);
  CHECK(ortho.plus.im() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ortho.minus.im() == doctest::Approx(-1.0).epsilon(1e-14));

  // 45 degrees at modulus sqrt(2): 1 +- i.
  const ZPair diag = z_pair(vec2(1.0, 1.0), vec2(1.0, 0.0));
  CHECK(diag.plus.re() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(diag.plus.im() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(diag.minus.re() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(diag.minus.im() == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("polar kernel pinned three dimensional value") {
  const ZPair z = z_pair(vec3(0.3, -1.2, 0.5), vec3(1.1, 0.4, -0.7));
  CHECK(z.plus.re() == doctest::Approx(-0.2688172043010752).epsilon(1e-13));
  CHECK(z.plus.im() == doctest::Approx(0.9405990420915714).epsilon(1e-13));
  CHECK(z.minus.re() == doctest::Approx(z.plus.re()).epsilon(1e-15));
  CHECK(z.minus.im() == doctest::Approx(-z.plus.im()).epsilon(1e-15));
}

TEST_CASE("polar kernel degenerate numerators and denominators") {
  // Zero denominator against a nonzero numerator: infinity on both branches.
  const ZPair inf = z_pair(vec2(1.0, 0.0), vec2(0.0, 0.0));
  CHECK(inf.plus.is_infinite());
  CHECK(inf.minus.is_infinite());

  // Zero numerator: zero regardless of the denominator.
  const ZPair zero = z_pair(vec2(0.0, 0.0), vec2(3.0, 4.0));
  CHECK_FALSE(zero.plus.is_infinite());
  CHECK(zero.plus.re() == 0.0);
  CHECK(zero.plus.im() == 0.0);
}

TEST_CASE("projection form agrees with the polar form") {
  SampleStream stream(42);
  for (int trial = 0; trial < 200; ++trial) {
    Vec out(3);
    Vec in(3);
    for (int k = 0; k < 3; ++k) {
      out[k] = stream.uniform(-2.0, 2.0);
      in[k] = stream.uniform(-2.0, 2.0);
    }
    const ZPair polar = z_pair(out, in);
    const ZPair proj = z_pair_projected(out, in);
    REQUIRE_FALSE(polar.plus.is_infinite());
    CHECK(polar.plus.re() == doctest::Approx(proj.plus.re()).epsilon(1e-11));
    CHECK(polar.plus.im() == doctest::Approx(proj.plus.im()).epsilon(1e-11));
    CHECK(polar.plus.im() >= 0.0);
    CHECK(proj.plus.im() >= 0.0);
  }
}

TEST_CASE("conjugate inversion swaps zero and infinity and inverts modulus") {
  CHECK(conj_invert(ExtendedComplex::finite(0.0, 0.0)).is_infinite());
  const ExtendedComplex from_inf = conj_invert(ExtendedComplex::infinity());
  CHECK_FALSE(from_inf.is_infinite());
  CHECK(from_inf.re() == 0.0);
  CHECK(from_inf.im() == 0.0);

  const ExtendedComplex w = conj_invert(ExtendedComplex::finite(1.0, 1.0));
  CHECK(w.re() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(w.im() == doctest::Approx(0.5).epsilon(1e-14));

  // Involution on finite nonzero values.
  const ExtendedComplex twice = conj_invert(conj_invert(ExtendedComplex::finite(-0.3, 2.1)));
  CHECK(twice.re() == doctest::Approx(-0.3).epsilon(1e-14));
  CHECK(twice.im() == doctest::Approx(2.1).epsilon(1e-14));
}

TEST_CASE("sample stream is deterministic and stays in range") {
  SampleStream a(7);
  SampleStream b(7);
  for (int k = 0; k < 64; ++k) {
    const double u = a.unit();
    CHECK(u == b.unit());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  SampleStream c(8);
  bool all_equal = true;
  SampleStream a2(7);
  for (int k = 0; k < 16; ++k) all_equal = all_equal && (a2.unit() == c.unit());
  CHECK_FALSE(all_equal);
}
