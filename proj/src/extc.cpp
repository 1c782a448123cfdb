#include "srgpair/extc.hpp"

#include <algorithm>
#include <cmath>

namespace srgpair {

namespace {

void check_dims(const Vec& delta_out, const Vec& delta_in) {
  if (delta_out.size() != delta_in.size())
    fail(ErrorCode::dimension_mismatch, "difference vectors have unequal dimension");
  if (delta_out.size() == 0) fail(ErrorCode::invalid_argument, "difference vectors are empty");
}

ZPair both_infinite() { return {ExtendedComplex::infinity(), ExtendedComplex::infinity()}; }

ZPair conjugates(double re, double im) {
  return {ExtendedComplex::finite(re, im), ExtendedComplex::finite(re, -im)};
}

}  // namespace

ZPair z_pair(const Vec& delta_out, const Vec& delta_in) {
  check_dims(delta_out, delta_in);
  const double nout = delta_out.norm();
  const double nin = delta_in.norm();
  if (nin == 0.0) {
    if (nout == 0.0) return conjugates(0.0, 0.0);
    return both_infinite();
  }
  if (nout == 0.0) return conjugates(0.0, 0.0);
  // Angle via atan2 of the normalized difference and sum; unlike
  // acos(dot / (nin * nout)) this resolves near-aligned directions to full
  // precision and is exactly zero for identical vectors.
  double diff2 = 0.0;
  double sum2 = 0.0;
  for (Index k = 0; k < delta_out.size(); ++k) {
    const double a = nin * delta_out[k];
    const double b = nout * delta_in[k];
    diff2 += (a - b) * (a - b);
    sum2 += (a + b) * (a + b);
  }
  const double angle = 2.0 * std::atan2(std::sqrt(diff2), std::sqrt(sum2));
  const double modulus = nout / nin;
  return conjugates(modulus * std::cos(angle), modulus * std::sin(angle));
}

ZPair z_pair_projected(const Vec& delta_out, const Vec& delta_in) {
  check_dims(delta_out, delta_in);
  const double nin = delta_in.norm();
  if (nin == 0.0) {
    if (delta_out.norm() == 0.0) return conjugates(0.0, 0.0);
    return both_infinite();
  }
  const double parallel = delta_in.dot(delta_out) / (nin * nin);
  const Vec orthogonal = delta_out - parallel * delta_in;
  return conjugates(parallel, orthogonal.norm() / nin);
}

ExtendedComplex conj_invert(const ExtendedComplex& z) {
  if (z.is_infinite()) return ExtendedComplex::finite(0.0, 0.0);
  const double mag2 = z.re() * z.re() + z.im() * z.im();
  if (mag2 == 0.0) return ExtendedComplex::infinity();
  return ExtendedComplex::finite(z.re() / mag2, z.im() / mag2);
}

}  // namespace srgpair
