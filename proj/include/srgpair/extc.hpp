#pragma once

#include <complex>
#include <utility>

#include "srgpair/common.hpp"

namespace srgpair {

/// Point of the extended complex plane: a finite value or the point at
/// infinity. Finite values are always numeric; infinity carries no payload.
class ExtendedComplex {
 public:
  ExtendedComplex() : value_(0.0, 0.0), infinite_(false) {}

  static ExtendedComplex finite(double re, double im) { return ExtendedComplex(std::complex<double>(re, im)); }
  static ExtendedComplex finite(std::complex<double> z) { return ExtendedComplex(z); }
  static ExtendedComplex infinity() {
    ExtendedComplex e;
    e.infinite_ = true;
    return e;
  }

  [[nodiscard]] bool is_infinite() const { return infinite_; }
  [[nodiscard]] double re() const { return value_.real(); }
  [[nodiscard]] double im() const { return value_.imag(); }

  /// Finite payload; calling this on the point at infinity is a logic error.
  [[nodiscard]] std::complex<double> value() const {
    if (infinite_) fail(ErrorCode::invalid_argument, "value() called on the point at infinity");
    return value_;
  }

  friend bool operator==(const ExtendedComplex& a, const ExtendedComplex& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

 private:
  explicit ExtendedComplex(std::complex<double> z) : value_(z), infinite_(false) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      fail(ErrorCode::invalid_argument, "non-finite payload for a finite extended-complex value");
  }

  std::complex<double> value_;
  bool infinite_;
};

/// Conjugate pair emitted for one evaluation-difference pair. `plus` carries
/// the branch with nonnegative imaginary part.
struct ZPair {
  ExtendedComplex plus;
  ExtendedComplex minus;
};

/// Polar-form kernel. Maps a pair of difference vectors to the conjugate pair
///   (|out| / |in|) * exp(+-i * angle(in, out)),
/// with angle in [0, pi]. A zero denominator against a nonzero numerator gives
/// the point at infinity on both branches; a zero numerator gives zero.
[[nodiscard]] ZPair z_pair(const Vec& delta_out, const Vec& delta_in);

/// Projection-form kernel:
///   re = <out, in> / |in|^2,  im = |component of out orthogonal to in| / |in|.
/// Algebraically identical to z_pair; kept free of trigonometry so the two
/// routes can cross-check each other.
[[nodiscard]] ZPair z_pair_projected(const Vec& delta_out, const Vec& delta_in);

/// z -> conj(1/z), with 0 <-> infinity. Preserves the argument and inverts the
/// modulus, so conjugate pairs stay conjugate pairs.
[[nodiscard]] ExtendedComplex conj_invert(const ExtendedComplex& z);

}  // namespace srgpair
