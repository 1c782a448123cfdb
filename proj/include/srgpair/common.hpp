#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace srgpair {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Error categories surfaced across the C boundary.
enum class ErrorCode {
  invalid_argument = 1,
  parse = 2,
  dimension_mismatch = 3,
  empty_domain = 4,
  unsupported = 5,
  solver_failure = 6,
  io = 7,
  internal = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

/// Deterministic stream of doubles, identical across platforms for a fixed
/// seed. The raw engine output is scaled explicitly instead of going through
/// std::uniform_real_distribution, whose rounding is implementation defined.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw from [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform draw from [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Strict lexicographic order on coordinates, used to canonicalize sampled
/// input lists so that matched-seed runs enumerate pairs identically.
inline bool lex_less(const Vec& a, const Vec& b) {
  for (Index k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

}  // namespace srgpair
