#pragma once

#include <complex>
#include <string>
#include <vector>

#include "srgpair/extc.hpp"
#include "srgpair/ops.hpp"

namespace srgpair {

enum class RegionKind {
  half_plane,       ///< Re(z) >= alpha, plus the point at infinity
  disk,             ///< closed disk, finite only
  disk_complement,  ///< |z - center| >= radius, plus infinity
  semimonotone,     ///< Re(z) >= mu + rho |z|^2, plus infinity iff rho <= 0
  full_plane,       ///< everything including infinity
  union_of,
  intersection_of,
};

/// Closed region of the extended complex plane with the transform calculus
/// needed for operator-pair certificates. Transforms exist only where the
/// image stays in closed form; anything else raises ErrorCode::unsupported.
class Region {
 public:
  static Region half_plane(double alpha);
  static Region disk(std::complex<double> center, double radius);
  static Region disk_complement(std::complex<double> center, double radius);
  static Region semimonotone(double mu, double rho);
  static Region full_plane();
  static Region union_of(std::vector<Region> parts);
  static Region intersection_of(std::vector<Region> parts);

  [[nodiscard]] RegionKind kind() const { return kind_; }
  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] std::complex<double> center() const { return center_; }
  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] double mu() const { return mu_; }
  [[nodiscard]] double rho() const { return rho_; }
  [[nodiscard]] const std::vector<Region>& parts() const { return parts_; }

  /// Membership with the defining inequalities relaxed additively by tol.
  [[nodiscard]] bool contains(const ExtendedComplex& z, double tol = 0.0) const;
  [[nodiscard]] bool contains_infinity() const;

  /// Signed slack of the defining inequality at a finite point (>= 0 inside).
  [[nodiscard]] double margin(std::complex<double> z) const;

  [[nodiscard]] Region shifted(double offset) const;
  [[nodiscard]] Region scaled(double factor) const;
  [[nodiscard]] Region conj_inverted() const;
  [[nodiscard]] static Region minkowski_add(const Region& a, const Region& b);

  [[nodiscard]] std::string describe() const;

 private:
  Region() = default;

  RegionKind kind_ = RegionKind::full_plane;
  double alpha_ = 0.0;
  std::complex<double> center_{0.0, 0.0};
  double radius_ = 0.0;
  double mu_ = 0.0;
  double rho_ = 0.0;
  std::vector<Region> parts_;
};

/// Direct form of the semimonotone inequality at a finite point.
[[nodiscard]] bool semimonotone_inequality(std::complex<double> z, double mu, double rho, double tol = 0.0);
[[nodiscard]] bool semimonotone_allows_infinity(double rho);

struct SampleOptions;
struct CloudCounts;

/// Result of a sampled (mu, rho)-semimonotonicity certificate. The direct
/// verdict tests the defining inner-product inequality on every selection
/// combination; the containment verdict tests the sampled cloud against the
/// matching region. The two must agree.
struct SemimonotoneReport {
  bool direct_pass = false;
  bool containment_pass = false;
  bool agree = false;
  double direct_margin = 0.0;
  double containment_margin = 0.0;
  bool saw_infinity = false;
  bool infinity_allowed = false;
  std::uint64_t combos = 0;
  std::uint64_t finite_points = 0;
};

[[nodiscard]] SemimonotoneReport check_semimonotone_pair(const OpPtr& a, const OpPtr& b, double mu, double rho,
                                                         const SampleOptions& options, double tol = 1e-9);

// ===========================================================================
// Monotone partner construction
// ===========================================================================

/// Adjugate via the cofactor formula; intended for small matrices.
[[nodiscard]] Mat adjugate(const Mat& m);

/// c * M^{-T} for invertible M and c > 0: the canonical partner that makes
/// (M o B, partner) a monotone pair for monotone B.
[[nodiscard]] OpPtr pair_partner_nonsingular(const Mat& m, double c = 1.0);

struct RankOnePartner {
  Mat partner;    ///< adj(M)^T realized as y * x^T
  Vec x;          ///< right null direction of M, scaled
  Vec y;          ///< left null direction of M
  Mat adjugate;   ///< adj(M), of numerical rank one
  OpPtr op;       ///< partner as a linear operator
};

/// Rank-one partner for M of numerical rank n-1 (threshold 1e-10 relative to
/// the largest singular value). Errors when the rank is different.
[[nodiscard]] RankOnePartner pair_partner_rank_deficient(const Mat& m);

}  // namespace srgpair
