#include "srgpair/regions.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

#include "srgpair/srg.hpp"

namespace srgpair {

namespace {

constexpr double kGeomTol = 1e-12;

bool nearly(double a, double b) { return std::abs(a - b) <= kGeomTol * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

Region Region::half_plane(double alpha) {
  Region r;
  r.kind_ = RegionKind::half_plane;
  r.alpha_ = alpha;
  return r;
}

Region Region::disk(std::complex<double> center, double radius) {
  if (!(radius >= 0.0)) fail(ErrorCode::invalid_argument, "disk radius must be nonnegative");
  Region r;
  r.kind_ = RegionKind::disk;
  r.center_ = center;
  r.radius_ = radius;
  return r;
}

Region Region::disk_complement(std::complex<double> center, double radius) {
  if (!(radius >= 0.0)) fail(ErrorCode::invalid_argument, "disk radius must be nonnegative");
  Region r;
  r.kind_ = RegionKind::disk_complement;
  r.center_ = center;
  r.radius_ = radius;
  return r;
}

Region Region::semimonotone(double mu, double rho) {
  Region r;
  r.kind_ = RegionKind::semimonotone;
  r.mu_ = mu;
  r.rho_ = rho;
  return r;
}

Region Region::full_plane() { return Region(); }

Region Region::union_of(std::vector<Region> parts) {
  if (parts.empty()) fail(ErrorCode::invalid_argument, "union of no regions");
  Region r;
  r.kind_ = RegionKind::union_of;
  r.parts_ = std::move(parts);
  return r;
}

Region Region::intersection_of(std::vector<Region> parts) {
  if (parts.empty()) fail(ErrorCode::invalid_argument, "intersection of no regions");
  Region r;
  r.kind_ = RegionKind::intersection_of;
  r.parts_ = std::move(parts);
  return r;
}

bool Region::contains(const ExtendedComplex& z, double tol) const {
  if (z.is_infinite()) return contains_infinity();
  switch (kind_) {
    case RegionKind::half_plane:
      return z.re() >= alpha_ - tol;
    case RegionKind::disk:
      return std::abs(z.value() - center_) <= radius_ + tol;
    case RegionKind::disk_complement:
      return std::abs(z.value() - center_) >= radius_ - tol;
    case RegionKind::semimonotone: {
      // For rho > 0 the inequality completes the square into the disk
      // |z - 1/(2 rho)| <= sqrt(1 - 4 mu rho)/(2 rho), empty when the
      // discriminant is negative.
      if (rho_ > 0.0) {
        const double disc = 1.0 - 4.0 * mu_ * rho_;
        if (disc < 0.0) return false;
        const double radius = std::sqrt(disc) / (2.0 * rho_);
        return std::abs(z.value() - std::complex<double>(1.0 / (2.0 * rho_), 0.0)) <= radius + tol;
      }
      return semimonotone_inequality(z.value(), mu_, rho_, tol);
    }
    case RegionKind::full_plane:
      return true;
    case RegionKind::union_of:
      return std::any_of(parts_.begin(), parts_.end(),
                         [&](const Region& part) { return part.contains(z, tol); });
    case RegionKind::intersection_of:
      return std::all_of(parts_.begin(), parts_.end(),
                         [&](const Region& part) { return part.contains(z, tol); });
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

bool Region::contains_infinity() const {
  switch (kind_) {
    case RegionKind::half_plane:
    case RegionKind::disk_complement:
    case RegionKind::full_plane:
      return true;
    case RegionKind::disk:
      return false;
    case RegionKind::semimonotone:
      return semimonotone_allows_infinity(rho_);
    case RegionKind::union_of:
      return std::any_of(parts_.begin(), parts_.end(),
                         [](const Region& part) { return part.contains_infinity(); });
    case RegionKind::intersection_of:
      return std::all_of(parts_.begin(), parts_.end(),
                         [](const Region& part) { return part.contains_infinity(); });
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

double Region::margin(std::complex<double> z) const {
  switch (kind_) {
    case RegionKind::half_plane:
      return z.real() - alpha_;
    case RegionKind::disk:
      return radius_ - std::abs(z - center_);
    case RegionKind::disk_complement:
      return std::abs(z - center_) - radius_;
    case RegionKind::semimonotone:
      return z.real() - mu_ - rho_ * std::norm(z);
    case RegionKind::full_plane:
      return std::numeric_limits<double>::infinity();
    case RegionKind::union_of: {
      double best = -std::numeric_limits<double>::infinity();
      for (const Region& part : parts_) best = std::max(best, part.margin(z));
      return best;
    }
    case RegionKind::intersection_of: {
      double worst = std::numeric_limits<double>::infinity();
      for (const Region& part : parts_) worst = std::min(worst, part.margin(z));
      return worst;
    }
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

Region Region::shifted(double offset) const {
  switch (kind_) {
    case RegionKind::half_plane:
      return half_plane(alpha_ + offset);
    case RegionKind::disk:
      return disk(center_ + offset, radius_);
    case RegionKind::disk_complement:
      return disk_complement(center_ + offset, radius_);
    case RegionKind::semimonotone: {
      // Re(w - t) >= mu + rho |w - t|^2 collapses back to the same family
      // whenever 1 + 2 rho t stays positive.
      const double scale = 1.0 + 2.0 * rho_ * offset;
      if (scale <= 0.0) fail(ErrorCode::unsupported, "shift leaves the semimonotone family");
      return semimonotone((mu_ + offset + rho_ * offset * offset) / scale, rho_ / scale);
    }
    case RegionKind::full_plane:
      return full_plane();
    case RegionKind::union_of:
    case RegionKind::intersection_of: {
      std::vector<Region> mapped;
      mapped.reserve(parts_.size());
      for (const Region& part : parts_) mapped.push_back(part.shifted(offset));
      return kind_ == RegionKind::union_of ? union_of(std::move(mapped)) : intersection_of(std::move(mapped));
    }
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

Region Region::scaled(double factor) const {
  if (factor == 0.0) fail(ErrorCode::invalid_argument, "scale factor must be nonzero");
  if (factor < 0.0) fail(ErrorCode::unsupported, "negative scale factors are not supported");
  switch (kind_) {
    case RegionKind::half_plane:
      return half_plane(factor * alpha_);
    case RegionKind::disk:
      return disk(factor * center_, factor * radius_);
    case RegionKind::disk_complement:
      return disk_complement(factor * center_, factor * radius_);
    case RegionKind::semimonotone:
      return semimonotone(factor * mu_, rho_ / factor);
    case RegionKind::full_plane:
      return full_plane();
    case RegionKind::union_of:
    case RegionKind::intersection_of: {
      std::vector<Region> mapped;
      mapped.reserve(parts_.size());
      for (const Region& part : parts_) mapped.push_back(part.scaled(factor));
      return kind_ == RegionKind::union_of ? union_of(std::move(mapped)) : intersection_of(std::move(mapped));
    }
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

Region Region::conj_inverted() const {
  switch (kind_) {
    case RegionKind::half_plane: {
      if (alpha_ > 0.0) return disk({1.0 / (2.0 * alpha_), 0.0}, 1.0 / (2.0 * alpha_));
      if (alpha_ == 0.0) return half_plane(0.0);
      return disk_complement({1.0 / (2.0 * alpha_), 0.0}, -1.0 / (2.0 * alpha_));
    }
    case RegionKind::disk: {
      const double dist = std::abs(center_);
      if (nearly(dist, radius_)) {
        if (std::abs(center_.imag()) > kGeomTol || center_.real() <= 0.0)
          fail(ErrorCode::unsupported, "inversion of a disk through zero with a tilted boundary line");
        return half_plane(1.0 / (2.0 * center_.real()));
      }
      const double denom = dist * dist - radius_ * radius_;
      if (denom > 0.0) return disk(center_ / denom, radius_ / denom);
      return disk_complement(center_ / denom, radius_ / -denom);
    }
    case RegionKind::disk_complement: {
      const double dist = std::abs(center_);
      if (nearly(dist, radius_))
        fail(ErrorCode::unsupported, "inversion of a disk-complement bounded by a circle through zero");
      const double denom = dist * dist - radius_ * radius_;
      if (denom > 0.0) return disk_complement(center_ / denom, radius_ / denom);
      return disk(center_ / denom, radius_ / -denom);
    }
    case RegionKind::semimonotone:
      return semimonotone(rho_, mu_);
    case RegionKind::full_plane:
      return full_plane();
    case RegionKind::union_of:
    case RegionKind::intersection_of: {
      std::vector<Region> mapped;
      mapped.reserve(parts_.size());
      for (const Region& part : parts_) mapped.push_back(part.conj_inverted());
      return kind_ == RegionKind::union_of ? union_of(std::move(mapped)) : intersection_of(std::move(mapped));
    }
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

Region Region::minkowski_add(const Region& a, const Region& b) {
  if (a.kind_ == RegionKind::full_plane || b.kind_ == RegionKind::full_plane) return full_plane();
  // A semimonotone region with rho = 0 is a plain half-plane.
  const auto canonical = [](const Region& r) {
    if (r.kind_ == RegionKind::semimonotone && r.rho_ == 0.0) return half_plane(r.mu_);
    return r;
  };
  const Region lhs = canonical(a);
  const Region rhs = canonical(b);
  if (lhs.kind_ == RegionKind::half_plane && rhs.kind_ == RegionKind::half_plane)
    return half_plane(lhs.alpha_ + rhs.alpha_);
  if (lhs.kind_ == RegionKind::disk && rhs.kind_ == RegionKind::disk)
    return disk(lhs.center_ + rhs.center_, lhs.radius_ + rhs.radius_);
  if (lhs.kind_ == RegionKind::half_plane && rhs.kind_ == RegionKind::disk)
    return half_plane(lhs.alpha_ + rhs.center_.real() - rhs.radius_);
  if (lhs.kind_ == RegionKind::disk && rhs.kind_ == RegionKind::half_plane)
    return half_plane(rhs.alpha_ + lhs.center_.real() - lhs.radius_);
  fail(ErrorCode::unsupported, "Minkowski sum outside the supported shape pairs");
}

std::string Region::describe() const {
  switch (kind_) {
    case RegionKind::half_plane:
      return "half_plane(Re >= " + format_double(alpha_) + ")";
    case RegionKind::disk:
      return "disk(center=(" + format_double(center_.real()) + "," + format_double(center_.imag()) +
             "), r=" + format_double(radius_) + ")";
    case RegionKind::disk_complement:
      return "disk_complement(center=(" + format_double(center_.real()) + "," + format_double(center_.imag()) +
             "), r=" + format_double(radius_) + ")";
    case RegionKind::semimonotone:
      return "semimonotone(mu=" + format_double(mu_) + ", rho=" + format_double(rho_) + ")";
    case RegionKind::full_plane:
      return "full_plane";
    case RegionKind::union_of:
    case RegionKind::intersection_of: {
      std::string out = kind_ == RegionKind::union_of ? "union(" : "intersection(";
      for (std::size_t k = 0; k < parts_.size(); ++k) {
        if (k > 0) out += ", ";
        out += parts_[k].describe();
      }
      return out + ")";
    }
  }
  fail(ErrorCode::internal, "unreachable region kind");
}

bool semimonotone_inequality(std::complex<double> z, double mu, double rho, double tol) {
  return z.real() >= mu + rho * std::norm(z) - tol;
}

bool semimonotone_allows_infinity(double rho) { return rho <= 0.0; }

SemimonotoneReport check_semimonotone_pair(const OpPtr& a, const OpPtr& b, double mu, double rho,
                                           const SampleOptions& options, double tol) {
  const auto inputs = draw_pair_inputs(*a, *b, options.n_inputs, options.seed);
  const auto cloud = sample_pair_srg_at(a, b, inputs, options);

  SemimonotoneReport report;
  report.combos = cloud.counts.combos;
  report.finite_points = cloud.counts.finite;
  report.saw_infinity = cloud.has_infinity;
  report.infinity_allowed = semimonotone_allows_infinity(rho);

  // Direct route: the defining inner-product inequality on every selection
  // combination, evaluated from the raw difference vectors. A vanishing
  // B-difference reduces the inequality to 0 >= rho |du_a|^2.
  const auto n = inputs.size();
  std::vector<std::vector<Vec>> la(n), lb(n);
  for (std::size_t i = 0; i < n; ++i) {
    la[i] = representative_outputs(*a, inputs[i], options.max_selections);
    lb[i] = representative_outputs(*b, inputs[i], options.max_selections);
  }
  double direct_margin = std::numeric_limits<double>::infinity();
  std::uint64_t seen = 0;
  const std::uint64_t combo_cap = options.max_combos;
  for (std::size_t i = 0; i < n && seen < combo_cap; ++i) {
    for (std::size_t j = i; j < n && seen < combo_cap; ++j) {
      const std::uint64_t block = static_cast<std::uint64_t>(la[i].size()) * la[j].size() * lb[i].size() * lb[j].size();
      if (seen + block > combo_cap) break;
      seen += block;
      for (const Vec& ua : la[i]) {
        for (const Vec& uab : la[j]) {
          const Vec da = ua - uab;
          const double na2 = da.squaredNorm();
          for (const Vec& ub : lb[i]) {
            for (const Vec& ubb : lb[j]) {
              const Vec db = ub - ubb;
              const double nb2 = db.squaredNorm();
              const double na = std::sqrt(na2);
              if (std::sqrt(nb2) <= cloud.eps_den * std::max(1.0, na)) {
                if (na > cloud.eps_den) direct_margin = std::min(direct_margin, -rho);
                continue;
              }
              const double slack = (da.dot(db) - mu * nb2 - rho * na2) / nb2;
              direct_margin = std::min(direct_margin, slack);
            }
          }
        }
      }
    }
  }
  report.direct_margin = direct_margin;
  report.direct_pass = direct_margin >= -tol;

  const Region region = Region::semimonotone(mu, rho);
  double containment_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < cloud.points.size(); k += 2)
    containment_margin = std::min(containment_margin, region.margin(cloud.points[k].value()));
  if (report.saw_infinity) containment_margin = std::min(containment_margin, -rho);
  report.containment_margin = containment_margin;
  report.containment_pass =
      containment_margin >= -tol && (!report.saw_infinity || report.infinity_allowed);
  report.agree = report.direct_pass == report.containment_pass;
  return report;
}

// ===========================================================================
// Monotone partner construction
// ===========================================================================

Mat adjugate(const Mat& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::invalid_argument, "adjugate of a non-square matrix");
  const Index n = m.rows();
  if (n == 1) return Mat::Ones(1, 1);
  Mat adj(n, n);
  Mat minor(n - 1, n - 1);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      for (Index r = 0; r < n - 1; ++r)
        for (Index c = 0; c < n - 1; ++c) minor(r, c) = m(r < i ? r : r + 1, c < j ? c : c + 1);
      const double cof = ((i + j) % 2 == 0 ? 1.0 : -1.0) * minor.determinant();
      adj(j, i) = cof;
    }
  }
  return adj;
}

OpPtr pair_partner_nonsingular(const Mat& m, double c) {
  if (m.rows() != m.cols()) fail(ErrorCode::invalid_argument, "partner of a non-square matrix");
  if (!(c > 0.0)) fail(ErrorCode::invalid_argument, "partner scale must be positive");
  Eigen::FullPivLU<Mat> lu(m);
  if (!lu.isInvertible()) fail(ErrorCode::invalid_argument, "partner construction needs an invertible matrix");
  return linear_op(c * lu.inverse().transpose());
}

RankOnePartner pair_partner_rank_deficient(const Mat& m) {
  if (m.rows() != m.cols()) fail(ErrorCode::invalid_argument, "partner of a non-square matrix");
  const Index n = m.rows();
  if (n < 2) fail(ErrorCode::invalid_argument, "rank-deficient partner needs dimension >= 2");

  RankOnePartner out;
  out.adjugate = adjugate(m);

  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * std::max(sv(0), 1e-300);
  Index rank = 0;
  for (Index k = 0; k < n; ++k)
    if (sv(k) > cutoff) ++rank;
  if (rank != n - 1) fail(ErrorCode::invalid_argument, "matrix is not of rank n-1");

  // adj(M) = s * x y^T with M x = 0 and M^T y = 0; recover the scale from the
  // adjugate itself so that partner = adj(M)^T exactly.
  Vec x = svd.matrixV().col(n - 1);
  Vec y = svd.matrixU().col(n - 1);
  const double scale = x.dot(out.adjugate * y);
  out.x = scale * x;
  out.y = y;
  out.partner = out.y * out.x.transpose();
  const double resid = (out.partner - out.adjugate.transpose()).norm();
  if (resid > 1e-8 * std::max(1.0, out.adjugate.norm()))
    fail(ErrorCode::internal, "rank-one factorization failed to reproduce the adjugate");
  out.op = linear_op(out.partner);
  return out;
}

}  // namespace srgpair
