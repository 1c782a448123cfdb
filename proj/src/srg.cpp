#include "srgpair/srg.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

namespace srgpair {

namespace {

constexpr std::uint32_t kMaxInputs = (1u << 20) - 1;
constexpr int kMaxSelections = 63;

int resolve_thread_count(int requested, std::uint64_t combos) {
  if (combos < 20'000) return 1;
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SRG_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return std::min(parsed, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(hw == 0 ? 1u : hw, 8u));
}

struct ChunkOut {
  std::vector<ExtendedComplex> points;
  std::vector<std::uint64_t> finite_keys;
  std::vector<std::uint64_t> infinity_keys;
  std::vector<std::uint64_t> degenerate_keys;
  std::uint64_t combos = 0;
};

void validate_options(const SampleOptions& options) {
  if (options.n_inputs < 1) fail(ErrorCode::invalid_argument, "n_inputs must be positive");
  if (options.eps_den <= 0.0) fail(ErrorCode::invalid_argument, "eps_den must be positive");
  if (options.max_selections < 1 || options.max_selections > kMaxSelections)
    fail(ErrorCode::invalid_argument, "max_selections outside [1, 63]");
  if (options.max_combos == 0) fail(ErrorCode::invalid_argument, "max_combos must be positive");
}

}  // namespace

std::vector<Vec> representative_outputs(const SetValuedOp& op, const Vec& x, int cap) {
  auto outs = op.eval(x);
  if (static_cast<int>(outs.size()) <= cap) return outs;
  std::vector<Vec> kept;
  if (cap <= 1) {
    kept.push_back(outs.front());
    return kept;
  }
  kept.reserve(static_cast<std::size_t>(cap));
  const auto last = outs.size() - 1;
  for (int k = 0; k < cap; ++k)
    kept.push_back(outs[static_cast<std::size_t>(k) * last / static_cast<std::size_t>(cap - 1)]);
  return kept;
}

std::uint64_t pack_combo(const ComboKeyParts& p) {
  return (static_cast<std::uint64_t>(p.i) << 44) | (static_cast<std::uint64_t>(p.j) << 24) |
         (static_cast<std::uint64_t>(p.sel_a) << 18) | (static_cast<std::uint64_t>(p.sel_a_bar) << 12) |
         (static_cast<std::uint64_t>(p.sel_b) << 6) | static_cast<std::uint64_t>(p.sel_b_bar);
}

ComboKeyParts unpack_combo(std::uint64_t key) {
  ComboKeyParts p;
  p.i = static_cast<std::uint32_t>(key >> 44) & kMaxInputs;
  p.j = static_cast<std::uint32_t>(key >> 24) & kMaxInputs;
  p.sel_a = static_cast<int>((key >> 18) & 63u);
  p.sel_a_bar = static_cast<int>((key >> 12) & 63u);
  p.sel_b = static_cast<int>((key >> 6) & 63u);
  p.sel_b_bar = static_cast<int>(key & 63u);
  return p;
}

std::uint64_t swap_combo_roles(std::uint64_t key) {
  ComboKeyParts p = unpack_combo(key);
  std::swap(p.sel_a, p.sel_b);
  std::swap(p.sel_a_bar, p.sel_b_bar);
  return pack_combo(p);
}

std::vector<Vec> draw_pair_inputs(const SetValuedOp& a, const SetValuedOp& b, int count, std::uint64_t seed) {
  if (a.dim() != b.dim()) fail(ErrorCode::dimension_mismatch, "pair operands have different dimensions");
  if (count < 1) fail(ErrorCode::invalid_argument, "input count must be positive");
  const Index n = a.dim();
  const auto feasible = [&](const Vec& x) { return !a.eval(x).empty() && !b.eval(x).empty(); };

  std::vector<Vec> pool;
  for (int round = 0; round < 6; ++round) {
    const int want = count << round;
    SampleStream box_stream(mix_seed(seed, 11 + static_cast<std::uint64_t>(round)));
    for (int k = 0; k < want; ++k) {
      Vec x(n);
      for (Index d = 0; d < n; ++d) x[d] = box_stream.uniform(a.box().lo, a.box().hi);
      if (feasible(x)) pool.push_back(std::move(x));
    }
    for (const Vec& x : a.sample_domain(want, mix_seed(seed, 21 + static_cast<std::uint64_t>(round))))
      if (feasible(x)) pool.push_back(x);
    for (const Vec& x : b.sample_domain(want, mix_seed(seed, 31 + static_cast<std::uint64_t>(round))))
      if (feasible(x)) pool.push_back(x);

    std::sort(pool.begin(), pool.end(), lex_less);
    pool.erase(std::unique(pool.begin(), pool.end(), [](const Vec& u, const Vec& v) { return u == v; }), pool.end());
    if (static_cast<int>(pool.size()) >= count) break;
  }

  const auto m = pool.size();
  if (m == 0) fail(ErrorCode::empty_domain, "no common-domain samples found for the pair");
  if (static_cast<int>(m) <= count) return pool;
  std::vector<Vec> picked;
  picked.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) picked.push_back(pool[static_cast<std::size_t>(k) * m / static_cast<std::size_t>(count)]);
  return picked;
}

PairSrgCloud sample_pair_srg(const OpPtr& a, const OpPtr& b, const SampleOptions& options) {
  validate_options(options);
  auto inputs = draw_pair_inputs(*a, *b, options.n_inputs, options.seed);
  return sample_pair_srg_at(a, b, std::move(inputs), options);
}

PairSrgCloud sample_pair_srg_at(const OpPtr& a, const OpPtr& b, std::vector<Vec> inputs,
                                const SampleOptions& options) {
  validate_options(options);
  if (a->dim() != b->dim()) fail(ErrorCode::dimension_mismatch, "pair operands have different dimensions");
  if (inputs.empty()) fail(ErrorCode::empty_domain, "no inputs to sample at");
  if (inputs.size() > kMaxInputs) fail(ErrorCode::invalid_argument, "too many inputs for provenance keys");
  for (const Vec& x : inputs)
    if (x.size() != a->dim()) fail(ErrorCode::dimension_mismatch, "input point has wrong dimension");

  const auto n = static_cast<std::uint32_t>(inputs.size());
  std::vector<std::vector<Vec>> la(n), lb(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    la[i] = representative_outputs(*a, inputs[i], options.max_selections);
    lb[i] = representative_outputs(*b, inputs[i], options.max_selections);
  }

  // Flattened pair list (diagonal included) with per-pair combination counts,
  // truncated deterministically at the combination cap.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  std::vector<std::uint64_t> combo_prefix;
  combo_prefix.reserve(pairs.capacity() + 1);
  combo_prefix.push_back(0);
  bool truncated = false;
  for (std::uint32_t i = 0; i < n && !truncated; ++i) {
    for (std::uint32_t j = i; j < n; ++j) {
      const std::uint64_t combos = static_cast<std::uint64_t>(la[i].size()) * la[j].size() * lb[i].size() * lb[j].size();
      if (combo_prefix.back() + combos > options.max_combos) {
        truncated = true;
        break;
      }
      pairs.emplace_back(i, j);
      combo_prefix.push_back(combo_prefix.back() + combos);
    }
  }
  const std::uint64_t total_combos = combo_prefix.back();

  const auto run_range = [&](std::size_t begin, std::size_t end, ChunkOut& out) {
    const double eps = options.eps_den;
    for (std::size_t p = begin; p < end; ++p) {
      const auto [i, j] = pairs[p];
      const auto& ai = la[i];
      const auto& aj = la[j];
      const auto& bi = lb[i];
      const auto& bj = lb[j];
      if (ai.empty() || aj.empty() || bi.empty() || bj.empty()) continue;
      ComboKeyParts parts;
      parts.i = i;
      parts.j = j;
      for (int sa = 0; sa < static_cast<int>(ai.size()); ++sa) {
        parts.sel_a = sa;
        for (int sab = 0; sab < static_cast<int>(aj.size()); ++sab) {
          parts.sel_a_bar = sab;
          const Vec da = ai[static_cast<std::size_t>(sa)] - aj[static_cast<std::size_t>(sab)];
          const double na = da.norm();
          for (int sb = 0; sb < static_cast<int>(bi.size()); ++sb) {
            parts.sel_b = sb;
            for (int sbb = 0; sbb < static_cast<int>(bj.size()); ++sbb) {
              parts.sel_b_bar = sbb;
              ++out.combos;
              const Vec db = bi[static_cast<std::size_t>(sb)] - bj[static_cast<std::size_t>(sbb)];
              const double nb = db.norm();
              const std::uint64_t key = pack_combo(parts);
              if (nb <= eps * std::max(1.0, na)) {
                if (na > eps)
                  out.infinity_keys.push_back(key);
                else
                  out.degenerate_keys.push_back(key);
                continue;
              }
              const ZPair z = z_pair(da, db);
              out.points.push_back(z.plus);
              out.points.push_back(z.minus);
              out.finite_keys.push_back(key);
            }
          }
        }
      }
    }
  };

  const int threads = resolve_thread_count(options.threads, total_combos);
  std::vector<ChunkOut> chunks;
  if (threads <= 1 || pairs.size() < 2) {
    chunks.resize(1);
    run_range(0, pairs.size(), chunks[0]);
  } else {
    // Contiguous pair ranges with near-equal combination load; results are
    // merged in range order, so the byte output is independent of the count.
    std::vector<std::size_t> bounds{0};
    for (int t = 1; t < threads; ++t) {
      const std::uint64_t target = total_combos * static_cast<std::uint64_t>(t) / static_cast<std::uint64_t>(threads);
      const auto it = std::lower_bound(combo_prefix.begin(), combo_prefix.end(), target);
      bounds.push_back(std::min(pairs.size(), static_cast<std::size_t>(it - combo_prefix.begin())));
    }
    bounds.push_back(pairs.size());
    std::sort(bounds.begin(), bounds.end());
    chunks.resize(bounds.size() - 1);
    std::vector<std::thread> workers;
    for (std::size_t c = 0; c + 1 < bounds.size(); ++c)
      workers.emplace_back(run_range, bounds[c], bounds[c + 1], std::ref(chunks[c]));
    for (auto& w : workers) w.join();
  }

  PairSrgCloud cloud;
  cloud.seed = options.seed;
  cloud.eps_den = options.eps_den;
  cloud.max_selections = options.max_selections;
  cloud.truncated = truncated;
  cloud.inputs = std::move(inputs);
  cloud.counts.input_pairs = pairs.size();
  for (const ChunkOut& c : chunks) {
    cloud.points.insert(cloud.points.end(), c.points.begin(), c.points.end());
    cloud.finite_keys.insert(cloud.finite_keys.end(), c.finite_keys.begin(), c.finite_keys.end());
    cloud.infinity_keys.insert(cloud.infinity_keys.end(), c.infinity_keys.begin(), c.infinity_keys.end());
    cloud.degenerate_keys.insert(cloud.degenerate_keys.end(), c.degenerate_keys.begin(), c.degenerate_keys.end());
    cloud.counts.combos += c.combos;
  }
  cloud.counts.finite = cloud.finite_keys.size();
  cloud.counts.infinite = cloud.infinity_keys.size();
  cloud.counts.degenerate = cloud.degenerate_keys.size();
  cloud.has_infinity = !cloud.infinity_keys.empty();
  return cloud;
}

SrgSample provenance_sample(const SetValuedOp& a, const SetValuedOp& b, const PairSrgCloud& cloud,
                            std::uint64_t key) {
  const ComboKeyParts p = unpack_combo(key);
  if (p.i >= cloud.inputs.size() || p.j >= cloud.inputs.size())
    fail(ErrorCode::invalid_argument, "provenance key does not match the cloud");
  SrgSample s;
  s.x = cloud.inputs[p.i];
  s.x_bar = cloud.inputs[p.j];
  const auto ai = representative_outputs(a, s.x, cloud.max_selections);
  const auto aj = representative_outputs(a, s.x_bar, cloud.max_selections);
  const auto bi = representative_outputs(b, s.x, cloud.max_selections);
  const auto bj = representative_outputs(b, s.x_bar, cloud.max_selections);
  if (p.sel_a >= static_cast<int>(ai.size()) || p.sel_a_bar >= static_cast<int>(aj.size()) ||
      p.sel_b >= static_cast<int>(bi.size()) || p.sel_b_bar >= static_cast<int>(bj.size()))
    fail(ErrorCode::invalid_argument, "provenance key selections out of range");
  s.u_a = ai[static_cast<std::size_t>(p.sel_a)];
  s.u_a_bar = aj[static_cast<std::size_t>(p.sel_a_bar)];
  s.u_b = bi[static_cast<std::size_t>(p.sel_b)];
  s.u_b_bar = bj[static_cast<std::size_t>(p.sel_b_bar)];
  return s;
}

// ===========================================================================
// Calculus images
// ===========================================================================

PairSrgCloud apply_scale(const PairSrgCloud& cloud, double factor) {
  if (factor == 0.0) fail(ErrorCode::invalid_argument, "apply_scale: zero factor");
  PairSrgCloud out = cloud;
  for (std::size_t k = 0; k + 1 < out.points.size(); k += 2) {
    const auto plus = out.points[k];
    const auto minus = out.points[k + 1];
    if (plus.is_infinite()) continue;
    if (factor > 0.0) {
      out.points[k] = ExtendedComplex::finite(factor * plus.value());
      out.points[k + 1] = ExtendedComplex::finite(factor * minus.value());
    } else {
      out.points[k] = ExtendedComplex::finite(factor * minus.value());
      out.points[k + 1] = ExtendedComplex::finite(factor * plus.value());
    }
  }
  return out;
}

PairSrgCloud apply_shift(const PairSrgCloud& cloud, double offset) {
  PairSrgCloud out = cloud;
  for (auto& z : out.points) {
    if (z.is_infinite()) continue;
    z = ExtendedComplex::finite(z.value() + offset);
  }
  return out;
}

PairSrgCloud apply_invert(const PairSrgCloud& cloud) {
  PairSrgCloud out;
  out.seed = cloud.seed;
  out.eps_den = cloud.eps_den;
  out.max_selections = cloud.max_selections;
  out.truncated = cloud.truncated;
  out.inputs = cloud.inputs;
  out.counts = cloud.counts;
  out.degenerate_keys = cloud.degenerate_keys;
  out.points.reserve(cloud.points.size());
  out.finite_keys.reserve(cloud.finite_keys.size());
  for (std::size_t c = 0; c < cloud.finite_keys.size(); ++c) {
    const auto& plus = cloud.points[2 * c];
    const auto& minus = cloud.points[2 * c + 1];
    if (!plus.is_infinite() && plus.value() == std::complex<double>(0.0, 0.0)) {
      out.infinity_keys.push_back(cloud.finite_keys[c]);
      continue;
    }
    out.points.push_back(conj_invert(plus));
    out.points.push_back(conj_invert(minus));
    out.finite_keys.push_back(cloud.finite_keys[c]);
  }
  for (const std::uint64_t key : cloud.infinity_keys) {
    out.points.push_back(ExtendedComplex::finite(0.0, 0.0));
    out.points.push_back(ExtendedComplex::finite(0.0, 0.0));
    out.finite_keys.push_back(key);
  }
  out.counts.finite = out.finite_keys.size();
  out.counts.infinite = out.infinity_keys.size();
  out.has_infinity = !out.infinity_keys.empty();
  return out;
}

double chordal_distance(const ExtendedComplex& a, const ExtendedComplex& b) {
  const auto lift = [](const ExtendedComplex& z) { return std::sqrt(1.0 + z.re() * z.re() + z.im() * z.im()); };
  if (a.is_infinite() && b.is_infinite()) return 0.0;
  if (a.is_infinite()) return 1.0 / lift(b);
  if (b.is_infinite()) return 1.0 / lift(a);
  return std::abs(a.value() - b.value()) / (lift(a) * lift(b));
}

MatchedCompareReport matched_compare(const PairSrgCloud& lhs, const PairSrgCloud& rhs, bool swap_roles,
                                     double tol) {
  enum : std::uint8_t { kFinite = 0, kInfinite = 1, kDegenerate = 2 };
  std::unordered_map<std::uint64_t, std::pair<std::uint8_t, std::uint64_t>> right;
  right.reserve(rhs.finite_keys.size() + rhs.infinity_keys.size() + rhs.degenerate_keys.size());
  for (std::uint64_t c = 0; c < rhs.finite_keys.size(); ++c) right[rhs.finite_keys[c]] = {kFinite, c};
  for (const std::uint64_t key : rhs.infinity_keys) right[key] = {kInfinite, 0};
  for (const std::uint64_t key : rhs.degenerate_keys) right[key] = {kDegenerate, 0};

  MatchedCompareReport report;
  const auto right_lookup = [&](std::uint64_t key) {
    return right.find(swap_roles ? swap_combo_roles(key) : key);
  };

  const auto compare_value = [&](const ExtendedComplex& value, std::uint64_t key) {
    const auto it = right_lookup(key);
    if (it == right.end() || it->second.first == kDegenerate) {
      ++report.category_mismatches;
      return;
    }
    const ExtendedComplex other = it->second.first == kInfinite
                                      ? ExtendedComplex::infinity()
                                      : rhs.points[2 * it->second.second];
    report.max_deviation = std::max(report.max_deviation, chordal_distance(value, other));
    ++report.compared;
  };

  for (std::uint64_t c = 0; c < lhs.finite_keys.size(); ++c) compare_value(lhs.points[2 * c], lhs.finite_keys[c]);
  for (const std::uint64_t key : lhs.infinity_keys) compare_value(ExtendedComplex::infinity(), key);
  for (const std::uint64_t key : lhs.degenerate_keys) {
    const auto it = right_lookup(key);
    if (it == right.end() || it->second.first != kDegenerate) ++report.category_mismatches;
  }

  const std::uint64_t lhs_total = lhs.finite_keys.size() + lhs.infinity_keys.size() + lhs.degenerate_keys.size();
  if (lhs_total != right.size()) ++report.category_mismatches;
  report.pass = report.category_mismatches == 0 && report.max_deviation <= tol;
  return report;
}

SubsetReport cloud_subset_check(const PairSrgCloud& inner, const PairSrgCloud& outer, double tol) {
  SubsetReport report;
  report.infinity_ok = !inner.has_infinity || outer.has_infinity;

  std::vector<std::pair<double, double>> pool;
  pool.reserve(outer.points.size());
  for (const auto& z : outer.points)
    if (!z.is_infinite()) pool.emplace_back(z.re(), z.im());
  std::sort(pool.begin(), pool.end());

  constexpr std::uint64_t kOffenderScanCap = 2000;
  for (const auto& z : inner.points) {
    if (z.is_infinite()) continue;
    const double re = z.re();
    const double im = z.im();
    bool hit = false;
    auto it = std::lower_bound(pool.begin(), pool.end(), std::make_pair(re - tol, -1e300));
    for (; it != pool.end() && it->first <= re + tol; ++it) {
      const double dre = it->first - re;
      const double dim = it->second - im;
      if (dre * dre + dim * dim <= tol * tol) {
        hit = true;
        break;
      }
    }
    if (hit) continue;
    ++report.offenders;
    if (report.offenders <= kOffenderScanCap) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : pool) {
        const double dre = q.first - re;
        const double dim = q.second - im;
        best = std::min(best, dre * dre + dim * dim);
      }
      report.worst_distance = std::max(report.worst_distance, pool.empty() ? 1e300 : std::sqrt(best));
    }
  }
  report.pass = report.offenders == 0 && report.infinity_ok;
  return report;
}

// ===========================================================================
// Exports
// ===========================================================================

std::string format_double(double value) {
  if (value == 0.0) value = 0.0;  // normalize the sign of zero
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string text(buf, res.ptr);
  if (text.find('.') == std::string::npos && text.find('e') == std::string::npos &&
      text.find("inf") == std::string::npos && text.find("nan") == std::string::npos)
    text += ".0";
  return text;
}

std::string cloud_to_csv(const PairSrgCloud& cloud) {
  std::string out = "re,im,is_infinity\n";
  for (const auto& z : cloud.points) {
    if (z.is_infinite()) continue;
    out += format_double(z.re());
    out += ',';
    out += format_double(z.im());
    out += ",0\n";
  }
  if (cloud.has_infinity) out += ",,1\n";
  return out;
}

void write_cloud_csv(const std::string& path, const PairSrgCloud& cloud) {
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  file << cloud_to_csv(cloud);
  if (!file) fail(ErrorCode::io, "failed writing '" + path + "'");
}

namespace {

constexpr double kViewHalf = 3.5;
constexpr double kCanvas = 640.0;
constexpr double kMargin = 20.0;
constexpr double kPlot = kCanvas - 2.0 * kMargin;

double px(double re) { return kMargin + (re + kViewHalf) / (2.0 * kViewHalf) * kPlot; }
double py(double im) { return kCanvas - kMargin - (im + kViewHalf) / (2.0 * kViewHalf) * kPlot; }

std::string fixed2(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

void append_circle_outline(std::string& svg, std::complex<double> center, double radius, bool dashed) {
  svg += "<circle cx=\"" + fixed2(px(center.real())) + "\" cy=\"" + fixed2(py(center.imag())) + "\" r=\"" +
         fixed2(radius / (2.0 * kViewHalf) * kPlot) + "\" fill=\"#2b6cb0\" fill-opacity=\"0.06\" " +
         "stroke=\"#2b6cb0\" stroke-width=\"1.5\"" + (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
}

void append_halfplane_outline(std::string& svg, double alpha) {
  const double x = px(alpha);
  svg += "<rect x=\"" + fixed2(x) + "\" y=\"" + fixed2(kMargin) + "\" width=\"" +
         fixed2(std::max(0.0, kCanvas - kMargin - x)) + "\" height=\"" + fixed2(kPlot) +
         "\" fill=\"#2b6cb0\" fill-opacity=\"0.06\"/>\n";
  svg += "<line x1=\"" + fixed2(x) + "\" y1=\"" + fixed2(kMargin) + "\" x2=\"" + fixed2(x) + "\" y2=\"" +
         fixed2(kCanvas - kMargin) + "\" stroke=\"#2b6cb0\" stroke-width=\"1.5\"/>\n";
}

void append_region_outline(std::string& svg, const Region& region) {
  switch (region.kind()) {
    case RegionKind::half_plane:
      append_halfplane_outline(svg, region.alpha());
      break;
    case RegionKind::disk:
      append_circle_outline(svg, region.center(), region.radius(), false);
      break;
    case RegionKind::disk_complement:
      append_circle_outline(svg, region.center(), region.radius(), true);
      break;
    case RegionKind::semimonotone: {
      const double mu = region.mu();
      const double rho = region.rho();
      if (rho == 0.0) {
        append_halfplane_outline(svg, mu);
      } else {
        const double disc = 1.0 - 4.0 * mu * rho;
        if (disc >= 0.0)
          append_circle_outline(svg, {1.0 / (2.0 * rho), 0.0}, std::sqrt(disc) / (2.0 * std::abs(rho)), rho < 0.0);
      }
      break;
    }
    case RegionKind::full_plane:
      break;
    case RegionKind::union_of:
    case RegionKind::intersection_of:
      for (const Region& part : region.parts()) append_region_outline(svg, part);
      break;
  }
}

}  // namespace

std::string cloud_to_svg(const PairSrgCloud& cloud, const Region* region) {
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"640\" fill=\"#ffffff\"/>\n";
  svg += "<line x1=\"" + fixed2(px(-kViewHalf)) + "\" y1=\"" + fixed2(py(0.0)) + "\" x2=\"" + fixed2(px(kViewHalf)) +
         "\" y2=\"" + fixed2(py(0.0)) + "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + fixed2(px(0.0)) + "\" y1=\"" + fixed2(py(-kViewHalf)) + "\" x2=\"" + fixed2(px(0.0)) +
         "\" y2=\"" + fixed2(py(kViewHalf)) + "\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
  if (region != nullptr) append_region_outline(svg, *region);

  // Deduplicate on a centi-pixel grid; overlapping markers add nothing.
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(cloud.points.size());
  for (const auto& z : cloud.points) {
    if (z.is_infinite()) continue;
    const double x = px(std::clamp(z.re(), -kViewHalf, kViewHalf));
    const double y = py(std::clamp(z.im(), -kViewHalf, kViewHalf));
    const auto xi = static_cast<std::uint64_t>(std::llround(x * 100.0));
    const auto yi = static_cast<std::uint64_t>(std::llround(y * 100.0));
    if (!seen.insert((xi << 32) | yi).second) continue;
    svg += "<circle cx=\"" + fixed2(x) + "\" cy=\"" + fixed2(y) + "\" r=\"2\" fill=\"#1a202c\"/>\n";
  }
  if (cloud.has_infinity)
    svg += "<text x=\"612\" y=\"26\" font-size=\"22\" fill=\"#1a202c\">&#8734;</text>\n";
  svg += "</svg>\n";
  return svg;
}

void write_cloud_svg(const std::string& path, const PairSrgCloud& cloud, const Region* region) {
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  file << cloud_to_svg(cloud, region);
  if (!file) fail(ErrorCode::io, "failed writing '" + path + "'");
}

}  // namespace srgpair
