#pragma once

#include <string>
#include <vector>

#include "srgpair/extc.hpp"
#include "srgpair/ops.hpp"
#include "srgpair/regions.hpp"

namespace srgpair {

/// Sampling controls shared by the cloud sampler and the pair checks.
struct SampleOptions {
  int n_inputs = 200;
  std::uint64_t seed = 0;
  /// A denominator difference below eps_den * max(1, |numerator difference|)
  /// counts as zero: the combination is an infinity event when the numerator
  /// survives, degenerate otherwise.
  double eps_den = 1e-9;
  std::uint64_t max_combos = 5'000'000;
  /// Cap on representative outputs kept per evaluation point.
  int max_selections = 25;
  /// 0 reads SRG_THREADS, falling back to the hardware count (capped at 8).
  int threads = 0;
};

struct CloudCounts {
  std::uint64_t input_pairs = 0;
  std::uint64_t combos = 0;
  std::uint64_t finite = 0;
  std::uint64_t infinite = 0;
  std::uint64_t degenerate = 0;
};

/// Sampled scaled relative graph of an operator pair. Finite points are
/// stored as conjugate pairs (plus branch first); every selection combination
/// keeps a packed provenance key so matched-seed runs can be compared
/// combination by combination.
struct PairSrgCloud {
  std::vector<ExtendedComplex> points;
  std::vector<std::uint64_t> finite_keys;
  std::vector<std::uint64_t> infinity_keys;
  std::vector<std::uint64_t> degenerate_keys;
  bool has_infinity = false;
  bool truncated = false;
  std::uint64_t seed = 0;
  double eps_den = 1e-9;
  int max_selections = 25;
  std::vector<Vec> inputs;
  CloudCounts counts;
};

/// Unpacked provenance key: input indices and selection indices on both
/// operator sides.
struct ComboKeyParts {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  int sel_a = 0;
  int sel_a_bar = 0;
  int sel_b = 0;
  int sel_b_bar = 0;
};

[[nodiscard]] std::uint64_t pack_combo(const ComboKeyParts& parts);
[[nodiscard]] ComboKeyParts unpack_combo(std::uint64_t key);
/// Exchanges the two operator roles inside a key.
[[nodiscard]] std::uint64_t swap_combo_roles(std::uint64_t key);

/// Evaluation tuple behind one cloud combination.
struct SrgSample {
  Vec x, x_bar, u_a, u_a_bar, u_b, u_b_bar;
};

/// Canonical input list for a pair: three interleaved candidate streams
/// (plain box, A's sampler, B's sampler) filtered to the common domain, then
/// sorted and deduplicated. Deterministic for a fixed seed.
[[nodiscard]] std::vector<Vec> draw_pair_inputs(const SetValuedOp& a, const SetValuedOp& b, int count,
                                                std::uint64_t seed);

/// Outputs kept at one evaluation point: the full list when it fits the cap,
/// otherwise an evenly strided subset keeping both endpoints.
[[nodiscard]] std::vector<Vec> representative_outputs(const SetValuedOp& op, const Vec& x, int cap);

[[nodiscard]] PairSrgCloud sample_pair_srg(const OpPtr& a, const OpPtr& b, const SampleOptions& options = {});

/// Samples at caller-provided inputs (kept in the given order). Inputs outside
/// either domain contribute no combinations but keep their index.
[[nodiscard]] PairSrgCloud sample_pair_srg_at(const OpPtr& a, const OpPtr& b, std::vector<Vec> inputs,
                                              const SampleOptions& options = {});

/// Reconstructs the evaluation tuple for a provenance key by re-evaluating
/// the pair at the cloud's stored inputs.
[[nodiscard]] SrgSample provenance_sample(const SetValuedOp& a, const SetValuedOp& b, const PairSrgCloud& cloud,
                                          std::uint64_t key);

// ===========================================================================
// Calculus images of clouds
// ===========================================================================

/// Multiplies every finite point by a nonzero real factor.
[[nodiscard]] PairSrgCloud apply_scale(const PairSrgCloud& cloud, double factor);
/// Adds a real offset to every finite point.
[[nodiscard]] PairSrgCloud apply_shift(const PairSrgCloud& cloud, double offset);
/// Pointwise z -> conj(1/z); exchanges zeros and infinity events.
[[nodiscard]] PairSrgCloud apply_invert(const PairSrgCloud& cloud);

/// Metric on the extended plane: |a - b| / sqrt((1+|a|^2)(1+|b|^2)), with the
/// point at infinity handled by its limit. Agrees with the absolute distance
/// for moderate values and stays meaningful near infinity.
[[nodiscard]] double chordal_distance(const ExtendedComplex& a, const ExtendedComplex& b);

struct MatchedCompareReport {
  bool pass = false;
  double max_deviation = 0.0;
  std::uint64_t compared = 0;
  std::uint64_t category_mismatches = 0;
  std::string detail;
};

/// Compares two clouds combination by combination through their provenance
/// keys (chordal metric). With swap_roles, right-hand keys are read with the
/// operator roles exchanged.
[[nodiscard]] MatchedCompareReport matched_compare(const PairSrgCloud& lhs, const PairSrgCloud& rhs,
                                                   bool swap_roles, double tol);

struct SubsetReport {
  bool pass = false;
  double worst_distance = 0.0;
  std::uint64_t offenders = 0;
  bool infinity_ok = true;
};

/// Every finite point of `inner` must lie within tol (Euclidean) of some
/// finite point of `outer`; an infinity event in `inner` requires one in
/// `outer`.
[[nodiscard]] SubsetReport cloud_subset_check(const PairSrgCloud& inner, const PairSrgCloud& outer, double tol);

// ===========================================================================
// Exports
// ===========================================================================

/// CSV with columns re,im,is_infinity; the infinity row, when present, is
/// written last as ",,1". Byte-deterministic.
[[nodiscard]] std::string cloud_to_csv(const PairSrgCloud& cloud);
void write_cloud_csv(const std::string& path, const PairSrgCloud& cloud);

/// Scatter plot on the fixed viewport [-3.5, 3.5]^2 with an optional region
/// outline and an infinity glyph in the margin. Byte-deterministic.
[[nodiscard]] std::string cloud_to_svg(const PairSrgCloud& cloud, const Region* region = nullptr);
void write_cloud_svg(const std::string& path, const PairSrgCloud& cloud, const Region* region = nullptr);

/// Shortest round-trip decimal form that always carries a decimal point or
/// exponent marker.
[[nodiscard]] std::string format_double(double value);

}  // namespace srgpair
