#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "srgpair/srg.hpp"

using namespace srgpair;

namespace {

Mat rotation(double angle) {
  Mat m(2, 2);
  m << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return m;
}

}  // namespace

TEST_CASE("combo keys round trip and swap roles") {
  ComboKeyParts parts;
  parts.i = 123;
  parts.j = 45678;
  parts.sel_a = 3;
  parts.sel_a_bar = 17;
  parts.sel_b = 62;
  parts.sel_b_bar = 1;
  const std::uint64_t key = pack_combo(parts);
  const ComboKeyParts back = unpack_combo(key);
  CHECK(back.i == parts.i);
  CHECK(back.j == parts.j);
  CHECK(back.sel_a == parts.sel_a);
  CHECK(back.sel_a_bar == parts.sel_a_bar);
  CHECK(back.sel_b == parts.sel_b);
  CHECK(back.sel_b_bar == parts.sel_b_bar);

  const ComboKeyParts swapped = unpack_combo(swap_combo_roles(key));
  CHECK(swapped.i == parts.i);
  CHECK(swapped.j == parts.j);
  CHECK(swapped.sel_a == parts.sel_b);
  CHECK(swapped.sel_a_bar == parts.sel_b_bar);
  CHECK(swapped.sel_b == parts.sel_a);
  CHECK(swapped.sel_b_bar == parts.sel_a_bar);
}

TEST_CASE("pair inputs are deterministic, sorted, and inside both domains") {
  const OpPtr a = shockley_diode(0.5, 0.5);
  const OpPtr b = identity_op(1);
  const auto first = draw_pair_inputs(*a, *b, 50, 5);
  const auto second = draw_pair_inputs(*a, *b, 50, 5);
  REQUIRE(first.size() == second.size());
  CHECK(first.size() >= 40);
  for (std::size_t k = 0; k < first.size(); ++k) {
    CHECK((first[k] - second[k]).norm() == 0.0);
    if (k > 0) CHECK(lex_less(first[k - 1], first[k]));
  }
  const auto other = draw_pair_inputs(*a, *b, 50, 6);
  CHECK((other.empty() || other[0] != first[0]));
}

TEST_CASE("scaled linear pair lands on a single real point") {
  const OpPtr a = linear_op(2.0 * Mat::Identity(2, 2));
  const OpPtr b = identity_op(2);
  SampleOptions options;
  options.n_inputs = 30;
  const PairSrgCloud cloud = sample_pair_srg(a, b, options);
  CHECK_FALSE(cloud.has_infinity);
  CHECK(cloud.counts.finite > 0);
  CHECK(cloud.counts.degenerate == cloud.inputs.size());
  for (const ExtendedComplex& z : cloud.points) {
    CHECK(z.re() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(z.im()) < 1e-12);
  }
}

TEST_CASE("rotation against the identity produces the rotation angle") {
  const double angle = 0.7;
  const OpPtr a = linear_op(rotation(angle));
  const OpPtr b = identity_op(2);
  SampleOptions options;
  options.n_inputs = 25;
  const PairSrgCloud cloud = sample_pair_srg(a, b, options);
  CHECK(cloud.counts.finite > 0);
  for (const ExtendedComplex& z : cloud.points) {
    CHECK(std::hypot(z.re() - std::cos(angle), std::abs(z.im()) - std::sin(angle)) < 1e-12);
  }
}

TEST_CASE("constant second operator yields only infinity events") {
  const OpPtr a = identity_op(2);
  const OpPtr b = linear_op(Mat::Zero(2, 2));
  SampleOptions options;
  options.n_inputs = 10;
  const PairSrgCloud cloud = sample_pair_srg(a, b, options);
  CHECK(cloud.has_infinity);
  CHECK(cloud.counts.finite == 0);
  CHECK(cloud.counts.infinite > 0);
}

TEST_CASE("thread count changes nothing observable") {
  const OpPtr a = npn_transistor(0.98, 0.5);
  const OpPtr b = linear_op(npn_partner_matrix(0.98, 0.5));
  SampleOptions one;
  one.n_inputs = 40;
  one.threads = 1;
  SampleOptions many = one;
  many.threads = 4;
  const PairSrgCloud lhs = sample_pair_srg(a, b, one);
  const PairSrgCloud rhs = sample_pair_srg(a, b, many);
  REQUIRE(lhs.points.size() == rhs.points.size());
  REQUIRE(lhs.finite_keys.size() == rhs.finite_keys.size());
  for (std::size_t k = 0; k < lhs.points.size(); ++k) CHECK(lhs.points[k] == rhs.points[k]);
  for (std::size_t k = 0; k < lhs.finite_keys.size(); ++k) CHECK(lhs.finite_keys[k] == rhs.finite_keys[k]);
  CHECK(cloud_to_csv(lhs) == cloud_to_csv(rhs));
}

TEST_CASE("caller provided inputs are used verbatim") {
  const OpPtr a = linear_op(3.0 * Mat::Identity(1, 1));
  const OpPtr b = identity_op(1);
  std::vector<Vec> inputs;
  for (double v : {0.5, -1.0, 2.0}) {
    Vec x(1);
    x << v;
    inputs.push_back(x);
  }
  const PairSrgCloud cloud = sample_pair_srg_at(a, b, inputs, {});
  REQUIRE(cloud.inputs.size() == 3);
  CHECK(cloud.inputs[1][0] == -1.0);
  CHECK(cloud.counts.input_pairs == 6);
  for (const ExtendedComplex& z : cloud.points) CHECK(z.re() == doctest::Approx(3.0).epsilon(1e-12));

  for (std::uint64_t key : cloud.finite_keys) {
    const SrgSample s = provenance_sample(*a, *b, cloud, key);
    CHECK((s.u_a - 3.0 * s.x).norm() < 1e-14);
    CHECK((s.u_b - s.x).norm() == 0.0);
  }
}

TEST_CASE("representative outputs are capped with endpoints kept") {
  const OpPtr diode = ideal_diode(RaySpec{2.0, 9});
  Vec kink(1);
  kink << 0.0;
  const auto all = representative_outputs(*diode, kink, 25);
  CHECK(all.size() == 9);
  const auto capped = representative_outputs(*diode, kink, 3);
  REQUIRE(capped.size() == 3);
  CHECK(capped.front()[0] == doctest::Approx(0.0));
  CHECK(capped.back()[0] == doctest::Approx(2.0));
}

TEST_CASE("cloud csv format") {
  const OpPtr a = linear_op(2.0 * Mat::Identity(1, 1));
  const OpPtr b = identity_op(1);
  SampleOptions options;
  options.n_inputs = 6;
  PairSrgCloud cloud = sample_pair_srg(a, b, options);
  const std::string csv = cloud_to_csv(cloud);

  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "re,im,is_infinity");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.size() > 2);
    CHECK(line.substr(line.size() - 2) == ",0");
  }
  CHECK(rows == static_cast<int>(cloud.points.size()));

  // The infinity marker row goes last.
  const OpPtr zero = linear_op(Mat::Zero(1, 1));
  const PairSrgCloud with_inf = sample_pair_srg(a, zero, options);
  const std::string inf_csv = cloud_to_csv(with_inf);
  CHECK(inf_csv.size() > 4);
  CHECK(inf_csv.substr(inf_csv.size() - 4) == ",,1\n");
}

TEST_CASE("doubles round trip through their formatted form") {
  for (double v : {0.0, 1.0, -2.5, 1e-17, 3.141592653589793, -1.0 / 3.0, 123456.789}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
    CHECK(s.find_first_of(".e") != std::string::npos);
  }
}

TEST_CASE("svg export is deterministic and well formed") {
  const OpPtr a = npn_transistor(0.98, 0.5);
  const OpPtr b = linear_op(npn_partner_matrix(0.98, 0.5));
  SampleOptions options;
  options.n_inputs = 15;
  const PairSrgCloud cloud = sample_pair_srg(a, b, options);
  const Region region = Region::half_plane(0.0);
  const std::string svg = cloud_to_svg(cloud, &region);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg == cloud_to_svg(cloud, &region));
  CHECK(svg != cloud_to_svg(cloud, nullptr));
}

TEST_CASE("pointwise cloud transforms") {
  const OpPtr a = linear_op(2.0 * Mat::Identity(1, 1));
  const OpPtr b = identity_op(1);
  SampleOptions options;
  options.n_inputs = 8;
  const PairSrgCloud base = sample_pair_srg(a, b, options);
  REQUIRE(base.counts.finite > 0);

  const PairSrgCloud scaled = apply_scale(base, -1.5);
  for (const ExtendedComplex& z : scaled.points) CHECK(z.re() == doctest::Approx(-3.0).epsilon(1e-12));

  const PairSrgCloud shifted = apply_shift(base, 1.0);
  for (const ExtendedComplex& z : shifted.points) CHECK(z.re() == doctest::Approx(3.0).epsilon(1e-12));

  const PairSrgCloud inverted = apply_invert(base);
  for (const ExtendedComplex& z : inverted.points) CHECK(z.re() == doctest::Approx(0.5).epsilon(1e-12));

  // Inversion exchanges infinity events and zeros.
  const PairSrgCloud inf_cloud = sample_pair_srg(a, linear_op(Mat::Zero(1, 1)), options);
  const PairSrgCloud from_inf = apply_invert(inf_cloud);
  CHECK_FALSE(from_inf.has_infinity);
  CHECK(from_inf.counts.finite == inf_cloud.counts.infinite);
  for (const ExtendedComplex& z : from_inf.points) {
    CHECK(z.re() == 0.0);
    CHECK(z.im() == 0.0);
  }
}

TEST_CASE("chordal distance pinned values") {
  const ExtendedComplex a = ExtendedComplex::finite(1.0, 2.0);
  const ExtendedComplex b = ExtendedComplex::finite(-0.5, 0.25);
  CHECK(chordal_distance(a, b) == doctest::Approx(0.8213423005076352).epsilon(1e-13));
  CHECK(chordal_distance(ExtendedComplex::finite(3.0, 4.0), ExtendedComplex::infinity()) ==
        doctest::Approx(0.19611613513818404).epsilon(1e-13));
  CHECK(chordal_distance(ExtendedComplex::infinity(), ExtendedComplex::infinity()) == 0.0);
  CHECK(chordal_distance(a, a) == 0.0);
}

TEST_CASE("matched comparison accepts equal clouds and flags perturbations") {
  const OpPtr a = npn_transistor(0.98, 0.5);
  const OpPtr b = identity_op(2);
  SampleOptions options;
  options.n_inputs = 20;
  const PairSrgCloud cloud = sample_pair_srg(a, b, options);
  REQUIRE(cloud.counts.finite > 0);

  const MatchedCompareReport same = matched_compare(cloud, cloud, false, 1e-12);
  CHECK(same.pass);
  CHECK(same.compared > 0);
  CHECK(same.max_deviation == 0.0);

  const MatchedCompareReport off = matched_compare(cloud, apply_shift(cloud, 1e-6), false, 1e-9);
  CHECK_FALSE(off.pass);
  CHECK(off.max_deviation > 1e-8);

  const MatchedCompareReport loose = matched_compare(cloud, apply_shift(cloud, 1e-12), false, 1e-9);
  CHECK(loose.pass);
}

TEST_CASE("subset check separates containment from mismatch") {
  const OpPtr a = linear_op(2.0 * Mat::Identity(1, 1));
  const OpPtr b = identity_op(1);
  SampleOptions options;
  options.n_inputs = 10;
  const PairSrgCloud cloud = sample_pair_srg(a, b, options);

  const SubsetReport inside = cloud_subset_check(cloud, cloud, 1e-12);
  CHECK(inside.pass);
  const SubsetReport outside = cloud_subset_check(apply_shift(cloud, 0.5), cloud, 1e-3);
  CHECK_FALSE(outside.pass);
  CHECK(outside.worst_distance == doctest::Approx(0.5).epsilon(1e-9));

  const PairSrgCloud inf_cloud = sample_pair_srg(a, linear_op(Mat::Zero(1, 1)), options);
  const SubsetReport inf_missing = cloud_subset_check(inf_cloud, cloud, 1e-6);
  CHECK_FALSE(inf_missing.pass);
  CHECK_FALSE(inf_missing.infinity_ok);
}

TEST_CASE("combination budget truncates deterministically") {
  const OpPtr a = identity_op(1);
  const OpPtr b = identity_op(1);
  SampleOptions options;
  options.n_inputs = 12;
  options.max_combos = 10;
  const PairSrgCloud capped = sample_pair_srg(a, b, options);
  CHECK(capped.truncated);
  CHECK(capped.counts.combos <= 10);

  options.max_combos = 5'000'000;
  const PairSrgCloud full = sample_pair_srg(a, b, options);
  CHECK_FALSE(full.truncated);
  CHECK(full.counts.combos > capped.counts.combos);
}
