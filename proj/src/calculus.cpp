#include "srgpair/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include "srgpair/resolve.hpp"

namespace srgpair {

namespace {

struct NamedPair {
  std::string name;
  OpPtr a;
  OpPtr b;
};

SampleOptions sampling(const CalculusOptions& options, int max_selections = 25) {
  SampleOptions s;
  s.n_inputs = options.n_inputs;
  s.seed = options.seed;
  s.max_selections = max_selections;
  return s;
}

RuleResult from_matched(std::string rule, std::string tag, const MatchedCompareReport& report) {
  RuleResult result;
  result.rule = std::move(rule);
  result.pair_tag = std::move(tag);
  result.pass = report.pass && report.compared > 0;
  result.deviation = report.max_deviation;
  result.compared = report.compared;
  if (!report.pass)
    result.detail = report.detail;
  else if (report.compared == 0)
    result.detail = "no combinations to compare";
  return result;
}

double min_finite_re(const PairSrgCloud& cloud) {
  double r = std::numeric_limits<double>::infinity();
  for (const ExtendedComplex& z : cloud.points)
    if (!z.is_infinite()) r = std::min(r, z.re());
  return r;
}

Mat mat1(double v) {
  Mat m(1, 1);
  m << v;
  return m;
}

OpPtr tilted_line_1d() {
  return translate_op(linear_op(mat1(1.7)), Vec::Constant(1, -0.3));
}

Mat plane_mix_2d() {
  Mat m(2, 2);
  m << 1.0, 0.5, -0.3, 0.8;
  return m;
}

Mat shear_3d() {
  Mat m(3, 3);
  m << 0.5, 2.0, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 2.0;
  return m;
}

OpPtr diode_lattice_3d() {
  DiodeLinearForm form;
  form.dim = 3;
  form.diode_inputs = {1};
  form.gain = Mat(3, 1);
  form.gain << 0.4, 1.0, -0.2;
  form.linear = Mat(3, 3);
  form.linear << 1.2, 0.1, 0.0, -0.2, 0.9, 0.3, 0.0, -0.1, 1.5;
  form.offset = Vec(3);
  form.offset << 0.1, -0.2, 0.05;
  return diode_linear_op(std::move(form), "diode_lattice_3d");
}

std::vector<Vec> spaced_inputs(std::vector<Vec> inputs, double gap) {
  std::vector<Vec> kept;
  kept.reserve(inputs.size());
  for (Vec& x : inputs) {
    bool isolated = true;
    for (const Vec& y : kept) {
      if ((x - y).norm() < gap) {
        isolated = false;
        break;
      }
    }
    if (isolated) kept.push_back(std::move(x));
  }
  return kept;
}

std::vector<Vec> mapped_inputs(const SetValuedOp& map, const std::vector<Vec>& inputs) {
  std::vector<Vec> out;
  out.reserve(inputs.size());
  for (const Vec& x : inputs) {
    auto image = map.eval(x);
    if (image.empty()) fail(ErrorCode::internal, "input left the domain while mapping a sample list");
    out.push_back(std::move(image.front()));
  }
  return out;
}

void check_scale(std::vector<RuleResult>& results, const CalculusOptions& options) {
  const std::vector<NamedPair> roster = {
      {"(ideal_diode, tilted_line)", ideal_diode(), tilted_line_1d()},
      {"(shockley, id)", shockley_diode(0.5, 0.5), identity_op(1)},
      {"(coupled_diodes, plane_mix)", npn_transistor(0.98, 0.5), linear_op(plane_mix_2d())},
      {"(quartic, id)", quartic_gradient(), identity_op(2)},
      {"(diode_lattice, shear)", diode_lattice_3d(), linear_op(shear_3d())},
  };
  const std::pair<double, double> factors[] = {{2.0, 1.0}, {0.7, -1.3}, {-2.0, 0.5}};
  const SampleOptions opts = sampling(options);
  for (const NamedPair& pair : roster) {
    auto inputs = draw_pair_inputs(*pair.a, *pair.b, opts.n_inputs, opts.seed);
    const PairSrgCloud base = sample_pair_srg_at(pair.a, pair.b, inputs, opts);
    for (const auto& [alpha, beta] : factors) {
      const PairSrgCloud scaled =
          sample_pair_srg_at(scale_op(alpha, pair.a), scale_op(beta, pair.b), inputs, opts);
      const PairSrgCloud expected = apply_scale(base, alpha / beta);
      auto report = matched_compare(scaled, expected, false, options.tol);
      results.push_back(from_matched("scale", pair.name + " x (" + format_double(alpha) + ", " +
                                                  format_double(beta) + ")",
                                     report));
    }
  }
}

void check_swap_inverse(std::vector<RuleResult>& results, const CalculusOptions& options) {
  const std::vector<NamedPair> roster = {
      {"(ideal_diode, tilted_line)", ideal_diode(), tilted_line_1d()},
      {"(shockley, id)", shockley_diode(0.5, 0.5), identity_op(1)},
      {"(coupled_diodes, plane_mix)", npn_transistor(0.98, 0.5), linear_op(plane_mix_2d())},
      {"(diode_lattice, shear)", diode_lattice_3d(), linear_op(shear_3d())},
  };
  const SampleOptions opts = sampling(options);
  for (const NamedPair& pair : roster) {
    auto inputs = draw_pair_inputs(*pair.a, *pair.b, opts.n_inputs, opts.seed);
    const PairSrgCloud forward = sample_pair_srg_at(pair.a, pair.b, inputs, opts);
    const PairSrgCloud swapped = sample_pair_srg_at(pair.b, pair.a, inputs, opts);
    auto report = matched_compare(swapped, apply_invert(forward), true, options.tol);
    results.push_back(from_matched("swap_inverse", pair.name, report));
  }
}

void check_identity_inverse(std::vector<RuleResult>& results, const CalculusOptions& options) {
  struct Entry {
    std::string name;
    OpPtr op;
  };
  const std::vector<Entry> roster = {
      {"tilted_line", tilted_line_1d()},
      {"plane_mix", linear_op(plane_mix_2d())},
      {"shear", linear_op(shear_3d())},
  };
  const SampleOptions opts = sampling(options);
  for (const Entry& entry : roster) {
    const OpPtr id = identity_op(entry.op->dim());
    auto inputs = draw_pair_inputs(*id, *entry.op, opts.n_inputs, opts.seed);
    const PairSrgCloud lhs = sample_pair_srg_at(id, entry.op, inputs, opts);
    const PairSrgCloud other = sample_pair_srg_at(entry.op, id, inputs, opts);
    auto swap_report = matched_compare(lhs, apply_invert(other), true, options.tol);
    results.push_back(from_matched("identity_inverse", entry.name + " vs swapped pair", swap_report));

    const PairSrgCloud through_inverse =
        sample_pair_srg_at(inverse_op(entry.op), id, mapped_inputs(*entry.op, inputs), opts);
    auto inv_report = matched_compare(through_inverse, lhs, false, options.tol);
    results.push_back(from_matched("identity_inverse", entry.name + " vs inverse operator", inv_report));
  }
}

void check_self_pair(std::vector<RuleResult>& results, const CalculusOptions& options) {
  struct Entry {
    std::string name;
    OpPtr op;
  };
  const std::vector<Entry> roster = {
      {"shockley", shockley_diode(0.5, 0.5)},
      {"tilted_line", tilted_line_1d()},
      {"quartic", quartic_gradient()},
      {"clip", preconditioner(PreconditionerKind::clip)},
      {"arcsinh", preconditioner(PreconditionerKind::arcsinh)},
      {"plane_mix", linear_op(plane_mix_2d())},
  };
  const SampleOptions opts = sampling(options);
  for (const Entry& entry : roster) {
    const PairSrgCloud cloud = sample_pair_srg(entry.op, entry.op, opts);
    RuleResult result;
    result.rule = "self_pair";
    result.pair_tag = entry.name;
    result.compared = cloud.counts.finite;
    double worst = 0.0;
    for (const ExtendedComplex& z : cloud.points)
      if (!z.is_infinite()) worst = std::max(worst, std::abs(std::complex<double>(z.re() - 1.0, z.im())));
    result.deviation = worst;
    result.pass = !cloud.has_infinity && cloud.counts.finite > 0 && worst <= options.tol;
    if (cloud.has_infinity)
      result.detail = "unexpected infinity event";
    else if (cloud.counts.finite == 0)
      result.detail = "no finite points";
    else if (!result.pass)
      result.detail = "points stray from 1";
    results.push_back(std::move(result));
  }
}

void check_affine_shift(std::vector<RuleResult>& results, const CalculusOptions& options) {
  const std::vector<NamedPair> roster = {
      {"(ideal_diode, tilted_line)", ideal_diode(), tilted_line_1d()},
      {"(shockley, tilted_line)", shockley_diode(0.5, 0.5), tilted_line_1d()},
      {"(coupled_diodes, plane_mix)", npn_transistor(0.98, 0.5), linear_op(plane_mix_2d())},
      {"(quartic, plane_mix)", quartic_gradient(), linear_op(plane_mix_2d())},
      {"(diode_lattice, shear)", diode_lattice_3d(), linear_op(shear_3d())},
  };
  const SampleOptions opts = sampling(options);
  for (const NamedPair& pair : roster) {
    auto inputs = draw_pair_inputs(*pair.a, *pair.b, opts.n_inputs, opts.seed);
    const PairSrgCloud base = sample_pair_srg_at(pair.a, pair.b, inputs, opts);
    const PairSrgCloud summed = sample_pair_srg_at(add_op(pair.a, pair.b), pair.b, inputs, opts);
    auto report = matched_compare(summed, apply_shift(base, 1.0), false, options.tol);
    results.push_back(from_matched("affine_shift", pair.name, report));
  }
}

void check_inverse_compose(std::vector<RuleResult>& results, const CalculusOptions& options) {
  const std::vector<NamedPair> roster = {
      {"(ideal_diode, tilted_line)", ideal_diode(), tilted_line_1d()},
      {"(shockley, tilted_line)", shockley_diode(0.5, 0.5), tilted_line_1d()},
      {"(quartic, plane_mix)", quartic_gradient(), linear_op(plane_mix_2d())},
  };
  // Single representative per evaluation keeps the injected input list and
  // the right-hand selections aligned one to one.
  const SampleOptions opts = sampling(options, 1);
  InclusionOptions inclusion;
  inclusion.newton_tol = 1e-13;
  for (const NamedPair& pair : roster) {
    const OpPtr sum = add_op(pair.a, pair.b);
    auto seeds = draw_pair_inputs(*pair.a, *pair.b, opts.n_inputs, opts.seed);
    std::vector<Vec> images;
    images.reserve(seeds.size());
    for (const Vec& y : seeds) images.push_back(representative_outputs(*sum, y, 1).front());

    const PairSrgCloud rhs = sample_pair_srg_at(pair.b, sum, seeds, opts);
    const OpPtr resolvent = transformed_resolvent(pair.a, pair.b, 1.0, inclusion);
    const PairSrgCloud lhs =
        sample_pair_srg_at(resolvent, identity_op(pair.a->dim()), std::move(images), opts);
    auto report = matched_compare(lhs, rhs, false, options.tol);
    results.push_back(from_matched("inverse_compose", pair.name, report));
  }
}

void check_pre_compose(std::vector<RuleResult>& results, const CalculusOptions& options) {
  struct Entry {
    std::string name;
    OpPtr a;
    OpPtr b;
    OpPtr inner;
  };
  const std::vector<Entry> roster = {
      {"(coupled_diodes, id) after plane_mix", npn_transistor(0.98, 0.5), identity_op(2),
       linear_op(plane_mix_2d())},
      {"(quartic, plane_mix) after arcsinh", quartic_gradient(), linear_op(plane_mix_2d()),
       preconditioner(PreconditionerKind::arcsinh)},
      {"(ideal_diode, shockley) after tilted_line", ideal_diode(), shockley_diode(0.5, 0.5),
       tilted_line_1d()},
  };
  const SampleOptions opts = sampling(options);
  for (const Entry& entry : roster) {
    const OpPtr lhs_a = compose_op(entry.a, entry.inner);
    const OpPtr lhs_b = compose_op(entry.b, entry.inner);
    auto pre_inputs = draw_pair_inputs(*lhs_a, *lhs_b, opts.n_inputs, opts.seed);
    const PairSrgCloud lhs = sample_pair_srg_at(lhs_a, lhs_b, pre_inputs, opts);
    const PairSrgCloud rhs =
        sample_pair_srg_at(entry.a, entry.b, mapped_inputs(*entry.inner, pre_inputs), opts);
    auto report = matched_compare(lhs, rhs, false, options.tol);
    results.push_back(from_matched("pre_compose", entry.name, report));
  }
}

void check_congruence(std::vector<RuleResult>& results, const CalculusOptions& options) {
  const std::vector<NamedPair> roster = {
      {"(ideal_diode, tilted_line)", ideal_diode(), tilted_line_1d()},
      {"(coupled_diodes, partner)", npn_transistor(0.98, 0.5), linear_op(npn_partner_matrix(0.98, 0.5))},
      {"(quartic, id)", quartic_gradient(), identity_op(2)},
  };
  const SampleOptions opts = sampling(options);
  for (const NamedPair& pair : roster) {
    const Index n = pair.a->dim();
    // The transformed pair chains three maps, so output differences for
    // inputs closer than this gap sink to rounding scale and the sign of
    // the real part becomes unreadable there.
    auto inputs = spaced_inputs(draw_pair_inputs(*pair.a, *pair.b, opts.n_inputs, opts.seed), 0.25);
    const PairSrgCloud base = sample_pair_srg_at(pair.a, pair.b, inputs, opts);

    SampleStream stream(mix_seed(options.seed, 0x636f6e67));
    for (int trial = 0; trial < 5; ++trial) {
      Mat m = Mat::Zero(n, n);
      for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c) m(r, c) = stream.uniform(-1.0, 1.0) + (r == c ? 2.0 : 0.0);
      const CongruentPair moved = congruence_transform(pair.a, pair.b, m);
      std::vector<Vec> mapped;
      mapped.reserve(inputs.size());
      for (const Vec& x : inputs) mapped.push_back(m * x);
      const PairSrgCloud image = sample_pair_srg_at(moved.a, moved.f, std::move(mapped), opts);

      RuleResult result;
      result.rule = "congruence";
      result.pair_tag = pair.name + " trial " + std::to_string(trial);
      result.compared = base.counts.finite + image.counts.finite;
      const double base_re = min_finite_re(base);
      const double image_re = min_finite_re(image);
      result.deviation = -std::min(base_re, image_re);
      result.pass = base.counts.finite > 0 && image.counts.finite > 0 && base_re >= -options.tol &&
                    image_re >= -options.tol;
      if (!result.pass) result.detail = "a nonnegative real part was not preserved";
      results.push_back(std::move(result));
    }
  }
}

}  // namespace

std::vector<RuleResult> run_calculus_suite(const CalculusOptions& options) {
  if (options.n_inputs < 2) fail(ErrorCode::invalid_argument, "calculus suite needs at least two inputs");
  std::vector<RuleResult> results;
  check_scale(results, options);
  check_swap_inverse(results, options);
  check_identity_inverse(results, options);
  check_self_pair(results, options);
  check_affine_shift(results, options);
  check_inverse_compose(results, options);
  check_pre_compose(results, options);
  check_congruence(results, options);
  return results;
}

bool all_passed(const std::vector<RuleResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const RuleResult& r) { return r.pass; });
}

}  // namespace srgpair
