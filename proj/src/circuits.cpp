#include "srgpair/circuits.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "srgpair/srg.hpp"

namespace srgpair {

namespace {

OpPtr transistor_op(const TransistorParams& params) {
  OpPtr diode;
  if (params.diode == DiodeKind::shockley)
    diode = shockley_diode(params.shockley_i_s, params.shockley_v_t);
  return npn_transistor(params.alpha_f, params.alpha_r, diode);
}

void validate_transistor(const TransistorParams& params) {
  if (!(params.alpha_f >= 0.0) || params.alpha_f >= 1.0 || !(params.alpha_r >= 0.0) || params.alpha_r >= 1.0)
    fail(ErrorCode::invalid_argument, "transistor gains must lie in [0, 1)");
}

double complementarity(const Vec& v, const Vec& u) {
  double res = 0.0;
  for (Index j = 0; j < v.size(); ++j) res = std::max(res, std::abs(std::min(-v[j], u[j])));
  return res;
}

void append_row(std::string& out, double t, const CircuitSample& sample) {
  out += format_double(t);
  out += ',';
  out += format_double(sample.v[0]);
  out += ',';
  out += format_double(sample.v[1]);
  out += ',';
  out += format_double(sample.i[0]);
  out += ',';
  out += format_double(sample.i[1]);
  out += ',';
  out += std::to_string(sample.iterations);
  out += ',';
  out += format_double(sample.residual);
  out += '\n';
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  file << text;
  if (!file) fail(ErrorCode::io, "failed writing '" + path + "'");
}

}  // namespace

LeakyTransistorResult solve_leaky_transistor(const LeakyTransistorProblem& problem) {
  if (!(problem.r > 0.0)) fail(ErrorCode::invalid_argument, "leakage resistance must be positive");
  if (!(problem.gamma > 0.0)) fail(ErrorCode::invalid_argument, "step size must be positive");
  if (!(problem.tol > 0.0)) fail(ErrorCode::invalid_argument, "residual tolerance must be positive");
  validate_transistor(problem.transistor);

  const Mat gain = npn_gain(problem.transistor.alpha_f, problem.transistor.alpha_r);
  const Mat partner = npn_partner_matrix(problem.transistor.alpha_f, problem.transistor.alpha_r);
  const Mat gain_inv = gain.inverse();
  const Mat partner_inv = partner.inverse();
  const bool ideal = problem.transistor.diode == DiodeKind::ideal;

  const OpPtr leaky = sum_with_linear(transistor_op(problem.transistor), Mat::Identity(2, 2) / problem.r);
  const InclusionSolver solver(leaky, linear_op(partner), problem.gamma);

  // Scale factors turning the raw residual into a bound on the distance to
  // the exact sample solution. The pair monotonicity of (gain o diode,
  // partner) gives <e, partner dv> >= (sym_min / r) ||dv||^2 for any equation
  // residual e measured at points on the diode graph; the min-form
  // complementarity value moves an ideal-diode iterate onto the graph at a
  // cost of sqrt(2) * (||gain|| + 1/r) in equation residual.
  const double gain_norm = Eigen::JacobiSVD<Mat>(gain).singularValues()(0);
  const double partner_norm = Eigen::JacobiSVD<Mat>(partner).singularValues()(0);
  const double sym_min =
      Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (partner + partner.transpose())).eigenvalues()(0);
  const double distance_gain = problem.r * partner_norm / sym_min;
  const double ideal_scale = std::sqrt(2.0) * (1.0 + distance_gain * (gain_norm + 1.0 / problem.r));
  const double smooth_scale = distance_gain;

  LeakyTransistorResult result;
  result.samples.reserve(problem.i_src.size());
  result.traces.reserve(problem.i_src.size());

  Vec w = Vec::Zero(2);
  for (std::size_t s = 0; s < problem.i_src.size(); ++s) {
    const Vec& source = problem.i_src[s];
    if (source.size() != 2)
      fail(ErrorCode::dimension_mismatch, "source sample " + std::to_string(s) + " is not a 2-vector");

    const Vec shifted = problem.gamma * source;
    IterationOptions options;
    options.tol = problem.tol;
    options.max_iterations = problem.max_iterations;
    options.trace = problem.trace;
    options.residual_override = [&](const Vec& point) -> double {
      const Vec v = partner_inv * point;
      if (ideal) return ideal_scale * complementarity(v, gain_inv * (source - v / problem.r));
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& out : leaky->eval(v)) best = std::min(best, (out - source).norm());
      return smooth_scale * best;
    };

    IterationTrace trace =
        km_iterate([&](const Vec& point) -> Vec { return partner * solver.solve(point + shifted, point); },
                   w, options);
    if (trace.status != IterationStatus::converged)
      fail(ErrorCode::solver_failure, "leaky transistor sample " + std::to_string(s) +
                                          (trace.status == IterationStatus::diverged ? " diverged"
                                                                                     : " did not converge"));
    w = trace.last;
    CircuitSample sample;
    sample.v = partner_inv * w;
    sample.u = gain_inv * (source - sample.v / problem.r);
    sample.i = source;
    sample.iterations = trace.iterations_used;
    sample.residual = trace.final_residual;
    result.samples.push_back(std::move(sample));
    result.traces.push_back(std::move(trace));
  }
  return result;
}

Vec leaky_transistor_oracle(const LeakyTransistorProblem& problem, const Vec& source) {
  if (!(problem.r > 0.0)) fail(ErrorCode::invalid_argument, "leakage resistance must be positive");
  validate_transistor(problem.transistor);
  if (source.size() != 2) fail(ErrorCode::dimension_mismatch, "source must be a 2-vector");
  const OpPtr leaky = sum_with_linear(transistor_op(problem.transistor), Mat::Identity(2, 2) / problem.r);
  const InclusionSolver direct(leaky, linear_op(Mat::Zero(2, 2)), 1.0);
  return direct.solve(source, Vec::Zero(2));
}

PrimalDualProblem amplifier_saddle_problem(const AmplifierProblem& problem, double v_in) {
  if (!(problem.r_e > 0.0) || !(problem.r_c > 0.0))
    fail(ErrorCode::invalid_argument, "amplifier resistances must be positive");
  validate_transistor(problem.transistor);
  PrimalDualProblem pd;
  pd.a = Mat::Zero(2, 2);
  pd.a(0, 0) = problem.r_c;
  pd.a(1, 1) = problem.r_e;
  pd.b = transistor_op(problem.transistor);
  pd.r = npn_gain(problem.transistor.alpha_f, problem.transistor.alpha_r);
  pd.gamma = problem.gamma;
  pd.tau = problem.tau;
  pd.s_v = Vec(2);
  pd.s_v << problem.v_plus - v_in, -v_in;
  pd.s_i = Vec::Zero(2);
  return pd;
}

AmplifierResult solve_amplifier(const AmplifierProblem& problem) {
  if (!(problem.tol > 0.0)) fail(ErrorCode::invalid_argument, "residual tolerance must be positive");
  PrimalDualProblem pd = amplifier_saddle_problem(problem, 0.0);

  AmplifierResult result;
  result.preconditions = check_primal_dual_preconditions(pd);
  if (!result.preconditions.step_ok)
    fail(ErrorCode::invalid_argument,
         "precondition violated: gamma*tau*|gain|^2 = " + format_double(result.preconditions.step_product) +
             " must stay below 1");
  if (!result.preconditions.monotonicity_ok)
    fail(ErrorCode::invalid_argument,
         "precondition violated: smallest eigenvalue of A^T R^-1 + R^-T A is " +
             format_double(result.preconditions.sym_min_eigenvalue) + ", must be nonnegative");

  const Mat gain_inv = pd.r.inverse();
  result.samples.reserve(problem.v_in.size());
  result.traces.reserve(problem.v_in.size());

  IterationOptions options;
  options.tol = problem.tol;
  options.max_iterations = problem.max_iterations;
  options.trace = problem.trace;

  Vec i = Vec::Zero(2);
  Vec v = Vec::Zero(2);
  for (std::size_t s = 0; s < problem.v_in.size(); ++s) {
    pd.s_v << problem.v_plus - problem.v_in[s], -problem.v_in[s];
    PrimalDualResult step = primal_dual_iterate(pd, i, v, options);
    if (step.trace.status != IterationStatus::converged)
      fail(ErrorCode::solver_failure, "amplifier sample " + std::to_string(s) +
                                          (step.trace.status == IterationStatus::diverged
                                               ? " diverged"
                                               : " did not converge"));
    i = step.i;
    v = step.v;
    CircuitSample sample;
    sample.v = step.v_candidate;
    sample.u = gain_inv * (step.i_candidate - pd.s_i);
    sample.i = step.i_candidate;
    sample.iterations = step.trace.iterations_used;
    sample.residual = step.trace.final_residual;
    result.samples.push_back(std::move(sample));
    result.traces.push_back(std::move(step.trace));
  }
  return result;
}

DiodeLinearForm amplifier_saddle_form(const AmplifierProblem& problem, double v_in) {
  if (problem.transistor.diode != DiodeKind::ideal)
    fail(ErrorCode::unsupported, "the stacked saddle form needs ideal diodes");
  const PrimalDualProblem pd = amplifier_saddle_problem(problem, v_in);
  DiodeLinearForm form;
  form.dim = 4;
  form.diode_inputs = {2, 3};
  form.gain = Mat::Zero(4, 2);
  form.gain.bottomRows(2) = pd.r;
  form.linear = Mat::Zero(4, 4);
  form.linear.topLeftCorner(2, 2) = pd.a;
  form.linear.topRightCorner(2, 2) = Mat::Identity(2, 2);
  form.linear.bottomLeftCorner(2, 2) = -Mat::Identity(2, 2);
  form.offset = Vec(4);
  form.offset << pd.s_v, pd.s_i;
  return form;
}

Mat amplifier_precondition_matrix(const AmplifierProblem& problem) {
  if (!(problem.gamma > 0.0) || !(problem.tau > 0.0))
    fail(ErrorCode::invalid_argument, "step sizes must be positive");
  const Mat gain = npn_gain(problem.transistor.alpha_f, problem.transistor.alpha_r);
  Mat p = Mat::Zero(4, 4);
  p.topLeftCorner(2, 2) = Mat::Identity(2, 2) / problem.gamma;
  p.topRightCorner(2, 2) = -gain.transpose();
  p.bottomLeftCorner(2, 2) = -gain;
  p.bottomRightCorner(2, 2) = Mat::Identity(2, 2) / problem.tau;
  return p;
}

OpPtr amplifier_transform_op(const AmplifierProblem& problem) {
  const Mat gain = npn_gain(problem.transistor.alpha_f, problem.transistor.alpha_r);
  const Mat gain_inv = gain.inverse();
  Mat f = Mat::Zero(4, 4);
  f.topLeftCorner(2, 2) = gain_inv;
  f.bottomRightCorner(2, 2) = gain_inv.transpose();
  return linear_op(f);
}

Vec amplifier_oracle(const AmplifierProblem& problem, double v_in) {
  const DiodeLinearForm form = amplifier_saddle_form(problem, v_in);
  const OpPtr saddle = diode_linear_op(form, "amplifier_saddle");
  const InclusionSolver direct(saddle, linear_op(Mat::Zero(4, 4)), 1.0);
  return direct.solve(Vec::Zero(4), Vec::Zero(4));
}

std::vector<double> uniform_time_grid(int samples) {
  if (samples <= 0) fail(ErrorCode::invalid_argument, "time grid needs at least one sample");
  std::vector<double> t(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = static_cast<double>(k) / samples;
  return t;
}

std::vector<Vec> sinusoidal_current(const std::vector<double>& t, double amplitude) {
  std::vector<Vec> out;
  out.reserve(t.size());
  for (const double time : t) {
    const double phase = 2.0 * std::numbers::pi * time;
    Vec i(2);
    i << amplitude * std::sin(phase), -amplitude * std::sin(phase);
    out.push_back(std::move(i));
  }
  return out;
}

std::vector<double> cosine_voltage(const std::vector<double>& t) {
  std::vector<double> out;
  out.reserve(t.size());
  for (const double time : t) out.push_back(std::cos(2.0 * std::numbers::pi * time));
  return out;
}

std::string sweep_csv(const std::vector<double>& t, const std::vector<CircuitSample>& samples) {
  if (t.size() != samples.size())
    fail(ErrorCode::dimension_mismatch, "time grid and sample table have different lengths");
  std::string out = "t,v1,v2,i1,i2,iterations,residual\n";
  for (std::size_t k = 0; k < samples.size(); ++k) append_row(out, t[k], samples[k]);
  return out;
}

void write_sweep_csv(const std::string& path, const std::vector<double>& t,
                     const std::vector<CircuitSample>& samples) {
  write_text(path, sweep_csv(t, samples));
}

std::string trace_csv(const IterationTrace& trace, const Mat* metric) {
  std::string out = "k,residual,fejer_distance\n";
  std::vector<double> fejer;
  if (metric != nullptr && trace.iterates.size() == trace.residuals.size() && trace.last.size() > 0)
    fejer = fejer_distances(trace.iterates, *metric, trace.last);
  for (std::size_t k = 0; k < trace.residuals.size(); ++k) {
    out += std::to_string(k);
    out += ',';
    out += format_double(trace.residuals[k]);
    out += ',';
    if (!fejer.empty()) out += format_double(fejer[k]);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path, const IterationTrace& trace, const Mat* metric) {
  write_text(path, trace_csv(trace, metric));
}

}  // namespace srgpair
