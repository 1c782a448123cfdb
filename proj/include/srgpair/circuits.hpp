#pragma once

#include <string>
#include <vector>

#include "srgpair/iterate.hpp"

namespace srgpair {

enum class DiodeKind { ideal, shockley };

struct TransistorParams {
  double alpha_f = 0.98;
  double alpha_r = 0.5;
  DiodeKind diode = DiodeKind::ideal;
  double shockley_i_s = 1e-12;
  double shockley_v_t = 0.025852;
};

/// Two coupled diodes with a leakage resistor: i in R*diode(v) + v / r. All
/// quantities in SI units (amperes, volts, ohms); one source vector per time
/// sample.
struct LeakyTransistorProblem {
  double r = 10.0;
  std::vector<Vec> i_src;
  TransistorParams transistor;
  double gamma = 1.0;
  double tol = 1e-8;
  std::int64_t max_iterations = 10'000'000;
  TraceMode trace = TraceMode::counters;
};

/// Common-emitter stage: resistors R_C, R_E against the coupled diode pair,
/// driven by a supply v_plus and a per-sample input voltage.
struct AmplifierProblem {
  double r_e = 30.0;
  double r_c = 300.0;
  double v_plus = 5.0;
  std::vector<double> v_in;
  TransistorParams transistor;
  double gamma = 1e-3;
  double tau = 100.0;
  double tol = 1e-8;
  std::int64_t max_iterations = 100'000;
  TraceMode trace = TraceMode::counters;
};

/// One converged time sample. v and i are the circuit solution, u the
/// reconstructed diode currents. For the fixed-point sweep the residual is a
/// certified bound on the distance to the exact sample solution; for the
/// primal-dual sweep it is the verified saddle inclusion residual.
struct CircuitSample {
  Vec v;
  Vec u;
  Vec i;
  std::int64_t iterations = 0;
  double residual = 0.0;
};

struct LeakyTransistorResult {
  std::vector<CircuitSample> samples;
  std::vector<IterationTrace> traces;
};

struct AmplifierResult {
  PreconditionReport preconditions;
  std::vector<CircuitSample> samples;
  std::vector<IterationTrace> traces;
};

/// Fixed-point sweep over the source samples with warm starts. Each sample is
/// verified against the inclusion residual before it is reported; a sample
/// that fails to converge raises an error.
[[nodiscard]] LeakyTransistorResult solve_leaky_transistor(const LeakyTransistorProblem& problem);

/// Primal-dual sweep over the input-voltage samples with warm starts. The
/// step-size and monotonicity preconditions are checked up front.
[[nodiscard]] AmplifierResult solve_amplifier(const AmplifierProblem& problem);

/// Direct solution of one leaky-transistor sample by exhaustive diode-state
/// enumeration; reference for the fixed-point path.
[[nodiscard]] Vec leaky_transistor_oracle(const LeakyTransistorProblem& problem, const Vec& source);

/// Direct solution of one amplifier sample; returns the stacked (i, v).
[[nodiscard]] Vec amplifier_oracle(const AmplifierProblem& problem, double v_in);

// Saddle-problem pieces exposed for equivalence checks against the
// preconditioned proximal point form.
[[nodiscard]] DiodeLinearForm amplifier_saddle_form(const AmplifierProblem& problem, double v_in);
[[nodiscard]] Mat amplifier_precondition_matrix(const AmplifierProblem& problem);
[[nodiscard]] OpPtr amplifier_transform_op(const AmplifierProblem& problem);
[[nodiscard]] PrimalDualProblem amplifier_saddle_problem(const AmplifierProblem& problem, double v_in);

// Time grids and sources. The sinusoidal current drives the two terminals in
// antiphase; amplitude in amperes.
[[nodiscard]] std::vector<double> uniform_time_grid(int samples);
[[nodiscard]] std::vector<Vec> sinusoidal_current(const std::vector<double>& t, double amplitude = 1e-3);
[[nodiscard]] std::vector<double> cosine_voltage(const std::vector<double>& t);

/// CSV table t,v1,v2,i1,i2,iterations,residual; one row per sample.
[[nodiscard]] std::string sweep_csv(const std::vector<double>& t, const std::vector<CircuitSample>& samples);
void write_sweep_csv(const std::string& path, const std::vector<double>& t,
                     const std::vector<CircuitSample>& samples);

/// CSV table k,residual,fejer_distance for one recorded trace. The distance
/// column is filled when full iterates are present and a metric is given
/// (measured to the final iterate), and left empty otherwise.
[[nodiscard]] std::string trace_csv(const IterationTrace& trace, const Mat* metric = nullptr);
void write_trace_csv(const std::string& path, const IterationTrace& trace, const Mat* metric = nullptr);

}  // namespace srgpair
