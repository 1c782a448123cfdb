#include "srgpair.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "srgpair/calculus.hpp"
#include "srgpair/circuits.hpp"
#include "srgpair/config.hpp"
#include "srgpair/regions.hpp"
#include "srgpair/srg.hpp"

struct srgpair_op {
  srgpair::OpPtr op;
};
struct srgpair_cloud {
  srgpair::PairSrgCloud cloud;
};
struct srgpair_region {
  srgpair::Region region;
};

namespace {

thread_local std::string g_last_error;

srgpair_status to_status(srgpair::ErrorCode code) {
  switch (code) {
    case srgpair::ErrorCode::invalid_argument:
      return SRGPAIR_ERROR_INVALID_ARGUMENT;
    case srgpair::ErrorCode::parse:
      return SRGPAIR_ERROR_PARSE;
    case srgpair::ErrorCode::dimension_mismatch:
      return SRGPAIR_ERROR_DIMENSION_MISMATCH;
    case srgpair::ErrorCode::empty_domain:
      return SRGPAIR_ERROR_EMPTY_DOMAIN;
    case srgpair::ErrorCode::unsupported:
      return SRGPAIR_ERROR_UNSUPPORTED;
    case srgpair::ErrorCode::solver_failure:
      return SRGPAIR_ERROR_SOLVER_FAILURE;
    case srgpair::ErrorCode::io:
      return SRGPAIR_ERROR_IO;
    case srgpair::ErrorCode::internal:
      return SRGPAIR_ERROR_INTERNAL;
  }
  return SRGPAIR_ERROR_INTERNAL;
}

template <typename Fn>
srgpair_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SRGPAIR_OK;
  } catch (const srgpair::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SRGPAIR_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return SRGPAIR_ERROR_INTERNAL;
  }
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) srgpair::fail(srgpair::ErrorCode::internal, "out of memory");
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void require(bool condition, const char* message) {
  if (!condition) srgpair::fail(srgpair::ErrorCode::invalid_argument, message);
}

srgpair::SampleOptions convert(const srgpair_sample_options* options) {
  srgpair::SampleOptions out;
  if (options == nullptr) return out;
  if (options->n_inputs > 0) out.n_inputs = options->n_inputs;
  out.seed = options->seed;
  if (options->eps_den > 0.0) out.eps_den = options->eps_den;
  if (options->max_combos > 0) out.max_combos = options->max_combos;
  if (options->max_selections > 0) out.max_selections = options->max_selections;
  out.threads = options->threads;
  return out;
}

nlohmann::json rule_json(const srgpair::RuleResult& result) {
  return {{"rule", result.rule},         {"pair", result.pair_tag}, {"pass", result.pass},
          {"deviation", result.deviation}, {"compared", result.compared}, {"detail", result.detail}};
}

}  // namespace

extern "C" {

const char* srgpair_version(void) { return "0.1.0"; }

const char* srgpair_last_error(void) { return g_last_error.c_str(); }

void srgpair_string_free(char* text) { std::free(text); }

srgpair_status srgpair_op_from_json(const char* json, srgpair_op** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = new srgpair_op{srgpair::op_from_json(json)};
  });
}

srgpair_status srgpair_pair_from_json(const char* json, srgpair_op** a_out, srgpair_op** b_out) {
  return guarded([&] {
    require(json != nullptr && a_out != nullptr && b_out != nullptr, "null argument");
    srgpair::PairConfig config = srgpair::pair_from_json(json);
    *a_out = new srgpair_op{std::move(config.a)};
    *b_out = new srgpair_op{std::move(config.b)};
  });
}

int64_t srgpair_op_dim(const srgpair_op* op) { return op == nullptr ? -1 : op->op->dim(); }

void srgpair_op_free(srgpair_op* op) { delete op; }

srgpair_status srgpair_sample_pair(const srgpair_op* a, const srgpair_op* b,
                                   const srgpair_sample_options* options, srgpair_cloud** out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    *out = new srgpair_cloud{srgpair::sample_pair_srg(a->op, b->op, convert(options))};
  });
}

srgpair_status srgpair_cloud_get_stats(const srgpair_cloud* cloud, srgpair_cloud_stats* out) {
  return guarded([&] {
    require(cloud != nullptr && out != nullptr, "null argument");
    const srgpair::CloudCounts& counts = cloud->cloud.counts;
    out->input_pairs = counts.input_pairs;
    out->combos = counts.combos;
    out->finite = counts.finite;
    out->infinite = counts.infinite;
    out->degenerate = counts.degenerate;
    out->has_infinity = cloud->cloud.has_infinity ? 1 : 0;
    out->truncated = cloud->cloud.truncated ? 1 : 0;
  });
}

srgpair_status srgpair_cloud_to_csv(const srgpair_cloud* cloud, char** out) {
  return guarded([&] {
    require(cloud != nullptr && out != nullptr, "null argument");
    *out = copy_string(srgpair::cloud_to_csv(cloud->cloud));
  });
}

srgpair_status srgpair_cloud_to_svg(const srgpair_cloud* cloud, const srgpair_region* region, char** out) {
  return guarded([&] {
    require(cloud != nullptr && out != nullptr, "null argument");
    *out = copy_string(
        srgpair::cloud_to_svg(cloud->cloud, region == nullptr ? nullptr : &region->region));
  });
}

void srgpair_cloud_free(srgpair_cloud* cloud) { delete cloud; }

srgpair_status srgpair_region_from_json(const char* json, srgpair_region** out) {
  return guarded([&] {
    require(json != nullptr && out != nullptr, "null argument");
    *out = new srgpair_region{srgpair::region_from_json(json)};
  });
}

srgpair_status srgpair_region_describe(const srgpair_region* region, char** out) {
  return guarded([&] {
    require(region != nullptr && out != nullptr, "null argument");
    *out = copy_string(region->region.describe());
  });
}

srgpair_status srgpair_region_contains_cloud(const srgpair_region* region, const srgpair_cloud* cloud,
                                             double tol, srgpair_containment* out) {
  return guarded([&] {
    require(region != nullptr && cloud != nullptr && out != nullptr, "null argument");
    double worst = std::numeric_limits<double>::infinity();
    bool pass = true;
    for (const srgpair::ExtendedComplex& z : cloud->cloud.points) {
      if (z.is_infinite()) continue;
      const double margin = region->region.margin({z.re(), z.im()});
      worst = std::min(worst, margin);
      if (margin < -tol) pass = false;
    }
    const bool infinity_ok = !cloud->cloud.has_infinity || region->region.contains_infinity();
    if (!infinity_ok) pass = false;
    if (cloud->cloud.points.empty()) worst = 0.0;
    out->pass = pass ? 1 : 0;
    out->infinity_ok = infinity_ok ? 1 : 0;
    out->worst_margin = worst;
  });
}

void srgpair_region_free(srgpair_region* region) { delete region; }

srgpair_status srgpair_check_semimonotone(const srgpair_op* a, const srgpair_op* b, double mu, double rho,
                                          const srgpair_sample_options* options, double tol,
                                          srgpair_semimonotone_report* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "null argument");
    const srgpair::SemimonotoneReport report =
        srgpair::check_semimonotone_pair(a->op, b->op, mu, rho, convert(options), tol);
    out->direct_pass = report.direct_pass ? 1 : 0;
    out->containment_pass = report.containment_pass ? 1 : 0;
    out->agree = report.agree ? 1 : 0;
    out->saw_infinity = report.saw_infinity ? 1 : 0;
    out->infinity_allowed = report.infinity_allowed ? 1 : 0;
    out->direct_margin = report.direct_margin;
    out->containment_margin = report.containment_margin;
    out->combos = report.combos;
    out->finite_points = report.finite_points;
  });
}

srgpair_status srgpair_circuit_solve_json(const char* config_json, int64_t trace_sample,
                                          char** sweep_csv_out, char** trace_csv_out,
                                          char** report_text_out, char** report_json_out) {
  return guarded([&] {
    require(config_json != nullptr, "null argument");
    srgpair::CircuitConfig config = srgpair::circuit_from_json(config_json);
    const bool want_trace = trace_sample >= 0 && trace_csv_out != nullptr;

    std::vector<srgpair::CircuitSample> samples;
    std::vector<srgpair::IterationTrace> traces;
    nlohmann::json report;
    std::string text;
    const srgpair::Mat* trace_metric = nullptr;
    srgpair::Mat amplifier_metric;

    if (config.kind == srgpair::CircuitKind::leaky_transistor) {
      if (want_trace && config.leaky.trace == srgpair::TraceMode::counters)
        config.leaky.trace = srgpair::TraceMode::residuals;
      srgpair::LeakyTransistorResult result = srgpair::solve_leaky_transistor(config.leaky);
      samples = std::move(result.samples);
      traces = std::move(result.traces);
      report["circuit"] = "leaky_transistor";
      report["r"] = config.leaky.r;
      report["gamma"] = config.leaky.gamma;
      text += "leaky transistor: r = " + srgpair::format_double(config.leaky.r) +
              " ohm, step size = " + srgpair::format_double(config.leaky.gamma) + "\n";
    } else {
      if (want_trace && config.amplifier.trace == srgpair::TraceMode::counters)
        config.amplifier.trace = srgpair::TraceMode::full;
      srgpair::AmplifierResult result = srgpair::solve_amplifier(config.amplifier);
      samples = std::move(result.samples);
      traces = std::move(result.traces);
      amplifier_metric = srgpair::amplifier_precondition_matrix(config.amplifier);
      trace_metric = &amplifier_metric;
      report["circuit"] = "amplifier";
      report["gamma"] = config.amplifier.gamma;
      report["tau"] = config.amplifier.tau;
      report["preconditions"] = {
          {"step_product", result.preconditions.step_product},
          {"step_ok", result.preconditions.step_ok},
          {"sym_min_eigenvalue", result.preconditions.sym_min_eigenvalue},
          {"monotonicity_ok", result.preconditions.monotonicity_ok},
      };
      text += "amplifier preconditions:\n";
      text += "  step product gamma*tau*|R|^2 = " +
              srgpair::format_double(result.preconditions.step_product) + " (< 1: " +
              (result.preconditions.step_ok ? "ok" : "VIOLATED") + ")\n";
      text += "  min eigenvalue of A^T R^-1 + R^-T A = " +
              srgpair::format_double(result.preconditions.sym_min_eigenvalue) + " (>= 0: " +
              (result.preconditions.monotonicity_ok ? "ok" : "VIOLATED") + ")\n";
    }

    double max_residual = 0.0;
    std::int64_t total_iterations = 0;
    for (const srgpair::CircuitSample& sample : samples) {
      max_residual = std::max(max_residual, sample.residual);
      total_iterations += sample.iterations;
    }
    report["samples"] = samples.size();
    report["max_residual"] = max_residual;
    report["total_iterations"] = total_iterations;
    text += "samples: " + std::to_string(samples.size()) +
            ", max residual: " + srgpair::format_double(max_residual) +
            ", total iterations: " + std::to_string(total_iterations) + "\n";

    if (sweep_csv_out != nullptr) *sweep_csv_out = copy_string(srgpair::sweep_csv(config.t, samples));
    if (want_trace) {
      if (trace_sample >= static_cast<int64_t>(traces.size()))
        srgpair::fail(srgpair::ErrorCode::invalid_argument, "trace sample index out of range");
      *trace_csv_out =
          copy_string(srgpair::trace_csv(traces[static_cast<std::size_t>(trace_sample)], trace_metric));
    } else if (trace_csv_out != nullptr) {
      *trace_csv_out = nullptr;
    }
    if (report_text_out != nullptr) *report_text_out = copy_string(text);
    if (report_json_out != nullptr) *report_json_out = copy_string(report.dump());
  });
}

srgpair_status srgpair_calculus_suite(uint64_t seed, int32_t n_inputs, double tol, char** report_text_out,
                                      char** report_json_out, int32_t* all_passed_out) {
  return guarded([&] {
    srgpair::CalculusOptions options;
    options.seed = seed;
    if (n_inputs > 0) options.n_inputs = n_inputs;
    if (tol > 0.0) options.tol = tol;
    const std::vector<srgpair::RuleResult> results = srgpair::run_calculus_suite(options);
    const bool passed = srgpair::all_passed(results);

    if (report_text_out != nullptr) {
      std::string text;
      for (const srgpair::RuleResult& r : results) {
        text += r.pass ? "pass" : "FAIL";
        text += "  ";
        text += r.rule;
        text += "  ";
        text += r.pair_tag;
        text += "  deviation=";
        text += srgpair::format_double(r.deviation);
        if (!r.detail.empty()) {
          text += "  (";
          text += r.detail;
          text += ")";
        }
        text += "\n";
      }
      *report_text_out = copy_string(text);
    }
    if (report_json_out != nullptr) {
      nlohmann::json rows = nlohmann::json::array();
      for (const srgpair::RuleResult& r : results) rows.push_back(rule_json(r));
      nlohmann::json summary = {{"all_passed", passed}, {"rules", rows}};
      *report_json_out = copy_string(summary.dump());
    }
    if (all_passed_out != nullptr) *all_passed_out = passed ? 1 : 0;
  });
}

}  // extern "C"
