#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "srgpair.h"

namespace {

// Owns a string returned by the library.
struct LibString {
  char* value = nullptr;
  LibString() = default;
  LibString(const LibString&) = delete;
  LibString& operator=(const LibString&) = delete;
  ~LibString() { srgpair_string_free(value); }
};

struct OpHandle {
  srgpair_op* op = nullptr;
  ~OpHandle() { srgpair_op_free(op); }
};

struct CloudHandle {
  srgpair_cloud* cloud = nullptr;
  ~CloudHandle() { srgpair_cloud_free(cloud); }
};

struct RegionHandle {
  srgpair_region* region = nullptr;
  ~RegionHandle() { srgpair_region_free(region); }
};

int report_error() {
  std::fprintf(stderr, "error: %s\n", srgpair_last_error());
  return 1;
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    std::fprintf(stderr, "error: cannot open '%s'\n", path.c_str());
    return false;
  }
  std::ostringstream buffer;
  buffer << file.rdbuf();
  out = buffer.str();
  return true;
}

// Inline JSON (starting with '{') is accepted anywhere a file path is.
bool read_file_or_inline(const std::string& arg, std::string& out) {
  if (!arg.empty() && arg.front() == '{') {
    out = arg;
    return true;
  }
  return read_file(arg, out);
}

bool write_file(const std::string& path, const char* data) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    std::fprintf(stderr, "error: cannot open '%s' for writing\n", path.c_str());
    return false;
  }
  file << (data == nullptr ? "" : data);
  if (!file) {
    std::fprintf(stderr, "error: failed writing '%s'\n", path.c_str());
    return false;
  }
  return true;
}

std::string number(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

bool ends_with(const std::string& text, const std::string& suffix) {
  return text.size() >= suffix.size() && text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct SampleArgs {
  std::string pair;
  std::string out;
  std::string region;
  int n = 0;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_sample(const SampleArgs& args) {
  std::string pair_text;
  if (!read_file_or_inline(args.pair, pair_text)) return 1;

  OpHandle a;
  OpHandle b;
  if (srgpair_pair_from_json(pair_text.c_str(), &a.op, &b.op) != SRGPAIR_OK) return report_error();

  srgpair_sample_options options{};
  options.n_inputs = args.n;
  options.seed = args.seed;
  CloudHandle cloud;
  if (srgpair_sample_pair(a.op, b.op, &options, &cloud.cloud) != SRGPAIR_OK) return report_error();

  srgpair_cloud_stats stats{};
  if (srgpair_cloud_get_stats(cloud.cloud, &stats) != SRGPAIR_OK) return report_error();

  RegionHandle region;
  srgpair_containment verdict{};
  bool checked = false;
  if (!args.region.empty()) {
    std::string region_text;
    if (!read_file_or_inline(args.region, region_text)) return 1;
    if (srgpair_region_from_json(region_text.c_str(), &region.region) != SRGPAIR_OK) return report_error();
    if (srgpair_region_contains_cloud(region.region, cloud.cloud, 1e-9, &verdict) != SRGPAIR_OK)
      return report_error();
    checked = true;
  }

  if (!args.out.empty()) {
    LibString rendered;
    const srgpair_status status =
        ends_with(args.out, ".svg")
            ? srgpair_cloud_to_svg(cloud.cloud, region.region, &rendered.value)
            : srgpair_cloud_to_csv(cloud.cloud, &rendered.value);
    if (status != SRGPAIR_OK) return report_error();
    if (!write_file(args.out, rendered.value)) return 1;
  }

  std::fprintf(stderr, "sampled %llu combinations: %llu finite, %llu infinity, %llu degenerate%s\n",
               static_cast<unsigned long long>(stats.combos), static_cast<unsigned long long>(stats.finite),
               static_cast<unsigned long long>(stats.infinite),
               static_cast<unsigned long long>(stats.degenerate), stats.truncated != 0 ? " (truncated)" : "");
  if (checked) {
    std::fprintf(stderr, "containment: %s, worst margin %s, infinity %s\n",
                 verdict.pass != 0 ? "pass" : "FAIL", number(verdict.worst_margin).c_str(),
                 verdict.infinity_ok != 0 ? "ok" : "not allowed");
  }
  if (args.json) {
    std::string line = "{\"finite\":" + std::to_string(stats.finite) +
                       ",\"infinite\":" + std::to_string(stats.infinite) +
                       ",\"degenerate\":" + std::to_string(stats.degenerate) +
                       ",\"truncated\":" + (stats.truncated != 0 ? std::string("true") : "false");
    if (checked) {
      line += ",\"containment_pass\":" + std::string(verdict.pass != 0 ? "true" : "false");
      line += ",\"worst_margin\":" + number(verdict.worst_margin);
    }
    line += "}";
    std::printf("%s\n", line.c_str());
  }
  return checked && verdict.pass == 0 ? 2 : 0;
}

struct CheckArgs {
  std::string pair;
  double mu = 0.0;
  double rho = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  bool json = false;
};

int run_check(const CheckArgs& args) {
  std::string pair_text;
  if (!read_file_or_inline(args.pair, pair_text)) return 1;
  OpHandle a;
  OpHandle b;
  if (srgpair_pair_from_json(pair_text.c_str(), &a.op, &b.op) != SRGPAIR_OK) return report_error();

  srgpair_sample_options options{};
  options.n_inputs = args.n;
  options.seed = args.seed;
  srgpair_semimonotone_report report{};
  if (srgpair_check_semimonotone(a.op, b.op, args.mu, args.rho, &options, 1e-9, &report) != SRGPAIR_OK)
    return report_error();

  std::fprintf(stderr, "inequality:  %s (margin %s)\n", report.direct_pass != 0 ? "pass" : "FAIL",
               number(report.direct_margin).c_str());
  std::fprintf(stderr, "containment: %s (margin %s)\n", report.containment_pass != 0 ? "pass" : "FAIL",
               number(report.containment_margin).c_str());
  if (report.agree == 0) std::fprintf(stderr, "warning: the two verdicts disagree\n");
  if (report.saw_infinity != 0)
    std::fprintf(stderr, "infinity events present; %s by the region\n",
                 report.infinity_allowed != 0 ? "allowed" : "not allowed");
  if (args.json) {
    std::printf("{\"direct_pass\":%s,\"containment_pass\":%s,\"agree\":%s,\"direct_margin\":%s,"
                "\"containment_margin\":%s}\n",
                report.direct_pass != 0 ? "true" : "false", report.containment_pass != 0 ? "true" : "false",
                report.agree != 0 ? "true" : "false", number(report.direct_margin).c_str(),
                number(report.containment_margin).c_str());
  }
  return report.direct_pass != 0 && report.containment_pass != 0 && report.agree != 0 ? 0 : 2;
}

struct CircuitArgs {
  std::string config;
  std::string out;
  std::string trace;
  std::int64_t trace_sample = 0;
  bool json = false;
};

int run_circuit(const CircuitArgs& args) {
  std::string config_text;
  if (!read_file_or_inline(args.config, config_text)) return 1;
  LibString csv;
  LibString trace_csv;
  LibString text;
  LibString summary;
  const std::int64_t trace_index = args.trace.empty() ? -1 : args.trace_sample;
  if (srgpair_circuit_solve_json(config_text.c_str(), trace_index, &csv.value, &trace_csv.value, &text.value,
                                 &summary.value) != SRGPAIR_OK)
    return report_error();
  if (!args.out.empty() && !write_file(args.out, csv.value)) return 1;
  if (!args.trace.empty() && !write_file(args.trace, trace_csv.value)) return 1;
  if (text.value != nullptr) std::fprintf(stderr, "%s", text.value);
  if (args.json && summary.value != nullptr) std::printf("%s\n", summary.value);
  return 0;
}

struct CalculusArgs {
  std::uint64_t seed = 0;
  int n = 0;
  double tol = 0.0;
  bool json = false;
};

int run_calculus(const CalculusArgs& args) {
  LibString text;
  LibString summary;
  std::int32_t all_passed = 0;
  if (srgpair_calculus_suite(args.seed, args.n, args.tol, &text.value, &summary.value, &all_passed) !=
      SRGPAIR_OK)
    return report_error();
  if (text.value != nullptr) std::fprintf(stderr, "%s", text.value);
  if (args.json && summary.value != nullptr) std::printf("%s\n", summary.value);
  return all_passed != 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-pair graph sampler, certificates, and circuit solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(srgpair_version()));

  SampleArgs sample_args;
  CheckArgs check_args;
  CircuitArgs circuit_args;
  CalculusArgs calculus_args;

  CLI::App* srg = app.add_subcommand("srg", "Sample pair graphs and run containment checks");
  srg->require_subcommand(1);
  CLI::App* sample = srg->add_subcommand("sample", "Sample a pair graph to CSV or SVG");
  sample->add_option("--pair", sample_args.pair, "Pair config (path or inline JSON)")->required();
  sample->add_option("--n", sample_args.n, "Input count");
  sample->add_option("--seed", sample_args.seed, "Sampling seed");
  sample->add_option("--out", sample_args.out, "Output path (.csv or .svg)");
  sample->add_option("--region", sample_args.region, "Region to test (path or inline JSON)");
  sample->add_flag("--json", sample_args.json, "One-line JSON summary on stdout");

  CLI::App* check = srg->add_subcommand("check", "Semimonotonicity certificate for a pair");
  check->add_option("--pair", check_args.pair, "Pair config (path or inline JSON)")->required();
  check->add_option("--mu", check_args.mu, "mu parameter")->required();
  check->add_option("--rho", check_args.rho, "rho parameter")->required();
  check->add_option("--n", check_args.n, "Input count");
  check->add_option("--seed", check_args.seed, "Sampling seed");
  check->add_flag("--json", check_args.json, "One-line JSON summary on stdout");

  CLI::App* circuit = app.add_subcommand("circuit", "Time sweeps of the bundled circuits");
  circuit->require_subcommand(1);
  CLI::App* solve = circuit->add_subcommand("solve", "Run a circuit config");
  solve->add_option("--config", circuit_args.config, "Circuit config (path or inline JSON)")->required();
  solve->add_option("--out", circuit_args.out, "Sweep CSV output path");
  solve->add_option("--trace", circuit_args.trace, "Iteration-trace CSV output path");
  solve->add_option("--trace-sample", circuit_args.trace_sample, "Sample index to trace (default 0)");
  solve->add_flag("--json", circuit_args.json, "One-line JSON summary on stdout");

  CLI::App* calculus = app.add_subcommand("calculus", "Cloud-transformation rule suite");
  CLI::App* test = calculus->add_subcommand("test", "Run all rules and print the matrix");
  test->add_option("--seed", calculus_args.seed, "Sampling seed");
  test->add_option("--n", calculus_args.n, "Input count");
  test->add_option("--tol", calculus_args.tol, "Pointwise tolerance");
  test->add_flag("--json", calculus_args.json, "One-line JSON summary on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (sample->parsed()) return run_sample(sample_args);
  if (check->parsed()) return run_check(check_args);
  if (solve->parsed()) return run_circuit(circuit_args);
  if (test->parsed()) return run_calculus(calculus_args);
  return 1;
}
