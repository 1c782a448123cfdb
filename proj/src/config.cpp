#include "srgpair/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace srgpair {

namespace {

using nlohmann::json;

json parse_root(const std::string& text, const std::string& context) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::parse, context + ": not valid JSON");
  if (!j.is_object()) fail(ErrorCode::parse, context + ": expected a JSON object");
  return j;
}

const json& need(const json& j, const char* field, const std::string& context) {
  const auto it = j.find(field);
  if (it == j.end()) fail(ErrorCode::parse, context + ": missing field '" + field + "'");
  return *it;
}

double need_number(const json& j, const char* field, const std::string& context) {
  const json& v = need(j, field, context);
  if (!v.is_number()) fail(ErrorCode::parse, context + ": field '" + field + "' must be a number");
  return v.get<double>();
}

double number_or(const json& j, const char* field, double fallback, const std::string& context) {
  const auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_number()) fail(ErrorCode::parse, context + ": field '" + field + "' must be a number");
  return it->get<double>();
}

std::int64_t integer_or(const json& j, const char* field, std::int64_t fallback, const std::string& context) {
  const auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_number_integer()) fail(ErrorCode::parse, context + ": field '" + field + "' must be an integer");
  return it->get<std::int64_t>();
}

std::string need_string(const json& j, const char* field, const std::string& context) {
  const json& v = need(j, field, context);
  if (!v.is_string()) fail(ErrorCode::parse, context + ": field '" + field + "' must be a string");
  return v.get<std::string>();
}

std::string string_or(const json& j, const char* field, const std::string& fallback,
                      const std::string& context) {
  const auto it = j.find(field);
  if (it == j.end()) return fallback;
  if (!it->is_string()) fail(ErrorCode::parse, context + ": field '" + field + "' must be a string");
  return it->get<std::string>();
}

void check_schema(const json& j, const std::string& context) {
  const json& v = need(j, "schema", context);
  if (!v.is_number_integer() || v.get<int>() != kConfigSchema)
    fail(ErrorCode::parse, context + ": field 'schema' must be the integer " + std::to_string(kConfigSchema));
}

Vec vec_from(const json& v, const char* field, const std::string& context) {
  if (!v.is_array() || v.empty()) fail(ErrorCode::parse, context + ": field '" + field + "' must be a nonempty array");
  Vec out(static_cast<Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number())
      fail(ErrorCode::parse, context + ": field '" + field + "' must contain numbers");
    out[static_cast<Index>(k)] = v[k].get<double>();
  }
  return out;
}

Mat mat_from(const json& v, const char* field, const std::string& context) {
  if (!v.is_array() || v.empty()) fail(ErrorCode::parse, context + ": field '" + field + "' must be a nonempty array of rows");
  const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
  if (cols == 0) fail(ErrorCode::parse, context + ": field '" + field + "' rows must be nonempty arrays");
  Mat out(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (!v[r].is_array() || v[r].size() != cols)
      fail(ErrorCode::parse, context + ": field '" + field + "' rows must have equal lengths");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!v[r][c].is_number())
        fail(ErrorCode::parse, context + ": field '" + field + "' must contain numbers");
      out(static_cast<Index>(r), static_cast<Index>(c)) = v[r][c].get<double>();
    }
  }
  return out;
}

Box box_from(const json& j, const std::string& context) {
  Box box;
  const auto it = j.find("box");
  if (it == j.end()) return box;
  if (!it->is_object()) fail(ErrorCode::parse, context + ": field 'box' must be an object");
  box.lo = number_or(*it, "lo", box.lo, context + ".box");
  box.hi = number_or(*it, "hi", box.hi, context + ".box");
  if (!(box.lo < box.hi)) fail(ErrorCode::parse, context + ": field 'box' needs lo < hi");
  return box;
}

RaySpec ray_from(const json& j, const std::string& context) {
  RaySpec ray;
  const auto it = j.find("ray");
  if (it == j.end()) return ray;
  if (!it->is_object()) fail(ErrorCode::parse, context + ": field 'ray' must be an object");
  ray.u_max = number_or(*it, "u_max", ray.u_max, context + ".ray");
  ray.count = static_cast<int>(integer_or(*it, "count", ray.count, context + ".ray"));
  return ray;
}

OpPtr build_op(const json& j, const std::string& context);

OpPtr build_sub_op(const json& j, const char* field, const std::string& context) {
  const json& v = need(j, field, context);
  if (!v.is_object()) fail(ErrorCode::parse, context + ": field '" + field + "' must be an operator object");
  return build_op(v, context + "." + field);
}

OpPtr build_op(const json& j, const std::string& context) {
  const std::string kind = need_string(j, "kind", context);
  if (kind == "identity") {
    const auto dim = integer_or(j, "dim", 1, context);
    return identity_op(static_cast<Index>(dim), box_from(j, context));
  }
  if (kind == "linear") return linear_op(mat_from(need(j, "matrix", context), "matrix", context), box_from(j, context));
  if (kind == "ideal_diode") {
    const double kink = number_or(j, "kink_prob", 0.35, context);
    return ideal_diode(ray_from(j, context), box_from(j, context), kink);
  }
  if (kind == "shockley")
    return shockley_diode(need_number(j, "i_s", context), need_number(j, "v_t", context), box_from(j, context));
  if (kind == "npn") {
    const double af = number_or(j, "alpha_f", 0.98, context);
    const double ar = number_or(j, "alpha_r", 0.5, context);
    OpPtr diode;
    if (j.contains("diode")) diode = build_sub_op(j, "diode", context);
    return npn_transistor(af, ar, std::move(diode), box_from(j, context));
  }
  if (kind == "npn_partner") {
    const double af = number_or(j, "alpha_f", 0.98, context);
    const double ar = number_or(j, "alpha_r", 0.5, context);
    return linear_op(npn_partner_matrix(af, ar), box_from(j, context));
  }
  if (kind == "quartic_gradient") return quartic_gradient(box_from(j, context));
  if (kind == "preconditioner") {
    const std::string profile = need_string(j, "profile", context);
    PreconditionerKind pk;
    if (profile == "identity")
      pk = PreconditionerKind::identity;
    else if (profile == "clip")
      pk = PreconditionerKind::clip;
    else if (profile == "arcsinh")
      pk = PreconditionerKind::arcsinh;
    else
      fail(ErrorCode::parse, context + ": field 'profile' must be identity, clip, or arcsinh");
    return preconditioner(pk, box_from(j, context));
  }
  if (kind == "diode_linear") {
    DiodeLinearForm form;
    form.gain = mat_from(need(j, "gain", context), "gain", context);
    form.linear = mat_from(need(j, "linear", context), "linear", context);
    form.offset = vec_from(need(j, "offset", context), "offset", context);
    form.dim = form.linear.rows();
    const json& inputs = need(j, "diode_inputs", context);
    if (!inputs.is_array()) fail(ErrorCode::parse, context + ": field 'diode_inputs' must be an array");
    for (const auto& entry : inputs) {
      if (!entry.is_number_integer())
        fail(ErrorCode::parse, context + ": field 'diode_inputs' must contain integers");
      form.diode_inputs.push_back(entry.get<Index>());
    }
    return diode_linear_op(std::move(form), string_or(j, "tag", "diode_linear", context),
                           ray_from(j, context), box_from(j, context),
                           number_or(j, "kink_prob", 0.35, context));
  }
  if (kind == "scale") return scale_op(need_number(j, "factor", context), build_sub_op(j, "op", context));
  if (kind == "add") {
    const json& parts = need(j, "ops", context);
    if (!parts.is_array() || parts.size() < 2)
      fail(ErrorCode::parse, context + ": field 'ops' must be an array of at least two operators");
    OpPtr acc = build_op(parts[0], context + ".ops[0]");
    for (std::size_t k = 1; k < parts.size(); ++k)
      acc = add_op(std::move(acc), build_op(parts[k], context + ".ops[" + std::to_string(k) + "]"));
    return acc;
  }
  if (kind == "translate")
    return translate_op(build_sub_op(j, "op", context), vec_from(need(j, "offset", context), "offset", context));
  if (kind == "compose") return compose_op(build_sub_op(j, "outer", context), build_sub_op(j, "inner", context));
  if (kind == "linear_image")
    return linear_image_op(mat_from(need(j, "matrix", context), "matrix", context),
                           build_sub_op(j, "op", context));
  if (kind == "id_minus") return id_minus(build_sub_op(j, "op", context));
  if (kind == "inverse") return inverse_op(build_sub_op(j, "op", context));
  if (kind == "inverse_transpose_partner")
    return pair_partner_nonsingular(mat_from(need(j, "matrix", context), "matrix", context),
                                    number_or(j, "scale", 1.0, context));
  fail(ErrorCode::parse, context + ": unknown operator kind '" + kind + "'");
}

Region build_region(const json& j, const std::string& context) {
  if (!j.is_object()) fail(ErrorCode::parse, context + ": expected a region object");
  const std::string kind = need_string(j, "kind", context);
  if (kind == "half_plane") return Region::half_plane(need_number(j, "alpha", context));
  if (kind == "disk" || kind == "disk_complement") {
    const json& c = need(j, "center", context);
    std::complex<double> center;
    if (c.is_number())
      center = c.get<double>();
    else if (c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number())
      center = {c[0].get<double>(), c[1].get<double>()};
    else
      fail(ErrorCode::parse, context + ": field 'center' must be a number or [re, im]");
    const double radius = need_number(j, "radius", context);
    return kind == "disk" ? Region::disk(center, radius) : Region::disk_complement(center, radius);
  }
  if (kind == "semimonotone")
    return Region::semimonotone(need_number(j, "mu", context), need_number(j, "rho", context));
  if (kind == "full_plane") return Region::full_plane();
  if (kind == "union" || kind == "intersection") {
    const json& parts = need(j, "parts", context);
    if (!parts.is_array() || parts.empty())
      fail(ErrorCode::parse, context + ": field 'parts' must be a nonempty array");
    std::vector<Region> regions;
    for (std::size_t k = 0; k < parts.size(); ++k)
      regions.push_back(build_region(parts[k], context + ".parts[" + std::to_string(k) + "]"));
    return kind == "union" ? Region::union_of(std::move(regions)) : Region::intersection_of(std::move(regions));
  }
  fail(ErrorCode::parse, context + ": unknown region kind '" + kind + "'");
}

TransistorParams transistor_from(const json& j, const std::string& context) {
  TransistorParams params;
  const auto it = j.find("transistor");
  if (it == j.end()) return params;
  if (!it->is_object()) fail(ErrorCode::parse, context + ": field 'transistor' must be an object");
  const std::string sub = context + ".transistor";
  params.alpha_f = number_or(*it, "alpha_f", params.alpha_f, sub);
  params.alpha_r = number_or(*it, "alpha_r", params.alpha_r, sub);
  const std::string diode = string_or(*it, "diode", "ideal", sub);
  if (diode == "ideal")
    params.diode = DiodeKind::ideal;
  else if (diode == "shockley")
    params.diode = DiodeKind::shockley;
  else
    fail(ErrorCode::parse, sub + ": field 'diode' must be ideal or shockley");
  params.shockley_i_s = number_or(*it, "i_s", params.shockley_i_s, sub);
  params.shockley_v_t = number_or(*it, "v_t", params.shockley_v_t, sub);
  return params;
}

struct SolverSettings {
  double tol;
  std::int64_t max_iterations;
  TraceMode trace;
};

SolverSettings solver_from(const json& j, double tol, std::int64_t max_iterations, const std::string& context) {
  SolverSettings settings{tol, max_iterations, TraceMode::counters};
  const auto it = j.find("solver");
  if (it == j.end()) return settings;
  if (!it->is_object()) fail(ErrorCode::parse, context + ": field 'solver' must be an object");
  const std::string sub = context + ".solver";
  settings.tol = number_or(*it, "tol", settings.tol, sub);
  settings.max_iterations = integer_or(*it, "max_iterations", settings.max_iterations, sub);
  const std::string trace = string_or(*it, "trace", "counters", sub);
  if (trace == "counters")
    settings.trace = TraceMode::counters;
  else if (trace == "residuals")
    settings.trace = TraceMode::residuals;
  else if (trace == "full")
    settings.trace = TraceMode::full;
  else
    fail(ErrorCode::parse, sub + ": field 'trace' must be counters, residuals, or full");
  return settings;
}

std::vector<double> time_grid_from(const json& source, const std::string& context) {
  if (source.contains("t")) {
    const json& t = source["t"];
    if (!t.is_array() || t.empty()) fail(ErrorCode::parse, context + ": field 't' must be a nonempty array");
    std::vector<double> out;
    for (const auto& entry : t) {
      if (!entry.is_number()) fail(ErrorCode::parse, context + ": field 't' must contain numbers");
      out.push_back(entry.get<double>());
    }
    return out;
  }
  const auto samples = integer_or(source, "samples", 256, context);
  if (samples <= 0) fail(ErrorCode::parse, context + ": field 'samples' must be positive");
  return uniform_time_grid(static_cast<int>(samples));
}

}  // namespace

OpPtr op_from_json(const std::string& text) { return build_op(parse_root(text, "operator"), "operator"); }

PairConfig pair_from_json(const std::string& text) {
  const json j = parse_root(text, "pair config");
  check_schema(j, "pair config");
  PairConfig config;
  config.a = build_op(need(j, "a", "pair config"), "pair config.a");
  config.b = build_op(need(j, "b", "pair config"), "pair config.b");
  config.label = string_or(j, "label", "", "pair config");
  if (config.a->dim() != config.b->dim())
    fail(ErrorCode::dimension_mismatch, "pair config: operators have different dimensions");
  return config;
}

Region region_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::parse, "region: not valid JSON");
  return build_region(j, "region");
}

CircuitConfig circuit_from_json(const std::string& text) {
  const json j = parse_root(text, "circuit config");
  const std::string context = "circuit config";
  check_schema(j, context);
  const std::string circuit = need_string(j, "circuit", context);
  CircuitConfig config;
  json params = json::object();
  if (j.contains("params")) {
    if (!j["params"].is_object()) fail(ErrorCode::parse, context + ": field 'params' must be an object");
    params = j["params"];
  }
  const std::string params_context = context + ".params";
  if (circuit == "leaky_transistor") {
    config.kind = CircuitKind::leaky_transistor;
    LeakyTransistorProblem& p = config.leaky;
    p.r = number_or(params, "r", p.r, params_context);
    p.gamma = number_or(params, "gamma", p.gamma, params_context);
    p.transistor = transistor_from(j, context);
    const SolverSettings solver = solver_from(j, p.tol, p.max_iterations, context);
    p.tol = solver.tol;
    p.max_iterations = solver.max_iterations;
    p.trace = solver.trace;

    const json& source = need(j, "source", context);
    if (!source.is_object()) fail(ErrorCode::parse, context + ": field 'source' must be an object");
    const std::string sub = context + ".source";
    const std::string kind = string_or(source, "kind", "sinusoid", sub);
    if (kind == "sinusoid") {
      config.t = time_grid_from(source, sub);
      p.i_src = sinusoidal_current(config.t, number_or(source, "amplitude", 1e-3, sub));
    } else if (kind == "explicit") {
      const json& values = need(source, "currents", sub);
      if (!values.is_array() || values.empty())
        fail(ErrorCode::parse, sub + ": field 'currents' must be a nonempty array");
      config.t = source.contains("t") || source.contains("samples")
                     ? time_grid_from(source, sub)
                     : uniform_time_grid(static_cast<int>(values.size()));
      if (values.size() != config.t.size())
        fail(ErrorCode::parse, sub + ": field 'currents' must be an array matching the time grid");
      for (const auto& entry : values) p.i_src.push_back(vec_from(entry, "currents", sub));
    } else {
      fail(ErrorCode::parse, sub + ": field 'kind' must be sinusoid or explicit");
    }
  } else if (circuit == "amplifier") {
    config.kind = CircuitKind::amplifier;
    AmplifierProblem& p = config.amplifier;
    p.r_e = number_or(params, "r_e", p.r_e, params_context);
    p.r_c = number_or(params, "r_c", p.r_c, params_context);
    p.v_plus = number_or(params, "v_plus", p.v_plus, params_context);
    p.gamma = number_or(params, "gamma", p.gamma, params_context);
    p.tau = number_or(params, "tau", p.tau, params_context);
    p.transistor = transistor_from(j, context);
    const SolverSettings solver = solver_from(j, p.tol, p.max_iterations, context);
    p.tol = solver.tol;
    p.max_iterations = solver.max_iterations;
    p.trace = solver.trace;

    const json& source = need(j, "source", context);
    if (!source.is_object()) fail(ErrorCode::parse, context + ": field 'source' must be an object");
    const std::string sub = context + ".source";
    const std::string kind = string_or(source, "kind", "cosine", sub);
    if (kind == "cosine") {
      config.t = time_grid_from(source, sub);
      p.v_in = cosine_voltage(config.t);
    } else if (kind == "explicit") {
      const json& values = need(source, "voltages", sub);
      if (!values.is_array() || values.empty())
        fail(ErrorCode::parse, sub + ": field 'voltages' must be a nonempty array");
      config.t = source.contains("t") || source.contains("samples")
                     ? time_grid_from(source, sub)
                     : uniform_time_grid(static_cast<int>(values.size()));
      if (values.size() != config.t.size())
        fail(ErrorCode::parse, sub + ": field 'voltages' must be an array matching the time grid");
      for (const auto& entry : values) {
        if (!entry.is_number()) fail(ErrorCode::parse, sub + ": field 'voltages' must contain numbers");
        p.v_in.push_back(entry.get<double>());
      }
    } else {
      fail(ErrorCode::parse, sub + ": field 'kind' must be cosine or explicit");
    }
  } else {
    fail(ErrorCode::parse, context + ": field 'circuit' must be leaky_transistor or amplifier");
  }
  return config;
}

std::string read_text_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  if (!file && !file.eof()) fail(ErrorCode::io, "failed reading '" + path + "'");
  return buffer.str();
}

}  // namespace srgpair
