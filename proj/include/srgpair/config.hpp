#pragma once

#include <string>
#include <vector>

#include "srgpair/circuits.hpp"
#include "srgpair/regions.hpp"
#include "srgpair/srg.hpp"

namespace srgpair {

inline constexpr int kConfigSchema = 1;

struct PairConfig {
  OpPtr a;
  OpPtr b;
  std::string label;
};

/// Builds one operator from its JSON description (see README for the kind
/// table). Errors name the offending field.
[[nodiscard]] OpPtr op_from_json(const std::string& text);

/// Top-level pair file: {"schema": 1, "a": <op>, "b": <op>, "label"?}.
[[nodiscard]] PairConfig pair_from_json(const std::string& text);

/// Region description: half_plane / disk / disk_complement / semimonotone /
/// full_plane / union / intersection.
[[nodiscard]] Region region_from_json(const std::string& text);

enum class CircuitKind { leaky_transistor, amplifier };

struct CircuitConfig {
  CircuitKind kind = CircuitKind::leaky_transistor;
  LeakyTransistorProblem leaky;
  AmplifierProblem amplifier;
  std::vector<double> t;
};

/// Top-level circuit file: {"schema": 1, "circuit": ..., params, "source",
/// "solver"?}.
[[nodiscard]] CircuitConfig circuit_from_json(const std::string& text);

[[nodiscard]] std::string read_text_file(const std::string& path);

}  // namespace srgpair
