#pragma once

#include <string>
#include <vector>

#include "srgpair/srg.hpp"

namespace srgpair {

struct CalculusOptions {
  int n_inputs = 200;
  std::uint64_t seed = 0;
  double tol = 1e-10;
};

struct RuleResult {
  std::string rule;
  std::string pair_tag;
  bool pass = false;
  double deviation = 0.0;
  std::uint64_t compared = 0;
  std::string detail;
};

/// Exercises the cloud transformation rules (scaling, role swap, identity
/// inverses, self pairs, affine shifts, resolvent composition, inner
/// composition, congruence) over a fixed operator roster. Every check uses
/// matched inputs so clouds can be compared combination by combination.
[[nodiscard]] std::vector<RuleResult> run_calculus_suite(const CalculusOptions& options = {});

[[nodiscard]] bool all_passed(const std::vector<RuleResult>& results);

}  // namespace srgpair
