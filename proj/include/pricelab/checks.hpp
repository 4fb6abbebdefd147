#pragma once

#include <string>
#include <vector>

namespace pricelab {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast numerical self-checks: pricing function vs grid search, likelihood
// gradient vs finite differences, solver vs brute force, and log-concavity
// of every noise model and link.
std::vector<CheckResult> run_selftest();

}  // namespace pricelab
