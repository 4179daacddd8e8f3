#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edmc::harness {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Quick invariant suites on small random instances.
std::vector<CheckResult> run_selfcheck(std::uint64_t seed = 1);

}  // namespace edmc::harness
