#pragma once

#include <string>
#include <vector>

namespace dsic {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// The oracle/property suite behind `dsic verify`: value oracles, serial
// reference equivalences, the gradient suite, pyramid equivalences, gating
// invariants, and replay determinism. Checks run in a fixed order; the first
// failure determines the reported culprit.
std::vector<CheckResult> run_verification();

}  // namespace dsic
