// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "orchsim/config.hpp"

namespace orchsim {

struct VerifyOptions {
  VerifyCaps caps;
  // Deliberately corrupts the greedy comparator under test, to prove the
  // sweep detects broken balancers.
  bool inject_fault = false;
};

struct VerifyOutcome {
  bool ok = true;
  std::vector<std::string> lines;     // one status line per check
  std::vector<std::string> failures;  // counterexample dumps
};

/// Runs the oracle suites: greedy approximation bound, padded-bound
/// minimality, node-wise hosting optimality, and rearrangement composition.
VerifyOutcome run_verification(const VerifyOptions& options);

}  // namespace orchsim
