// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "orchsim/config.hpp"
#include "orchsim/orchestrator.hpp"

namespace orchsim {

struct RunReport {
  std::vector<IterationReport> iterations;
  int example_count = 0;
  // Means over all phase records of a run.
  double mean_post_imbalance = 0.0;
  double mean_pre_imbalance = 0.0;
  double mean_nodewise_volume_ratio = 1.0;  // nodewise / baseline total inter volume
  double total_exchange_time = 0.0;
};

/// Loads or generates the trace per the config.
std::vector<Example> resolve_examples(const RunConfig& config);

/// Splits examples into `iterations` consecutive global batches (round-robin
/// origin assignment inside each) and runs them through the orchestrator.
RunReport run_simulation(const RunConfig& config);

/// Same, but also hands back the per-iteration outcomes for callers that
/// audit placement or entry multisets.
RunReport run_simulation(const RunConfig& config, std::vector<IterationOutcome>* outcomes);

}  // namespace orchsim
