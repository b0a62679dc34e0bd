// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "orchsim/orchestrator.hpp"
#include "orchsim/topology.hpp"
#include "orchsim/workload.hpp"

namespace orchsim {

/// Ablation arms. Switches compose; all_pad and all_rmpad contradict each
/// other and are rejected.
struct BaselineSwitches {
  bool no_balance = false;
  bool llm_only_balance = false;
  bool all_pad = false;
  bool all_rmpad = false;
  bool allgather_communicator = false;
  bool disable_nodewise = false;
};

struct GenerationSpec {
  std::vector<TaskProfile> profiles;
  std::vector<double> weights;
  int examples = 0;
};

struct VerifyCaps {
  int greedy_trials = 10000;
  int padded_trials = 5000;
  int nodewise_trials = 1000;
  int compose_trials = 1000;
  std::uint64_t seed = 12345;
};

struct RunConfig {
  ClusterTopology topology;
  std::vector<PhaseSpec> phases;
  std::optional<std::string> trace_path;
  std::optional<GenerationSpec> generation;
  int iterations = 1;
  std::uint64_t seed = 0;
  BaselineSwitches switches;
  double alltoall_constant = 1.0;
  double seconds_per_cost_unit = 1e-6;
  double seconds_per_solver_op = 5e-8;
  std::set<ModalityId> passthrough_modalities = {"text"};
  VerifyCaps verify;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Full structural validation: topology, phases, exactly one data source,
/// switch compatibility.
void validate_run_config(const RunConfig& config);

/// Modalities an input trace may reference under this configuration.
std::set<ModalityId> modality_registry(const RunConfig& config);

OrchestratorOptions orchestrator_options(const RunConfig& config);

}  // namespace orchsim
