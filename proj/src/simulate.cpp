// SPDX-License-Identifier: Apache-2.0

#include "orchsim/simulate.hpp"

#include <algorithm>

#include "orchsim/workload.hpp"

namespace orchsim {

std::vector<Example> resolve_examples(const RunConfig& config) {
  const auto registry = modality_registry(config);
  if (config.trace_path) {
    return load_trace(*config.trace_path, &registry);
  }
  const GenerationSpec& gen = *config.generation;
  return generate(gen.profiles, gen.weights, gen.examples, config.seed);
}

RunReport run_simulation(const RunConfig& config) { return run_simulation(config, nullptr); }

RunReport run_simulation(const RunConfig& config, std::vector<IterationOutcome>* outcomes) {
  validate_run_config(config);
  const std::vector<Example> examples = resolve_examples(config);
  const int n = static_cast<int>(examples.size());
  if (n < config.iterations) {
    throw ConfigError("trace holds fewer examples than iterations");
  }
  const OrchestratorOptions options = orchestrator_options(config);

  RunReport run;
  run.example_count = n;
  const int base = n / config.iterations;
  int consumed = 0;
  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    const int size = iteration + 1 == config.iterations ? n - consumed : base;
    std::vector<Example> global_batch(examples.begin() + consumed,
                                      examples.begin() + consumed + size);
    consumed += size;
    std::vector<int> origins(size);
    for (int j = 0; j < size; ++j) origins[j] = j % config.topology.instance_count;

    IterationOutcome outcome =
        run_iteration(global_batch, origins, config.phases, config.topology, options);
    run.iterations.push_back(outcome.report);
    if (outcomes != nullptr) outcomes->push_back(std::move(outcome));
  }

  double pre_sum = 0.0, post_sum = 0.0, ratio_sum = 0.0;
  int phase_records = 0, ratio_records = 0;
  for (const IterationReport& report : run.iterations) {
    run.total_exchange_time += report.total_exchange_time;
    for (const PhaseReport& phase : report.phases) {
      pre_sum += phase.pre_imbalance;
      post_sum += phase.post_imbalance;
      ++phase_records;
      if (phase.baseline_total_inter > 0) {
        ratio_sum += static_cast<double>(phase.nodewise_total_inter) /
                     static_cast<double>(phase.baseline_total_inter);
        ++ratio_records;
      }
    }
  }
  if (phase_records > 0) {
    run.mean_pre_imbalance = pre_sum / phase_records;
    run.mean_post_imbalance = post_sum / phase_records;
  }
  if (ratio_records > 0) run.mean_nodewise_volume_ratio = ratio_sum / ratio_records;
  return run;
}

}  // namespace orchsim
