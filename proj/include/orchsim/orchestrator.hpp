// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "orchsim/balancers.hpp"
#include "orchsim/core.hpp"
#include "orchsim/exchange.hpp"
#include "orchsim/topology.hpp"

namespace orchsim {

/// One submodule of the model: an encoder for a modality, or the backbone
/// (modality unset). Encoders downsample their metadata into subsequences.
struct PhaseSpec {
  std::string name;
  std::optional<ModalityId> modality;
  BalancePolicy policy;
  CostModel cost_model;
  std::int64_t downsample_rate = 1;
};

bool is_backbone(const PhaseSpec& phase);
void validate_phases(const std::vector<PhaseSpec>& phases);

struct OrchestratorOptions {
  bool balance_encoders = true;
  bool balance_llm = true;
  bool nodewise = true;
  ExchangeMode exchange_mode = ExchangeMode::AllToAll;
  // false: reset subsequences to their origins and rearrange from there,
  // spending two exchanges per encoder instead of one.
  bool compose_exchanges = true;
  // Fault injection for assembly tests: deliver encoder outputs with the
  // backbone mapping alone, as if they had never been rearranged.
  bool apply_backbone_mapping_directly = false;
  double alltoall_constant = 1.0;
  double seconds_per_cost_unit = 1e-6;
  double seconds_per_solver_op = 5e-8;
  std::optional<BalancePolicy> encoder_policy_override;
  std::set<ModalityId> passthrough_modalities = {"text"};
};

struct PhaseReport {
  std::string name;
  double pre_max_cost = 0.0;
  double pre_mean_cost = 0.0;
  double post_max_cost = 0.0;
  double post_mean_cost = 0.0;
  double pre_imbalance = 1.0;   // max / mean
  double post_imbalance = 1.0;
  double balance_objective = 0.0;
  double solver_seconds = 0.0;
  std::int64_t metadata_gather_volume = 0;
  bool nodewise_applied = false;
  std::int64_t baseline_max_egress = 0;     // identity hosting
  std::int64_t nodewise_max_egress = 0;
  std::int64_t baseline_total_inter = 0;
  std::int64_t nodewise_total_inter = 0;
};

struct ExchangeRecord {
  std::string label;
  ExchangeCostReport report;
};

struct TimelineEntry {
  std::string label;
  int lane = 0;  // 0 forward compute, 1 prefetch (solvers), 2 exchange
  double start = 0.0;
  double end = 0.0;
};

struct OverlapTimeline {
  std::vector<TimelineEntry> entries;
  bool overlap_ok = true;
  double forward_span = 0.0;
  double solver_total = 0.0;
  double excess = 0.0;
};

/// Schedules next-iteration solver work on the prefetch lane of the current
/// forward span; exchanges sit on the critical path at phase boundaries.
/// overlap_ok iff all solver work fits inside the span.
OverlapTimeline overlap_schedule(double forward_span_seconds,
                                 const std::vector<std::pair<std::string, double>>& solver_work,
                                 const std::vector<std::pair<std::string, double>>& exchanges);

/// A delivered subsequence, as it sits on an instance after all exchanges.
struct PlacedPart {
  std::int64_t example_id = 0;
  int part_index = 0;
  ModalityId modality;
  std::int64_t encoded_length = 0;

  bool operator==(const PlacedPart&) const = default;
};

struct IterationReport {
  std::vector<PhaseReport> phases;
  std::vector<ExchangeRecord> exchanges;
  int data_exchange_count = 0;
  int composed_exchange_count = 0;
  std::map<std::string, int> delivery_exchanges_per_encoder;
  bool assembly_ok = false;
  bool audit_ok = false;
  bool overlap_ok = false;
  OverlapTimeline overlap;
  double total_exchange_time = 0.0;
  std::uint64_t llm_entry_fingerprint = 0;
};

struct IterationOutcome {
  IterationReport report;
  // Per instance: the backbone's input, examples in destination order with
  // parts interleaved.
  std::vector<std::vector<PlacedPart>> assembled;
  Rearrangement llm_rearrangement;
  // Sorted (example_id, interleaved length) entering the backbone phase.
  std::vector<std::pair<std::int64_t, std::int64_t>> llm_entry;
};

/// Runs one simulated training iteration: per-encoder balancing and
/// exchange, backbone balancing on interleaved lengths, composed delivery of
/// subsequences, and assembly verification.
IterationOutcome run_iteration(const std::vector<Example>& examples,
                               const std::vector<int>& origins,
                               const std::vector<PhaseSpec>& phases, const ClusterTopology& topo,
                               const OrchestratorOptions& options = {});

/// True iff every example's parts all reside on its backbone destination
/// instance, in interleave order, with per-universe buffers ordered by
/// destination slot.
bool verify_assembly(const std::vector<Example>& examples, const std::vector<int>& origins,
                     const Rearrangement& llm_re,
                     const std::map<std::string, std::vector<MiniBatch>>& delivered,
                     const std::vector<PhaseSpec>& phases,
                     const std::set<ModalityId>& passthrough);

}  // namespace orchsim
