// SPDX-License-Identifier: Apache-2.0

#include "orchsim/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace orchsim {

namespace {

using nlohmann::ordered_json;

std::string csv_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

std::string hex64(std::uint64_t value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "0x%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

const char* bottleneck_name(Bottleneck b) {
  switch (b) {
    case Bottleneck::None: return "none";
    case Bottleneck::IntraNode: return "intra_node";
    case Bottleneck::InterNode: return "inter_node";
  }
  return "none";
}

const char* mode_name(PaddingMode mode) {
  return mode == PaddingMode::Padded ? "padded" : "unpadded";
}

const char* variant_name(CostVariant variant) {
  switch (variant) {
    case CostVariant::LinearOnly: return "linear_only";
    case CostVariant::TransformerQuadratic: return "transformer_quadratic";
    case CostVariant::ConvTransformerPadded: return "convtransformer_padded";
  }
  return "linear_only";
}

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::GreedyUnpadded: return "greedy_unpadded";
    case PolicyKind::BinaryPadded: return "binary_padded";
    case PolicyKind::QuadraticTolerance: return "quadratic_tolerance";
    case PolicyKind::ConvTransformer: return "convtransformer";
  }
  return "greedy_unpadded";
}

ordered_json phase_json(const PhaseReport& phase) {
  ordered_json j;
  j["name"] = phase.name;
  j["pre_max_cost"] = phase.pre_max_cost;
  j["pre_mean_cost"] = phase.pre_mean_cost;
  j["pre_imbalance"] = phase.pre_imbalance;
  j["post_max_cost"] = phase.post_max_cost;
  j["post_mean_cost"] = phase.post_mean_cost;
  j["post_imbalance"] = phase.post_imbalance;
  j["balance_objective"] = phase.balance_objective;
  j["solver_seconds"] = phase.solver_seconds;
  j["metadata_gather_volume"] = phase.metadata_gather_volume;
  j["nodewise_applied"] = phase.nodewise_applied;
  j["baseline_max_egress"] = phase.baseline_max_egress;
  j["nodewise_max_egress"] = phase.nodewise_max_egress;
  j["baseline_total_inter"] = phase.baseline_total_inter;
  j["nodewise_total_inter"] = phase.nodewise_total_inter;
  return j;
}

ordered_json exchange_json(const ExchangeRecord& record) {
  ordered_json j;
  j["label"] = record.label;
  j["modeled_time"] = record.report.modeled_time;
  j["bottleneck"] = bottleneck_name(record.report.bottleneck);
  j["total_inter_volume"] = record.report.total_inter_volume;
  j["total_intra_volume"] = record.report.total_intra_volume;
  j["local_volume"] = record.report.local_volume;
  j["per_node_egress"] = record.report.per_node_egress;
  j["peak_resident_volume"] = record.report.peak_resident_volume;
  return j;
}

ordered_json iteration_json(const IterationReport& report, int index) {
  ordered_json j;
  j["iteration"] = index;
  auto& phases = j["phases"] = ordered_json::array();
  for (const PhaseReport& phase : report.phases) phases.push_back(phase_json(phase));
  auto& exchanges = j["exchanges"] = ordered_json::array();
  std::int64_t inter_forward = 0;
  for (const ExchangeRecord& record : report.exchanges) {
    exchanges.push_back(exchange_json(record));
    inter_forward += record.report.total_inter_volume;
  }
  j["data_exchange_count"] = report.data_exchange_count;
  j["composed_exchange_count"] = report.composed_exchange_count;
  j["delivery_exchanges_per_encoder"] = report.delivery_exchanges_per_encoder;
  j["total_exchange_time"] = report.total_exchange_time;
  // Every forward exchange is mirrored in the backward pass.
  j["total_inter_volume_forward"] = inter_forward;
  j["total_inter_volume_with_backward"] = 2 * inter_forward;
  j["assembly_ok"] = report.assembly_ok;
  j["audit_ok"] = report.audit_ok;
  j["overlap_ok"] = report.overlap_ok;
  ordered_json overlap;
  overlap["forward_span"] = report.overlap.forward_span;
  overlap["solver_total"] = report.overlap.solver_total;
  overlap["excess"] = report.overlap.excess;
  auto& entries = overlap["timeline"] = ordered_json::array();
  for (const TimelineEntry& entry : report.overlap.entries) {
    entries.push_back({{"label", entry.label},
                       {"lane", entry.lane},
                       {"start", entry.start},
                       {"end", entry.end}});
  }
  j["overlap"] = std::move(overlap);
  j["llm_entry_fingerprint"] = hex64(report.llm_entry_fingerprint);
  return j;
}

}  // namespace

std::string run_report_json(const RunReport& run, const RunConfig& config) {
  ordered_json j;
  j["schema"] = "orchsim-report-v1";
  ordered_json topo;
  topo["d"] = config.topology.instance_count;
  topo["c"] = config.topology.instances_per_node;
  topo["intra_bw"] = config.topology.intra_bandwidth;
  topo["inter_bw"] = config.topology.inter_bandwidth;
  j["topology"] = std::move(topo);
  ordered_json phases = ordered_json::array();
  for (const PhaseSpec& phase : config.phases) {
    ordered_json p;
    p["name"] = phase.name;
    p["modality"] = phase.modality.value_or("llm");
    p["policy"] = policy_name(phase.policy.kind);
    p["cost_variant"] = variant_name(phase.cost_model.variant);
    p["padding_mode"] = mode_name(phase.cost_model.padding_mode);
    p["downsample_rate"] = phase.downsample_rate;
    phases.push_back(std::move(p));
  }
  j["phases"] = std::move(phases);
  j["seed"] = config.seed;
  j["iterations"] = config.iterations;
  j["example_count"] = run.example_count;
  ordered_json switches;
  switches["no_balance"] = config.switches.no_balance;
  switches["llm_only_balance"] = config.switches.llm_only_balance;
  switches["all_pad"] = config.switches.all_pad;
  switches["all_rmpad"] = config.switches.all_rmpad;
  switches["allgather_communicator"] = config.switches.allgather_communicator;
  switches["disable_nodewise"] = config.switches.disable_nodewise;
  j["switches"] = std::move(switches);
  ordered_json summary;
  summary["mean_pre_imbalance"] = run.mean_pre_imbalance;
  summary["mean_post_imbalance"] = run.mean_post_imbalance;
  summary["mean_nodewise_volume_ratio"] = run.mean_nodewise_volume_ratio;
  summary["total_exchange_time"] = run.total_exchange_time;
  j["summary"] = std::move(summary);
  auto& reports = j["iteration_reports"] = ordered_json::array();
  for (std::size_t i = 0; i < run.iterations.size(); ++i) {
    reports.push_back(iteration_json(run.iterations[i], static_cast<int>(i)));
  }
  return j.dump(2) + "\n";
}

std::string run_report_csv(const RunReport& run) {
  std::string csv =
      "iteration,phase,pre_max_cost,pre_mean_cost,pre_imbalance,post_max_cost,post_mean_cost,"
      "post_imbalance,balance_objective,solver_seconds,metadata_gather_volume,nodewise_applied,"
      "baseline_max_egress,nodewise_max_egress,baseline_total_inter,nodewise_total_inter,"
      "iter_exchange_time,iter_overlap_ok,iter_assembly_ok\n";
  for (std::size_t i = 0; i < run.iterations.size(); ++i) {
    const IterationReport& report = run.iterations[i];
    for (const PhaseReport& phase : report.phases) {
      csv += std::to_string(i) + "," + phase.name + "," + csv_double(phase.pre_max_cost) + "," +
             csv_double(phase.pre_mean_cost) + "," + csv_double(phase.pre_imbalance) + "," +
             csv_double(phase.post_max_cost) + "," + csv_double(phase.post_mean_cost) + "," +
             csv_double(phase.post_imbalance) + "," + csv_double(phase.balance_objective) + "," +
             csv_double(phase.solver_seconds) + "," +
             std::to_string(phase.metadata_gather_volume) + "," +
             (phase.nodewise_applied ? "1" : "0") + "," +
             std::to_string(phase.baseline_max_egress) + "," +
             std::to_string(phase.nodewise_max_egress) + "," +
             std::to_string(phase.baseline_total_inter) + "," +
             std::to_string(phase.nodewise_total_inter) + "," +
             csv_double(report.total_exchange_time) + "," + (report.overlap_ok ? "1" : "0") +
             "," + (report.assembly_ok ? "1" : "0") + "\n";
    }
  }
  return csv;
}

void write_run_report(const RunReport& run, const RunConfig& config,
                      const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  const auto write_file = [&](const std::string& name, const std::string& content) {
    const std::string path = out_dir + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << content;
    if (!out) throw IoError("failed while writing " + path);
  };
  write_file("report.json", run_report_json(run, config));
  write_file("summary.csv", run_report_csv(run));
}

}  // namespace orchsim
