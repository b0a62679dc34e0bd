// SPDX-License-Identifier: Apache-2.0

#include "orchsim/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace orchsim {

namespace {

using nlohmann::json;

PaddingMode padding_mode_from(const std::string& name) {
  if (name == "padded") return PaddingMode::Padded;
  if (name == "unpadded") return PaddingMode::Unpadded;
  throw ConfigError("unknown padding mode '" + name + "'");
}

CostVariant variant_from(const std::string& name) {
  if (name == "linear_only") return CostVariant::LinearOnly;
  if (name == "transformer_quadratic") return CostVariant::TransformerQuadratic;
  if (name == "convtransformer_padded") return CostVariant::ConvTransformerPadded;
  throw ConfigError("unknown cost variant '" + name + "'");
}

PolicyKind policy_kind_from(const std::string& name) {
  if (name == "greedy_unpadded") return PolicyKind::GreedyUnpadded;
  if (name == "binary_padded") return PolicyKind::BinaryPadded;
  if (name == "quadratic_tolerance") return PolicyKind::QuadraticTolerance;
  if (name == "convtransformer") return PolicyKind::ConvTransformer;
  throw ConfigError("unknown policy kind '" + name + "'");
}

DistKind dist_kind_from(const std::string& name) {
  if (name == "lognormal") return DistKind::LogNormal;
  if (name == "uniform") return DistKind::Uniform;
  if (name == "fixed") return DistKind::Fixed;
  throw ConfigError("unknown distribution kind '" + name + "'");
}

LengthDist parse_dist(const json& j) {
  LengthDist dist;
  dist.kind = dist_kind_from(j.at("kind").get<std::string>());
  switch (dist.kind) {
    case DistKind::LogNormal:
      dist.mu = j.at("mu").get<double>();
      dist.sigma = j.at("sigma").get<double>();
      break;
    case DistKind::Uniform:
      dist.lo = j.at("lo").get<std::int64_t>();
      dist.hi = j.at("hi").get<std::int64_t>();
      break;
    case DistKind::Fixed:
      dist.lo = j.at("value").get<std::int64_t>();
      break;
  }
  dist.clip_min = j.value("clip_min", std::int64_t{1});
  dist.clip_max = j.value("clip_max", std::int64_t{0});
  return dist;
}

TaskProfile parse_profile(const json& j) {
  TaskProfile profile;
  profile.name = j.at("name").get<std::string>();
  for (const auto& part : j.at("parts")) {
    profile.parts.push_back(
        {part.at("modality").get<std::string>(), parse_dist(part.at("dist"))});
  }
  if (j.contains("correlation")) {
    const auto& corr = j.at("correlation");
    profile.correlation = corr.at("rho").get<double>();
    profile.correlated_a = corr.at("a").get<std::string>();
    profile.correlated_b = corr.at("b").get<std::string>();
  }
  return profile;
}

BalancePolicy parse_policy(const json& j) {
  BalancePolicy policy;
  policy.kind = policy_kind_from(j.at("kind").get<std::string>());
  policy.lambda = j.value("lambda", 0.0);
  policy.tolerance_v = j.value("tolerance_v", std::int64_t{0});
  return policy;
}

CostModel parse_cost_model(const json& j) {
  CostModel model;
  model.alpha = j.value("alpha", 1.0);
  model.beta = j.value("beta", 0.0);
  model.padding_mode = padding_mode_from(j.at("padding_mode").get<std::string>());
  model.variant = variant_from(j.at("variant").get<std::string>());
  if (model.alpha < 0.0 || model.beta < 0.0) {
    throw ConfigError("cost model alpha/beta must be nonnegative");
  }
  return model;
}

PhaseSpec parse_phase(const json& j) {
  PhaseSpec phase;
  phase.name = j.at("name").get<std::string>();
  const std::string modality = j.at("modality").get<std::string>();
  if (modality != "llm") phase.modality = modality;
  phase.policy = parse_policy(j.at("policy"));
  phase.cost_model = parse_cost_model(j.at("cost_model"));
  phase.downsample_rate = j.value("downsample_rate", std::int64_t{1});
  return phase;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    RunConfig config;
    const auto& topo = j.at("topology");
    config.topology.instance_count = topo.at("d").get<int>();
    config.topology.instances_per_node = topo.at("c").get<int>();
    config.topology.intra_bandwidth = topo.at("intra_bw").get<double>();
    config.topology.inter_bandwidth = topo.at("inter_bw").get<double>();

    for (const auto& phase : j.at("phases")) config.phases.push_back(parse_phase(phase));

    if (j.contains("trace")) config.trace_path = j.at("trace").get<std::string>();
    if (j.contains("generation")) {
      GenerationSpec gen;
      const auto& g = j.at("generation");
      for (const auto& profile : g.at("profiles")) gen.profiles.push_back(parse_profile(profile));
      gen.weights = g.at("weights").get<std::vector<double>>();
      gen.examples = g.at("examples").get<int>();
      config.generation = std::move(gen);
    }

    config.iterations = j.value("iterations", 1);
    config.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("switches")) {
      const auto& s = j.at("switches");
      config.switches.no_balance = s.value("no_balance", false);
      config.switches.llm_only_balance = s.value("llm_only_balance", false);
      config.switches.all_pad = s.value("all_pad", false);
      config.switches.all_rmpad = s.value("all_rmpad", false);
      config.switches.allgather_communicator = s.value("allgather_communicator", false);
      config.switches.disable_nodewise = s.value("disable_nodewise", false);
    }
    config.alltoall_constant = j.value("alltoall_constant", 1.0);
    config.seconds_per_cost_unit = j.value("seconds_per_cost_unit", 1e-6);
    config.seconds_per_solver_op = j.value("seconds_per_solver_op", 5e-8);
    if (j.contains("passthrough_modalities")) {
      config.passthrough_modalities.clear();
      for (const auto& m : j.at("passthrough_modalities")) {
        config.passthrough_modalities.insert(m.get<std::string>());
      }
    }
    if (j.contains("verify")) {
      const auto& v = j.at("verify");
      config.verify.greedy_trials = v.value("greedy_trials", config.verify.greedy_trials);
      config.verify.padded_trials = v.value("padded_trials", config.verify.padded_trials);
      config.verify.nodewise_trials = v.value("nodewise_trials", config.verify.nodewise_trials);
      config.verify.compose_trials = v.value("compose_trials", config.verify.compose_trials);
      config.verify.seed = v.value("seed", config.verify.seed);
    }
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

void validate_run_config(const RunConfig& config) {
  validate_topology(config.topology);
  validate_phases(config.phases);
  if (config.trace_path.has_value() == config.generation.has_value()) {
    throw ConfigError("exactly one of 'trace' or 'generation' must be present");
  }
  if (config.generation) {
    if (config.generation->profiles.size() != config.generation->weights.size()) {
      throw ConfigError("generation profiles and weights must be parallel");
    }
    for (const TaskProfile& profile : config.generation->profiles) validate_profile(profile);
    if (config.generation->examples < 1) throw ConfigError("generation.examples must be >= 1");
  }
  if (config.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (config.switches.all_pad && config.switches.all_rmpad) {
    throw ConfigError("all_pad and all_rmpad cannot both be set");
  }
  if (config.alltoall_constant <= 0.0) throw ConfigError("alltoall_constant must be > 0");
  const auto registry = modality_registry(config);
  if (config.generation) {
    for (const TaskProfile& profile : config.generation->profiles) {
      for (const ProfilePart& part : profile.parts) {
        if (registry.count(part.modality) == 0) {
          throw ConfigError("profile '" + profile.name + "' uses modality '" + part.modality +
                            "' that no phase or passthrough covers");
        }
      }
    }
  }
}

std::set<ModalityId> modality_registry(const RunConfig& config) {
  std::set<ModalityId> registry = config.passthrough_modalities;
  for (const PhaseSpec& phase : config.phases) {
    if (!is_backbone(phase)) registry.insert(*phase.modality);
  }
  return registry;
}

OrchestratorOptions orchestrator_options(const RunConfig& config) {
  OrchestratorOptions options;
  options.balance_encoders = !config.switches.no_balance && !config.switches.llm_only_balance;
  options.balance_llm = !config.switches.no_balance;
  options.nodewise = !config.switches.disable_nodewise;
  options.exchange_mode = config.switches.allgather_communicator ? ExchangeMode::AllGather
                                                                 : ExchangeMode::AllToAll;
  if (config.switches.all_pad) {
    options.encoder_policy_override = BalancePolicy{PolicyKind::BinaryPadded, 0, 0.0};
  } else if (config.switches.all_rmpad) {
    options.encoder_policy_override = BalancePolicy{PolicyKind::GreedyUnpadded, 0, 0.0};
  }
  options.alltoall_constant = config.alltoall_constant;
  options.seconds_per_cost_unit = config.seconds_per_cost_unit;
  options.seconds_per_solver_op = config.seconds_per_solver_op;
  options.passthrough_modalities = config.passthrough_modalities;
  return options;
}

}  // namespace orchsim
