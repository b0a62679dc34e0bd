// SPDX-License-Identifier: Apache-2.0

#include "orchsim/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <string>

#include <json.hpp>

namespace orchsim {

namespace {

// All randomness flows through explicit bit manipulation so traces are
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::int64_t sample_length(const LengthDist& dist, double z) {
  std::int64_t len = 1;
  switch (dist.kind) {
    case DistKind::Fixed:
      len = dist.lo;
      break;
    case DistKind::Uniform: {
      const double u = normal_cdf(z);
      len = dist.lo +
            static_cast<std::int64_t>(u * static_cast<double>(dist.hi - dist.lo + 1));
      len = std::min(len, dist.hi);
      break;
    }
    case DistKind::LogNormal:
      len = static_cast<std::int64_t>(std::ceil(std::exp(dist.mu + dist.sigma * z)));
      break;
  }
  if (dist.clip_max > 0) len = std::min(len, dist.clip_max);
  return std::max<std::int64_t>({len, dist.clip_min, 1});
}

}  // namespace

void validate_profile(const TaskProfile& profile) {
  if (profile.name.empty()) throw ConfigError("task profile needs a name");
  if (profile.parts.empty()) throw ConfigError("task profile '" + profile.name + "' has no parts");
  std::set<ModalityId> seen;
  for (const ProfilePart& part : profile.parts) {
    if (part.modality.empty()) {
      throw ConfigError("task profile '" + profile.name + "' has a part with empty modality");
    }
    if (!seen.insert(part.modality).second) {
      throw ConfigError("task profile '" + profile.name + "' repeats modality " + part.modality);
    }
    const LengthDist& d = part.dist;
    switch (d.kind) {
      case DistKind::Fixed:
        if (d.lo < 1) throw ConfigError("fixed length must be >= 1 in profile " + profile.name);
        break;
      case DistKind::Uniform:
        if (d.lo < 1 || d.hi < d.lo) {
          throw ConfigError("uniform bounds must satisfy 1 <= lo <= hi in profile " +
                            profile.name);
        }
        break;
      case DistKind::LogNormal:
        if (d.sigma < 0.0) throw ConfigError("lognormal sigma must be >= 0 in profile " +
                                             profile.name);
        break;
    }
    if (d.clip_min < 1 || (d.clip_max > 0 && d.clip_max < d.clip_min)) {
      throw ConfigError("bad clip range in profile " + profile.name);
    }
  }
  if (profile.correlation != 0.0) {
    if (profile.correlation < -1.0 || profile.correlation > 1.0) {
      throw ConfigError("correlation must lie in [-1, 1] in profile " + profile.name);
    }
    const bool a = seen.count(profile.correlated_a) > 0;
    const bool b = seen.count(profile.correlated_b) > 0;
    if (!a || !b || profile.correlated_a == profile.correlated_b) {
      throw ConfigError("correlated modalities must be two distinct parts of profile " +
                        profile.name);
    }
  }
}

std::vector<Example> generate(const std::vector<TaskProfile>& profiles,
                              const std::vector<double>& weights, int n, std::uint64_t seed) {
  if (profiles.empty() || profiles.size() != weights.size()) {
    throw ConfigError("profiles and weights must be non-empty and parallel");
  }
  double weight_sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ConfigError("profile weights must be nonnegative");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ConfigError("profile weights must sum to 1");
  }
  if (n < 1) throw ConfigError("example count must be >= 1");
  for (const TaskProfile& profile : profiles) validate_profile(profile);

  Rng rng(seed);
  std::vector<Example> examples;
  examples.reserve(n);
  for (int id = 0; id < n; ++id) {
    const double pick = rng.uniform01();
    std::size_t chosen = profiles.size() - 1;
    double cumulative = 0.0;
    for (std::size_t p = 0; p < profiles.size(); ++p) {
      cumulative += weights[p];
      if (pick < cumulative) {
        chosen = p;
        break;
      }
    }
    const TaskProfile& profile = profiles[chosen];

    // Correlated modalities share a latent normal draw through the copula.
    double z_shared = 0.0;
    if (profile.correlation != 0.0) z_shared = rng.normal();

    Example ex;
    ex.example_id = id;
    for (const ProfilePart& part : profile.parts) {
      double z = rng.normal();
      if (profile.correlation != 0.0) {
        if (part.modality == profile.correlated_a) {
          z = z_shared;
        } else if (part.modality == profile.correlated_b) {
          const double rho = profile.correlation;
          z = rho * z_shared + std::sqrt(1.0 - rho * rho) * z;
        }
      }
      ex.parts.push_back({part.modality, sample_length(part.dist, z)});
      ex.interleave_order.push_back(static_cast<int>(ex.interleave_order.size()));
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

CompositionStats composition_stats(const std::vector<Example>& examples) {
  std::set<ModalityId> registry;
  for (const Example& ex : examples) {
    for (const ExamplePart& part : ex.parts) registry.insert(part.modality);
  }

  CompositionStats stats;
  stats.modalities.assign(registry.begin(), registry.end());
  stats.histograms.assign(stats.modalities.size(), {});
  stats.mean_ratio.assign(stats.modalities.size(), 0.0);
  stats.variance.assign(stats.modalities.size(), 0.0);
  stats.example_count = examples.size();
  if (examples.empty()) return stats;

  std::vector<double> sums(stats.modalities.size(), 0.0);
  std::vector<double> square_sums(stats.modalities.size(), 0.0);
  for (const Example& ex : examples) {
    const std::int64_t total = interleaved_length(ex);
    for (std::size_t m = 0; m < stats.modalities.size(); ++m) {
      std::int64_t modality_total = 0;
      for (std::size_t k = 0; k < ex.parts.size(); ++k) {
        if (ex.parts[k].modality == stats.modalities[m]) {
          modality_total += ex.encoded_lengths[k];
        }
      }
      const double ratio = static_cast<double>(modality_total) / static_cast<double>(total);
      const int bucket = std::min(9, static_cast<int>(ratio * 10.0));
      stats.histograms[m][bucket] += 1;
      sums[m] += ratio;
      square_sums[m] += ratio * ratio;
    }
  }
  const double count = static_cast<double>(examples.size());
  for (std::size_t m = 0; m < stats.modalities.size(); ++m) {
    stats.mean_ratio[m] = sums[m] / count;
    stats.variance[m] = std::max(0.0, square_sums[m] / count - stats.mean_ratio[m] * stats.mean_ratio[m]);
  }
  return stats;
}

void save_trace(const std::vector<Example>& examples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open trace for writing: " + path);
  for (const Example& ex : examples) {
    nlohmann::ordered_json record;
    record["example_id"] = ex.example_id;
    auto& parts = record["parts"] = nlohmann::ordered_json::array();
    for (const ExamplePart& part : ex.parts) {
      parts.push_back({{"modality", part.modality}, {"metadata_length", part.metadata_length}});
    }
    record["interleave_order"] = ex.interleave_order;
    out << record.dump() << '\n';
  }
  if (!out) throw IoError("failed while writing trace: " + path);
}

std::vector<Example> load_trace(const std::string& path, const std::set<ModalityId>* allowed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace: " + path);
  std::vector<Example> examples;
  std::set<std::int64_t> ids;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
      Example ex;
      ex.example_id = record.at("example_id").get<std::int64_t>();
      for (const auto& part : record.at("parts")) {
        ex.parts.push_back({part.at("modality").get<std::string>(),
                            part.at("metadata_length").get<std::int64_t>()});
      }
      ex.interleave_order = record.at("interleave_order").get<std::vector<int>>();
      validate_example(ex);
      if (!ids.insert(ex.example_id).second) {
        throw ConfigError("duplicate example_id " + std::to_string(ex.example_id));
      }
      if (allowed != nullptr) {
        for (const ExamplePart& part : ex.parts) {
          if (allowed->count(part.modality) == 0) {
            throw ConfigError("unknown modality '" + part.modality + "'");
          }
        }
      }
      examples.push_back(std::move(ex));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(e.what()) + " (trace line " + std::to_string(line_number) +
                        ")");
    } catch (const nlohmann::json::exception& e) {
      throw IoError("trace parse error at line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return examples;
}

}  // namespace orchsim
