// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "orchsim/core.hpp"

namespace orchsim {

enum class DistKind { LogNormal, Uniform, Fixed };

struct LengthDist {
  DistKind kind = DistKind::Fixed;
  double mu = 0.0;           // LogNormal: mean of log
  double sigma = 1.0;        // LogNormal: std of log
  std::int64_t lo = 1;       // Uniform lower bound; Fixed value
  std::int64_t hi = 1;       // Uniform upper bound
  std::int64_t clip_min = 1;
  std::int64_t clip_max = 0;  // 0 = unbounded
};

struct ProfilePart {
  ModalityId modality;
  LengthDist dist;
};

/// One task family in the training mix: which modalities an example carries
/// and how their metadata lengths are distributed. Two modalities may be
/// tied by a Gaussian-copula correlation (speech length vs transcript
/// length, say).
struct TaskProfile {
  std::string name;
  std::vector<ProfilePart> parts;
  double correlation = 0.0;
  ModalityId correlated_a;
  ModalityId correlated_b;
};

void validate_profile(const TaskProfile& profile);

/// Deterministic for a fixed seed: examples drawn from profiles by weight,
/// ids 0..n-1, interleave order as declared.
std::vector<Example> generate(const std::vector<TaskProfile>& profiles,
                              const std::vector<double>& weights, int n, std::uint64_t seed);

/// Per-modality share of the interleaved sequence, across a set of examples.
struct CompositionStats {
  std::vector<ModalityId> modalities;                  // sorted
  std::vector<std::array<std::int64_t, 10>> histograms;  // ratio buckets [0,0.1) .. [0.9,1]
  std::vector<double> mean_ratio;
  std::vector<double> variance;
  std::size_t example_count = 0;
};

CompositionStats composition_stats(const std::vector<Example>& examples);

/// Line-delimited JSON, one example per line:
/// {"example_id": .., "parts": [{"modality": .., "metadata_length": ..}, ..],
///  "interleave_order": [..]}
void save_trace(const std::vector<Example>& examples, const std::string& path);

/// Inverse of save_trace. Malformed records fail with the line number;
/// modalities outside `allowed` (when given) are a configuration error.
std::vector<Example> load_trace(const std::string& path,
                                const std::set<ModalityId>* allowed = nullptr);

}  // namespace orchsim
