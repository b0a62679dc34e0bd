// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "orchsim/core.hpp"
#include "orchsim/topology.hpp"

namespace orchsim {

enum class ExchangeMode { AllToAll, AllGather };

/// A concrete data movement: who sends what where, and by which collective.
struct ExchangePlan {
  Rearrangement rearrangement;
  VolumeMatrix per_pair_volumes;
  ExchangeMode mode = ExchangeMode::AllToAll;
};

enum class Bottleneck { None, IntraNode, InterNode };

struct ExchangeCostReport {
  double modeled_time = 0.0;
  Bottleneck bottleneck = Bottleneck::None;
  std::int64_t total_inter_volume = 0;   // between instances on different nodes
  std::int64_t total_intra_volume = 0;   // between distinct instances on one node
  std::int64_t local_volume = 0;         // items that stay on their instance
  std::vector<std::int64_t> per_node_egress;
  std::int64_t peak_resident_volume = 0;
};

ExchangePlan make_exchange_plan(const std::vector<MiniBatch>& batches, const Rearrangement& re,
                                ExchangeMode mode);

/// One instance's metadata about its local batch: slot lengths only.
struct LengthRecord {
  int instance = 0;
  int slot = 0;
  std::int64_t length = 0;

  auto operator<=>(const LengthRecord&) const = default;
};

struct GatheredLengths {
  std::vector<std::vector<LengthRecord>> views;  // one identical table per instance
  std::int64_t metadata_volume = 0;              // records moved, ring all-gather
};

/// Every instance learns every (instance, slot, length) triple. Lengths are
/// the only input the balancers need, so this is the entire pre-balancing
/// communication.
GatheredLengths gather_lengths(const std::vector<MiniBatch>& local_batches);

/// Moves batches per the plan and models the time it takes. All-gather time
/// follows the ring bound (d-1) * max L / inter_bw; all-to-all serializes
/// each instance's inter- and intra-node egress on its two links, scaled by
/// `alltoall_constant`.
std::pair<std::vector<MiniBatch>, ExchangeCostReport> simulate_exchange(
    const ExchangePlan& plan, const std::vector<MiniBatch>& batches, const ClusterTopology& topo,
    double alltoall_constant = 1.0);

/// Inverse bijection: inverse(re) composed with re is the identity.
Rearrangement inverse(const Rearrangement& re);

/// outer o inner^-1: maps each item's current (post-inner) location straight
/// to its outer destination, folding two exchanges into one.
Rearrangement compose(const Rearrangement& outer, const Rearrangement& inner_inverse_of);

}  // namespace orchsim
