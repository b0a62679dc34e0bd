// SPDX-License-Identifier: Apache-2.0

#include "orchsim/exchange.hpp"

#include <algorithm>
#include <string>

namespace orchsim {

ExchangePlan make_exchange_plan(const std::vector<MiniBatch>& batches, const Rearrangement& re,
                                ExchangeMode mode) {
  ExchangePlan plan;
  plan.mode = mode;
  plan.rearrangement = re;
  if (mode == ExchangeMode::AllToAll) {
    plan.per_pair_volumes = volume_matrix(batches, re);
  } else {
    const int d = re.instance_count();
    if (static_cast<int>(batches.size()) != d) {
      throw std::invalid_argument("rearrangement instance count does not match batch count");
    }
    VolumeMatrix volumes(d);
    for (int i = 0; i < d; ++i) {
      const std::int64_t len = batch_length(batches[i]);
      for (int j = 0; j < d; ++j) {
        if (j != i) volumes.at(i, j) = len;
      }
    }
    plan.per_pair_volumes = volumes;
  }
  return plan;
}

GatheredLengths gather_lengths(const std::vector<MiniBatch>& local_batches) {
  const int d = static_cast<int>(local_batches.size());
  std::vector<LengthRecord> table;
  for (int i = 0; i < d; ++i) {
    for (std::size_t s = 0; s < local_batches[i].items.size(); ++s) {
      table.push_back({i, static_cast<int>(s), local_batches[i].items[s].length});
    }
  }
  std::sort(table.begin(), table.end());
  GatheredLengths gathered;
  gathered.views.assign(d, table);
  gathered.metadata_volume = static_cast<std::int64_t>(d - 1) * static_cast<std::int64_t>(table.size());
  return gathered;
}

std::pair<std::vector<MiniBatch>, ExchangeCostReport> simulate_exchange(
    const ExchangePlan& plan, const std::vector<MiniBatch>& batches, const ClusterTopology& topo,
    double alltoall_constant) {
  validate_topology(topo);
  const int d = topo.instance_count;
  if (plan.rearrangement.instance_count() != d || static_cast<int>(batches.size()) != d) {
    throw std::invalid_argument("exchange plan does not match batches/topology");
  }
  if (plan.mode == ExchangeMode::AllToAll &&
      !(plan.per_pair_volumes == volume_matrix(batches, plan.rearrangement))) {
    throw std::invalid_argument("exchange plan volumes are stale for these batches");
  }

  std::vector<MiniBatch> moved = apply(plan.rearrangement, batches);

  const VolumeMatrix& volumes = plan.per_pair_volumes;
  ExchangeCostReport report;
  report.per_node_egress.assign(topo.node_count(), 0);

  double worst_time = 0.0;
  Bottleneck worst_kind = Bottleneck::None;
  std::int64_t total_batch_lengths = 0;
  std::int64_t peak = 0;
  for (int i = 0; i < d; ++i) {
    const int node = topo.node_of(i);
    std::int64_t inter = 0, intra = 0, incoming = 0;
    for (int j = 0; j < d; ++j) {
      if (j == i) continue;
      const std::int64_t out = volumes.at(i, j);
      if (topo.node_of(j) == node) {
        intra += out;
      } else {
        inter += out;
      }
      incoming += volumes.at(j, i);
    }
    report.total_inter_volume += inter;
    report.total_intra_volume += intra;
    report.local_volume += volumes.at(i, i);
    report.per_node_egress[node] += inter;
    total_batch_lengths += batch_length(batches[i]);
    peak = std::max(peak, std::max(incoming, inter + intra) + volumes.at(i, i));

    const double inter_time = static_cast<double>(inter) / topo.inter_bandwidth;
    const double intra_time = static_cast<double>(intra) / topo.intra_bandwidth;
    if (inter_time + intra_time > worst_time) {
      worst_time = inter_time + intra_time;
      worst_kind = inter_time >= intra_time ? Bottleneck::InterNode : Bottleneck::IntraNode;
    }
  }

  if (plan.mode == ExchangeMode::AllToAll) {
    report.modeled_time = alltoall_constant * worst_time;
    report.bottleneck = worst_kind;
    report.peak_resident_volume = peak;
  } else {
    std::int64_t max_len = 0;
    for (const MiniBatch& b : batches) max_len = std::max(max_len, batch_length(b));
    report.modeled_time =
        static_cast<double>(d - 1) * static_cast<double>(max_len) / topo.inter_bandwidth;
    report.bottleneck = d > 1 && max_len > 0 ? Bottleneck::InterNode : Bottleneck::None;
    report.peak_resident_volume = total_batch_lengths;
  }
  return {std::move(moved), report};
}

Rearrangement inverse(const Rearrangement& re) {
  std::map<SlotRef, SlotRef> inverted;
  for (const auto& [src, dst] : re.moves()) {
    if (!inverted.emplace(dst, src).second) {
      throw std::invalid_argument("rearrangement is not invertible");
    }
  }
  return Rearrangement(re.instance_count(), std::move(inverted));
}

Rearrangement compose(const Rearrangement& outer, const Rearrangement& inner_inverse_of) {
  if (outer.instance_count() != inner_inverse_of.instance_count()) {
    throw std::invalid_argument("composed rearrangements span different instance counts");
  }
  if (outer.size() != inner_inverse_of.size()) {
    throw std::invalid_argument("composed rearrangements cover different item universes");
  }
  std::map<SlotRef, SlotRef> moves;
  for (const auto& [origin, current] : inner_inverse_of.moves()) {
    moves.emplace(current, outer.dest_of(origin));
  }
  return Rearrangement(outer.instance_count(), std::move(moves));
}

}  // namespace orchsim
