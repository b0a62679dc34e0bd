// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "orchsim/core.hpp"

namespace orchsim {

/// Two-level cluster model: d instances grouped into nodes of c, with a fast
/// intra-node link and a slower inter-node link.
struct ClusterTopology {
  int instance_count = 1;
  int instances_per_node = 1;
  double intra_bandwidth = 1.0;
  double inter_bandwidth = 1.0;

  int node_count() const { return instance_count / instances_per_node; }
  int node_of(int instance) const { return instance / instances_per_node; }
};

/// Throws on d % c != 0 or intra_bw < inter_bw or nonpositive bandwidth.
void validate_topology(const ClusterTopology& topo);

/// entry(i, j): total item length moving from source instance i into
/// destination batch j. Items that stay put land on the diagonal.
class VolumeMatrix {
 public:
  VolumeMatrix() = default;
  explicit VolumeMatrix(int d) : d_(d), entries_(static_cast<std::size_t>(d) * d, 0) {}

  int dimension() const { return d_; }
  std::int64_t& at(int i, int j) { return entries_[static_cast<std::size_t>(i) * d_ + j]; }
  std::int64_t at(int i, int j) const { return entries_[static_cast<std::size_t>(i) * d_ + j]; }

  std::int64_t row_sum(int i) const;
  std::int64_t column_sum(int j) const;
  std::int64_t total() const;

  bool operator==(const VolumeMatrix&) const = default;

 private:
  int d_ = 0;
  std::vector<std::int64_t> entries_;
};

VolumeMatrix volume_matrix(const std::vector<MiniBatch>& batches, const Rearrangement& re);

/// hosting[b] = node hosting destination batch b; exactly c batches per node.
/// Returns, per node, the volume its instances send to batches hosted on
/// other nodes.
std::vector<std::int64_t> inter_node_egress(const VolumeMatrix& volumes,
                                            const ClusterTopology& topo,
                                            const std::vector<int>& hosting);

/// hosting[b] = node b / c: destination batch b stays on instance b.
std::vector<int> identity_hosting(const ClusterTopology& topo);

struct HostingSolution {
  std::vector<int> hosting;
  std::int64_t max_egress = 0;
  std::vector<std::int64_t> per_node_egress;
  std::int64_t nodes_visited = 0;  // search effort, deterministic for an input
};

/// Exact minimizer of the maximum per-node inter-node egress over all ways
/// of hosting d destination batches on d/c nodes, c per node. Branch and
/// bound with a greedy incumbent; never worse than identity hosting.
HostingSolution solve_hosting(const VolumeMatrix& volumes, const ClusterTopology& topo);

struct NodewiseResult {
  Rearrangement rearrangement;   // input rearrangement composed with the permutation
  std::vector<int> hosting;
  std::int64_t max_egress = 0;
  std::vector<std::int64_t> per_node_egress;
  std::int64_t baseline_max_egress = 0;   // identity hosting
  std::vector<int> batch_to_instance;     // the induced permutation
  std::int64_t nodes_visited = 0;
};

/// Permutes which instance hosts which destination batch so the slow
/// inter-node links carry as little of the rearrangement as possible. The
/// balancing objective is unchanged because destination batches keep their
/// contents.
NodewiseResult nodewise_rearrange(const std::vector<MiniBatch>& batches, const Rearrangement& re,
                                  const ClusterTopology& topo);

/// True iff the multiset of per-batch costs is identical before and after a
/// permutation; detects any content change sneaking in with the relabeling.
bool permutation_invariance_check(const std::vector<MiniBatch>& before,
                                  const std::vector<MiniBatch>& after, const CostModel& model);

}  // namespace orchsim
