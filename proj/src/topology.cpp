// SPDX-License-Identifier: Apache-2.0

#include "orchsim/topology.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

namespace orchsim {

void validate_topology(const ClusterTopology& topo) {
  if (topo.instance_count < 1 || topo.instances_per_node < 1) {
    throw std::invalid_argument("topology needs at least one instance and one per node");
  }
  if (topo.instance_count % topo.instances_per_node != 0) {
    throw std::invalid_argument("instance count must be divisible by instances per node");
  }
  if (topo.inter_bandwidth <= 0.0 || topo.intra_bandwidth < topo.inter_bandwidth) {
    throw std::invalid_argument("bandwidths must satisfy intra >= inter > 0");
  }
}

std::int64_t VolumeMatrix::row_sum(int i) const {
  std::int64_t sum = 0;
  for (int j = 0; j < d_; ++j) sum += at(i, j);
  return sum;
}

std::int64_t VolumeMatrix::column_sum(int j) const {
  std::int64_t sum = 0;
  for (int i = 0; i < d_; ++i) sum += at(i, j);
  return sum;
}

std::int64_t VolumeMatrix::total() const {
  return std::accumulate(entries_.begin(), entries_.end(), std::int64_t{0});
}

VolumeMatrix volume_matrix(const std::vector<MiniBatch>& batches, const Rearrangement& re) {
  const int d = re.instance_count();
  if (static_cast<int>(batches.size()) != d) {
    throw std::invalid_argument("rearrangement instance count does not match batch count");
  }
  VolumeMatrix volumes(d);
  for (const auto& [src, dst] : re.moves()) {
    if (src.instance >= d || src.slot >= static_cast<int>(batches[src.instance].items.size())) {
      throw std::invalid_argument("rearrangement covers a slot absent from the input batches");
    }
    volumes.at(src.instance, dst.instance) += batches[src.instance].items[src.slot].length;
  }
  return volumes;
}

std::vector<int> identity_hosting(const ClusterTopology& topo) {
  std::vector<int> hosting(topo.instance_count);
  for (int b = 0; b < topo.instance_count; ++b) hosting[b] = topo.node_of(b);
  return hosting;
}

std::vector<std::int64_t> inter_node_egress(const VolumeMatrix& volumes,
                                            const ClusterTopology& topo,
                                            const std::vector<int>& hosting) {
  validate_topology(topo);
  const int d = topo.instance_count;
  const int nodes = topo.node_count();
  if (volumes.dimension() != d || static_cast<int>(hosting.size()) != d) {
    throw std::invalid_argument("volume matrix / hosting size does not match topology");
  }
  std::vector<int> per_node(nodes, 0);
  for (int node : hosting) {
    if (node < 0 || node >= nodes) throw std::invalid_argument("hosting references unknown node");
    per_node[node] += 1;
  }
  for (int count : per_node) {
    if (count != topo.instances_per_node) {
      throw std::invalid_argument("hosting must place exactly c batches per node");
    }
  }

  std::vector<std::int64_t> egress(nodes, 0);
  for (int i = 0; i < d; ++i) {
    const int src_node = topo.node_of(i);
    for (int b = 0; b < d; ++b) {
      if (hosting[b] != src_node) egress[src_node] += volumes.at(i, b);
    }
  }
  return egress;
}

namespace {

// Minimize max_n (node_total[n] - sum of gains of batches hosted on n),
// where gain[n][b] is the volume node n's instances send into batch b.
struct HostingSearch {
  int nodes = 0;
  int capacity = 0;
  int batch_count = 0;
  std::vector<std::vector<std::int64_t>> gain;        // [node][batch]
  std::vector<std::int64_t> node_total;               // row sums per node
  std::vector<std::vector<int>> preferred;            // per node, batches by descending gain
  std::vector<int> order;                             // branching order over batches

  std::vector<int> assignment;                        // batch -> node, -1 unassigned
  std::vector<int> remaining;                         // capacity left per node
  std::vector<std::int64_t> gained;                   // accumulated gain per node

  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  std::vector<int> best_assignment;
  std::int64_t visited = 0;

  // Most gain node n can still collect: its top remaining[n] unassigned batches.
  std::int64_t optimistic_gain(int n) const {
    std::int64_t total = 0;
    int taken = 0;
    for (int b : preferred[n]) {
      if (taken == remaining[n]) break;
      if (assignment[b] == -1) {
        total += gain[n][b];
        ++taken;
      }
    }
    return total;
  }

  std::int64_t lower_bound() const {
    std::int64_t bound = 0;
    for (int n = 0; n < nodes; ++n) {
      bound = std::max(bound, node_total[n] - gained[n] - optimistic_gain(n));
    }
    return bound;
  }

  std::int64_t evaluate(const std::vector<int>& hosting) const {
    std::vector<std::int64_t> egress(nodes, 0);
    for (int n = 0; n < nodes; ++n) egress[n] = node_total[n];
    for (int b = 0; b < batch_count; ++b) egress[hosting[b]] -= gain[hosting[b]][b];
    return *std::max_element(egress.begin(), egress.end());
  }

  void offer(const std::vector<int>& hosting) {
    const std::int64_t value = evaluate(hosting);
    if (value < best) {
      best = value;
      best_assignment = hosting;
    }
  }

  void dfs(int depth) {
    ++visited;
    if (lower_bound() >= best) return;
    if (depth == batch_count) {
      offer(assignment);
      return;
    }
    const int b = order[depth];
    // Visit nodes by descending gain for this batch; deterministic ties by
    // node index.
    std::vector<int> candidates;
    for (int n = 0; n < nodes; ++n) {
      if (remaining[n] > 0) candidates.push_back(n);
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int c) { return gain[a][b] > gain[c][b]; });
    for (int n : candidates) {
      assignment[b] = n;
      remaining[n] -= 1;
      gained[n] += gain[n][b];
      dfs(depth + 1);
      gained[n] -= gain[n][b];
      remaining[n] += 1;
      assignment[b] = -1;
    }
  }
};

}  // namespace

HostingSolution solve_hosting(const VolumeMatrix& volumes, const ClusterTopology& topo) {
  validate_topology(topo);
  const int d = topo.instance_count;
  if (volumes.dimension() != d) {
    throw std::invalid_argument("volume matrix dimension does not match topology");
  }
  const int nodes = topo.node_count();
  const int c = topo.instances_per_node;

  HostingSearch search;
  search.nodes = nodes;
  search.capacity = c;
  search.batch_count = d;
  search.gain.assign(nodes, std::vector<std::int64_t>(d, 0));
  search.node_total.assign(nodes, 0);
  for (int i = 0; i < d; ++i) {
    const int n = topo.node_of(i);
    for (int b = 0; b < d; ++b) {
      search.gain[n][b] += volumes.at(i, b);
      search.node_total[n] += volumes.at(i, b);
    }
  }
  search.preferred.assign(nodes, {});
  for (int n = 0; n < nodes; ++n) {
    auto& list = search.preferred[n];
    list.resize(d);
    for (int b = 0; b < d; ++b) list[b] = b;
    std::stable_sort(list.begin(), list.end(),
                     [&](int a, int b2) { return search.gain[n][a] > search.gain[n][b2]; });
  }

  // Branch on contested batches first: large spread between the best and the
  // second-best node tightens the bound early.
  search.order.resize(d);
  std::vector<std::int64_t> regret(d, 0);
  for (int b = 0; b < d; ++b) {
    std::int64_t top = 0, second = 0;
    for (int n = 0; n < nodes; ++n) {
      const std::int64_t g = search.gain[n][b];
      if (g > top) {
        second = top;
        top = g;
      } else if (g > second) {
        second = g;
      }
    }
    regret[b] = top - second;
    search.order[b] = b;
  }
  std::stable_sort(search.order.begin(), search.order.end(),
                   [&](int a, int b) { return regret[a] > regret[b]; });

  search.assignment.assign(d, -1);
  search.remaining.assign(nodes, c);
  search.gained.assign(nodes, 0);

  // Incumbents: the identity hosting and a greedy that gives each batch to
  // the highest-gain node with space.
  search.offer(identity_hosting(topo));
  {
    std::vector<int> greedy(d, -1);
    std::vector<int> room(nodes, c);
    for (int b : search.order) {
      int pick = -1;
      std::int64_t pick_gain = -1;
      for (int n = 0; n < nodes; ++n) {
        if (room[n] > 0 && search.gain[n][b] > pick_gain) {
          pick = n;
          pick_gain = search.gain[n][b];
        }
      }
      greedy[b] = pick;
      room[pick] -= 1;
    }
    search.offer(greedy);
  }

  search.dfs(0);

  HostingSolution solution;
  solution.hosting = search.best_assignment;
  solution.per_node_egress = inter_node_egress(volumes, topo, solution.hosting);
  solution.max_egress =
      *std::max_element(solution.per_node_egress.begin(), solution.per_node_egress.end());
  solution.nodes_visited = search.visited;
  return solution;
}

NodewiseResult nodewise_rearrange(const std::vector<MiniBatch>& batches, const Rearrangement& re,
                                  const ClusterTopology& topo) {
  validate_topology(topo);
  if (re.instance_count() != topo.instance_count) {
    throw std::invalid_argument("rearrangement instance count does not match topology");
  }
  const int d = topo.instance_count;
  const VolumeMatrix volumes = volume_matrix(batches, re);

  HostingSolution solved = solve_hosting(volumes, topo);
  auto baseline = inter_node_egress(volumes, topo, identity_hosting(topo));

  // Within a node, batches take instances in ascending batch order; the
  // placement inside the node does not change inter-node egress.
  std::vector<std::vector<int>> node_batches(topo.node_count());
  for (int b = 0; b < d; ++b) node_batches[solved.hosting[b]].push_back(b);
  std::vector<int> batch_to_instance(d, -1);
  for (int n = 0; n < topo.node_count(); ++n) {
    int next = n * topo.instances_per_node;
    for (int b : node_batches[n]) batch_to_instance[b] = next++;
  }

  std::map<SlotRef, SlotRef> moves;
  for (const auto& [src, dst] : re.moves()) {
    moves.emplace(src, SlotRef{batch_to_instance[dst.instance], dst.slot});
  }

  NodewiseResult result;
  result.rearrangement = Rearrangement(d, std::move(moves));
  result.hosting = solved.hosting;
  result.max_egress = solved.max_egress;
  result.per_node_egress = solved.per_node_egress;
  result.baseline_max_egress = *std::max_element(baseline.begin(), baseline.end());
  result.batch_to_instance = std::move(batch_to_instance);
  result.nodes_visited = solved.nodes_visited;
  return result;
}

bool permutation_invariance_check(const std::vector<MiniBatch>& before,
                                  const std::vector<MiniBatch>& after, const CostModel& model) {
  if (before.size() != after.size()) return false;
  std::vector<double> a, b;
  a.reserve(before.size());
  b.reserve(after.size());
  for (const MiniBatch& batch : before) a.push_back(cost(model, batch));
  for (const MiniBatch& batch : after) b.push_back(cost(model, batch));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace orchsim
