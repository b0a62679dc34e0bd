// SPDX-License-Identifier: Apache-2.0

#include "orchsim/balancers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>
#include <string>
#include <utility>

namespace orchsim {

namespace {

struct Sourced {
  SeqItem item;
  SlotRef source;
};

// Source slots are assigned by position within each origin instance, in
// input order, so the rearrangement can be audited against the original
// mini-batches.
std::vector<Sourced> index_sources(int d, const std::vector<SeqItem>& items) {
  std::vector<int> next_slot(d, 0);
  std::vector<Sourced> out;
  out.reserve(items.size());
  for (const SeqItem& item : items) {
    if (item.origin_instance < 0 || item.origin_instance >= d) {
      throw std::invalid_argument("item origin instance outside [0, d)");
    }
    if (item.length < 1) throw std::invalid_argument("item length must be >= 1");
    out.push_back({item, SlotRef{item.origin_instance, next_slot[item.origin_instance]++}});
  }
  return out;
}

PaddingMode native_mode(PolicyKind kind) {
  return kind == PolicyKind::BinaryPadded ? PaddingMode::Padded : PaddingMode::Unpadded;
}

BalanceResult assemble(int d, const BalancePolicy& policy,
                       const std::vector<std::vector<Sourced>>& packed) {
  const PaddingMode mode = native_mode(policy.kind);
  const CostModel model = policy_cost_model(policy);
  std::map<SlotRef, SlotRef> moves;
  std::vector<MiniBatch> batches(d);
  for (int i = 0; i < d; ++i) {
    batches[i].instance = i;
    batches[i].padding_mode = mode;
    for (std::size_t s = 0; s < packed[i].size(); ++s) {
      batches[i].items.push_back(packed[i][s].item);
      moves.emplace(packed[i][s].source, SlotRef{i, static_cast<int>(s)});
    }
  }
  double objective = 0.0;
  for (const MiniBatch& b : batches) objective = std::max(objective, cost(model, b));
  return BalanceResult{Rearrangement(d, std::move(moves)), std::move(batches), objective};
}

std::vector<std::vector<Sourced>> group_by_origin(int d, const std::vector<Sourced>& items) {
  std::vector<std::vector<Sourced>> packed(d);
  for (const Sourced& s : items) packed[s.item.origin_instance].push_back(s);
  return packed;
}

// Rearranging is pointless (and costs communication) when it does not beat
// the arrangement already in place, so every balancer falls back to the
// identity on ties.
BalanceResult never_worse(BalanceResult algo, int d, const BalancePolicy& policy,
                          const std::vector<Sourced>& indexed) {
  BalanceResult ident = assemble(d, policy, group_by_origin(d, indexed));
  if (ident.objective_value <= algo.objective_value) return ident;
  return algo;
}

std::vector<Sourced> sorted_descending(std::vector<Sourced> items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const Sourced& a, const Sourced& b) { return a.item.length > b.item.length; });
  return items;
}

std::vector<Sourced> sorted_ascending(std::vector<Sourced> items) {
  std::stable_sort(items.begin(), items.end(),
                   [](const Sourced& a, const Sourced& b) { return a.item.length < b.item.length; });
  return items;
}

// Min-sum greedy distribution, ties broken by lowest batch index. `packed`
// may arrive pre-seeded.
void distribute_min_sum(const std::vector<Sourced>& descending,
                        std::vector<std::vector<Sourced>>& packed) {
  using Entry = std::pair<std::int64_t, int>;  // (sum, batch index)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t i = 0; i < packed.size(); ++i) {
    std::int64_t sum = 0;
    for (const Sourced& s : packed[i]) sum += s.item.length;
    queue.push({sum, static_cast<int>(i)});
  }
  for (const Sourced& s : descending) {
    auto [sum, idx] = queue.top();
    queue.pop();
    packed[idx].push_back(s);
    queue.push({sum + s.item.length, idx});
  }
}

// GetLeastBatches: pack ascending-sorted items greedily, opening a new batch
// whenever adding one more item would push the padded length past `bound`.
std::vector<std::vector<std::size_t>> get_least_batches(const std::vector<Sourced>& ascending,
                                                        std::int64_t bound) {
  std::vector<std::vector<std::size_t>> groups(1);
  for (std::size_t idx = 0; idx < ascending.size(); ++idx) {
    const std::int64_t len = ascending[idx].item.length;
    if (static_cast<std::int64_t>(groups.back().size() + 1) * len > bound) {
      groups.emplace_back();
    }
    groups.back().push_back(idx);
  }
  return groups;
}

struct PaddedSearch {
  std::int64_t bound = 0;
  std::vector<std::vector<std::size_t>> groups;
};

PaddedSearch padded_binary_search(int d, const std::vector<Sourced>& ascending) {
  const std::int64_t max_len = ascending.back().item.length;
  const std::int64_t n = static_cast<std::int64_t>(ascending.size());
  std::int64_t left = max_len;
  std::int64_t right = max_len * (n / d + 1);
  while (left < right) {
    const std::int64_t mid = (left + right) / 2;
    if (static_cast<int>(get_least_batches(ascending, mid).size()) <= d) {
      right = mid;
    } else {
      left = mid + 1;
    }
  }
  return PaddedSearch{left, get_least_batches(ascending, left)};
}

// Batch accumulator used by the quadratic-tolerance comparator.
struct BatchState {
  std::int64_t sum = 0;
  std::int64_t square_sum = 0;
};

bool tolerance_less(const BatchState& a, const BatchState& b, std::int64_t v) {
  if (std::llabs(a.sum - b.sum) < v) return a.square_sum < b.square_sum;
  return a.sum < b.sum;
}

void require_valid_d(int d) {
  if (d < 1) throw std::invalid_argument("instance count must be >= 1");
}

}  // namespace

CostModel policy_cost_model(const BalancePolicy& policy) {
  switch (policy.kind) {
    case PolicyKind::GreedyUnpadded:
      return CostModel{1.0, 0.0, PaddingMode::Unpadded, CostVariant::LinearOnly};
    case PolicyKind::BinaryPadded:
      return CostModel{1.0, 0.0, PaddingMode::Padded, CostVariant::LinearOnly};
    case PolicyKind::QuadraticTolerance:
      return CostModel{1.0, policy.lambda, PaddingMode::Unpadded,
                       CostVariant::TransformerQuadratic};
    case PolicyKind::ConvTransformer:
      return CostModel{1.0, policy.lambda, PaddingMode::Unpadded,
                       CostVariant::ConvTransformerPadded};
  }
  throw std::logic_error("unknown policy kind");
}

BalanceResult identity_arrangement(const BalancePolicy& policy, int instance_count,
                                   const std::vector<SeqItem>& items) {
  require_valid_d(instance_count);
  return assemble(instance_count, policy, group_by_origin(instance_count,
                                                          index_sources(instance_count, items)));
}

BalanceResult balance_greedy_unpadded(int instance_count, const std::vector<SeqItem>& items) {
  require_valid_d(instance_count);
  const BalancePolicy policy{PolicyKind::GreedyUnpadded, 0, 0.0};
  auto indexed = index_sources(instance_count, items);
  std::vector<std::vector<Sourced>> packed(instance_count);
  distribute_min_sum(sorted_descending(indexed), packed);
  return never_worse(assemble(instance_count, policy, packed), instance_count, policy, indexed);
}

BalanceResult balance_binary_padded(int instance_count, const std::vector<SeqItem>& items) {
  require_valid_d(instance_count);
  if (items.empty()) {
    throw std::invalid_argument("padded balancing needs at least one item");
  }
  const BalancePolicy policy{PolicyKind::BinaryPadded, 0, 0.0};
  auto indexed = index_sources(instance_count, items);
  auto ascending = sorted_ascending(indexed);
  PaddedSearch search = padded_binary_search(instance_count, ascending);
  std::vector<std::vector<Sourced>> packed(instance_count);
  for (std::size_t g = 0; g < search.groups.size(); ++g) {
    for (std::size_t idx : search.groups[g]) packed[g].push_back(ascending[idx]);
  }
  return never_worse(assemble(instance_count, policy, packed), instance_count, policy, indexed);
}

BalanceResult balance_quadratic_tolerance(int instance_count, const std::vector<SeqItem>& items,
                                          double lambda, std::int64_t tolerance_v) {
  require_valid_d(instance_count);
  if (lambda < 0.0 || tolerance_v < 0) {
    throw std::invalid_argument("lambda and tolerance_v must be nonnegative");
  }
  const BalancePolicy policy{PolicyKind::QuadraticTolerance, tolerance_v, lambda};
  auto indexed = index_sources(instance_count, items);
  std::vector<std::vector<Sourced>> packed(instance_count);
  std::vector<BatchState> states(instance_count);
  // The tolerance comparator is not transitive, so batches are selected by a
  // linear scan rather than a heap; the first minimum wins, which keeps ties
  // on the lowest instance index.
  for (const Sourced& s : sorted_descending(indexed)) {
    int best = 0;
    for (int i = 1; i < instance_count; ++i) {
      if (tolerance_less(states[i], states[best], tolerance_v)) best = i;
    }
    packed[best].push_back(s);
    states[best].sum += s.item.length;
    states[best].square_sum += s.item.length * s.item.length;
  }
  return never_worse(assemble(instance_count, policy, packed), instance_count, policy, indexed);
}

BalanceResult balance_convtransformer(int instance_count, const std::vector<SeqItem>& items,
                                      double lambda) {
  require_valid_d(instance_count);
  if (items.empty()) {
    throw std::invalid_argument("convtransformer balancing needs at least one item");
  }
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const BalancePolicy policy{PolicyKind::ConvTransformer, 0, lambda};
  auto indexed = index_sources(instance_count, items);
  auto descending = sorted_descending(indexed);

  std::vector<std::vector<Sourced>> seeded(1);
  std::int64_t bound = 0;
  {
    std::vector<std::vector<Sourced>> greedy_packed(instance_count);
    distribute_min_sum(descending, greedy_packed);
    for (const auto& batch : greedy_packed) {
      std::int64_t sum = 0;
      for (const Sourced& s : batch) sum += s.item.length;
      bound = std::max(bound, sum);
    }
  }

  std::size_t consumed = 0;
  for (; consumed < descending.size(); ++consumed) {
    const std::int64_t len = descending[consumed].item.length;
    if (static_cast<std::int64_t>(seeded.back().size() + 1) * len > bound) {
      if (static_cast<int>(seeded.size()) == instance_count) break;
      seeded.emplace_back();
    }
    seeded.back().push_back(descending[consumed]);
  }
  seeded.resize(instance_count);
  std::vector<Sourced> remaining(descending.begin() + consumed, descending.end());
  distribute_min_sum(remaining, seeded);
  return never_worse(assemble(instance_count, policy, seeded), instance_count, policy, indexed);
}

BalanceResult balance(const BalancePolicy& policy, int instance_count,
                      const std::vector<SeqItem>& items) {
  switch (policy.kind) {
    case PolicyKind::GreedyUnpadded:
      return balance_greedy_unpadded(instance_count, items);
    case PolicyKind::BinaryPadded:
      return balance_binary_padded(instance_count, items);
    case PolicyKind::QuadraticTolerance:
      return balance_quadratic_tolerance(instance_count, items, policy.lambda,
                                         policy.tolerance_v);
    case PolicyKind::ConvTransformer:
      return balance_convtransformer(instance_count, items, policy.lambda);
  }
  throw std::logic_error("unknown policy kind");
}

std::int64_t min_feasible_padded_bound(int instance_count, const std::vector<SeqItem>& items) {
  require_valid_d(instance_count);
  if (items.empty()) {
    throw std::invalid_argument("padded balancing needs at least one item");
  }
  return padded_binary_search(instance_count, sorted_ascending(index_sources(instance_count, items)))
      .bound;
}

bool padded_bound_feasible(int instance_count, const std::vector<SeqItem>& items,
                           std::int64_t bound) {
  require_valid_d(instance_count);
  if (items.empty()) {
    throw std::invalid_argument("padded balancing needs at least one item");
  }
  auto ascending = sorted_ascending(index_sources(instance_count, items));
  if (bound < ascending.back().item.length) return false;
  return static_cast<int>(get_least_batches(ascending, bound).size()) <= instance_count;
}

namespace {

// Shared exhaustive search over canonical assignments: item i may open batch
// k only when k equals the number of batches already in use, which prunes
// instance-relabeling symmetry.
struct OracleSearch {
  int d = 0;
  const CostModel* model = nullptr;
  std::vector<std::int64_t> lengths;  // descending
  std::vector<int> order;             // lengths[k] == items[order[k]].length

  std::vector<std::int64_t> count, sum, square_sum, max_len;
  std::vector<double> batch_cost;
  std::vector<int> current, best_assignment;
  double best = std::numeric_limits<double>::infinity();

  double cost_of(int b) const {
    if (count[b] == 0) return 0.0;
    const std::int64_t raw = model->padding_mode == PaddingMode::Padded
                                 ? count[b] * max_len[b]
                                 : sum[b];
    const double linear = model->alpha * static_cast<double>(raw);
    switch (model->variant) {
      case CostVariant::LinearOnly:
        return linear;
      case CostVariant::TransformerQuadratic:
        if (model->padding_mode == PaddingMode::Unpadded) {
          return linear + model->beta * static_cast<double>(square_sum[b]);
        }
        return linear + model->beta / static_cast<double>(count[b]) *
                            static_cast<double>(raw) * static_cast<double>(raw);
      case CostVariant::ConvTransformerPadded: {
        const double longest = static_cast<double>(max_len[b]);
        return linear + model->beta * static_cast<double>(count[b]) * longest * longest;
      }
    }
    return linear;
  }

  void run(std::size_t idx, int used, double current_max) {
    if (current_max >= best) return;
    if (idx == lengths.size()) {
      best = current_max;
      best_assignment = current;
      return;
    }
    const int open = std::min(used + 1, d);
    for (int b = 0; b < open; ++b) {
      const std::int64_t len = lengths[idx];
      count[b] += 1;
      sum[b] += len;
      square_sum[b] += len * len;
      const std::int64_t prev_max = max_len[b];
      max_len[b] = std::max(prev_max, len);
      const double prev_cost = batch_cost[b];
      batch_cost[b] = cost_of(b);
      current[idx] = b;

      run(idx + 1, std::max(used, b + 1), std::max(current_max, batch_cost[b]));

      batch_cost[b] = prev_cost;
      max_len[b] = prev_max;
      square_sum[b] -= len * len;
      sum[b] -= len;
      count[b] -= 1;
    }
  }
};

}  // namespace

OracleResult oracle_optimal(int instance_count, const std::vector<SeqItem>& items,
                            const CostModel& model, const OracleLimits& limits) {
  require_valid_d(instance_count);
  if (static_cast<int>(items.size()) > limits.max_items ||
      instance_count > limits.max_instances) {
    throw SizeCapError("oracle instance exceeds caps (n <= " + std::to_string(limits.max_items) +
                       ", d <= " + std::to_string(limits.max_instances) + ")");
  }
  if (items.empty()) return OracleResult{{}, 0.0};

  OracleSearch search;
  search.d = instance_count;
  search.model = &model;
  search.order.resize(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) search.order[i] = static_cast<int>(i);
  std::stable_sort(search.order.begin(), search.order.end(),
                   [&](int a, int b) { return items[a].length > items[b].length; });
  for (int idx : search.order) search.lengths.push_back(items[idx].length);
  search.count.assign(instance_count, 0);
  search.sum.assign(instance_count, 0);
  search.square_sum.assign(instance_count, 0);
  search.max_len.assign(instance_count, 0);
  search.batch_cost.assign(instance_count, 0.0);
  search.current.assign(items.size(), 0);
  search.run(0, 0, 0.0);

  OracleResult result;
  result.objective = search.best;
  result.assignment.assign(items.size(), 0);
  for (std::size_t k = 0; k < items.size(); ++k) {
    result.assignment[search.order[k]] = search.best_assignment[k];
  }
  return result;
}

}  // namespace orchsim
