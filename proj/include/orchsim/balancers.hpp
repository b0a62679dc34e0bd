// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "orchsim/core.hpp"

namespace orchsim {

enum class PolicyKind { GreedyUnpadded, BinaryPadded, QuadraticTolerance, ConvTransformer };

struct BalancePolicy {
  PolicyKind kind = PolicyKind::GreedyUnpadded;
  std::int64_t tolerance_v = 0;  // QuadraticTolerance only
  double lambda = 0.0;           // quadratic variants
};

struct BalanceResult {
  Rearrangement rearrangement;
  std::vector<MiniBatch> new_batches;
  double objective_value = 0.0;
};

/// The cost function a policy optimizes, expressed as a CostModel with
/// alpha normalized to 1 and beta = lambda.
CostModel policy_cost_model(const BalancePolicy& policy);

/// Longest-processing-time greedy: items sorted descending, each pushed onto
/// the batch with the smallest length sum. 4/3-approximate for the min-max
/// sum objective. O(n log n).
BalanceResult balance_greedy_unpadded(int instance_count, const std::vector<SeqItem>& items);

/// Binary search over an upper bound for padded batch lengths, packing
/// ascending-sorted items greedily under the bound. Returns the packing for
/// the minimal feasible bound, padded with empty batches up to d.
BalanceResult balance_binary_padded(int instance_count, const std::vector<SeqItem>& items);

/// Greedy like balance_greedy_unpadded, but batches are ordered by a
/// tolerance comparator: when two sums differ by less than tolerance_v the
/// smaller square sum wins. Optimizes max(L + lambda * sum l^2).
BalanceResult balance_quadratic_tolerance(int instance_count, const std::vector<SeqItem>& items,
                                          double lambda, std::int64_t tolerance_v);

/// Seeds up to d batches under the greedy-unpadded objective value as a
/// padded-length bound, then distributes the remaining items by min-sum.
/// Optimizes max(L + lambda * b * (max l)^2).
BalanceResult balance_convtransformer(int instance_count, const std::vector<SeqItem>& items,
                                      double lambda);

/// Dispatch on policy.kind.
BalanceResult balance(const BalancePolicy& policy, int instance_count,
                      const std::vector<SeqItem>& items);

/// The no-op arrangement (items stay on their origin instances), evaluated
/// under the policy cost. Balancers fall back to this whenever their own
/// packing would be worse.
BalanceResult identity_arrangement(const BalancePolicy& policy, int instance_count,
                                   const std::vector<SeqItem>& items);

/// The smallest bound for which the greedy packing of balance_binary_padded
/// needs at most d batches. Exposed for minimality checks.
std::int64_t min_feasible_padded_bound(int instance_count, const std::vector<SeqItem>& items);

/// True when GetLeastBatches packs `items` into at most d batches of padded
/// length <= bound.
bool padded_bound_feasible(int instance_count, const std::vector<SeqItem>& items,
                           std::int64_t bound);

struct OracleLimits {
  int max_items = 14;
  int max_instances = 4;
};

struct OracleResult {
  std::vector<int> assignment;  // parallel to items: batch index per item
  double objective = 0.0;
};

/// Exhaustive minimum of max-batch-cost over all assignments of items to d
/// batches, pruning instance-relabeling symmetry. Refuses instances above
/// the caps.
OracleResult oracle_optimal(int instance_count, const std::vector<SeqItem>& items,
                            const CostModel& model, const OracleLimits& limits = {});

}  // namespace orchsim
