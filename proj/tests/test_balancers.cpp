// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <random>

#include "helpers.hpp"
#include "orchsim/balancers.hpp"

using namespace orchsim;
using namespace orchsim::testing;

namespace {

std::vector<std::vector<std::int64_t>> sorted_batch_lengths(const BalanceResult& result) {
  std::vector<std::vector<std::int64_t>> out;
  for (const MiniBatch& b : result.new_batches) {
    std::vector<std::int64_t> lengths;
    for (const SeqItem& it : b.items) lengths.push_back(it.length);
    std::sort(lengths.begin(), lengths.end());
    out.push_back(lengths);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void check_output_validity(const BalanceResult& result, int d,
                           const std::vector<SeqItem>& items) {
  REQUIRE(static_cast<int>(result.new_batches.size()) == d);
  auto original = batches_from_items(d, items, result.new_batches.empty()
                                                   ? PaddingMode::Unpadded
                                                   : result.new_batches[0].padding_mode);
  CHECK(item_multiset(result.new_batches) == item_multiset(original));
  CHECK(apply(result.rearrangement, original) == result.new_batches);
}

}  // namespace

TEST_CASE("greedy unpadded matches the hand-traced packing") {
  auto result = balance_greedy_unpadded(2, items_on_zero({5, 4, 3, 3, 2, 1}));
  CHECK(result.objective_value == doctest::Approx(9.0));
  CHECK(sorted_batch_lengths(result) ==
        std::vector<std::vector<std::int64_t>>{{1, 3, 5}, {2, 3, 4}});
  check_output_validity(result, 2, items_on_zero({5, 4, 3, 3, 2, 1}));
}

TEST_CASE("greedy unpadded stays within 4/3 of the optimum") {
  auto items = items_on_zero({3, 3, 2, 2, 2});
  auto result = balance_greedy_unpadded(2, items);
  CHECK(result.objective_value == doctest::Approx(7.0));
  auto oracle = oracle_optimal(2, items, policy_cost_model({PolicyKind::GreedyUnpadded, 0, 0.0}));
  CHECK(oracle.objective == doctest::Approx(6.0));
  CHECK(result.objective_value <= 4.0 / 3.0 * oracle.objective + 1e-9);
}

TEST_CASE("greedy unpadded degenerate cases") {
  auto result = balance_greedy_unpadded(4, items_on_zero({42}));
  CHECK(result.objective_value == doctest::Approx(42.0));
  int nonempty = 0;
  for (const auto& b : result.new_batches) nonempty += b.items.empty() ? 0 : 1;
  CHECK(nonempty == 1);

  auto empty = balance_greedy_unpadded(3, {});
  CHECK(empty.objective_value == 0.0);
  CHECK(empty.new_batches.size() == 3);

  CHECK_THROWS_AS(balance_greedy_unpadded(0, items_on_zero({1})), std::invalid_argument);
}

TEST_CASE("binary padded reproduces the traced bound and packing") {
  auto items = items_on_zero({7, 5, 3, 2});
  auto result = balance_binary_padded(2, items);
  CHECK(min_feasible_padded_bound(2, items) == 14);
  CHECK(result.objective_value == doctest::Approx(14.0));
  CHECK(sorted_batch_lengths(result) ==
        std::vector<std::vector<std::int64_t>>{{2, 3}, {5, 7}});
  CHECK(padded_length(result.new_batches[0]) == 6);
  CHECK(padded_length(result.new_batches[1]) == 14);
  check_output_validity(result, 2, items);
}

TEST_CASE("binary padded uniform and degenerate cases") {
  auto uniform = balance_binary_padded(3, items_on_zero({4, 4, 4}));
  CHECK(uniform.objective_value == doctest::Approx(4.0));
  for (const auto& b : uniform.new_batches) CHECK(b.items.size() == 1);

  auto single = balance_binary_padded(3, items_on_zero({9}));
  CHECK(min_feasible_padded_bound(3, items_on_zero({9})) == 9);
  CHECK(single.objective_value == doctest::Approx(9.0));
  CHECK(single.new_batches.size() == 3);

  CHECK_THROWS_AS(balance_binary_padded(2, {}), std::invalid_argument);
}

TEST_CASE("binary padded bound is minimal feasible") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 10);
    auto items = items_round_robin(random_lengths(rng, n, 1, 30), d);
    const std::int64_t bound = min_feasible_padded_bound(d, items);
    CHECK(padded_bound_feasible(d, items, bound));
    CHECK_FALSE(padded_bound_feasible(d, items, bound - 1));
    // The search upper limit is itself feasible.
    std::int64_t max_len = 0;
    for (const auto& it : items) max_len = std::max(max_len, it.length);
    CHECK(padded_bound_feasible(d, items, max_len * (n / d + 1)));
  }
}

TEST_CASE("quadratic tolerance with v=0 behaves exactly like plain greedy") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int n = static_cast<int>(rng() % 14);
    auto items = items_round_robin(random_lengths(rng, n, 1, 50), d);
    auto greedy = balance_greedy_unpadded(d, items);
    auto quad = balance_quadratic_tolerance(d, items, 0.0, 0);
    CHECK(quad.new_batches == greedy.new_batches);
    CHECK(quad.rearrangement == greedy.rearrangement);
    CHECK(quad.objective_value == doctest::Approx(greedy.objective_value));
  }
}

TEST_CASE("quadratic tolerance packing matches greedy packing for v=0 with lambda set") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    auto items = items_on_zero(random_lengths(rng, 2 + static_cast<int>(rng() % 10), 1, 50));
    auto greedy = balance_greedy_unpadded(d, items);
    auto quad = balance_quadratic_tolerance(d, items, 0.05, 0);
    CHECK(sorted_batch_lengths(quad) == sorted_batch_lengths(greedy));
  }
}

TEST_CASE("quadratic tolerance hand-traced example") {
  auto items = items_on_zero({8, 8, 4, 4});
  auto result = balance_quadratic_tolerance(2, items, 0.1, 1);
  CHECK(sorted_batch_lengths(result) ==
        std::vector<std::vector<std::int64_t>>{{4, 8}, {4, 8}});
  CHECK(result.objective_value == doctest::Approx(20.0));
  auto oracle = oracle_optimal(2, items,
                               policy_cost_model({PolicyKind::QuadraticTolerance, 1, 0.1}));
  CHECK(result.objective_value == doctest::Approx(oracle.objective));
  check_output_validity(result, 2, items);
}

TEST_CASE("quadratic tolerance single item") {
  auto result = balance_quadratic_tolerance(3, items_on_zero({7}), 0.2, 2);
  CHECK(result.objective_value == doctest::Approx(7.0 + 0.2 * 49.0));
}

TEST_CASE("convtransformer with lambda=0 reports the max batch sum") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    auto items = items_round_robin(random_lengths(rng, 1 + static_cast<int>(rng() % 12), 1, 40),
                                   d);
    auto result = balance_convtransformer(d, items, 0.0);
    std::int64_t max_sum = 0;
    for (const auto& b : result.new_batches) max_sum = std::max(max_sum, unpadded_length(b));
    CHECK(result.objective_value == doctest::Approx(static_cast<double>(max_sum)));
  }
}

TEST_CASE("convtransformer objective is within 4/3 of the exhaustive optimum") {
  auto items = items_on_zero({6, 5, 4, 3});
  auto result = balance_convtransformer(2, items, 0.05);
  CHECK(result.objective_value == doctest::Approx(15.75));
  auto oracle =
      oracle_optimal(2, items, policy_cost_model({PolicyKind::ConvTransformer, 0, 0.05}));
  CHECK(oracle.objective == doctest::Approx(12.6));
  CHECK(result.objective_value <= 4.0 / 3.0 * oracle.objective + 1e-9);
  check_output_validity(result, 2, items);
}

TEST_CASE("convtransformer single item and error paths") {
  auto result = balance_convtransformer(2, items_on_zero({9}), 0.1);
  CHECK(result.objective_value == doctest::Approx(9.0 + 0.1 * 81.0));
  CHECK_THROWS_AS(balance_convtransformer(2, {}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(balance_convtransformer(0, items_on_zero({1}), 0.1), std::invalid_argument);
}

TEST_CASE("oracle matches known optima") {
  CHECK(oracle_optimal(2, items_on_zero({3, 3, 2, 2, 2}),
                       policy_cost_model({PolicyKind::GreedyUnpadded, 0, 0.0}))
            .objective == doctest::Approx(6.0));
  CHECK(oracle_optimal(2, items_on_zero({7, 5, 3, 2}),
                       policy_cost_model({PolicyKind::BinaryPadded, 0, 0.0}))
            .objective == doctest::Approx(14.0));

  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    auto lengths = random_lengths(rng, d, 1, 50);
    auto oracle = oracle_optimal(d, items_on_zero(lengths),
                                 policy_cost_model({PolicyKind::GreedyUnpadded, 0, 0.0}));
    CHECK(oracle.objective ==
          doctest::Approx(static_cast<double>(*std::max_element(lengths.begin(), lengths.end()))));
  }
}

TEST_CASE("oracle refuses oversized instances") {
  auto items = items_on_zero(std::vector<std::int64_t>(20, 3));
  CHECK_THROWS_AS(oracle_optimal(2, items, CostModel{}), SizeCapError);
  CHECK_THROWS_AS(oracle_optimal(8, items_on_zero({1, 2}), CostModel{}), SizeCapError);
}

TEST_CASE("greedy approximation bound holds on random instances") {
  std::mt19937_64 rng(97);
  const CostModel linear = policy_cost_model({PolicyKind::GreedyUnpadded, 0, 0.0});
  for (int trial = 0; trial < 400; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    const int n = 1 + static_cast<int>(rng() % 12);
    auto items = items_round_robin(random_lengths(rng, n, 1, 50), d);
    auto result = balance_greedy_unpadded(d, items);
    auto oracle = oracle_optimal(d, items, linear);
    CHECK(result.objective_value <= 4.0 / 3.0 * oracle.objective + 1e-9);
  }
}

TEST_CASE("every balancer is never worse than the identity arrangement") {
  std::mt19937_64 rng(101);
  const BalancePolicy policies[] = {
      {PolicyKind::GreedyUnpadded, 0, 0.0},
      {PolicyKind::BinaryPadded, 0, 0.0},
      {PolicyKind::QuadraticTolerance, 3, 0.05},
      {PolicyKind::ConvTransformer, 0, 0.02},
  };
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 16);
    std::vector<SeqItem> items;
    for (int i = 0; i < n; ++i) {
      items.push_back({i, "m", 0, 1 + static_cast<std::int64_t>(rng() % 50),
                       static_cast<int>(rng() % d)});
    }
    for (const auto& policy : policies) {
      auto result = balance(policy, d, items);
      auto ident = identity_arrangement(policy, d, items);
      CHECK(result.objective_value <= ident.objective_value + 1e-9);
      check_output_validity(result, d, items);
    }
  }
}

TEST_CASE("balancers are deterministic") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 3);
    auto items = items_round_robin(random_lengths(rng, 12, 1, 50), d);
    for (const auto kind : {PolicyKind::GreedyUnpadded, PolicyKind::BinaryPadded,
                            PolicyKind::QuadraticTolerance, PolicyKind::ConvTransformer}) {
      BalancePolicy policy{kind, 2, 0.03};
      auto a = balance(policy, d, items);
      auto b = balance(policy, d, items);
      CHECK(a.new_batches == b.new_batches);
      CHECK(a.rearrangement == b.rearrangement);
      CHECK(a.objective_value == b.objective_value);
    }
  }
}
