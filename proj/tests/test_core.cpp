// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "orchsim/core.hpp"

using namespace orchsim;
using namespace orchsim::testing;

namespace {

MiniBatch make_batch(const std::vector<std::int64_t>& lengths, PaddingMode mode) {
  MiniBatch b;
  b.padding_mode = mode;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    b.items.push_back({static_cast<std::int64_t>(i), "m", 0, lengths[i], 0});
  }
  return b;
}

}  // namespace

TEST_CASE("batch_length follows the padding mode") {
  CHECK(batch_length(make_batch({10, 20}, PaddingMode::Unpadded)) == 30);
  CHECK(batch_length(make_batch({7, 5, 3}, PaddingMode::Padded)) == 21);
  CHECK(batch_length(make_batch({}, PaddingMode::Padded)) == 0);
  CHECK(batch_length(make_batch({}, PaddingMode::Unpadded)) == 0);
}

TEST_CASE("padded batch length dominates unpadded for the same items") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto lengths = random_lengths(rng, 1 + static_cast<int>(rng() % 12), 1, 40);
    CHECK(batch_length(make_batch(lengths, PaddingMode::Padded)) >=
          batch_length(make_batch(lengths, PaddingMode::Unpadded)));
  }
}

TEST_CASE("cost evaluates each variant") {
  CostModel quad{1.0, 0.01, PaddingMode::Unpadded, CostVariant::TransformerQuadratic};
  CHECK(cost(quad, make_batch({10, 20}, PaddingMode::Unpadded)) == doctest::Approx(35.0));

  CostModel zero_beta{1.0, 0.0, PaddingMode::Unpadded, CostVariant::TransformerQuadratic};
  auto b = make_batch({4, 9, 2}, PaddingMode::Unpadded);
  CHECK(cost(zero_beta, b) == doctest::Approx(static_cast<double>(batch_length(b))));

  CostModel conv{1.0, 0.01, PaddingMode::Padded, CostVariant::ConvTransformerPadded};
  CHECK(cost(conv, make_batch({4, 6}, PaddingMode::Padded)) == doctest::Approx(12.72));

  CostModel linear{2.0, 5.0, PaddingMode::Padded, CostVariant::LinearOnly};
  CHECK(cost(linear, make_batch({3, 4}, PaddingMode::Padded)) == doctest::Approx(16.0));

  CostModel quad_padded{1.0, 0.5, PaddingMode::Padded, CostVariant::TransformerQuadratic};
  // L = 8, b = 2: 8 + 0.5/2 * 64
  CHECK(cost(quad_padded, make_batch({2, 4}, PaddingMode::Padded)) == doctest::Approx(24.0));
}

TEST_CASE("cost rejects a padding-mode mismatch and zeroes empty batches") {
  CostModel model{1.0, 0.1, PaddingMode::Padded, CostVariant::TransformerQuadratic};
  CHECK_THROWS_AS(cost(model, make_batch({3}, PaddingMode::Unpadded)), std::invalid_argument);
  CHECK(cost(model, make_batch({}, PaddingMode::Padded)) == 0.0);
}

TEST_CASE("cost never decreases when an item is added") {
  std::mt19937_64 rng(11);
  const CostVariant variants[] = {CostVariant::LinearOnly, CostVariant::TransformerQuadratic,
                                  CostVariant::ConvTransformerPadded};
  for (int trial = 0; trial < 300; ++trial) {
    const auto mode = (rng() % 2) ? PaddingMode::Padded : PaddingMode::Unpadded;
    CostModel model{0.5 + (rng() % 4) * 0.5, (rng() % 5) * 0.02, mode,
                    variants[rng() % 3]};
    auto lengths = random_lengths(rng, 1 + static_cast<int>(rng() % 8), 1, 30);
    auto base = make_batch(lengths, mode);
    auto grown = base;
    grown.items.push_back({99, "m", 0, 1 + static_cast<std::int64_t>(rng() % 30), 0});
    CHECK(cost(model, grown) >= cost(model, base));
  }
}

TEST_CASE("apply with the identity keeps batches unchanged") {
  auto batches = batches_from_items(3, items_round_robin({5, 6, 7, 8}, 3),
                                    PaddingMode::Unpadded);
  auto moved = apply(Rearrangement::identity(batches), batches);
  REQUIRE(moved.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(moved[i].items == batches[i].items);
}

TEST_CASE("apply swaps whole batches") {
  auto batches = batches_from_items(2, items_round_robin({5, 6, 7, 8}, 2),
                                    PaddingMode::Unpadded);
  std::map<SlotRef, SlotRef> moves;
  for (int i = 0; i < 2; ++i) {
    for (int s = 0; s < static_cast<int>(batches[i].items.size()); ++s) {
      moves[{i, s}] = {1 - i, s};
    }
  }
  auto moved = apply(Rearrangement(2, moves), batches);
  CHECK(moved[0].items == batches[1].items);
  CHECK(moved[1].items == batches[0].items);
}

TEST_CASE("apply preserves the item multiset under a crossing map") {
  auto batches = batches_from_items(2, items_round_robin({9, 4, 7, 2}, 2),
                                    PaddingMode::Unpadded);
  std::map<SlotRef, SlotRef> moves{
      {{0, 0}, {1, 1}}, {{0, 1}, {0, 0}}, {{1, 0}, {0, 1}}, {{1, 1}, {1, 0}}};
  auto moved = apply(Rearrangement(2, moves), batches);
  CHECK(item_multiset(moved) == item_multiset(batches));
  CHECK(moved[1].items[1].length == 9);
}

TEST_CASE("apply preserves multisets for random rearrangements") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 16);
    auto batches = batches_from_items(d, items_round_robin(random_lengths(rng, n, 1, 50), d),
                                      PaddingMode::Unpadded);
    // Random permutation of all slots, destinations dense per instance.
    std::vector<SlotRef> sources;
    for (int i = 0; i < d; ++i) {
      for (int s = 0; s < static_cast<int>(batches[i].items.size()); ++s) {
        sources.push_back({i, s});
      }
    }
    auto shuffled = sources;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<int> next(d, 0);
    std::map<SlotRef, SlotRef> moves;
    for (std::size_t k = 0; k < sources.size(); ++k) {
      const int dest = shuffled[k].instance;
      moves[sources[k]] = {dest, next[dest]++};
    }
    auto moved = apply(Rearrangement(d, moves), batches);
    CHECK(item_multiset(moved) == item_multiset(batches));
  }
}

TEST_CASE("apply rejects duplicate or missing slots") {
  auto batches = batches_from_items(2, items_round_robin({5, 6}, 2), PaddingMode::Unpadded);
  CHECK_THROWS_AS(Rearrangement(2, {{{0, 0}, {0, 0}}, {{1, 0}, {0, 0}}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(apply(Rearrangement(2, {{{0, 0}, {0, 0}}}), batches), std::invalid_argument);
  CHECK_THROWS_AS(apply(Rearrangement(2, {{{0, 0}, {0, 0}},
                                          {{1, 0}, {1, 0}},
                                          {{1, 1}, {1, 1}}}),
                        batches),
                  std::invalid_argument);
}

TEST_CASE("interleaved_length sums encoded parts") {
  Example ex;
  ex.example_id = 1;
  ex.parts = {{"text", 8}, {"vision", 784}, {"audio", 100}};
  ex.interleave_order = {1, 0, 2};
  encode_lengths(ex, {{"vision", 4}, {"audio", 2}});
  CHECK(ex.encoded_lengths == std::vector<std::int64_t>{8, 196, 50});
  CHECK(interleaved_length(ex) == 254);

  Example text_only;
  text_only.example_id = 2;
  text_only.parts = {{"text", 8}};
  text_only.interleave_order = {0};
  encode_lengths(text_only, {});
  CHECK(interleaved_length(text_only) == 8);

  Example vision;
  vision.example_id = 3;
  vision.parts = {{"vision", 784}, {"text", 12}};
  vision.interleave_order = {0, 1};
  encode_lengths(vision, {{"vision", 4}});
  CHECK(interleaved_length(vision) == 208);
}

TEST_CASE("interleaved_length is at least the largest encoded part") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Example ex;
    ex.example_id = trial;
    const int parts = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < parts; ++p) {
      ex.parts.push_back({"m" + std::to_string(p), 1 + static_cast<std::int64_t>(rng() % 500)});
      ex.interleave_order.push_back(p);
    }
    encode_lengths(ex, {{"m1", 4}, {"m2", 2}});
    std::int64_t largest = 0;
    for (auto len : ex.encoded_lengths) largest = std::max(largest, len);
    CHECK(interleaved_length(ex) >= largest);
  }
}

TEST_CASE("encode_lengths uses ceiling division so parts stay positive") {
  Example ex;
  ex.parts = {{"vision", 1}, {"vision", 5}};
  ex.interleave_order = {0, 1};
  encode_lengths(ex, {{"vision", 4}});
  CHECK(ex.encoded_lengths == std::vector<std::int64_t>{1, 2});
}

TEST_CASE("validate_example rejects broken interleave orders") {
  Example ex;
  ex.example_id = 9;
  ex.parts = {{"text", 4}, {"audio", 6}};
  ex.interleave_order = {0, 0};
  CHECK_THROWS_AS(validate_example(ex), ConfigError);
  ex.interleave_order = {0, 1};
  CHECK_NOTHROW(validate_example(ex));
}
