// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "orchsim/core.hpp"

namespace orchsim::testing {

// Items concentrated on instance 0, one per length, ids by position.
inline std::vector<SeqItem> items_on_zero(const std::vector<std::int64_t>& lengths) {
  std::vector<SeqItem> items;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    items.push_back({static_cast<std::int64_t>(i), "m", 0, lengths[i], 0});
  }
  return items;
}

// Items spread round-robin over d instances.
inline std::vector<SeqItem> items_round_robin(const std::vector<std::int64_t>& lengths, int d) {
  std::vector<SeqItem> items;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    items.push_back({static_cast<std::int64_t>(i), "m", 0, lengths[i],
                     static_cast<int>(i) % d});
  }
  return items;
}

inline std::vector<std::int64_t> random_lengths(std::mt19937_64& rng, int n, std::int64_t lo,
                                                std::int64_t hi) {
  std::vector<std::int64_t> lengths(n);
  for (auto& l : lengths) l = lo + static_cast<std::int64_t>(rng() % (hi - lo + 1));
  return lengths;
}

// Sorted (example_id, modality, part, length) tuples; equal multisets mean
// no item was lost, duplicated, or resized.
using ItemKey = std::tuple<std::int64_t, ModalityId, int, std::int64_t>;

inline std::vector<ItemKey> item_multiset(const std::vector<MiniBatch>& batches) {
  std::vector<ItemKey> keys;
  for (const MiniBatch& b : batches) {
    for (const SeqItem& it : b.items) {
      keys.emplace_back(it.example_id, it.modality, it.part_index, it.length);
    }
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

inline std::vector<std::int64_t> batch_sums(const std::vector<MiniBatch>& batches) {
  std::vector<std::int64_t> sums;
  for (const MiniBatch& b : batches) sums.push_back(unpadded_length(b));
  return sums;
}

}  // namespace orchsim::testing
