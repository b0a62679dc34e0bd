// SPDX-License-Identifier: Apache-2.0

#include "orchsim/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

namespace orchsim {

namespace {

// Destination (and, for well-formed inputs, source) slots must be dense
// per instance: exactly {0..k-1}.
void check_dense_slots(const std::map<SlotRef, SlotRef>& moves, int instance_count) {
  std::map<int, std::set<int>> by_instance;
  for (const auto& [src, dst] : moves) {
    if (src.instance < 0 || src.instance >= instance_count || dst.instance < 0 ||
        dst.instance >= instance_count) {
      throw std::invalid_argument("rearrangement references instance outside [0, d)");
    }
    if (!by_instance[dst.instance].insert(dst.slot).second) {
      throw std::invalid_argument("rearrangement maps two items to one destination slot");
    }
  }
  for (const auto& [instance, slots] : by_instance) {
    if (*slots.begin() != 0 || *slots.rbegin() != static_cast<int>(slots.size()) - 1) {
      throw std::invalid_argument("destination slots of instance " + std::to_string(instance) +
                                  " are not dense");
    }
  }
}

}  // namespace

Rearrangement::Rearrangement(int instance_count, std::map<SlotRef, SlotRef> moves)
    : instance_count_(instance_count), moves_(std::move(moves)) {
  if (instance_count < 0) {
    throw std::invalid_argument("instance count must be nonnegative");
  }
  check_dense_slots(moves_, instance_count_);
}

Rearrangement Rearrangement::identity(const std::vector<MiniBatch>& batches) {
  std::map<SlotRef, SlotRef> moves;
  for (std::size_t i = 0; i < batches.size(); ++i) {
    for (std::size_t s = 0; s < batches[i].items.size(); ++s) {
      SlotRef ref{static_cast<int>(i), static_cast<int>(s)};
      moves.emplace(ref, ref);
    }
  }
  return Rearrangement(static_cast<int>(batches.size()), std::move(moves));
}

SlotRef Rearrangement::dest_of(SlotRef source) const {
  auto it = moves_.find(source);
  if (it == moves_.end()) {
    throw std::invalid_argument("slot (" + std::to_string(source.instance) + ", " +
                                std::to_string(source.slot) + ") not covered by rearrangement");
  }
  return it->second;
}

bool Rearrangement::is_identity() const {
  return std::all_of(moves_.begin(), moves_.end(),
                     [](const auto& kv) { return kv.first == kv.second; });
}

std::int64_t unpadded_length(const MiniBatch& batch) {
  std::int64_t total = 0;
  for (const SeqItem& item : batch.items) total += item.length;
  return total;
}

std::int64_t max_item_length(const MiniBatch& batch) {
  std::int64_t longest = 0;
  for (const SeqItem& item : batch.items) longest = std::max(longest, item.length);
  return longest;
}

std::int64_t padded_length(const MiniBatch& batch) {
  return static_cast<std::int64_t>(batch.items.size()) * max_item_length(batch);
}

std::int64_t batch_length(const MiniBatch& batch) {
  return batch.padding_mode == PaddingMode::Padded ? padded_length(batch)
                                                   : unpadded_length(batch);
}

double cost(const CostModel& model, const MiniBatch& batch) {
  if (model.padding_mode != batch.padding_mode) {
    throw std::invalid_argument("cost model padding mode does not match batch padding mode");
  }
  if (batch.items.empty()) return 0.0;
  const double linear = model.alpha * static_cast<double>(batch_length(batch));
  switch (model.variant) {
    case CostVariant::LinearOnly:
      return linear;
    case CostVariant::TransformerQuadratic: {
      if (batch.padding_mode == PaddingMode::Unpadded) {
        double square_sum = 0.0;
        for (const SeqItem& item : batch.items) {
          square_sum += static_cast<double>(item.length) * static_cast<double>(item.length);
        }
        return linear + model.beta * square_sum;
      }
      const double padded = static_cast<double>(batch_length(batch));
      return linear + model.beta / static_cast<double>(batch.items.size()) * padded * padded;
    }
    case CostVariant::ConvTransformerPadded: {
      const double longest = static_cast<double>(max_item_length(batch));
      return linear +
             model.beta * static_cast<double>(batch.items.size()) * longest * longest;
    }
  }
  throw std::logic_error("unknown cost variant");
}

std::vector<MiniBatch> apply(const Rearrangement& re, const std::vector<MiniBatch>& batches) {
  const int d = re.instance_count();
  if (static_cast<int>(batches.size()) != d) {
    throw std::invalid_argument("rearrangement instance count does not match batch count");
  }
  std::size_t covered = 0;
  std::vector<std::vector<const SeqItem*>> staged(d);
  std::vector<std::vector<bool>> filled(d);
  for (const auto& [src, dst] : re.moves()) {
    if (src.instance >= d || src.slot >= static_cast<int>(batches[src.instance].items.size())) {
      throw std::invalid_argument("rearrangement covers a slot absent from the input batches");
    }
    auto& slots = staged[dst.instance];
    auto& mask = filled[dst.instance];
    if (dst.slot >= static_cast<int>(slots.size())) {
      slots.resize(dst.slot + 1, nullptr);
      mask.resize(dst.slot + 1, false);
    }
    slots[dst.slot] = &batches[src.instance].items[src.slot];
    mask[dst.slot] = true;
    ++covered;
  }
  std::size_t present = 0;
  for (const MiniBatch& b : batches) present += b.items.size();
  if (covered != present) {
    throw std::invalid_argument("rearrangement does not cover every input slot");
  }

  std::vector<MiniBatch> out(d);
  for (int i = 0; i < d; ++i) {
    out[i].instance = i;
    out[i].padding_mode = batches[i].padding_mode;
    out[i].items.reserve(staged[i].size());
    for (std::size_t s = 0; s < staged[i].size(); ++s) {
      if (!filled[i][s]) {
        throw std::invalid_argument("destination slots are not dense after rearrangement");
      }
      out[i].items.push_back(*staged[i][s]);
    }
  }
  return out;
}

std::int64_t interleaved_length(const Example& ex) {
  if (ex.encoded_lengths.size() != ex.parts.size()) {
    throw std::logic_error("encoded lengths not populated for example " +
                           std::to_string(ex.example_id));
  }
  return std::accumulate(ex.encoded_lengths.begin(), ex.encoded_lengths.end(), std::int64_t{0});
}

void encode_lengths(Example& ex, const std::map<ModalityId, std::int64_t>& downsample_rates) {
  ex.encoded_lengths.resize(ex.parts.size());
  for (std::size_t k = 0; k < ex.parts.size(); ++k) {
    std::int64_t rate = 1;
    if (auto it = downsample_rates.find(ex.parts[k].modality); it != downsample_rates.end()) {
      rate = it->second;
    }
    if (rate < 1) throw ConfigError("downsample rate must be >= 1");
    ex.encoded_lengths[k] = (ex.parts[k].metadata_length + rate - 1) / rate;
  }
}

std::vector<MiniBatch> batches_from_items(int instance_count, const std::vector<SeqItem>& items,
                                          PaddingMode mode) {
  if (instance_count < 1) throw std::invalid_argument("instance count must be >= 1");
  std::vector<MiniBatch> batches(instance_count);
  for (int i = 0; i < instance_count; ++i) {
    batches[i].instance = i;
    batches[i].padding_mode = mode;
  }
  for (const SeqItem& item : items) {
    if (item.origin_instance < 0 || item.origin_instance >= instance_count) {
      throw std::invalid_argument("item origin instance outside [0, d)");
    }
    if (item.length < 1) throw std::invalid_argument("item length must be >= 1");
    batches[item.origin_instance].items.push_back(item);
  }
  return batches;
}

void validate_example(const Example& ex) {
  if (ex.parts.empty()) throw ConfigError("example " + std::to_string(ex.example_id) + " has no parts");
  for (const ExamplePart& part : ex.parts) {
    if (part.modality.empty()) throw ConfigError("example part with empty modality");
    if (part.metadata_length < 1) throw ConfigError("example part with nonpositive length");
  }
  if (ex.interleave_order.size() != ex.parts.size()) {
    throw ConfigError("interleave order size mismatch in example " +
                      std::to_string(ex.example_id));
  }
  std::vector<bool> seen(ex.parts.size(), false);
  for (int idx : ex.interleave_order) {
    if (idx < 0 || idx >= static_cast<int>(ex.parts.size()) || seen[idx]) {
      throw ConfigError("interleave order is not a permutation in example " +
                        std::to_string(ex.example_id));
    }
    seen[idx] = true;
  }
}

}  // namespace orchsim
