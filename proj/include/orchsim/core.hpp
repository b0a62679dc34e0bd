// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "orchsim/errors.hpp"

namespace orchsim {

/// Short identifier for a data modality ("text", "vision", "audio", ...).
/// Uniqueness and non-emptiness are enforced by the workload registry.
using ModalityId = std::string;

enum class PaddingMode { Padded, Unpadded };

enum class CostVariant { LinearOnly, TransformerQuadratic, ConvTransformerPadded };

/// One sequence to be scheduled: a single-modality subsequence of an example
/// (or a whole interleaved example in the backbone phase).
struct SeqItem {
  std::int64_t example_id = 0;
  ModalityId modality;
  int part_index = 0;  // identity within the example, -1 for whole-example items
  std::int64_t length = 1;
  int origin_instance = 0;

  bool operator==(const SeqItem&) const = default;
};

struct ExamplePart {
  ModalityId modality;
  std::int64_t metadata_length = 1;

  bool operator==(const ExamplePart&) const = default;
};

/// A multimodal training example. Only lengths and identities are modeled;
/// no token content flows through the system.
struct Example {
  std::int64_t example_id = 0;
  std::vector<ExamplePart> parts;
  std::vector<int> interleave_order;           // permutation of part indices
  std::vector<std::int64_t> encoded_lengths;   // per part, filled by encode_lengths()

  bool operator==(const Example&) const = default;
};

/// The mini-batch of one data-parallel instance for one phase.
struct MiniBatch {
  int instance = 0;
  std::vector<SeqItem> items;
  PaddingMode padding_mode = PaddingMode::Unpadded;

  bool operator==(const MiniBatch&) const = default;
};

/// Computation cost of a batch as a function of its sequence lengths.
/// alpha scales the linear term, beta the quadratic (attention) term.
struct CostModel {
  double alpha = 1.0;
  double beta = 0.0;
  PaddingMode padding_mode = PaddingMode::Unpadded;
  CostVariant variant = CostVariant::LinearOnly;
};

struct SlotRef {
  int instance = 0;
  int slot = 0;

  auto operator<=>(const SlotRef&) const = default;
};

/// A bijective relocation of items across instances. Keys are source
/// (instance, slot) pairs; values are destination (instance, slot) pairs.
/// Destination slots are dense per instance (0..k-1) so batches stay
/// addressable after the move.
class Rearrangement {
 public:
  Rearrangement() = default;
  Rearrangement(int instance_count, std::map<SlotRef, SlotRef> moves);

  /// The no-op rearrangement over the slots currently held by `batches`.
  static Rearrangement identity(const std::vector<MiniBatch>& batches);

  int instance_count() const { return instance_count_; }
  const std::map<SlotRef, SlotRef>& moves() const { return moves_; }
  std::size_t size() const { return moves_.size(); }

  SlotRef dest_of(SlotRef source) const;
  bool is_identity() const;

  bool operator==(const Rearrangement&) const = default;

 private:
  int instance_count_ = 0;
  std::map<SlotRef, SlotRef> moves_;
};

/// Batch length: item count times max length when padded, sum of lengths
/// otherwise. Empty batches have length 0.
std::int64_t batch_length(const MiniBatch& batch);

std::int64_t unpadded_length(const MiniBatch& batch);
std::int64_t padded_length(const MiniBatch& batch);
std::int64_t max_item_length(const MiniBatch& batch);

/// Computation cost of `batch` under `model`. The model's padding mode must
/// match the batch's. Empty batches cost 0.
double cost(const CostModel& model, const MiniBatch& batch);

/// Moves every item to its destination slot. The rearrangement must cover
/// exactly the slots present in `batches`; the item multiset is preserved.
std::vector<MiniBatch> apply(const Rearrangement& re, const std::vector<MiniBatch>& batches);

/// Length of the whole interleaved sequence: sum of encoded part lengths.
std::int64_t interleaved_length(const Example& ex);

/// Fills encoded_lengths as ceil(metadata_length / rate) per part. Modalities
/// missing from `downsample_rates` pass through at rate 1.
void encode_lengths(Example& ex, const std::map<ModalityId, std::int64_t>& downsample_rates);

/// Groups items into per-instance batches by origin_instance, preserving
/// input order within each instance.
std::vector<MiniBatch> batches_from_items(int instance_count, const std::vector<SeqItem>& items,
                                          PaddingMode mode);

void validate_example(const Example& ex);

}  // namespace orchsim
