/* Copyright 2026 The TripleNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triplenet/tensor.hpp"

namespace triplenet {

// One record: 1 label byte followed by 32x32 R, G and B planes.
inline constexpr size_t kImageSide = 32;
inline constexpr size_t kImageBytes = 3 * kImageSide * kImageSide;
inline constexpr size_t kRecordBytes = 1 + kImageBytes;
inline constexpr size_t kRecordsPerCifarFile = 10000;
inline constexpr int kNumClasses = 10;

enum class Split { kTrain, kTest };

struct LabeledImageSet {
  std::string name;
  Split split = Split::kTrain;
  std::vector<uint8_t> pixels;  // N x 3072, channel-major per image
  std::vector<uint8_t> labels;

  size_t size() const { return labels.size(); }
  std::span<const uint8_t> image(size_t i) const { return {pixels.data() + i * kImageBytes, kImageBytes}; }
  // First n examples (all of them when n >= size()).
  LabeledImageSet head(size_t n) const;
  void append(const LabeledImageSet& other);
};

struct DatasetSplits {
  LabeledImageSet train;
  LabeledImageSet test;
};

// Parses a record file. With expected_records set, the file must be exactly
// that many records long; otherwise any whole number of records is accepted.
LabeledImageSet read_record_file(const std::string& path, std::string name, Split split,
                                 std::optional<size_t> expected_records = std::nullopt);

void write_record_file(const std::string& path, const LabeledImageSet& set);

// data_batch_1.bin .. data_batch_5.bin and test_batch.bin of the binary
// distribution, 10,000 records each.
DatasetSplits load_cifar10(const std::string& dir);

// SVHN converted to the same record layout: svhn_train.bin and
// svhn_test.bin (see docs/svhn_conversion.md).
DatasetSplits load_svhn(const std::string& dir);

struct ChannelStats {
  std::array<float, 3> mean{0.5f, 0.5f, 0.5f};
  std::array<float, 3> stddev{0.5f, 0.5f, 0.5f};
};

// Per-channel mean/std of pixels scaled to [0, 1].
ChannelStats compute_channel_stats(const LabeledImageSet& set);

// Sidecar text file of "name: value" lines (mean_r, mean_g, mean_b, std_r, ...).
void save_channel_stats(const std::string& path, const ChannelStats& stats);
ChannelStats load_channel_stats(const std::string& path);

struct Batch {
  Tensor images;  // [B, 3, 32, 32]
  std::vector<int> labels;
  std::vector<size_t> indices;  // dataset positions in this batch
};

// One epoch over a set. Each example appears exactly once; the last batch may
// be short. Shuffling is a permutation fixed by the seed.
class BatchIterator {
 public:
  BatchIterator(const LabeledImageSet& set, size_t batch_size, bool shuffle, uint64_t seed, ChannelStats stats);

  std::optional<Batch> next();
  size_t num_batches() const;
  const std::vector<size_t>& order() const { return order_; }

 private:
  const LabeledImageSet* set_;
  size_t batch_size_;
  ChannelStats stats_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
};

// Converts the given examples into a normalized batch.
Batch make_batch(const LabeledImageSet& set, std::span<const size_t> indices, const ChannelStats& stats);

}  // namespace triplenet
