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

#include "triplenet/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "triplenet/error.hpp"

namespace triplenet {

namespace fs = std::filesystem;

LabeledImageSet LabeledImageSet::head(size_t n) const {
  LabeledImageSet out;
  out.name = name;
  out.split = split;
  n = std::min(n, size());
  out.labels.assign(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n));
  out.pixels.assign(pixels.begin(), pixels.begin() + static_cast<std::ptrdiff_t>(n * kImageBytes));
  return out;
}

void LabeledImageSet::append(const LabeledImageSet& other) {
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  pixels.insert(pixels.end(), other.pixels.begin(), other.pixels.end());
}

LabeledImageSet read_record_file(const std::string& path, std::string name, Split split,
                                 std::optional<size_t> expected_records) {
  std::error_code ec;
  const auto bytes = fs::file_size(path, ec);
  if (ec) throw IoError("cannot read " + path + ": " + ec.message());
  if (expected_records && bytes != *expected_records * kRecordBytes) {
    throw IoError(path + ": expected " + std::to_string(*expected_records * kRecordBytes) + " bytes (" +
                  std::to_string(*expected_records) + " records of " + std::to_string(kRecordBytes) + "), got " +
                  std::to_string(bytes));
  }
  if (bytes % kRecordBytes != 0) {
    throw IoError(path + ": truncated record, " + std::to_string(bytes) + " bytes is not a multiple of " +
                  std::to_string(kRecordBytes));
  }
  const size_t n = bytes / kRecordBytes;
  std::vector<uint8_t> raw(bytes);
  std::ifstream is(path, std::ios::binary);
  if (!is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes))) {
    throw IoError("short read on " + path);
  }
  LabeledImageSet set;
  set.name = std::move(name);
  set.split = split;
  set.labels.resize(n);
  set.pixels.resize(n * kImageBytes);
  for (size_t i = 0; i < n; ++i) {
    const uint8_t* rec = raw.data() + i * kRecordBytes;
    if (rec[0] >= kNumClasses) {
      throw IoError(path + ": record " + std::to_string(i) + " has label " + std::to_string(rec[0]));
    }
    set.labels[i] = rec[0];
    std::copy(rec + 1, rec + kRecordBytes, set.pixels.begin() + static_cast<std::ptrdiff_t>(i * kImageBytes));
  }
  return set;
}

void write_record_file(const std::string& path, const LabeledImageSet& set) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  for (size_t i = 0; i < set.size(); ++i) {
    os.put(static_cast<char>(set.labels[i]));
    auto img = set.image(i);
    os.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  }
  if (!os) throw IoError("failed writing " + path);
}

namespace {

void require_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("data directory not found: " + dir);
}

}  // namespace

DatasetSplits load_cifar10(const std::string& dir) {
  require_dir(dir);
  DatasetSplits out;
  out.train.name = "cifar10";
  out.train.split = Split::kTrain;
  for (int i = 1; i <= 5; ++i) {
    const auto path = (fs::path(dir) / ("data_batch_" + std::to_string(i) + ".bin")).string();
    out.train.append(read_record_file(path, "cifar10", Split::kTrain, kRecordsPerCifarFile));
  }
  out.test = read_record_file((fs::path(dir) / "test_batch.bin").string(), "cifar10", Split::kTest,
                              kRecordsPerCifarFile);
  return out;
}

DatasetSplits load_svhn(const std::string& dir) {
  require_dir(dir);
  DatasetSplits out;
  out.train = read_record_file((fs::path(dir) / "svhn_train.bin").string(), "svhn", Split::kTrain);
  out.test = read_record_file((fs::path(dir) / "svhn_test.bin").string(), "svhn", Split::kTest);
  return out;
}

ChannelStats compute_channel_stats(const LabeledImageSet& set) {
  if (set.size() == 0) throw InvalidArgument("cannot compute statistics of an empty set");
  ChannelStats stats;
  const size_t plane = kImageSide * kImageSide;
  for (size_t c = 0; c < 3; ++c) {
    double sum = 0, sq = 0;
    for (size_t i = 0; i < set.size(); ++i) {
      const uint8_t* p = set.pixels.data() + i * kImageBytes + c * plane;
      for (size_t j = 0; j < plane; ++j) {
        const double v = p[j] / 255.0;
        sum += v;
        sq += v * v;
      }
    }
    const double n = static_cast<double>(set.size() * plane);
    const double mean = sum / n;
    stats.mean[c] = static_cast<float>(mean);
    stats.stddev[c] = static_cast<float>(std::sqrt(std::max(sq / n - mean * mean, 1e-12)));
  }
  return stats;
}

void save_channel_stats(const std::string& path, const ChannelStats& stats) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.precision(9);
  const char* names = "rgb";
  for (int c = 0; c < 3; ++c) os << "mean_" << names[c] << ": " << stats.mean[c] << "\n";
  for (int c = 0; c < 3; ++c) os << "std_" << names[c] << ": " << stats.stddev[c] << "\n";
}

ChannelStats load_channel_stats(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open statistics file " + path);
  std::map<std::string, float> values;
  std::string line;
  while (std::getline(is, line)) {
    const auto colon = line.find(':');
    if (line.empty() || line[0] == '#' || colon == std::string::npos) continue;
    std::string key = line.substr(0, colon);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    values[key] = std::stof(line.substr(colon + 1));
  }
  ChannelStats stats;
  const char* names = "rgb";
  for (int c = 0; c < 3; ++c) {
    const std::string m = std::string("mean_") + names[c], s = std::string("std_") + names[c];
    if (!values.count(m) || !values.count(s)) throw IoError(path + " is missing " + m + " or " + s);
    stats.mean[c] = values[m];
    stats.stddev[c] = values[s];
    if (!(stats.stddev[c] > 0)) throw IoError(path + ": " + s + " must be positive");
  }
  return stats;
}

Batch make_batch(const LabeledImageSet& set, std::span<const size_t> indices, const ChannelStats& stats) {
  const size_t plane = kImageSide * kImageSide;
  const int64_t side = static_cast<int64_t>(kImageSide);
  Batch b{Tensor({static_cast<int64_t>(indices.size()), 3, side, side}), {}, {indices.begin(), indices.end()}};
  float* dst = b.images.ptr();
  for (size_t i : indices) {
    const uint8_t* src = set.pixels.data() + i * kImageBytes;
    for (size_t c = 0; c < 3; ++c) {
      const float mean = stats.mean[c], inv = 1.0f / stats.stddev[c];
      for (size_t j = 0; j < plane; ++j) *dst++ = (static_cast<float>(src[c * plane + j]) / 255.0f - mean) * inv;
    }
    b.labels.push_back(set.labels[i]);
  }
  return b;
}

BatchIterator::BatchIterator(const LabeledImageSet& set, size_t batch_size, bool shuffle, uint64_t seed,
                             ChannelStats stats)
    : set_(&set), batch_size_(batch_size), stats_(stats), order_(set.size()) {
  if (batch_size == 0) throw InvalidArgument("batch size must be >= 1");
  if (set.size() == 0) throw InvalidArgument("cannot batch an empty dataset");
  std::iota(order_.begin(), order_.end(), size_t{0});
  if (shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order_.begin(), order_.end(), rng);
  }
}

std::optional<Batch> BatchIterator::next() {
  if (cursor_ >= order_.size()) return std::nullopt;
  const size_t n = std::min(batch_size_, order_.size() - cursor_);
  Batch b = make_batch(*set_, std::span<const size_t>(order_.data() + cursor_, n), stats_);
  cursor_ += n;
  return b;
}

size_t BatchIterator::num_batches() const { return (order_.size() + batch_size_ - 1) / batch_size_; }

}  // namespace triplenet
