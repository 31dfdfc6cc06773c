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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "triplenet/data.hpp"
#include "triplenet/error.hpp"

namespace tn = triplenet;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) : path_(fs::temp_directory_path() / ("triplenet_data_" + tag)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  fs::path path_;
};

void write_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Record i: label (i * 3) % 10, pixel j = (i + j) % 256.
std::vector<uint8_t> raw_records(size_t n) {
  std::vector<uint8_t> out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back(static_cast<uint8_t>((i * 3) % 10));
    for (size_t j = 0; j < tn::kImageBytes; ++j) out.push_back(static_cast<uint8_t>((i + j) % 256));
  }
  return out;
}

tn::LabeledImageSet make_set(size_t n) {
  tn::LabeledImageSet s;
  const auto raw = raw_records(n);
  for (size_t i = 0; i < n; ++i) {
    s.labels.push_back(raw[i * tn::kRecordBytes]);
    s.pixels.insert(s.pixels.end(), raw.begin() + static_cast<long>(i * tn::kRecordBytes + 1),
                    raw.begin() + static_cast<long>((i + 1) * tn::kRecordBytes));
  }
  return s;
}

}  // namespace

TEST(Records, SingleRecordDecodesLabelAndPlanes) {
  TempDir dir("single");
  std::vector<uint8_t> rec{7};
  for (size_t i = 0; i < tn::kImageBytes; ++i) rec.push_back(static_cast<uint8_t>(i % 256));
  write_bytes(dir.file("one.bin"), rec);
  const auto set = tn::read_record_file(dir.file("one.bin"), "one", tn::Split::kTrain);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.labels[0], 7);
  const auto img = set.image(0);
  EXPECT_EQ(img[0], 0);      // R plane, first pixel
  EXPECT_EQ(img[1024], 0);   // G plane starts at 1024 = 4 * 256
  EXPECT_EQ(img[2047], 255);
  EXPECT_EQ(img[3071], 255);
}

TEST(Records, RoundTripIsBitExact) {
  TempDir dir("roundtrip");
  const auto raw = raw_records(13);
  write_bytes(dir.file("a.bin"), raw);
  const auto set = tn::read_record_file(dir.file("a.bin"), "a", tn::Split::kTest, 13);
  tn::write_record_file(dir.file("b.bin"), set);
  std::ifstream is(dir.file("b.bin"), std::ios::binary);
  std::vector<uint8_t> back((std::istreambuf_iterator<char>(is)), {});
  EXPECT_EQ(back, raw);
}

TEST(Records, TruncatedFileReportsByteCounts) {
  TempDir dir("trunc");
  auto raw = raw_records(3);
  raw.resize(raw.size() - 10);
  write_bytes(dir.file("t.bin"), raw);
  try {
    tn::read_record_file(dir.file("t.bin"), "t", tn::Split::kTrain);
    FAIL();
  } catch (const tn::IoError& e) {
    EXPECT_NE(std::string(e.what()).find(std::to_string(raw.size())), std::string::npos) << e.what();
  }
  write_bytes(dir.file("short.bin"), raw_records(2));
  try {
    tn::read_record_file(dir.file("short.bin"), "s", tn::Split::kTrain, 10000);
    FAIL();
  } catch (const tn::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("30730000"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("6146"), std::string::npos) << e.what();
  }
}

TEST(Records, RejectsOutOfRangeLabel) {
  TempDir dir("label");
  auto raw = raw_records(2);
  raw[tn::kRecordBytes] = 10;
  write_bytes(dir.file("l.bin"), raw);
  EXPECT_THROW(tn::read_record_file(dir.file("l.bin"), "l", tn::Split::kTrain), tn::IoError);
}

TEST(Records, MissingDirectoryNamesThePath) {
  try {
    tn::load_cifar10("/nonexistent/cifar-dir");
    FAIL();
  } catch (const tn::IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/cifar-dir"), std::string::npos);
  }
}

TEST(Records, SvhnFixtureParses) {
  TempDir dir("svhn");
  write_bytes(dir.file("svhn_train.bin"), raw_records(5));
  write_bytes(dir.file("svhn_test.bin"), raw_records(2));
  const auto s = tn::load_svhn(dir.str());
  EXPECT_EQ(s.train.size(), 5u);
  EXPECT_EQ(s.test.size(), 2u);
  EXPECT_EQ(s.train.pixels.size(), 5 * tn::kImageBytes);
  EXPECT_EQ(s.test.labels[1], 3);
}

TEST(Stats, ChannelMeansAndSidecarRoundTrip) {
  tn::LabeledImageSet s;
  s.labels = {0, 1};
  s.pixels.assign(2 * tn::kImageBytes, 0);
  // R all 255, G half 0 half 255, B all 0.
  for (size_t i = 0; i < 2; ++i) {
    std::fill_n(s.pixels.begin() + static_cast<long>(i * tn::kImageBytes), 1024, 255);
    std::fill_n(s.pixels.begin() + static_cast<long>(i * tn::kImageBytes + 1024), 512, 255);
  }
  const auto st = tn::compute_channel_stats(s);
  EXPECT_NEAR(st.mean[0], 1.0, 1e-6);
  EXPECT_NEAR(st.mean[1], 0.5, 1e-6);
  EXPECT_NEAR(st.stddev[1], 0.5, 1e-6);
  EXPECT_GT(st.stddev[2], 0.0f);  // constant channel: floored, never zero

  TempDir dir("stats");
  tn::save_channel_stats(dir.file("s.txt"), st);
  const auto back = tn::load_channel_stats(dir.file("s.txt"));
  for (int c = 0; c < 3; ++c) {
    EXPECT_FLOAT_EQ(back.mean[static_cast<size_t>(c)], st.mean[static_cast<size_t>(c)]);
    EXPECT_FLOAT_EQ(back.stddev[static_cast<size_t>(c)], st.stddev[static_cast<size_t>(c)]);
  }
}

TEST(Batches, HundredExamplesAtSixtyFour) {
  const auto set = make_set(100);
  tn::BatchIterator it(set, 64, true, 3, {});
  EXPECT_EQ(it.num_batches(), 2u);
  std::vector<size_t> sizes;
  std::multiset<size_t> seen;
  while (auto b = it.next()) {
    sizes.push_back(b->labels.size());
    EXPECT_EQ(b->images.shape(), (tn::Shape{static_cast<int64_t>(b->labels.size()), 3, 32, 32}));
    seen.insert(b->indices.begin(), b->indices.end());
  }
  EXPECT_EQ(sizes, (std::vector<size_t>{64, 36}));
  ASSERT_EQ(seen.size(), 100u);
  for (size_t i = 0; i < 100; ++i) EXPECT_EQ(seen.count(i), 1u);
}

TEST(Batches, ShuffleIsSeededPermutation) {
  const auto set = make_set(50);
  tn::BatchIterator a(set, 8, true, 7, {}), b(set, 8, true, 7, {}), c(set, 8, true, 8, {}), d(set, 8, false, 7, {});
  EXPECT_EQ(a.order(), b.order());
  EXPECT_NE(a.order(), c.order());
  for (size_t i = 0; i < 50; ++i) EXPECT_EQ(d.order()[i], i);
}

TEST(Batches, NormalizationAndLabels) {
  const auto set = make_set(3);
  tn::ChannelStats st;
  st.mean = {0.5f, 0.25f, 0.0f};
  st.stddev = {0.5f, 0.25f, 1.0f};
  const std::vector<size_t> idx{2, 0};
  const auto b = tn::make_batch(set, idx, st);
  EXPECT_EQ(b.labels, (std::vector<int>{6, 0}));
  const float p = static_cast<float>((2 + 1024) % 256) / 255.0f;  // image 2, G plane, pixel 0
  EXPECT_NEAR(b.images.at(0, 1, 0, 0), (p - 0.25f) / 0.25f, 1e-6);
}

TEST(Batches, HeadAndAppend) {
  auto a = make_set(10);
  const auto h = a.head(4);
  EXPECT_EQ(h.size(), 4u);
  EXPECT_EQ(a.head(50).size(), 10u);
  a.append(h);
  EXPECT_EQ(a.size(), 14u);
  EXPECT_EQ(a.pixels.size(), 14 * tn::kImageBytes);
}
