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

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "triplenet/checkpoint.hpp"
#include "triplenet/error.hpp"
#include "triplenet/executor.hpp"
#include "triplenet/graph.hpp"

namespace tn = triplenet;

namespace {

// Trainable scalar count written from the layer recipe, independent of the
// builder: conv k*k*Cin*Cout, BN 2C, linear F*K+K.
int64_t expected_params(const tn::ModelConfig& c) {
  auto conv = [](int64_t k, int64_t cin, int64_t cout) { return k * k * cin * cout; };
  int64_t p = conv(3, 3, c.stem_channels) + 2 * c.stem_channels + conv(3, c.stem_channels, c.stem_channels) +
              2 * c.stem_channels;
  int64_t width = c.block_channels[0];
  // block 1: dense bottleneck units
  {
    const int64_t g = c.growth_rates[0];
    int64_t in = width;
    for (int n = 1; n <= c.block_depths[0]; ++n) {
      p += 2 * in + conv(1, in, 4 * g) + 2 * 4 * g + conv(3, 4 * g, g);
      in += g;
    }
    width = in;
  }
  for (int blk = 1; blk < 5; ++blk) {
    // transition into this block
    p += conv(1, width, c.block_channels[blk]) + 2 * c.block_channels[blk];
    width = c.block_channels[blk];
    if (blk == 4) break;
    const int64_t g = c.growth_rates[blk];
    std::vector<int64_t> w{width};
    for (int n = 1; n <= c.block_depths[blk]; ++n) w.push_back(n % 2 == 0 ? (17 * g) / 10 : g);
    for (int n = 1; n <= c.block_depths[blk]; ++n) {
      int64_t in = 0;
      for (int s : oracle::harmonic_sources(n)) in += w[static_cast<size_t>(s)];
      p += conv(3, in, w[static_cast<size_t>(n)]) + 2 * w[static_cast<size_t>(n)];
    }
    int64_t out = 0;
    for (int n = 0; n <= c.block_depths[blk]; ++n)
      if (n == 0 || n % 2 == 0 || n == c.block_depths[blk]) out += w[static_cast<size_t>(n)];
    width = out;
  }
  const int64_t C = width;
  const int64_t mid = c.bottleneck == tn::BottleneckWidth::kHalf ? C / 2 : c.growth_rates[4];
  for (int u = 0; u < c.block_depths[4]; ++u) {
    p += conv(1, C, mid) + 2 * mid + conv(3, mid, mid) + 2 * mid + conv(1, mid, C) + 2 * C;
  }
  return p + C * c.num_classes + c.num_classes;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("triplenet_test_" + name);
}

}  // namespace

TEST(Graph, StageSizesAt224) {
  for (auto v : {tn::Variant::kS, tn::Variant::kB}) {
    const auto g = tn::build(tn::ModelConfig::for_variant(v, 10, 224));
    EXPECT_EQ(tn::stage_spatial_sizes(g), (std::vector<int64_t>{112, 56, 28, 14, 14, 7, 1}));
  }
}

TEST(Graph, StageSizesAt32) {
  const auto g = tn::build(tn::ModelConfig::triplenet_s(10, 32));
  EXPECT_EQ(tn::stage_spatial_sizes(g), (std::vector<int64_t>{16, 8, 4, 2, 2, 1, 1}));
}

TEST(Graph, FinalWidths) {
  const auto s = tn::build(tn::ModelConfig::triplenet_s(10, 224));
  const auto b = tn::build(tn::ModelConfig::triplenet_b(10, 224));
  EXPECT_EQ(s.node(s.output_node()).in_channels, 720);
  EXPECT_EQ(b.node(b.output_node()).in_channels, 1080);
}

TEST(Graph, RejectsInputNotMultipleOf32) {
  EXPECT_THROW(tn::build(tn::ModelConfig::triplenet_s(10, 100)), tn::InvalidArgument);
  EXPECT_THROW(tn::build(tn::ModelConfig::triplenet_s(10, 0)), tn::InvalidArgument);
}

TEST(Graph, RejectsStemWidthMismatch) {
  auto c = tn::ModelConfig::triplenet_s();
  c.stem_channels = 64;
  EXPECT_THROW(tn::build(c), tn::InvalidArgument);
}

TEST(Graph, ParameterCountMatchesRecipe) {
  for (auto v : {tn::Variant::kS, tn::Variant::kB})
    for (int classes : {10, 1000})
      for (auto mid : {tn::BottleneckWidth::kHalf, tn::BottleneckWidth::kGrowthRate}) {
        auto c = tn::ModelConfig::for_variant(v, classes, 32);
        c.bottleneck = mid;
        EXPECT_EQ(tn::build(c).trainable_scalar_count(), expected_params(c))
            << tn::to_string(v) << " classes=" << classes << " " << tn::to_string(mid);
      }
}

TEST(Graph, ParameterCountIndependentOfInputSize) {
  const auto a = tn::build(tn::ModelConfig::triplenet_s(10, 32));
  const auto b = tn::build(tn::ModelConfig::triplenet_s(10, 224));
  EXPECT_EQ(a.trainable_scalar_count(), b.trainable_scalar_count());
}

TEST(Graph, DryRunMatchesDeclaredShapes) {
  const auto g = tn::build(tn::ModelConfig::triplenet_b(10, 64));
  const auto rows = tn::dry_run_shapes(g, 3);
  ASSERT_EQ(rows.size(), g.nodes().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].shape[0], 3);
    EXPECT_EQ(tn::Shape(rows[i].shape.begin() + 1, rows[i].shape.end()), g.nodes()[i].out_shape);
  }
  EXPECT_EQ(rows.back().shape, (tn::Shape{3, 10}));
}

TEST(Graph, DryRunNamesTheOffendingNode) {
  auto g = tn::build(tn::ModelConfig::triplenet_s());
  g.param("block3.unit4.conv.weight") = tn::Tensor({20, 7, 3, 3});
  try {
    tn::dry_run_shapes(g, 1);
    FAIL() << "expected a shape error";
  } catch (const tn::InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("block3.unit4.conv"), std::string::npos) << e.what();
  }
}

TEST(Graph, DryRunRejectsEmptyGraph) { EXPECT_THROW(tn::dry_run_shapes(tn::ModelGraph{}, 1), tn::InvalidArgument); }

TEST(Graph, SameSeedSameWeights) {
  const auto a = tn::build(tn::ModelConfig::triplenet_s(), 9);
  const auto b = tn::build(tn::ModelConfig::triplenet_s(), 9);
  const auto c = tn::build(tn::ModelConfig::triplenet_s(), 10);
  const auto& wa = a.param("block2.unit2.conv.weight");
  const auto& wb = b.param("block2.unit2.conv.weight");
  const auto& wc = c.param("block2.unit2.conv.weight");
  EXPECT_TRUE(std::equal(wa.data().begin(), wa.data().end(), wb.data().begin()));
  EXPECT_FALSE(std::equal(wa.data().begin(), wa.data().end(), wc.data().begin()));
}

TEST(Graph, CopyIsDeep) {
  const auto a = tn::build(tn::ModelConfig::triplenet_s(), 1);
  tn::ModelGraph b = a;
  b.param("classifier.fc.bias")[0] = 42.0f;
  EXPECT_EQ(a.param("classifier.fc.bias")[0], 0.0f);
}

TEST(Graph, ArchitectureTableRows) {
  const auto rows = tn::architecture_table(tn::build(tn::ModelConfig::triplenet_s(10, 224)));
  std::vector<int64_t> block_sizes;
  for (const auto& r : rows)
    if (r.layer.rfind("Triple Block", 0) == 0) block_sizes.push_back(r.spatial);
  EXPECT_EQ(block_sizes, (std::vector<int64_t>{56, 28, 14, 14, 7}));
  EXPECT_EQ(rows.front().spatial, 112);
  EXPECT_EQ(rows.back().channels, 10);
}

TEST(Executor, ForwardShapesAndEvalMatchesPredict) {
  auto g = tn::build(tn::ModelConfig::triplenet_s(), 3);
  tn::Tensor x({2, 3, 32, 32});
  std::mt19937_64 rng(1);
  std::normal_distribution<float> d;
  for (auto& v : x.data()) v = d(rng);
  const auto out = tn::forward(g, x, tn::Mode::kEval);
  ASSERT_EQ(out.logits->shape(), (tn::Shape{2, 10}));
  EXPECT_FALSE(out.tape);
  const tn::Tensor p = tn::predict(g, x);
  EXPECT_TRUE(std::equal(p.data().begin(), p.data().end(), out.logits->data().begin()));
}

TEST(Executor, EvalLogitsAreBatchIndependent) {
  const auto g = tn::build(tn::ModelConfig::triplenet_s(), 3);
  tn::Tensor x({2, 3, 32, 32});
  std::mt19937_64 rng(4);
  std::normal_distribution<float> d;
  for (auto& v : x.data()) v = d(rng);
  const tn::Tensor both = tn::predict(g, x);
  tn::Tensor first({1, 3, 32, 32}, std::vector<float>(x.data().begin(), x.data().begin() + 3072));
  const tn::Tensor one = tn::predict(g, first);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(one[static_cast<size_t>(k)], both[static_cast<size_t>(k)], 1e-4f);
}

TEST(Executor, TrainModeRecordsTapeAndUpdatesRunningStats) {
  auto g = tn::build(tn::ModelConfig::triplenet_s(), 3);
  tn::Tensor x({2, 3, 32, 32}, 0.5f);
  x[0] = 3.0f;
  const float before = g.param("stem.bn1.running_mean")[0];
  const auto out = tn::forward(g, x, tn::Mode::kTrain);
  ASSERT_TRUE(out.tape);
  EXPECT_GT(out.tape->size(), 100u);
  EXPECT_NE(g.param("stem.bn1.running_mean")[0], before);
}

TEST(Executor, RejectsWrongInputShape) {
  auto g = tn::build(tn::ModelConfig::triplenet_s());
  EXPECT_THROW(tn::predict(g, tn::Tensor({1, 3, 64, 64})), tn::InvalidArgument);
  EXPECT_THROW(tn::predict(g, tn::Tensor({1, 1, 32, 32})), tn::InvalidArgument);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const auto a = tn::build(tn::ModelConfig::triplenet_s(), 5);
  auto b = tn::build(tn::ModelConfig::triplenet_s(), 6);
  const auto path = temp_file("roundtrip.tpln");
  tn::save_checkpoint(a, path.string());
  tn::load_checkpoint(b, path.string());
  for (const auto& p : a.parameters()) {
    const auto& q = b.param(p.name);
    ASSERT_EQ(p.tensor->shape(), q.shape());
    EXPECT_EQ(std::memcmp(p.tensor->ptr(), q.ptr(), q.numel() * sizeof(float)), 0) << p.name;
  }
  std::filesystem::remove(path);
}

TEST(Checkpoint, HeaderLayout) {
  const auto path = temp_file("header.tpln");
  tn::write_tensors(path.string(), {{"w", tn::Tensor({2}, std::vector<float>{1.0f, -2.0f})}});
  std::ifstream is(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), {});
  const std::vector<unsigned char> expect{'T', 'P', 'L', 'N', 1, 0, 1, 0, 0, 0, 1, 0, 0, 0, 'w', 1, 0, 0, 0, 2, 0, 0, 0,
                                          0x00, 0x00, 0x80, 0x3f, 0x00, 0x00, 0x00, 0xc0};
  EXPECT_EQ(bytes, expect);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsShapeMismatchAndTruncation) {
  const auto s = tn::build(tn::ModelConfig::triplenet_s());
  auto b = tn::build(tn::ModelConfig::triplenet_b());
  const auto path = temp_file("mismatch.tpln");
  tn::save_checkpoint(s, path.string());
  EXPECT_THROW(tn::load_checkpoint(b, path.string()), tn::IoError);

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  auto s2 = tn::build(tn::ModelConfig::triplenet_s());
  EXPECT_THROW(tn::load_checkpoint(s2, path.string()), tn::IoError);
  std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsBadMagic) {
  const auto path = temp_file("magic.tpln");
  std::ofstream(path, std::ios::binary) << "NOPE....";
  EXPECT_THROW(tn::read_tensors(path.string()), tn::IoError);
  std::filesystem::remove(path);
}
