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
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "triplenet/error.hpp"
#include "triplenet/train.hpp"

namespace tn = triplenet;

namespace {

// Narrow and shallow, same topology as the full network.
tn::ModelConfig tiny() {
  tn::ModelConfig c;
  c.block_depths = {1, 2, 2, 2, 1};
  c.block_channels = {16, 16, 16, 16, 16};
  c.growth_rates = {8, 8, 8, 8, 8};
  c.stem_channels = 16;
  return c;
}

// Each class gets a distinct colour bias plus noise.
tn::LabeledImageSet toy_set(size_t n, uint64_t seed) {
  tn::LabeledImageSet s;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(-40, 40);
  for (size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 10);
    s.labels.push_back(static_cast<uint8_t>(label));
    for (int c = 0; c < 3; ++c)
      for (size_t j = 0; j < 1024; ++j) {
        const int base = 40 + 20 * ((label + c * 3) % 10);
        s.pixels.push_back(static_cast<uint8_t>(std::clamp(base + noise(rng), 0, 255)));
      }
  }
  return s;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Schedule, TwoHundredEpochs) {
  const auto c = tn::TrainConfig::for_dataset("cifar10");
  EXPECT_EQ(c.epochs, 200);
  EXPECT_EQ(c.batch, 64u);
  EXPECT_DOUBLE_EQ(c.lr0, 1e-3);
  EXPECT_DOUBLE_EQ(tn::lr_at(0, c), 1e-3);
  EXPECT_DOUBLE_EQ(tn::lr_at(74, c), 1e-3);
  EXPECT_DOUBLE_EQ(tn::lr_at(75, c), 2e-4);
  EXPECT_DOUBLE_EQ(tn::lr_at(149, c), 2e-4);
  EXPECT_DOUBLE_EQ(tn::lr_at(150, c), 4e-5);
  EXPECT_DOUBLE_EQ(tn::lr_at(199, c), 4e-5);
  EXPECT_THROW(tn::lr_at(200, c), tn::InvalidArgument);
}

TEST(Schedule, SixtyEpochsForSvhn) {
  const auto c = tn::TrainConfig::for_dataset("svhn");
  EXPECT_EQ(c.epochs, 60);
  EXPECT_DOUBLE_EQ(tn::lr_at(21, c), 1e-3);
  EXPECT_DOUBLE_EQ(tn::lr_at(22, c), 2e-4);
  EXPECT_DOUBLE_EQ(tn::lr_at(45, c), 4e-5);
  EXPECT_THROW(tn::TrainConfig::for_dataset("mnist"), tn::InvalidArgument);
}

TEST(Schedule, NonIncreasingWithThreeValues) {
  for (int epochs : {3, 8, 17, 60, 200}) {
    tn::TrainConfig c;
    c.epochs = epochs;
    std::set<double> values;
    double prev = std::numeric_limits<double>::infinity();
    for (int e = 0; e < epochs; ++e) {
      const double lr = tn::lr_at(e, c);
      EXPECT_LE(lr, prev);
      prev = lr;
      values.insert(lr);
    }
    if (epochs >= 4) {
      EXPECT_EQ(values, (std::set<double>{1e-3 / 25, 1e-3 / 5, 1e-3})) << epochs;
    }
  }
}

TEST(Adam, ScalarStepsMatchHandComputation) {
  std::vector<double> p{1.0};
  tn::AdamMoments<double> mom;
  const tn::AdamHyper h;
  const double grads[3] = {0.5, -0.2, 0.1};
  double m = 0, v = 0, x = 1.0;
  for (int t = 1; t <= 3; ++t) {
    const double g = grads[t - 1];
    const std::vector<double> gv{g};
    tn::adam_step<double>(p, gv, mom, t, h, 0.01);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.999, t));
    x -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    EXPECT_NEAR(p[0], x, 1e-12) << "step " << t;
  }
  // First bias-corrected step moves by lr regardless of gradient scale.
  std::vector<double> q{0.0};
  tn::AdamMoments<double> m2;
  const std::vector<double> big{1234.5};
  tn::adam_step<double>(q, big, m2, 1, h, 0.01);
  EXPECT_NEAR(q[0], -0.01, 1e-9);
}

TEST(Adam, ZeroLearningRateIsIdentity) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> d;
  std::vector<float> p(100), g(100);
  for (auto& v : p) v = d(rng);
  for (auto& v : g) v = d(rng);
  const auto before = p;
  tn::AdamMoments<float> mom;
  for (int t = 1; t <= 5; ++t) tn::adam_step<float>(p, g, mom, t, {}, 0.0);
  EXPECT_EQ(p, before);
}

TEST(Training, SeededRunsAreIdentical) {
  const auto data = toy_set(40, 1);
  const auto dir = std::filesystem::temp_directory_path();
  std::vector<std::string> logs;
  std::vector<std::vector<double>> losses;
  for (int run = 0; run < 2; ++run) {
    auto g = tn::build(tiny(), 5);
    tn::TrainConfig c;
    c.epochs = 3;
    c.batch = 16;
    c.seed = 9;
    c.stats = tn::compute_channel_stats(data);
    c.log_path = (dir / ("triplenet_log_" + std::to_string(run) + ".txt")).string();
    const auto r = tn::train(g, data, &data, c);
    std::vector<double> l;
    for (const auto& e : r.epochs) l.push_back(e.train_loss);
    losses.push_back(l);
    logs.push_back(slurp(c.log_path));
    std::filesystem::remove(c.log_path);
  }
  EXPECT_EQ(losses[0], losses[1]);
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(logs[0].rfind("# epoch lr train_loss test_error\n", 0), 0u);
  EXPECT_EQ(std::count(logs[0].begin(), logs[0].end(), '\n'), 4);
}

TEST(Training, CallbackOncePerEpochInOrder) {
  const auto data = toy_set(20, 2);
  auto g = tn::build(tiny(), 1);
  tn::TrainConfig c;
  c.epochs = 4;
  c.batch = 8;
  std::vector<int> seen;
  const auto r = tn::train(g, data, nullptr, c, [&](const tn::EpochMetrics& m) {
    seen.push_back(m.epoch);
    EXPECT_EQ(m.steps, 3);
    EXPECT_EQ(m.test_error, -1);
  });
  EXPECT_EQ(seen, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(r.epochs.size(), 4u);
}

TEST(Training, MemorizesTenImages) {
  const auto data = toy_set(10, 3);
  auto g = tn::build(tiny(), 2);
  tn::TrainConfig c;
  c.epochs = 60;
  c.batch = 10;
  c.lr0 = 1e-2;
  c.stats = tn::compute_channel_stats(data);
  const auto r = tn::train(g, data, nullptr, c);
  EXPECT_LT(r.epochs.back().train_loss, 0.5 * r.epochs.front().train_loss);
  EXPECT_DOUBLE_EQ(tn::evaluate(g, data, c.stats), 0.0);
}

TEST(Training, NonFiniteLossNamesEpochAndStep) {
  const auto data = toy_set(10, 4);
  auto g = tn::build(tiny(), 2);
  g.param("classifier.fc.bias")[0] = std::numeric_limits<float>::quiet_NaN();
  tn::TrainConfig c;
  c.epochs = 1;
  try {
    tn::train(g, data, nullptr, c);
    FAIL();
  } catch (const tn::RuntimeFailure& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0, step 0"), std::string::npos) << e.what();
  }
}

TEST(Training, RejectsBadConfig) {
  const auto data = toy_set(10, 4);
  auto g = tn::build(tiny(), 2);
  tn::TrainConfig c;
  c.epochs = 0;
  EXPECT_THROW(tn::train(g, data, nullptr, c), tn::InvalidArgument);
  auto big = tiny();
  big.input_size = 64;
  auto g64 = tn::build(big, 2);
  EXPECT_THROW(tn::train(g64, data, nullptr, tn::TrainConfig{}), tn::InvalidArgument);
}

TEST(Evaluate, RangeDeterminismAndOrderInvariance) {
  const auto data = toy_set(30, 5);
  const auto g = tn::build(tiny(), 3);
  const auto st = tn::compute_channel_stats(data);
  const double e1 = tn::evaluate(g, data, st), e2 = tn::evaluate(g, data, st, 7);
  EXPECT_GE(e1, 0.0);
  EXPECT_LE(e1, 100.0);
  EXPECT_EQ(e1, e2);

  tn::LabeledImageSet rev;
  for (size_t i = data.size(); i-- > 0;) {
    rev.labels.push_back(data.labels[i]);
    const auto img = data.image(i);
    rev.pixels.insert(rev.pixels.end(), img.begin(), img.end());
  }
  EXPECT_EQ(tn::evaluate(g, rev, st), e1);
}
