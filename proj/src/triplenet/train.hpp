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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "triplenet/data.hpp"
#include "triplenet/graph.hpp"

namespace triplenet {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double lr0 = 1e-3;
  AdamHyper adam;
  size_t batch = 64;
  int epochs = 200;
  std::array<double, 2> drop_points{0.375, 0.75};
  double drop_factor = 5.0;
  uint64_t seed = 0;
  bool shuffle = true;
  ChannelStats stats;
  std::string log_path;         // per-epoch metrics, skipped when empty
  std::string checkpoint_path;  // written after the last epoch when set
  bool checkpoint_every_epoch = false;

  // 200 epochs for cifar10, 60 for svhn; everything else at defaults.
  static TrainConfig for_dataset(const std::string& dataset);
  void validate() const;
};

// Piecewise constant: lr0 before floor(0.375 * epochs), lr0 / 5 before
// floor(0.75 * epochs), lr0 / 25 afterwards.
double lr_at(int epoch, const TrainConfig& config);

template <typename T>
struct AdamMoments {
  std::vector<T> m;
  std::vector<T> v;
};

// One bias-corrected Adam update; `step` is the 1-based step count after
// this update.
template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamMoments<T>& moments, int64_t step,
               const AdamHyper& hyper, double lr);

// Adam over every trainable tensor of a graph.
class AdamOptimizer {
 public:
  AdamOptimizer(const ModelGraph& graph, AdamHyper hyper);

  // Applies one update with the accumulated gradients (missing gradients
  // count as zero).
  void step(ModelGraph& graph, double lr);
  int64_t steps() const { return t_; }

 private:
  AdamHyper hyper_;
  std::vector<AdamMoments<float>> moments_;
  int64_t t_ = 0;
};

struct EpochMetrics {
  int epoch = 0;
  double lr = 0;
  double train_loss = 0;   // example-weighted mean over the epoch
  double test_error = -1;  // percent, -1 when no test set was supplied
  int steps = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

struct TrainResult {
  std::vector<EpochMetrics> epochs;
};

// Trains the graph in place. A non-finite loss aborts with the epoch and step.
TrainResult train(ModelGraph& graph, const LabeledImageSet& train_set, const LabeledImageSet* test_set,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

// Top-1 error in percent with eval-mode BN.
double evaluate(const ModelGraph& graph, const LabeledImageSet& set, const ChannelStats& stats, size_t batch = 100);

std::string format_epoch_line(const EpochMetrics& m);

}  // namespace triplenet
