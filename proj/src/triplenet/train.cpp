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

#include "triplenet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "triplenet/checkpoint.hpp"
#include "triplenet/error.hpp"
#include "triplenet/executor.hpp"

namespace triplenet {

TrainConfig TrainConfig::for_dataset(const std::string& dataset) {
  TrainConfig c;
  if (dataset == "cifar10") {
    c.epochs = 200;
  } else if (dataset == "svhn") {
    c.epochs = 60;
  } else {
    throw InvalidArgument("unknown dataset '" + dataset + "' (expected cifar10 or svhn)");
  }
  return c;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  if (!(lr0 > 0)) throw InvalidArgument("learning rate must be positive");
  if (!(drop_factor > 1)) throw InvalidArgument("drop factor must exceed 1");
  for (double p : drop_points)
    if (!(p > 0 && p < 1)) throw InvalidArgument("drop points must lie strictly inside (0, 1)");
  if (!(drop_points[0] < drop_points[1])) throw InvalidArgument("drop points must be increasing");
}

double lr_at(int epoch, const TrainConfig& config) {
  if (epoch < 0 || epoch >= config.epochs) {
    throw InvalidArgument("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(config.epochs) + ")");
  }
  double lr = config.lr0;
  for (double p : config.drop_points) {
    const int boundary = static_cast<int>(std::floor(p * config.epochs));
    if (epoch >= boundary) lr /= config.drop_factor;
  }
  return lr;
}

template <typename T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamMoments<T>& moments, int64_t step,
               const AdamHyper& hyper, double lr) {
  if (grad.size() != param.size()) throw InvalidArgument("adam_step: gradient/parameter size mismatch");
  if (step < 1) throw InvalidArgument("adam_step: step count must be >= 1");
  if (moments.m.size() != param.size()) moments.m.assign(param.size(), T(0));
  if (moments.v.size() != param.size()) moments.v.assign(param.size(), T(0));
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
  for (size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    const double m = hyper.beta1 * moments.m[i] + (1.0 - hyper.beta1) * g;
    const double v = hyper.beta2 * moments.v[i] + (1.0 - hyper.beta2) * g * g;
    moments.m[i] = static_cast<T>(m);
    moments.v[i] = static_cast<T>(v);
    param[i] = static_cast<T>(param[i] - lr * (m / c1) / (std::sqrt(v / c2) + hyper.eps));
  }
}

template void adam_step(std::span<float>, std::span<const float>, AdamMoments<float>&, int64_t, const AdamHyper&,
                        double);
template void adam_step(std::span<double>, std::span<const double>, AdamMoments<double>&, int64_t,
                        const AdamHyper&, double);

AdamOptimizer::AdamOptimizer(const ModelGraph& graph, AdamHyper hyper)
    : hyper_(hyper), moments_(graph.parameters().size()) {}

void AdamOptimizer::step(ModelGraph& graph, double lr) {
  const auto& params = graph.parameters();
  if (params.size() != moments_.size()) throw InvalidArgument("optimizer was built for a different graph");
  ++t_;
  std::vector<float> zeros;
  for (size_t i = 0; i < params.size(); ++i) {
    if (!params[i].trainable) continue;
    Tensor& p = *params[i].tensor;
    std::span<const float> g;
    if (p.has_grad()) {
      g = p.grad();
    } else {
      zeros.assign(p.numel(), 0.0f);
      g = zeros;
    }
    adam_step<float>(p.data(), g, moments_[i], t_, hyper_, lr);
  }
}

std::string format_epoch_line(const EpochMetrics& m) {
  char buf[128];
  if (m.test_error >= 0) {
    std::snprintf(buf, sizeof buf, "%d %.6g %.6f %.2f", m.epoch, m.lr, m.train_loss, m.test_error);
  } else {
    std::snprintf(buf, sizeof buf, "%d %.6g %.6f -", m.epoch, m.lr, m.train_loss);
  }
  return buf;
}

TrainResult train(ModelGraph& graph, const LabeledImageSet& train_set, const LabeledImageSet* test_set,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (graph.config().input_size != static_cast<int>(kImageSide)) {
    throw InvalidArgument("model input size " + std::to_string(graph.config().input_size) +
                          " does not match the 32x32 dataset images");
  }
  std::ofstream log;
  if (!config.log_path.empty()) {
    log.open(config.log_path, std::ios::trunc);
    if (!log) throw IoError("cannot open log file " + config.log_path);
    log << "# epoch lr train_loss test_error\n";
  }
  AdamOptimizer opt(graph, config.adam);
  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.lr = lr_at(epoch, config);
    BatchIterator batches(train_set, config.batch, config.shuffle,
                          config.seed * 0x9E3779B97F4A7C15ull + static_cast<uint64_t>(epoch), config.stats);
    double loss_sum = 0;
    size_t seen = 0;
    int step = 0;
    while (auto batch = batches.next()) {
      graph.zero_grad();
      ForwardOutput out = forward(graph, batch->images, Mode::kTrain);
      auto loss = ag::softmax_cross_entropy(out.tape.get(), out.logits, batch->labels);
      const float value = (*loss)[0];
      if (!std::isfinite(value)) {
        throw RuntimeFailure("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step));
      }
      out.tape->backward(loss);
      opt.step(graph, metrics.lr);
      loss_sum += static_cast<double>(value) * static_cast<double>(batch->labels.size());
      seen += batch->labels.size();
      ++step;
    }
    metrics.steps = step;
    metrics.train_loss = loss_sum / static_cast<double>(seen);
    if (test_set && test_set->size() > 0) metrics.test_error = evaluate(graph, *test_set, config.stats);
    if (log.is_open()) log << format_epoch_line(metrics) << "\n" << std::flush;
    result.epochs.push_back(metrics);
    if (on_epoch) on_epoch(metrics);
    if (config.checkpoint_every_epoch && !config.checkpoint_path.empty()) {
      save_checkpoint(graph, config.checkpoint_path);
    }
  }
  if (!config.checkpoint_path.empty()) save_checkpoint(graph, config.checkpoint_path);
  return result;
}

double evaluate(const ModelGraph& graph, const LabeledImageSet& set, const ChannelStats& stats, size_t batch) {
  if (set.size() == 0) throw InvalidArgument("cannot evaluate on an empty set");
  BatchIterator batches(set, batch, false, 0, stats);
  size_t wrong = 0;
  while (auto b = batches.next()) {
    const Tensor logits = predict(graph, b->images);
    const int64_t k = logits.dim(1);
    for (size_t i = 0; i < b->labels.size(); ++i) {
      const float* row = logits.ptr() + static_cast<int64_t>(i) * k;
      const int64_t arg = std::max_element(row, row + k) - row;
      if (arg != b->labels[i]) ++wrong;
    }
  }
  return 100.0 * static_cast<double>(wrong) / static_cast<double>(set.size());
}

}  // namespace triplenet
