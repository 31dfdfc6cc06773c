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

#include "triplenet/bench.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <vector>

#include "triplenet/error.hpp"
#include "triplenet/executor.hpp"

namespace triplenet {

BenchResult benchmark(const ModelGraph& graph, int images, int warmup, uint64_t seed) {
  if (images < 1) throw InvalidArgument("benchmark needs at least one image");
  if (warmup < 0) throw InvalidArgument("warmup count must be >= 0");
  const int64_t side = graph.config().input_size;
  Tensor x({1, 3, side, side});
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (auto& v : x.data()) v = dist(rng);

  for (int i = 0; i < warmup; ++i) predict(graph, x);

  using Clock = std::chrono::steady_clock;
  std::vector<double> ms(static_cast<size_t>(images));
  const auto start = Clock::now();
  for (int i = 0; i < images; ++i) {
    const auto t0 = Clock::now();
    predict(graph, x);
    ms[static_cast<size_t>(i)] = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  }
  BenchResult r;
  r.images = images;
  r.warmup = warmup;
  r.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  double sum = 0;
  for (double v : ms) sum += v;
  r.mean_ms = sum / images;
  double sq = 0;
  for (double v : ms) sq += (v - r.mean_ms) * (v - r.mean_ms);
  r.stddev_ms = images > 1 ? std::sqrt(sq / (images - 1)) : 0.0;
  return r;
}

}  // namespace triplenet
