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

#include <cstdint>

#include "triplenet/graph.hpp"

namespace triplenet {

struct BenchResult {
  int images = 0;
  int warmup = 0;
  double total_seconds = 0;
  double mean_ms = 0;
  double stddev_ms = 0;
};

// Times `images` single-image eval-mode forwards after `warmup` discarded
// ones, on a steady clock. Input generation happens before timing starts.
BenchResult benchmark(const ModelGraph& graph, int images, int warmup, uint64_t seed = 0);

}  // namespace triplenet
