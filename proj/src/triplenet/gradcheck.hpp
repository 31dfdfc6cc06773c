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
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "triplenet/autograd.hpp"

namespace triplenet {

struct GradcheckOptions {
  uint64_t seed = 0;
  int instances = 5;
  double step = 1e-4;
  double tolerance = 1e-3;
  // Negative control: runs with a perturbed conv weight gradient.
  bool corrupt_conv_backward = false;
};

struct GradcheckCase {
  std::string primitive;
  int instances = 0;
  double max_rel_error = 0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;
  bool all_passed() const;
  std::string format() const;
};

using DiffFn = std::function<TensorRef<double>(Tape<double>*, const std::vector<TensorRef<double>>&)>;

// Compares reverse-mode gradients of sum(f(inputs) * R), R a fixed random
// projection, against central differences on every input element.
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
double max_gradient_error(const DiffFn& f, const std::vector<TensorRef<double>>& inputs, double step,
                          std::mt19937_64& rng);

// Runs every primitive on `instances` seeded random problems in 64-bit.
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace triplenet
