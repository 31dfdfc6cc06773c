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

#include <memory>

#include "triplenet/autograd.hpp"
#include "triplenet/graph.hpp"

namespace triplenet {

struct ForwardOutput {
  TensorRef<float> logits;
  // Present in train mode only.
  std::unique_ptr<Tape<float>> tape;
};

// Runs the graph on a [B, 3, S, S] batch. Train mode uses batch statistics,
// updates the running BN estimates and records a tape; eval mode frees each
// intermediate after its last consumer.
ForwardOutput forward(ModelGraph& graph, const Tensor& x, Mode mode);

// Eval-mode logits; never mutates the graph.
Tensor predict(const ModelGraph& graph, const Tensor& x);

}  // namespace triplenet
