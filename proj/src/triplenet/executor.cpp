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

#include "triplenet/executor.hpp"

#include <vector>

namespace triplenet {

namespace {

std::vector<int> last_consumers(const ModelGraph& graph) {
  std::vector<int> last(graph.nodes().size(), -1);
  for (const NodeSpec& n : graph.nodes())
    for (int id : n.inputs) last[static_cast<size_t>(id)] = n.id;
  return last;
}

ForwardOutput run(const ModelGraph& graph, const Tensor& x, Mode mode) {
  const ModelConfig& c = graph.config();
  if (x.rank() != 4 || x.dim(1) != 3 || x.dim(2) != c.input_size || x.dim(3) != c.input_size) {
    throw InvalidArgument("expected input [B,3," + std::to_string(c.input_size) + "," + std::to_string(c.input_size) +
                          "], got " + shape_to_string(x.shape()));
  }
  ForwardOutput result;
  Tape<float>* tape = nullptr;
  if (mode == Mode::kTrain) {
    result.tape = std::make_unique<Tape<float>>();
    tape = result.tape.get();
  }
  const std::vector<int> last = last_consumers(graph);
  std::vector<TensorRef<float>> values(graph.nodes().size());
  const auto in = [&](const NodeSpec& n, size_t i) -> const TensorRef<float>& {
    return values[static_cast<size_t>(n.inputs[i])];
  };

  for (const NodeSpec& n : graph.nodes()) {
    TensorRef<float> out;
    switch (n.kind) {
      case NodeKind::kInput:
        out = make_ref(Tensor(x));
        break;
      case NodeKind::kConv:
        out = ag::conv2d(tape, in(n, 0), graph.param_ref(n.params[0]), n.stride, n.pad);
        break;
      case NodeKind::kBatchNorm: {
        ag::BatchNormBuffers<float> buffers;
        buffers.running_mean = graph.param_ref(n.buffers[0]).get();
        buffers.running_var = graph.param_ref(n.buffers[1]).get();
        buffers.eps = c.bn_eps;
        buffers.momentum = c.bn_momentum;
        out = ag::batchnorm2d(tape, in(n, 0), graph.param_ref(n.params[0]), graph.param_ref(n.params[1]), buffers,
                              mode);
        break;
      }
      case NodeKind::kRelu:
        out = ag::relu(tape, in(n, 0));
        break;
      case NodeKind::kMaxPool:
        out = ag::maxpool2d(tape, in(n, 0), n.kernel, n.stride, n.pad);
        break;
      case NodeKind::kAvgPool:
        out = ag::avgpool2d(tape, in(n, 0), n.kernel, n.stride);
        break;
      case NodeKind::kGlobalAvgPool:
        out = ag::global_avgpool(tape, in(n, 0));
        break;
      case NodeKind::kConcat: {
        std::vector<TensorRef<float>> xs;
        for (size_t i = 0; i < n.inputs.size(); ++i) xs.push_back(in(n, i));
        out = ag::concat_channels(tape, xs);
        break;
      }
      case NodeKind::kAdd:
        out = ag::add(tape, in(n, 0), in(n, 1));
        break;
      case NodeKind::kLinear:
        out = ag::linear(tape, in(n, 0), graph.param_ref(n.params[0]), graph.param_ref(n.params[1]));
        break;
    }
    values[static_cast<size_t>(n.id)] = std::move(out);
    if (!tape) {
      for (int id : n.inputs)
        if (last[static_cast<size_t>(id)] == n.id) values[static_cast<size_t>(id)].reset();
    }
  }
  result.logits = values.back();
  return result;
}

}  // namespace

ForwardOutput forward(ModelGraph& graph, const Tensor& x, Mode mode) { return run(graph, x, mode); }

Tensor predict(const ModelGraph& graph, const Tensor& x) { return std::move(*run(graph, x, Mode::kEval).logits); }

}  // namespace triplenet
