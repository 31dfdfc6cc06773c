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

#include <functional>
#include <string>
#include <vector>

#include "triplenet/kernels.hpp"
#include "triplenet/tensor.hpp"

namespace triplenet {

enum class Mode { kTrain, kEval };

// Ordered log of executed primitives. backward() replays it in exact reverse
// order; each record adds its contribution to the gradient of every input it
// read, so a tensor consumed k times receives the sum of k contributions.
template <typename T>
class Tape {
 public:
  using Ref = TensorRef<T>;

  struct Record {
    std::string op;
    std::vector<Ref> inputs;
    Ref output;
    std::function<void()> backward;
  };

  void record(Record r) {
    if (consumed_) throw RuntimeFailure("cannot record on a tape that already ran backward");
    records_.push_back(std::move(r));
  }

  const std::vector<Record>& records() const { return records_; }
  size_t size() const { return records_.size(); }
  bool consumed() const { return consumed_; }

  // Seeds d(loss) = seed and propagates. Intermediates are released afterwards,
  // so a second call is rejected until a fresh forward pass builds a new tape.
  void backward(const Ref& loss, T seed = T(1), const std::function<void(size_t)>& on_visit = {}) {
    if (!loss || loss->numel() != 1) throw InvalidArgument("backward expects a scalar loss tensor");
    const T seeds[1] = {seed};
    backward_from(loss, seeds, on_visit);
  }

  // Vector-Jacobian product: seeds d(output) with an arbitrary upstream
  // gradient of the output's shape.
  void backward_from(const Ref& output, std::span<const T> upstream,
                     const std::function<void(size_t)>& on_visit = {}) {
    if (consumed_) throw RuntimeFailure("backward called twice on the same tape; re-run forward first");
    if (!output) throw InvalidArgument("backward needs an output tensor");
    consumed_ = true;
    output->accumulate_grad(upstream);
    for (size_t i = records_.size(); i-- > 0;) {
      if (on_visit) on_visit(i);
      records_[i].backward();
    }
    records_.clear();
  }

 private:
  std::vector<Record> records_;
  bool consumed_ = false;
};

// Differentiable primitives. Passing a null tape evaluates without recording.
namespace ag {

template <typename T>
using Ref = TensorRef<T>;

template <typename T>
struct BatchNormBuffers {
  BasicTensor<T>* running_mean = nullptr;
  BasicTensor<T>* running_var = nullptr;
  double eps = 1e-5;
  double momentum = 0.1;
};

template <typename T>
Ref<T> conv2d(Tape<T>* tape, const Ref<T>& x, const Ref<T>& w, int stride, int pad);

// Train mode normalizes with batch statistics and, when buffers are supplied,
// folds them into the running estimates. Eval mode reads the running estimates.
template <typename T>
Ref<T> batchnorm2d(Tape<T>* tape, const Ref<T>& x, const Ref<T>& gamma, const Ref<T>& beta,
                   const BatchNormBuffers<T>& buffers, Mode mode);

template <typename T>
Ref<T> relu(Tape<T>* tape, const Ref<T>& x);

template <typename T>
Ref<T> maxpool2d(Tape<T>* tape, const Ref<T>& x, int k, int stride, int pad = 0);

template <typename T>
Ref<T> avgpool2d(Tape<T>* tape, const Ref<T>& x, int k, int stride);

template <typename T>
Ref<T> global_avgpool(Tape<T>* tape, const Ref<T>& x);

template <typename T>
Ref<T> concat_channels(Tape<T>* tape, const std::vector<Ref<T>>& xs);

template <typename T>
Ref<T> add(Tape<T>* tape, const Ref<T>& a, const Ref<T>& b);

template <typename T>
Ref<T> linear(Tape<T>* tape, const Ref<T>& x, const Ref<T>& w, const Ref<T>& b);

// Returns a one-element tensor holding the mean loss.
template <typename T>
Ref<T> softmax_cross_entropy(Tape<T>* tape, const Ref<T>& logits, const std::vector<int>& labels);

}  // namespace ag
}  // namespace triplenet
