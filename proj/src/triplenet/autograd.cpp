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

#include "triplenet/autograd.hpp"

#include <cmath>
#include <memory>

namespace triplenet::ag {

namespace {

template <typename T>
void push(Tape<T>* tape, std::string op, std::vector<Ref<T>> inputs, const Ref<T>& out,
          std::function<void()> fn) {
  if (!tape) return;
  tape->record({std::move(op), std::move(inputs), out, std::move(fn)});
}

}  // namespace

template <typename T>
Ref<T> conv2d(Tape<T>* tape, const Ref<T>& x, const Ref<T>& w, int stride, int pad) {
  auto out = make_ref(kernels::conv2d_forward(*x, *w, stride, pad));
  push<T>(tape, "conv2d", {x, w}, out, [x, w, out, stride, pad] {
    if (!out->has_grad()) return;
    std::vector<T> dx(x->numel()), dw(w->numel());
    kernels::conv2d_backward(*x, *w, out->grad().data(), stride, pad, dx.data(), dw.data());
    x->accumulate_grad(dx);
    w->accumulate_grad(dw);
  });
  return out;
}

template <typename T>
Ref<T> batchnorm2d(Tape<T>* tape, const Ref<T>& x, const Ref<T>& gamma, const Ref<T>& beta,
                   const BatchNormBuffers<T>& buffers, Mode mode) {
  if (mode == Mode::kEval) {
    if (!buffers.running_mean || !buffers.running_var) {
      throw InvalidArgument("batchnorm2d eval mode needs running statistics");
    }
    // Eval mode is an affine map; recorded so frozen-statistics graphs can
    // still be differentiated.
    auto out = make_ref(kernels::batchnorm_eval_forward(*x, *gamma, *beta, *buffers.running_mean,
                                                        *buffers.running_var, buffers.eps));
    if (!tape) return out;
    const BasicTensor<T> mean = *buffers.running_mean;
    const BasicTensor<T> var = *buffers.running_var;
    const double eps = buffers.eps;
    push<T>(tape, "batchnorm2d", {x, gamma, beta}, out, [x, gamma, beta, out, mean, var, eps] {
      if (!out->has_grad()) return;
      const int64_t B = x->dim(0), C = x->dim(1), HW = x->dim(2) * x->dim(3);
      std::vector<T> dx(x->numel()), dg(static_cast<size_t>(C)), db(static_cast<size_t>(C));
      auto g = out->grad();
      for (int64_t c = 0; c < C; ++c) {
        const double invstd = 1.0 / std::sqrt(static_cast<double>(var[c]) + eps);
        double sg = 0, sb = 0;
        for (int64_t b = 0; b < B; ++b) {
          for (int64_t i = 0; i < HW; ++i) {
            const size_t idx = static_cast<size_t>((b * C + c) * HW + i);
            sb += g[idx];
            sg += g[idx] * ((*x)[idx] - mean[c]) * invstd;
            dx[idx] = static_cast<T>(g[idx] * (*gamma)[c] * invstd);
          }
        }
        dg[c] = static_cast<T>(sg);
        db[c] = static_cast<T>(sb);
      }
      x->accumulate_grad(dx);
      gamma->accumulate_grad(dg);
      beta->accumulate_grad(db);
    });
    return out;
  }

  auto saved = std::make_shared<kernels::BatchNormSaved<T>>();
  auto out = make_ref(kernels::batchnorm_train_forward(*x, *gamma, *beta, buffers.eps, *saved));
  if (buffers.running_mean && buffers.running_var) {
    const double n = static_cast<double>(x->numel() / static_cast<size_t>(x->dim(1)));
    const double unbias = n > 1 ? n / (n - 1) : 1.0;
    const double m = buffers.momentum;
    for (size_t c = 0; c < saved->mean.size(); ++c) {
      auto& rm = (*buffers.running_mean)[c];
      auto& rv = (*buffers.running_var)[c];
      rm = static_cast<T>((1 - m) * rm + m * saved->mean[c]);
      rv = static_cast<T>((1 - m) * rv + m * saved->biased_var[c] * unbias);
    }
  }
  push<T>(tape, "batchnorm2d", {x, gamma, beta}, out, [x, gamma, beta, out, saved] {
    if (!out->has_grad()) return;
    std::vector<T> dx(x->numel()), dg(gamma->numel()), db(beta->numel());
    kernels::batchnorm_backward(*x, *gamma, *saved, out->grad().data(), dx.data(), dg.data(), db.data());
    x->accumulate_grad(dx);
    gamma->accumulate_grad(dg);
    beta->accumulate_grad(db);
  });
  return out;
}

template <typename T>
Ref<T> relu(Tape<T>* tape, const Ref<T>& x) {
  auto out = make_ref(kernels::relu_forward(*x));
  push<T>(tape, "relu", {x}, out, [x, out] {
    if (!out->has_grad()) return;
    std::vector<T> dx(x->numel());
    kernels::relu_backward(*x, out->grad().data(), dx.data());
    x->accumulate_grad(dx);
  });
  return out;
}

template <typename T>
Ref<T> maxpool2d(Tape<T>* tape, const Ref<T>& x, int k, int stride, int pad) {
  auto argmax = std::make_shared<std::vector<int64_t>>();
  auto out = make_ref(kernels::maxpool2d_forward(*x, k, stride, pad, *argmax));
  push<T>(tape, "maxpool2d", {x}, out, [x, out, argmax] {
    if (!out->has_grad()) return;
    std::vector<T> dx(x->numel(), T(0));
    auto g = out->grad();
    for (size_t i = 0; i < g.size(); ++i) dx[static_cast<size_t>((*argmax)[i])] += g[i];
    x->accumulate_grad(dx);
  });
  return out;
}

template <typename T>
Ref<T> avgpool2d(Tape<T>* tape, const Ref<T>& x, int k, int stride) {
  auto out = make_ref(kernels::avgpool2d_forward(*x, k, stride));
  push<T>(tape, "avgpool2d", {x}, out, [x, out, k, stride] {
    if (!out->has_grad()) return;
    std::vector<T> dx(x->numel());
    kernels::avgpool2d_backward(x->shape(), out->grad().data(), k, stride, dx.data());
    x->accumulate_grad(dx);
  });
  return out;
}

template <typename T>
Ref<T> global_avgpool(Tape<T>* tape, const Ref<T>& x) {
  auto out = make_ref(kernels::global_avgpool_forward(*x));
  push<T>(tape, "global_avgpool", {x}, out, [x, out] {
    if (!out->has_grad()) return;
    const size_t hw = static_cast<size_t>(x->dim(2) * x->dim(3));
    std::vector<T> dx(x->numel());
    auto g = out->grad();
    for (size_t bc = 0; bc < g.size(); ++bc)
      for (size_t i = 0; i < hw; ++i) dx[bc * hw + i] = g[bc] / static_cast<T>(hw);
    x->accumulate_grad(dx);
  });
  return out;
}

template <typename T>
Ref<T> concat_channels(Tape<T>* tape, const std::vector<Ref<T>>& xs) {
  std::vector<const BasicTensor<T>*> raw;
  raw.reserve(xs.size());
  for (const auto& x : xs) raw.push_back(x.get());
  auto out = make_ref(kernels::concat_channels_forward(raw));
  push<T>(tape, "concat_channels", xs, out, [xs, out] {
    if (!out->has_grad()) return;
    int64_t offset = 0;
    for (const auto& x : xs) {
      x->accumulate_grad(kernels::slice_channels(out->shape(), out->grad().data(), offset, x->dim(1)));
      offset += x->dim(1);
    }
  });
  return out;
}

template <typename T>
Ref<T> add(Tape<T>* tape, const Ref<T>& a, const Ref<T>& b) {
  auto out = make_ref(kernels::add_forward(*a, *b));
  push<T>(tape, "add", {a, b}, out, [a, b, out] {
    if (!out->has_grad()) return;
    a->accumulate_grad(out->grad());
    b->accumulate_grad(out->grad());
  });
  return out;
}

template <typename T>
Ref<T> linear(Tape<T>* tape, const Ref<T>& x, const Ref<T>& w, const Ref<T>& b) {
  auto out = make_ref(kernels::linear_forward(*x, *w, *b));
  push<T>(tape, "linear", {x, w, b}, out, [x, w, b, out] {
    if (!out->has_grad()) return;
    std::vector<T> dx(x->numel()), dw(w->numel()), db(b->numel());
    kernels::linear_backward(*x, *w, out->grad().data(), dx.data(), dw.data(), db.data());
    x->accumulate_grad(dx);
    w->accumulate_grad(dw);
    b->accumulate_grad(db);
  });
  return out;
}

template <typename T>
Ref<T> softmax_cross_entropy(Tape<T>* tape, const Ref<T>& logits, const std::vector<int>& labels) {
  auto dlogits = std::make_shared<std::vector<T>>();
  const T loss = kernels::softmax_cross_entropy(*logits, labels, tape ? dlogits.get() : nullptr);
  auto out = make_ref(BasicTensor<T>({1}, std::vector<T>{loss}));
  push<T>(tape, "softmax_cross_entropy", {logits}, out, [logits, out, dlogits] {
    if (!out->has_grad()) return;
    const T seed = out->grad()[0];
    std::vector<T> g(*dlogits);
    for (auto& v : g) v *= seed;
    logits->accumulate_grad(g);
  });
  return out;
}

#define TRIPLENET_INSTANTIATE_AG(T)                                                                        \
  template Ref<T> conv2d(Tape<T>*, const Ref<T>&, const Ref<T>&, int, int);                                \
  template Ref<T> batchnorm2d(Tape<T>*, const Ref<T>&, const Ref<T>&, const Ref<T>&,                       \
                              const BatchNormBuffers<T>&, Mode);                                           \
  template Ref<T> relu(Tape<T>*, const Ref<T>&);                                                           \
  template Ref<T> maxpool2d(Tape<T>*, const Ref<T>&, int, int, int);                                       \
  template Ref<T> avgpool2d(Tape<T>*, const Ref<T>&, int, int);                                            \
  template Ref<T> global_avgpool(Tape<T>*, const Ref<T>&);                                                 \
  template Ref<T> concat_channels(Tape<T>*, const std::vector<Ref<T>>&);                                   \
  template Ref<T> add(Tape<T>*, const Ref<T>&, const Ref<T>&);                                             \
  template Ref<T> linear(Tape<T>*, const Ref<T>&, const Ref<T>&, const Ref<T>&);                           \
  template Ref<T> softmax_cross_entropy(Tape<T>*, const Ref<T>&, const std::vector<int>&);

TRIPLENET_INSTANTIATE_AG(float)
TRIPLENET_INSTANTIATE_AG(double)

#undef TRIPLENET_INSTANTIATE_AG

}  // namespace triplenet::ag
