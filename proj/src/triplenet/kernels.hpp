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
#include <vector>

#include "triplenet/tensor.hpp"

// Raw forward/backward routines for every primitive the network uses. These
// know nothing about tapes; autograd.hpp wires them together.
namespace triplenet::kernels {

// floor((in + 2*pad - k) / stride) + 1, rejecting non-positive results.
int64_t conv_out_extent(int64_t in, int k, int stride, int pad);

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, int stride, int pad);

// dx may be null when the input needs no gradient. Results are written, not
// accumulated.
template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const T* dy, int stride,
                     int pad, T* dx, T* dw);

// Test-only fault switch: while alive on this thread, conv2d_backward returns
// a perturbed weight gradient. Used as the gradient checker's negative control.
class ScopedConvBackwardFault {
 public:
  ScopedConvBackwardFault();
  ~ScopedConvBackwardFault();
  ScopedConvBackwardFault(const ScopedConvBackwardFault&) = delete;
  ScopedConvBackwardFault& operator=(const ScopedConvBackwardFault&) = delete;

 private:
  bool previous_;
};

template <typename T>
struct BatchNormSaved {
  std::vector<T> mean;
  std::vector<T> invstd;
  std::vector<T> biased_var;
};

template <typename T>
BasicTensor<T> batchnorm_train_forward(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, double eps,
                                       BatchNormSaved<T>& saved);

template <typename T>
BasicTensor<T> batchnorm_eval_forward(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                      const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                                      const BasicTensor<T>& running_var, double eps);

template <typename T>
void batchnorm_backward(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                        const BatchNormSaved<T>& saved, const T* dy, T* dx, T* dgamma, T* dbeta);

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x);

template <typename T>
void relu_backward(const BasicTensor<T>& x, const T* dy, T* dx);

// Max pooling with implicit -inf padding. argmax receives the flat input
// index chosen for every output element.
template <typename T>
BasicTensor<T> maxpool2d_forward(const BasicTensor<T>& x, int k, int stride, int pad,
                                 std::vector<int64_t>& argmax);

template <typename T>
BasicTensor<T> avgpool2d_forward(const BasicTensor<T>& x, int k, int stride);

template <typename T>
void avgpool2d_backward(const Shape& x_shape, const T* dy, int k, int stride, T* dx);

template <typename T>
BasicTensor<T> global_avgpool_forward(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> concat_channels_forward(const std::vector<const BasicTensor<T>*>& xs);

// Copies channels [c_begin, c_begin + channels) of a [B,C,H,W] buffer.
template <typename T>
std::vector<T> slice_channels(const Shape& shape, const T* src, int64_t c_begin, int64_t channels);

template <typename T>
BasicTensor<T> add_forward(const BasicTensor<T>& a, const BasicTensor<T>& b);

// x is [B, F] (any trailing extents are flattened), w is [F, K], b is [K].
template <typename T>
BasicTensor<T> linear_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b);

template <typename T>
void linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const T* dy, T* dx, T* dw,
                     T* db);

// Row-wise softmax of [B, K] logits, max-subtracted.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits);

// Mean cross-entropy; dlogits receives (softmax - onehot) / B.
template <typename T>
T softmax_cross_entropy(const BasicTensor<T>& logits, const std::vector<int>& labels,
                        std::vector<T>* dlogits);

}  // namespace triplenet::kernels
