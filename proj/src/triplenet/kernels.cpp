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

#include "triplenet/kernels.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace triplenet::kernels {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

thread_local bool g_conv_backward_fault = false;

// Upper bound on im2col buffer elements; larger batches are processed in
// image chunks.
constexpr int64_t kColBudget = int64_t{1} << 23;

void require_rank4(const Shape& s, const char* what) {
  if (s.size() != 4) {
    throw InvalidArgument(std::string(what) + " expects a rank-4 tensor, got " + shape_to_string(s));
  }
}

struct ConvDims {
  int64_t batch, cin, h, w, cout, k, ho, wo;
  int stride, pad;
  int64_t patch() const { return cin * k * k; }
  int64_t plane() const { return ho * wo; }
};

template <typename T>
ConvDims conv_dims(const BasicTensor<T>& x, const BasicTensor<T>& w, int stride, int pad) {
  require_rank4(x.shape(), "conv2d input");
  require_rank4(w.shape(), "conv2d weight");
  if (x.dim(1) != w.dim(1)) {
    throw InvalidArgument("conv2d channel mismatch: input " + shape_to_string(x.shape()) + " vs weight " +
                          shape_to_string(w.shape()));
  }
  if (w.dim(2) != w.dim(3)) {
    throw InvalidArgument("conv2d expects a square kernel, got weight " + shape_to_string(w.shape()));
  }
  if (stride < 1) throw InvalidArgument("conv2d stride must be >= 1");
  if (pad < 0) throw InvalidArgument("conv2d padding must be >= 0");
  ConvDims d{};
  d.batch = x.dim(0);
  d.cin = x.dim(1);
  d.h = x.dim(2);
  d.w = x.dim(3);
  d.cout = w.dim(0);
  d.k = w.dim(2);
  d.stride = stride;
  d.pad = pad;
  d.ho = conv_out_extent(d.h, static_cast<int>(d.k), stride, pad);
  d.wo = conv_out_extent(d.w, static_cast<int>(d.k), stride, pad);
  return d;
}

// col is [patch, nb * plane] for images [b0, b0 + nb).
template <typename T>
void im2col(const ConvDims& d, const T* x, int64_t b0, int64_t nb, T* col) {
  const int64_t cols = nb * d.plane();
  for (int64_t c = 0; c < d.cin; ++c) {
    for (int64_t ki = 0; ki < d.k; ++ki) {
      for (int64_t kj = 0; kj < d.k; ++kj) {
        T* row = col + ((c * d.k + ki) * d.k + kj) * cols;
        for (int64_t b = 0; b < nb; ++b) {
          const T* src = x + ((b0 + b) * d.cin + c) * d.h * d.w;
          T* dst = row + b * d.plane();
          for (int64_t oh = 0; oh < d.ho; ++oh) {
            const int64_t ih = oh * d.stride - d.pad + ki;
            T* out = dst + oh * d.wo;
            if (ih < 0 || ih >= d.h) {
              std::fill(out, out + d.wo, T(0));
              continue;
            }
            for (int64_t ow = 0; ow < d.wo; ++ow) {
              const int64_t iw = ow * d.stride - d.pad + kj;
              out[ow] = (iw >= 0 && iw < d.w) ? src[ih * d.w + iw] : T(0);
            }
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const ConvDims& d, const T* col, int64_t b0, int64_t nb, T* dx) {
  const int64_t cols = nb * d.plane();
  for (int64_t c = 0; c < d.cin; ++c) {
    for (int64_t ki = 0; ki < d.k; ++ki) {
      for (int64_t kj = 0; kj < d.k; ++kj) {
        const T* row = col + ((c * d.k + ki) * d.k + kj) * cols;
        for (int64_t b = 0; b < nb; ++b) {
          T* dst = dx + ((b0 + b) * d.cin + c) * d.h * d.w;
          const T* src = row + b * d.plane();
          for (int64_t oh = 0; oh < d.ho; ++oh) {
            const int64_t ih = oh * d.stride - d.pad + ki;
            if (ih < 0 || ih >= d.h) continue;
            for (int64_t ow = 0; ow < d.wo; ++ow) {
              const int64_t iw = ow * d.stride - d.pad + kj;
              if (iw >= 0 && iw < d.w) dst[ih * d.w + iw] += src[oh * d.wo + ow];
            }
          }
        }
      }
    }
  }
}

int64_t chunk_images(const ConvDims& d) {
  const int64_t per_image = std::max<int64_t>(1, d.patch() * d.plane());
  return std::clamp<int64_t>(kColBudget / per_image, 1, d.batch);
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + " shape mismatch: " + shape_to_string(a) + " vs " +
                          shape_to_string(b));
  }
}

}  // namespace

int64_t conv_out_extent(int64_t in, int k, int stride, int pad) {
  const int64_t span = in + 2 * pad - k;
  if (span < 0 || stride < 1) {
    throw InvalidArgument("window " + std::to_string(k) + " with padding " + std::to_string(pad) +
                          " does not fit extent " + std::to_string(in));
  }
  return span / stride + 1;
}

ScopedConvBackwardFault::ScopedConvBackwardFault() : previous_(g_conv_backward_fault) {
  g_conv_backward_fault = true;
}

ScopedConvBackwardFault::~ScopedConvBackwardFault() { g_conv_backward_fault = previous_; }

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, int stride, int pad) {
  const ConvDims d = conv_dims(x, w, stride, pad);
  BasicTensor<T> y({d.batch, d.cout, d.ho, d.wo});
  const int64_t chunk = chunk_images(d);
  std::vector<T> col;
  RowMat<T> out;
  Eigen::Map<const RowMat<T>> wm(w.ptr(), d.cout, d.patch());
  for (int64_t b0 = 0; b0 < d.batch; b0 += chunk) {
    const int64_t nb = std::min(chunk, d.batch - b0);
    const int64_t cols = nb * d.plane();
    col.resize(static_cast<size_t>(d.patch() * cols));
    im2col(d, x.ptr(), b0, nb, col.data());
    Eigen::Map<const RowMat<T>> cm(col.data(), d.patch(), cols);
    out.noalias() = wm * cm;
    for (int64_t b = 0; b < nb; ++b) {
      for (int64_t co = 0; co < d.cout; ++co) {
        const T* src = out.data() + co * cols + b * d.plane();
        std::copy(src, src + d.plane(), y.ptr() + ((b0 + b) * d.cout + co) * d.plane());
      }
    }
  }
  return y;
}

template <typename T>
void conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const T* dy, int stride, int pad,
                     T* dx, T* dw) {
  const ConvDims d = conv_dims(x, w, stride, pad);
  const int64_t chunk = chunk_images(d);
  std::vector<T> col;
  RowMat<T> dyc;
  RowMat<T> dcol;
  Eigen::Map<const RowMat<T>> wm(w.ptr(), d.cout, d.patch());
  RowMat<T> dwm = RowMat<T>::Zero(d.cout, d.patch());
  if (dx) std::fill(dx, dx + x.numel(), T(0));
  for (int64_t b0 = 0; b0 < d.batch; b0 += chunk) {
    const int64_t nb = std::min(chunk, d.batch - b0);
    const int64_t cols = nb * d.plane();
    dyc.resize(d.cout, cols);
    for (int64_t b = 0; b < nb; ++b) {
      for (int64_t co = 0; co < d.cout; ++co) {
        const T* src = dy + ((b0 + b) * d.cout + co) * d.plane();
        std::copy(src, src + d.plane(), dyc.data() + co * cols + b * d.plane());
      }
    }
    col.resize(static_cast<size_t>(d.patch() * cols));
    im2col(d, x.ptr(), b0, nb, col.data());
    Eigen::Map<const RowMat<T>> cm(col.data(), d.patch(), cols);
    dwm.noalias() += dyc * cm.transpose();
    if (dx) {
      dcol.noalias() = wm.transpose() * dyc;
      col2im_add(d, dcol.data(), b0, nb, dx);
    }
  }
  if (g_conv_backward_fault) dwm *= T(1.05);
  std::copy(dwm.data(), dwm.data() + dwm.size(), dw);
}

template <typename T>
BasicTensor<T> batchnorm_train_forward(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                       const BasicTensor<T>& beta, double eps, BatchNormSaved<T>& saved) {
  require_rank4(x.shape(), "batchnorm2d input");
  const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  if (static_cast<int64_t>(gamma.numel()) != C || static_cast<int64_t>(beta.numel()) != C) {
    throw InvalidArgument("batchnorm2d affine parameters must have " + std::to_string(C) + " entries");
  }
  const double count = static_cast<double>(B * HW);
  saved.mean.assign(static_cast<size_t>(C), T(0));
  saved.invstd.assign(static_cast<size_t>(C), T(0));
  saved.biased_var.assign(static_cast<size_t>(C), T(0));
  BasicTensor<T> y(x.shape());
  for (int64_t c = 0; c < C; ++c) {
    double sum = 0;
    for (int64_t b = 0; b < B; ++b) {
      const T* p = x.ptr() + (b * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) sum += p[i];
    }
    const double mean = sum / count;
    double sq = 0;
    for (int64_t b = 0; b < B; ++b) {
      const T* p = x.ptr() + (b * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) {
        const double dv = p[i] - mean;
        sq += dv * dv;
      }
    }
    const double var = sq / count;
    const double invstd = 1.0 / std::sqrt(var + eps);
    saved.mean[c] = static_cast<T>(mean);
    saved.invstd[c] = static_cast<T>(invstd);
    saved.biased_var[c] = static_cast<T>(var);
    const double g = gamma[c], bt = beta[c];
    for (int64_t b = 0; b < B; ++b) {
      const T* p = x.ptr() + (b * C + c) * HW;
      T* q = y.ptr() + (b * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) q[i] = static_cast<T>((p[i] - mean) * invstd * g + bt);
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> batchnorm_eval_forward(const BasicTensor<T>& x, const BasicTensor<T>& gamma,
                                      const BasicTensor<T>& beta, const BasicTensor<T>& running_mean,
                                      const BasicTensor<T>& running_var, double eps) {
  require_rank4(x.shape(), "batchnorm2d input");
  const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  if (static_cast<int64_t>(gamma.numel()) != C || static_cast<int64_t>(running_mean.numel()) != C) {
    throw InvalidArgument("batchnorm2d parameters must have " + std::to_string(C) + " entries");
  }
  BasicTensor<T> y(x.shape());
  for (int64_t c = 0; c < C; ++c) {
    const T scale = static_cast<T>(gamma[c] / std::sqrt(static_cast<double>(running_var[c]) + eps));
    const T shift = beta[c] - running_mean[c] * scale;
    for (int64_t b = 0; b < B; ++b) {
      const T* p = x.ptr() + (b * C + c) * HW;
      T* q = y.ptr() + (b * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) q[i] = p[i] * scale + shift;
    }
  }
  return y;
}

template <typename T>
void batchnorm_backward(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BatchNormSaved<T>& saved,
                        const T* dy, T* dx, T* dgamma, T* dbeta) {
  const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  const double count = static_cast<double>(B * HW);
  for (int64_t c = 0; c < C; ++c) {
    const double mean = saved.mean[c], invstd = saved.invstd[c];
    double sum_dy = 0, sum_dy_xhat = 0;
    for (int64_t b = 0; b < B; ++b) {
      const T* p = x.ptr() + (b * C + c) * HW;
      const T* g = dy + (b * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) {
        sum_dy += g[i];
        sum_dy_xhat += g[i] * (p[i] - mean) * invstd;
      }
    }
    dgamma[c] = static_cast<T>(sum_dy_xhat);
    dbeta[c] = static_cast<T>(sum_dy);
    if (!dx) continue;
    const double k = gamma[c] * invstd / count;
    for (int64_t b = 0; b < B; ++b) {
      const T* p = x.ptr() + (b * C + c) * HW;
      const T* g = dy + (b * C + c) * HW;
      T* q = dx + (b * C + c) * HW;
      for (int64_t i = 0; i < HW; ++i) {
        const double xhat = (p[i] - mean) * invstd;
        q[i] = static_cast<T>(k * (count * g[i] - sum_dy - xhat * sum_dy_xhat));
      }
    }
  }
}

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& x) {
  BasicTensor<T> y(x.shape());
  for (size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
  return y;
}

template <typename T>
void relu_backward(const BasicTensor<T>& x, const T* dy, T* dx) {
  for (size_t i = 0; i < x.numel(); ++i) dx[i] = x[i] > T(0) ? dy[i] : T(0);
}

template <typename T>
BasicTensor<T> maxpool2d_forward(const BasicTensor<T>& x, int k, int stride, int pad,
                                 std::vector<int64_t>& argmax) {
  require_rank4(x.shape(), "maxpool2d input");
  if (pad * 2 > k) throw InvalidArgument("maxpool2d padding must be at most half the window");
  const int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t Ho = conv_out_extent(H, k, stride, pad), Wo = conv_out_extent(W, k, stride, pad);
  BasicTensor<T> y({B, C, Ho, Wo});
  argmax.assign(y.numel(), 0);
  for (int64_t bc = 0; bc < B * C; ++bc) {
    const T* src = x.ptr() + bc * H * W;
    for (int64_t oh = 0; oh < Ho; ++oh) {
      for (int64_t ow = 0; ow < Wo; ++ow) {
        T best = -std::numeric_limits<T>::infinity();
        int64_t best_idx = -1;
        for (int ki = 0; ki < k; ++ki) {
          const int64_t ih = oh * stride - pad + ki;
          if (ih < 0 || ih >= H) continue;
          for (int kj = 0; kj < k; ++kj) {
            const int64_t iw = ow * stride - pad + kj;
            if (iw < 0 || iw >= W) continue;
            const T v = src[ih * W + iw];
            if (best_idx < 0 || v > best) {
              best = v;
              best_idx = ih * W + iw;
            }
          }
        }
        const int64_t o = (bc * Ho + oh) * Wo + ow;
        y[static_cast<size_t>(o)] = best;
        argmax[static_cast<size_t>(o)] = bc * H * W + best_idx;
      }
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> avgpool2d_forward(const BasicTensor<T>& x, int k, int stride) {
  require_rank4(x.shape(), "avgpool2d input");
  const int64_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int64_t Ho = conv_out_extent(H, k, stride, 0), Wo = conv_out_extent(W, k, stride, 0);
  BasicTensor<T> y({B, C, Ho, Wo});
  const T inv = T(1) / static_cast<T>(k * k);
  for (int64_t bc = 0; bc < B * C; ++bc) {
    const T* src = x.ptr() + bc * H * W;
    T* dst = y.ptr() + bc * Ho * Wo;
    for (int64_t oh = 0; oh < Ho; ++oh) {
      for (int64_t ow = 0; ow < Wo; ++ow) {
        T acc = 0;
        for (int ki = 0; ki < k; ++ki)
          for (int kj = 0; kj < k; ++kj) acc += src[(oh * stride + ki) * W + ow * stride + kj];
        dst[oh * Wo + ow] = acc * inv;
      }
    }
  }
  return y;
}

template <typename T>
void avgpool2d_backward(const Shape& x_shape, const T* dy, int k, int stride, T* dx) {
  const int64_t B = x_shape[0], C = x_shape[1], H = x_shape[2], W = x_shape[3];
  const int64_t Ho = conv_out_extent(H, k, stride, 0), Wo = conv_out_extent(W, k, stride, 0);
  const T inv = T(1) / static_cast<T>(k * k);
  std::fill(dx, dx + B * C * H * W, T(0));
  for (int64_t bc = 0; bc < B * C; ++bc) {
    const T* g = dy + bc * Ho * Wo;
    T* dst = dx + bc * H * W;
    for (int64_t oh = 0; oh < Ho; ++oh)
      for (int64_t ow = 0; ow < Wo; ++ow)
        for (int ki = 0; ki < k; ++ki)
          for (int kj = 0; kj < k; ++kj) dst[(oh * stride + ki) * W + ow * stride + kj] += g[oh * Wo + ow] * inv;
  }
}

template <typename T>
BasicTensor<T> global_avgpool_forward(const BasicTensor<T>& x) {
  require_rank4(x.shape(), "global_avgpool input");
  const int64_t B = x.dim(0), C = x.dim(1), HW = x.dim(2) * x.dim(3);
  BasicTensor<T> y({B, C, 1, 1});
  for (int64_t bc = 0; bc < B * C; ++bc) {
    T acc = 0;
    const T* src = x.ptr() + bc * HW;
    for (int64_t i = 0; i < HW; ++i) acc += src[i];
    y[static_cast<size_t>(bc)] = acc / static_cast<T>(HW);
  }
  return y;
}

template <typename T>
BasicTensor<T> concat_channels_forward(const std::vector<const BasicTensor<T>*>& xs) {
  if (xs.empty()) throw InvalidArgument("concat_channels needs at least one input");
  const Shape& first = xs.front()->shape();
  require_rank4(first, "concat_channels input");
  int64_t channels = 0;
  for (const auto* t : xs) {
    const Shape& s = t->shape();
    require_rank4(s, "concat_channels input");
    if (s[0] != first[0] || s[2] != first[2] || s[3] != first[3]) {
      throw InvalidArgument("concat_channels batch/spatial mismatch: " + shape_to_string(first) + " vs " +
                            shape_to_string(s));
    }
    channels += s[1];
  }
  const int64_t B = first[0], HW = first[2] * first[3];
  BasicTensor<T> y({B, channels, first[2], first[3]});
  for (int64_t b = 0; b < B; ++b) {
    T* dst = y.ptr() + b * channels * HW;
    for (const auto* t : xs) {
      const int64_t n = t->dim(1) * HW;
      std::copy(t->ptr() + b * n, t->ptr() + (b + 1) * n, dst);
      dst += n;
    }
  }
  return y;
}

template <typename T>
std::vector<T> slice_channels(const Shape& shape, const T* src, int64_t c_begin, int64_t channels) {
  const int64_t B = shape[0], C = shape[1], HW = shape[2] * shape[3];
  if (c_begin < 0 || c_begin + channels > C) throw InvalidArgument("channel slice out of range");
  std::vector<T> out(static_cast<size_t>(B * channels * HW));
  for (int64_t b = 0; b < B; ++b) {
    const T* s = src + (b * C + c_begin) * HW;
    std::copy(s, s + channels * HW, out.data() + b * channels * HW);
  }
  return out;
}

template <typename T>
BasicTensor<T> add_forward(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  BasicTensor<T> y(a.shape());
  for (size_t i = 0; i < a.numel(); ++i) y[i] = a[i] + b[i];
  return y;
}

template <typename T>
BasicTensor<T> linear_forward(const BasicTensor<T>& x, const BasicTensor<T>& w, const BasicTensor<T>& b) {
  if (w.rank() != 2) throw InvalidArgument("linear weight must be [F, K], got " + shape_to_string(w.shape()));
  const int64_t B = x.dim(0), F = static_cast<int64_t>(x.numel()) / B, K = w.dim(1);
  if (F != w.dim(0) || static_cast<int64_t>(b.numel()) != K) {
    throw InvalidArgument("linear shape mismatch: input " + shape_to_string(x.shape()) + " vs weight " +
                          shape_to_string(w.shape()));
  }
  BasicTensor<T> y({B, K});
  Eigen::Map<const RowMat<T>> xm(x.ptr(), B, F), wm(w.ptr(), F, K);
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bm(b.ptr(), K);
  Eigen::Map<RowMat<T>> ym(y.ptr(), B, K);
  ym.noalias() = xm * wm;
  ym.rowwise() += bm;
  return y;
}

template <typename T>
void linear_backward(const BasicTensor<T>& x, const BasicTensor<T>& w, const T* dy, T* dx, T* dw, T* db) {
  const int64_t B = x.dim(0), F = static_cast<int64_t>(x.numel()) / B, K = w.dim(1);
  Eigen::Map<const RowMat<T>> xm(x.ptr(), B, F), wm(w.ptr(), F, K), gm(dy, B, K);
  Eigen::Map<RowMat<T>> dwm(dw, F, K);
  dwm.noalias() = xm.transpose() * gm;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> dbm(db, K);
  dbm = gm.colwise().sum();
  if (dx) {
    Eigen::Map<RowMat<T>> dxm(dx, B, F);
    dxm.noalias() = gm * wm.transpose();
  }
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& logits) {
  if (logits.rank() != 2) throw InvalidArgument("softmax expects [B, K] logits");
  const int64_t B = logits.dim(0), K = logits.dim(1);
  BasicTensor<T> p(logits.shape());
  for (int64_t b = 0; b < B; ++b) {
    const T* z = logits.ptr() + b * K;
    T* q = p.ptr() + b * K;
    const T m = *std::max_element(z, z + K);
    double total = 0;
    for (int64_t k = 0; k < K; ++k) total += std::exp(static_cast<double>(z[k] - m));
    for (int64_t k = 0; k < K; ++k) q[k] = static_cast<T>(std::exp(static_cast<double>(z[k] - m)) / total);
  }
  return p;
}

template <typename T>
T softmax_cross_entropy(const BasicTensor<T>& logits, const std::vector<int>& labels, std::vector<T>* dlogits) {
  if (logits.rank() != 2) throw InvalidArgument("softmax_cross_entropy expects [B, K] logits");
  const int64_t B = logits.dim(0), K = logits.dim(1);
  if (static_cast<int64_t>(labels.size()) != B) {
    throw InvalidArgument("softmax_cross_entropy got " + std::to_string(labels.size()) + " labels for batch " +
                          std::to_string(B));
  }
  for (int label : labels) {
    if (label < 0 || label >= K) {
      throw InvalidArgument("label " + std::to_string(label) + " outside [0, " + std::to_string(K) + ")");
    }
  }
  if (dlogits) dlogits->assign(logits.numel(), T(0));
  double loss = 0;
  for (int64_t b = 0; b < B; ++b) {
    const T* z = logits.ptr() + b * K;
    const double m = *std::max_element(z, z + K);
    double total = 0;
    for (int64_t k = 0; k < K; ++k) total += std::exp(z[k] - m);
    const double log_total = std::log(total);
    const int y = labels[static_cast<size_t>(b)];
    loss += -(z[y] - m - log_total);
    if (dlogits) {
      T* g = dlogits->data() + b * K;
      for (int64_t k = 0; k < K; ++k) {
        const double p = std::exp(z[k] - m - log_total);
        g[k] = static_cast<T>((p - (k == y ? 1.0 : 0.0)) / static_cast<double>(B));
      }
    }
  }
  return static_cast<T>(loss / static_cast<double>(B));
}

#define TRIPLENET_INSTANTIATE_KERNELS(T)                                                                    \
  template BasicTensor<T> conv2d_forward(const BasicTensor<T>&, const BasicTensor<T>&, int, int);           \
  template void conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, const T*, int, int, T*, T*);  \
  template BasicTensor<T> batchnorm_train_forward(const BasicTensor<T>&, const BasicTensor<T>&,             \
                                                  const BasicTensor<T>&, double, BatchNormSaved<T>&);       \
  template BasicTensor<T> batchnorm_eval_forward(const BasicTensor<T>&, const BasicTensor<T>&,              \
                                                 const BasicTensor<T>&, const BasicTensor<T>&,              \
                                                 const BasicTensor<T>&, double);                            \
  template void batchnorm_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BatchNormSaved<T>&, \
                                   const T*, T*, T*, T*);                                                   \
  template BasicTensor<T> relu_forward(const BasicTensor<T>&);                                              \
  template void relu_backward(const BasicTensor<T>&, const T*, T*);                                         \
  template BasicTensor<T> maxpool2d_forward(const BasicTensor<T>&, int, int, int, std::vector<int64_t>&);   \
  template BasicTensor<T> avgpool2d_forward(const BasicTensor<T>&, int, int);                               \
  template void avgpool2d_backward(const Shape&, const T*, int, int, T*);                                   \
  template BasicTensor<T> global_avgpool_forward(const BasicTensor<T>&);                                    \
  template BasicTensor<T> concat_channels_forward(const std::vector<const BasicTensor<T>*>&);               \
  template std::vector<T> slice_channels(const Shape&, const T*, int64_t, int64_t);                         \
  template BasicTensor<T> add_forward(const BasicTensor<T>&, const BasicTensor<T>&);                        \
  template BasicTensor<T> linear_forward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
  template void linear_backward(const BasicTensor<T>&, const BasicTensor<T>&, const T*, T*, T*, T*);       \
  template BasicTensor<T> softmax(const BasicTensor<T>&);                                                   \
  template T softmax_cross_entropy(const BasicTensor<T>&, const std::vector<int>&, std::vector<T>*);

TRIPLENET_INSTANTIATE_KERNELS(float)
TRIPLENET_INSTANTIATE_KERNELS(double)

#undef TRIPLENET_INSTANTIATE_KERNELS

}  // namespace triplenet::kernels
