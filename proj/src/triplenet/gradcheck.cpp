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

#include "triplenet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

namespace triplenet {

namespace {

using Ref = TensorRef<double>;

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Ref normal(std::mt19937_64& rng, Shape shape, double scale = 1.0, double shift = 0.0) {
  TensorD t(std::move(shape));
  std::normal_distribution<double> dist(shift, scale);
  for (auto& v : t.data()) v = dist(rng);
  return make_ref(std::move(t));
}

// Keeps every entry at least 0.1 away from zero so ReLU's kink is never
// inside the difference stencil.
Ref away_from_zero(std::mt19937_64& rng, Shape shape) {
  TensorD t(std::move(shape));
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : t.data()) {
    const double n = dist(rng);
    v = (n < 0 ? -0.1 : 0.1) + n;
  }
  return make_ref(std::move(t));
}

// Shuffled, evenly spaced values: no two entries within 0.01, so pooling
// winners cannot swap under a 1e-4 perturbation.
Ref distinct(std::mt19937_64& rng, Shape shape) {
  TensorD t(std::move(shape));
  std::vector<double> values(t.numel());
  for (size_t i = 0; i < values.size(); ++i) values[i] = 0.01 * static_cast<double>(i) - 0.005 * values.size();
  std::shuffle(values.begin(), values.end(), rng);
  std::copy(values.begin(), values.end(), t.data().begin());
  return make_ref(std::move(t));
}

double projected(const Ref& out, const std::vector<double>& r) {
  double s = 0;
  for (size_t i = 0; i < r.size(); ++i) s += (*out)[i] * r[i];
  return s;
}

struct Problem {
  DiffFn fn;
  std::vector<Ref> inputs;
};

using ProblemFactory = std::function<Problem(std::mt19937_64&, int)>;

std::vector<std::pair<std::string, ProblemFactory>> primitives() {
  std::vector<std::pair<std::string, ProblemFactory>> out;
  out.emplace_back("conv2d", [](std::mt19937_64& rng, int i) {
    const int k = i % 2 == 0 ? 3 : 1;
    const int stride = i % 3 == 2 ? 2 : 1;
    const int b = uniform_int(rng, 1, 2), cin = uniform_int(rng, 1, 4), cout = uniform_int(rng, 1, 4);
    const int h = uniform_int(rng, 4, 7), w = uniform_int(rng, 4, 7);
    Problem p;
    p.inputs = {normal(rng, {b, cin, h, w}), normal(rng, {cout, cin, k, k}, 0.5)};
    p.fn = [stride, k](Tape<double>* t, const std::vector<Ref>& in) { return ag::conv2d(t, in[0], in[1], stride, k / 2); };
    return p;
  });
  out.emplace_back("batchnorm2d", [](std::mt19937_64& rng, int) {
    const int b = uniform_int(rng, 2, 4), c = uniform_int(rng, 1, 3);
    const int h = uniform_int(rng, 2, 5), w = uniform_int(rng, 2, 5);
    Problem p;
    p.inputs = {normal(rng, {b, c, h, w}, 2.0, 0.5), normal(rng, {c}, 0.3, 1.0), normal(rng, {c})};
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) {
      return ag::batchnorm2d<double>(t, in[0], in[1], in[2], {}, Mode::kTrain);
    };
    return p;
  });
  out.emplace_back("relu", [](std::mt19937_64& rng, int) {
    Problem p;
    p.inputs = {away_from_zero(rng, {uniform_int(rng, 1, 3), uniform_int(rng, 1, 4), 4, 5})};
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) { return ag::relu(t, in[0]); };
    return p;
  });
  out.emplace_back("maxpool2d", [](std::mt19937_64& rng, int i) {
    const bool stem = i % 2 == 1;
    const int h = 2 * uniform_int(rng, 2, 4), w = 2 * uniform_int(rng, 2, 4);
    Problem p;
    p.inputs = {distinct(rng, {uniform_int(rng, 1, 2), uniform_int(rng, 1, 3), h, w})};
    p.fn = [stem](Tape<double>* t, const std::vector<Ref>& in) {
      return stem ? ag::maxpool2d(t, in[0], 3, 2, 1) : ag::maxpool2d(t, in[0], 2, 2, 0);
    };
    return p;
  });
  out.emplace_back("avgpool2d", [](std::mt19937_64& rng, int) {
    const int h = 2 * uniform_int(rng, 1, 4), w = 2 * uniform_int(rng, 1, 4);
    Problem p;
    p.inputs = {normal(rng, {uniform_int(rng, 1, 2), uniform_int(rng, 1, 3), h, w})};
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) { return ag::avgpool2d(t, in[0], 2, 2); };
    return p;
  });
  out.emplace_back("global_avgpool", [](std::mt19937_64& rng, int) {
    Problem p;
    p.inputs = {normal(rng, {uniform_int(rng, 1, 2), uniform_int(rng, 1, 4), uniform_int(rng, 1, 5), 3})};
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) { return ag::global_avgpool(t, in[0]); };
    return p;
  });
  out.emplace_back("concat_channels", [](std::mt19937_64& rng, int) {
    const int b = uniform_int(rng, 1, 2), h = uniform_int(rng, 1, 4), w = uniform_int(rng, 1, 4);
    const int parts = uniform_int(rng, 2, 3);
    Problem p;
    for (int i = 0; i < parts; ++i) p.inputs.push_back(normal(rng, {b, uniform_int(rng, 1, 4), h, w}));
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) { return ag::concat_channels(t, in); };
    return p;
  });
  out.emplace_back("add", [](std::mt19937_64& rng, int) {
    const Shape s{uniform_int(rng, 1, 2), uniform_int(rng, 1, 4), uniform_int(rng, 1, 4), uniform_int(rng, 1, 4)};
    Problem p;
    p.inputs = {normal(rng, s), normal(rng, s)};
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) { return ag::add(t, in[0], in[1]); };
    return p;
  });
  out.emplace_back("linear", [](std::mt19937_64& rng, int) {
    const int b = uniform_int(rng, 1, 4), f = uniform_int(rng, 2, 8), k = uniform_int(rng, 2, 6);
    Problem p;
    p.inputs = {normal(rng, {b, f}), normal(rng, {f, k}, 0.5), normal(rng, {k})};
    p.fn = [](Tape<double>* t, const std::vector<Ref>& in) { return ag::linear(t, in[0], in[1], in[2]); };
    return p;
  });
  out.emplace_back("softmax_cross_entropy", [](std::mt19937_64& rng, int) {
    const int b = uniform_int(rng, 1, 4), k = uniform_int(rng, 2, 10);
    std::vector<int> labels(static_cast<size_t>(b));
    for (auto& l : labels) l = uniform_int(rng, 0, k - 1);
    Problem p;
    p.inputs = {normal(rng, {b, k}, 2.0)};
    p.fn = [labels](Tape<double>* t, const std::vector<Ref>& in) {
      return ag::softmax_cross_entropy(t, in[0], labels);
    };
    return p;
  });
  return out;
}

}  // namespace

double max_gradient_error(const DiffFn& f, const std::vector<TensorRef<double>>& inputs, double step,
                          std::mt19937_64& rng) {
  for (const auto& in : inputs) in->drop_grad();
  Tape<double> tape;
  const Ref out = f(&tape, inputs);
  std::vector<double> r(out->numel());
  std::normal_distribution<double> dist(0.0, 1.0);
  for (auto& v : r) v = dist(rng);
  tape.backward_from(out, r);

  double worst = 0;
  for (const auto& in : inputs) {
    std::vector<double> analytic(in->numel(), 0.0);
    if (in->has_grad()) std::copy(in->grad().begin(), in->grad().end(), analytic.begin());
    for (size_t j = 0; j < in->numel(); ++j) {
      const double saved = (*in)[j];
      (*in)[j] = saved + step;
      const double plus = projected(f(nullptr, inputs), r);
      (*in)[j] = saved - step;
      const double minus = projected(f(nullptr, inputs), r);
      (*in)[j] = saved;
      const double numeric = (plus - minus) / (2 * step);
      const double denom = std::max({std::abs(analytic[j]), std::abs(numeric), 1e-6});
      worst = std::max(worst, std::abs(analytic[j] - numeric) / denom);
    }
  }
  return worst;
}

bool GradcheckReport::all_passed() const {
  return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const GradcheckCase& c) { return c.passed; });
}

std::string GradcheckReport::format() const {
  std::ostringstream os;
  char buf[160];
  for (const auto& c : cases) {
    std::snprintf(buf, sizeof buf, "%-24s instances=%d max_rel_error=%.3e %s\n", c.primitive.c_str(), c.instances,
                  c.max_rel_error, c.passed ? "PASS" : "FAIL");
    os << buf;
  }
  os << (all_passed() ? "all primitives passed\n" : "gradient check FAILED\n");
  return os.str();
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  std::optional<kernels::ScopedConvBackwardFault> fault;
  if (options.corrupt_conv_backward) fault.emplace();
  GradcheckReport report;
  uint64_t salt = 0;
  for (const auto& [name, make] : primitives()) {
    std::mt19937_64 rng(options.seed * 1000003ull + salt++);
    GradcheckCase c;
    c.primitive = name;
    for (int i = 0; i < options.instances; ++i) {
      Problem p = make(rng, i);
      c.max_rel_error = std::max(c.max_rel_error, max_gradient_error(p.fn, p.inputs, options.step, rng));
      ++c.instances;
    }
    c.passed = c.max_rel_error < options.tolerance;
    report.cases.push_back(c);
  }
  return report;
}

}  // namespace triplenet
