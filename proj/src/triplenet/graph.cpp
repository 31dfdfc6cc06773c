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

#include "triplenet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "triplenet/error.hpp"
#include "triplenet/kernels.hpp"

namespace triplenet {

const char* to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::kInput: return "input";
    case NodeKind::kConv: return "conv";
    case NodeKind::kBatchNorm: return "bn";
    case NodeKind::kRelu: return "relu";
    case NodeKind::kMaxPool: return "maxpool";
    case NodeKind::kAvgPool: return "avgpool";
    case NodeKind::kGlobalAvgPool: return "gap";
    case NodeKind::kConcat: return "concat";
    case NodeKind::kAdd: return "add";
    case NodeKind::kLinear: return "linear";
  }
  return "?";
}

const char* to_string(Variant variant) { return variant == Variant::kS ? "TripleNet-S" : "TripleNet-B"; }

const char* to_string(BottleneckWidth width) {
  return width == BottleneckWidth::kHalf ? "half-width (C/2)" : "growth-rate width";
}

ModelConfig ModelConfig::triplenet_s(int num_classes, int input_size) {
  ModelConfig c;
  c.variant = Variant::kS;
  c.num_classes = num_classes;
  c.input_size = input_size;
  return c;
}

ModelConfig ModelConfig::triplenet_b(int num_classes, int input_size) {
  ModelConfig c = triplenet_s(num_classes, input_size);
  c.variant = Variant::kB;
  c.block_depths[4] = 3;
  c.block_channels[4] = 1080;
  return c;
}

ModelConfig ModelConfig::for_variant(Variant variant, int num_classes, int input_size) {
  return variant == Variant::kS ? triplenet_s(num_classes, input_size) : triplenet_b(num_classes, input_size);
}

void ModelConfig::validate() const {
  if (input_size < 32 || input_size % 32 != 0) {
    throw InvalidArgument("input size " + std::to_string(input_size) + " must be a positive multiple of 32");
  }
  for (int i = 0; i < kNumBlocks; ++i) {
    if (block_depths[i] < 1) throw InvalidArgument("block " + std::to_string(i + 1) + " has depth 0");
    if (block_channels[i] < 1) throw InvalidArgument("block channels must be positive");
    if (growth_rates[i] < 1) throw InvalidArgument("growth rates must be positive");
  }
  if (num_classes < 1) throw InvalidArgument("num_classes must be >= 1");
  if (stem_channels < 1) throw InvalidArgument("stem_channels must be >= 1");
  if (stem_channels != block_channels[0]) {
    throw InvalidArgument("stem width " + std::to_string(stem_channels) + " must equal the first block width " +
                          std::to_string(block_channels[0]));
  }
  if (bottleneck == BottleneckWidth::kHalf && block_channels[4] < 2) {
    throw InvalidArgument("last block is too narrow for a half-width bottleneck");
  }
}

ModelGraph::ModelGraph(const ModelGraph& other)
    : config_(other.config_), nodes_(other.nodes_), index_(other.index_) {
  params_.reserve(other.params_.size());
  for (const auto& p : other.params_) params_.push_back({p.name, make_ref(Tensor(*p.tensor)), p.trainable});
}

ModelGraph& ModelGraph::operator=(const ModelGraph& other) {
  if (this != &other) {
    ModelGraph copy(other);
    *this = std::move(copy);
  }
  return *this;
}

TensorRef<float> ModelGraph::param_ref(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return params_[it->second].tensor;
}

int64_t ModelGraph::trainable_scalar_count() const {
  int64_t n = 0;
  for (const auto& p : params_)
    if (p.trainable) n += static_cast<int64_t>(p.tensor->numel());
  return n;
}

void ModelGraph::zero_grad() {
  for (auto& p : params_)
    if (p.tensor->has_grad()) p.tensor->zero_grad();
}

void ModelGraph::add_param(std::string name, Tensor value, bool trainable) {
  if (index_.count(name)) throw InvalidArgument("duplicate parameter '" + name + "'");
  index_[name] = params_.size();
  params_.push_back({std::move(name), make_ref(std::move(value)), trainable});
}

class GraphBuilder {
 public:
  GraphBuilder(const ModelConfig& config, uint64_t seed) : rng_(seed) {
    g_.config_ = config;
    NodeSpec in;
    in.name = "input";
    in.kind = NodeKind::kInput;
    in.out_channels = 3;
    in.out_shape = {3, config.input_size, config.input_size};
    in.stage = "input";
    append(std::move(in));
  }

  ModelGraph finish() { return std::move(g_); }

  int conv(const std::string& name, int input, int out_channels, int kernel, int stride) {
    const NodeSpec& src = g_.nodes_.at(static_cast<size_t>(input));
    NodeSpec n = unary(name, NodeKind::kConv, input);
    n.kernel = kernel;
    n.stride = stride;
    n.pad = kernel / 2;
    n.in_channels = src.out_channels;
    n.out_channels = out_channels;
    const int64_t h = kernels::conv_out_extent(src.out_shape[1], kernel, stride, n.pad);
    const int64_t w = kernels::conv_out_extent(src.out_shape[2], kernel, stride, n.pad);
    n.out_shape = {out_channels, h, w};
    const int fan_in = src.out_channels * kernel * kernel;
    n.params = {name + ".weight"};
    g_.add_param(name + ".weight", he_normal({out_channels, src.out_channels, kernel, kernel}, fan_in), true);
    return append(std::move(n));
  }

  int bn(const std::string& name, int input) {
    NodeSpec n = unary(name, NodeKind::kBatchNorm, input);
    const int c = n.in_channels;
    n.params = {name + ".gamma", name + ".beta"};
    n.buffers = {name + ".running_mean", name + ".running_var"};
    g_.add_param(name + ".gamma", Tensor({c}, 1.0f), true);
    g_.add_param(name + ".beta", Tensor({c}, 0.0f), true);
    g_.add_param(name + ".running_mean", Tensor({c}, 0.0f), false);
    g_.add_param(name + ".running_var", Tensor({c}, 1.0f), false);
    return append(std::move(n));
  }

  int relu(const std::string& name, int input) { return append(unary(name, NodeKind::kRelu, input)); }

  int pool(const std::string& name, int input, PoolKind kind, int kernel, int stride, int pad) {
    NodeSpec n = unary(name, kind == PoolKind::kMax ? NodeKind::kMaxPool : NodeKind::kAvgPool, input);
    n.kernel = kernel;
    n.stride = stride;
    n.pad = pad;
    n.out_shape[1] = kernels::conv_out_extent(n.out_shape[1], kernel, stride, pad);
    n.out_shape[2] = kernels::conv_out_extent(n.out_shape[2], kernel, stride, pad);
    return append(std::move(n));
  }

  int gap(const std::string& name, int input) {
    NodeSpec n = unary(name, NodeKind::kGlobalAvgPool, input);
    n.out_shape = {n.out_channels, 1, 1};
    return append(std::move(n));
  }

  // Single-source lists pass through without a concat node.
  int concat(const std::string& name, const std::vector<int>& inputs) {
    if (inputs.size() == 1) return inputs.front();
    NodeSpec n;
    n.name = name;
    n.kind = NodeKind::kConcat;
    n.inputs = inputs;
    n.stage = stage_;
    int channels = 0;
    for (int id : inputs) channels += g_.nodes_.at(static_cast<size_t>(id)).out_channels;
    const Shape& first = g_.nodes_.at(static_cast<size_t>(inputs.front())).out_shape;
    n.in_channels = channels;
    n.out_channels = channels;
    n.out_shape = {channels, first[1], first[2]};
    return append(std::move(n));
  }

  int add(const std::string& name, int a, int b) {
    NodeSpec n = unary(name, NodeKind::kAdd, a);
    n.inputs.push_back(b);
    return append(std::move(n));
  }

  int linear(const std::string& name, int input, int classes) {
    NodeSpec n = unary(name, NodeKind::kLinear, input);
    const NodeSpec& src = g_.nodes_.at(static_cast<size_t>(input));
    const int features = static_cast<int>(shape_numel(src.out_shape));
    n.in_channels = features;
    n.out_channels = classes;
    n.out_shape = {classes};
    n.params = {name + ".weight", name + ".bias"};
    g_.add_param(name + ".weight", he_normal({features, classes}, features), true);
    g_.add_param(name + ".bias", Tensor({classes}, 0.0f), true);
    return append(std::move(n));
  }

  void set_stage(std::string stage) { stage_ = std::move(stage); }
  int channels(int id) const { return g_.nodes_.at(static_cast<size_t>(id)).out_channels; }

 private:
  NodeSpec unary(const std::string& name, NodeKind kind, int input) const {
    const NodeSpec& src = g_.nodes_.at(static_cast<size_t>(input));
    NodeSpec n;
    n.name = name;
    n.kind = kind;
    n.inputs = {input};
    n.in_channels = src.out_channels;
    n.out_channels = src.out_channels;
    n.out_shape = src.out_shape;
    n.stage = stage_;
    return n;
  }

  int append(NodeSpec n) {
    n.id = static_cast<int>(g_.nodes_.size());
    g_.nodes_.push_back(std::move(n));
    return g_.nodes_.back().id;
  }

  Tensor he_normal(Shape shape, int fan_in) {
    Tensor t(std::move(shape));
    std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(fan_in)));
    for (auto& v : t.data()) v = dist(rng_);
    return t;
  }

  ModelGraph g_;
  std::mt19937_64 rng_;
  std::string stage_ = "stem";
};

namespace {

std::string unit_name(int block, int unit) {
  return "block" + std::to_string(block) + ".unit" + std::to_string(unit);
}

// BN -> ReLU -> 1x1 (4g) -> BN -> ReLU -> 3x3 (g), fed by every earlier layer.
int dense_unit(GraphBuilder& b, const std::string& name, int input, int growth) {
  int h = b.bn(name + ".bn1", input);
  h = b.relu(name + ".relu1", h);
  h = b.conv(name + ".conv1", h, 4 * growth, 1, 1);
  h = b.bn(name + ".bn2", h);
  h = b.relu(name + ".relu2", h);
  return b.conv(name + ".conv2", h, growth, 3, 1);
}

// 3x3 conv -> BN -> ReLU.
int harmonic_unit(GraphBuilder& b, const std::string& name, int input, int width) {
  int h = b.conv(name + ".conv", input, width, 3, 1);
  h = b.bn(name + ".bn", h);
  return b.relu(name + ".relu", h);
}

// 1x1 C->m, 3x3 m->m, 1x1 m->C with BN after each conv, identity add, ReLU.
int residual_unit(GraphBuilder& b, const std::string& name, int input, int mid) {
  const int c = b.channels(input);
  int h = b.conv(name + ".conv1", input, mid, 1, 1);
  h = b.bn(name + ".bn1", h);
  h = b.relu(name + ".relu1", h);
  h = b.conv(name + ".conv2", h, mid, 3, 1);
  h = b.bn(name + ".bn2", h);
  h = b.relu(name + ".relu2", h);
  h = b.conv(name + ".conv3", h, c, 1, 1);
  h = b.bn(name + ".bn3", h);
  h = b.add(name + ".add", h, input);
  return b.relu(name + ".relu3", h);
}

int connected_block(GraphBuilder& b, int block, Scheme scheme, int input, int depth, int growth,
                    WidthRule rule) {
  std::vector<int> outputs{input};
  for (int n = 1; n <= depth; ++n) {
    const LinkSet links = scheme == Scheme::kDense ? dense_links(n) : harmonic_links(n);
    std::vector<int> sources;
    for (int s : links.sources) sources.push_back(outputs.at(static_cast<size_t>(s)));
    const std::string name = unit_name(block, n);
    const int x = b.concat(name + ".concat", sources);
    outputs.push_back(scheme == Scheme::kDense ? dense_unit(b, name, x, growth)
                                               : harmonic_unit(b, name, x, layer_width(n, scheme, growth, rule)));
  }
  std::vector<int> members;
  for (int m : block_output_members(scheme, depth)) members.push_back(outputs.at(static_cast<size_t>(m)));
  return b.concat("block" + std::to_string(block) + ".out", members);
}

int transition(GraphBuilder& b, int index, int input, int channels, bool pooled, PoolKind pool) {
  const std::string name = "transition" + std::to_string(index);
  b.set_stage(name);
  int h = b.conv(name + ".conv", input, channels, 1, 1);
  h = b.bn(name + ".bn", h);
  h = b.relu(name + ".relu", h);
  if (pooled) h = b.pool(name + ".pool", h, pool, 2, 2, 0);
  return h;
}

}  // namespace

ModelGraph build(const ModelConfig& config, uint64_t seed) {
  config.validate();
  GraphBuilder b(config, seed);

  b.set_stage("stem");
  int h = b.conv("stem.conv1", 0, config.stem_channels, 3, 2);
  h = b.bn("stem.bn1", h);
  h = b.relu("stem.relu1", h);
  h = b.conv("stem.conv2", h, config.stem_channels, 3, 1);
  h = b.bn("stem.bn2", h);
  h = b.relu("stem.relu2", h);
  h = b.pool("stem.pool", h, PoolKind::kMax, 3, 2, 1);

  b.set_stage("block1");
  h = connected_block(b, 1, Scheme::kDense, h, config.block_depths[0], config.growth_rates[0], config.width_rule);

  // The transition into block 4 keeps the spatial size.
  for (int blk = 1; blk < kNumBlocks; ++blk) {
    h = transition(b, blk, h, config.block_channels[blk], blk != 3, config.transition_pool);
    b.set_stage("block" + std::to_string(blk + 1));
    if (blk < 4) {
      h = connected_block(b, blk + 1, Scheme::kHarmonic, h, config.block_depths[blk], config.growth_rates[blk],
                          config.width_rule);
    }
  }

  const int mid = config.bottleneck == BottleneckWidth::kHalf ? config.block_channels[4] / 2 : config.growth_rates[4];
  for (int n = 1; n <= config.block_depths[4]; ++n) h = residual_unit(b, unit_name(5, n), h, mid);

  b.set_stage("classifier");
  h = b.gap("classifier.gap", h);
  b.linear("classifier.fc", h, config.num_classes);
  return b.finish();
}

std::vector<ShapeRow> dry_run_shapes(const ModelGraph& graph, int batch) {
  if (graph.nodes().empty()) throw InvalidArgument("cannot dry-run an empty graph");
  if (batch < 1) throw InvalidArgument("batch must be >= 1");
  std::vector<Shape> shapes;
  std::vector<ShapeRow> rows;
  const auto fail = [](const NodeSpec& n, const std::string& why) {
    throw InvalidArgument("shape check failed at node '" + n.name + "': " + why);
  };
  for (const NodeSpec& n : graph.nodes()) {
    if (n.id != static_cast<int>(shapes.size())) fail(n, "node ids are not in topological order");
    std::vector<const Shape*> in;
    for (int id : n.inputs) {
      if (id < 0 || id >= n.id) fail(n, "input " + std::to_string(id) + " does not precede the node");
      in.push_back(&shapes[static_cast<size_t>(id)]);
    }
    Shape s;
    switch (n.kind) {
      case NodeKind::kInput:
        s = {batch, 3, graph.config().input_size, graph.config().input_size};
        break;
      case NodeKind::kConv: {
        const Tensor& w = graph.param(n.params.at(0));
        if (w.dim(1) != (*in[0])[1]) fail(n, "weight " + shape_to_string(w.shape()) + " vs input " + shape_to_string(*in[0]));
        s = {batch, w.dim(0), kernels::conv_out_extent((*in[0])[2], static_cast<int>(w.dim(2)), n.stride, n.pad),
             kernels::conv_out_extent((*in[0])[3], static_cast<int>(w.dim(3)), n.stride, n.pad)};
        break;
      }
      case NodeKind::kBatchNorm:
        if (static_cast<int64_t>(graph.param(n.params.at(0)).numel()) != (*in[0])[1]) fail(n, "gamma length");
        s = *in[0];
        break;
      case NodeKind::kRelu:
        s = *in[0];
        break;
      case NodeKind::kMaxPool:
      case NodeKind::kAvgPool:
        s = {batch, (*in[0])[1], kernels::conv_out_extent((*in[0])[2], n.kernel, n.stride, n.pad),
             kernels::conv_out_extent((*in[0])[3], n.kernel, n.stride, n.pad)};
        break;
      case NodeKind::kGlobalAvgPool:
        s = {batch, (*in[0])[1], 1, 1};
        break;
      case NodeKind::kConcat: {
        s = *in[0];
        s[1] = 0;
        for (const Shape* p : in) {
          if ((*p)[2] != s[2] || (*p)[3] != s[3]) fail(n, "concat spatial mismatch");
          s[1] += (*p)[1];
        }
        break;
      }
      case NodeKind::kAdd:
        if (*in[0] != *in[1]) fail(n, "add operands " + shape_to_string(*in[0]) + " vs " + shape_to_string(*in[1]));
        s = *in[0];
        break;
      case NodeKind::kLinear: {
        const Tensor& w = graph.param(n.params.at(0));
        int64_t features = 1;
        for (size_t i = 1; i < in[0]->size(); ++i) features *= (*in[0])[i];
        if (features != w.dim(0)) fail(n, "linear expects " + std::to_string(w.dim(0)) + " features");
        s = {batch, w.dim(1)};
        break;
      }
    }
    Shape declared{batch};
    declared.insert(declared.end(), n.out_shape.begin(), n.out_shape.end());
    if (declared != s) fail(n, "declared " + shape_to_string(declared) + " but inferred " + shape_to_string(s));
    shapes.push_back(s);
    rows.push_back({n.id, n.name, n.kind, s});
  }
  return rows;
}

namespace {

std::string describe_block(const ModelConfig& c, int block) {
  std::ostringstream os;
  const int depth = c.block_depths[static_cast<size_t>(block)];
  const int g = c.growth_rates[static_cast<size_t>(block)];
  if (block == 0) {
    os << "[dense: BN-ReLU-1x1(" << 4 * g << ")-BN-ReLU-3x3(" << g << ")] x " << depth;
  } else if (block < 4) {
    os << "[harmonic: 3x3(" << g << "|" << layer_width(2, Scheme::kHarmonic, g, c.width_rule)
       << ")-BN-ReLU] x " << depth;
  } else {
    const int ch = c.block_channels[4];
    const int mid = c.bottleneck == BottleneckWidth::kHalf ? ch / 2 : g;
    os << "[residual: 1x1(" << mid << ")-3x3(" << mid << ")-1x1(" << ch << ") + identity] x " << depth;
  }
  return os.str();
}

}  // namespace

std::vector<StageInfo> architecture_table(const ModelGraph& graph) {
  dry_run_shapes(graph, 1);
  const ModelConfig& c = graph.config();
  std::vector<StageInfo> rows;
  std::string current_block;
  for (const NodeSpec& n : graph.nodes()) {
    const int64_t spatial = n.out_shape.size() == 3 ? n.out_shape[1] : 1;
    const bool in_block = n.stage.rfind("block", 0) == 0;
    if (in_block) {
      if (!rows.empty() && rows.back().stage == n.stage) {
        rows.back().spatial = spatial;
        rows.back().channels = n.out_channels;
        continue;
      }
      const int block = n.stage.back() - '1';
      rows.push_back({n.stage, "Triple Block " + std::to_string(block + 1), spatial, n.out_channels,
                      describe_block(c, block)});
      continue;
    }
    std::string what;
    switch (n.kind) {
      case NodeKind::kConv:
        what = std::to_string(n.kernel) + "x" + std::to_string(n.kernel) + " conv, stride " + std::to_string(n.stride);
        break;
      case NodeKind::kMaxPool:
      case NodeKind::kAvgPool:
        what = std::to_string(n.kernel) + "x" + std::to_string(n.kernel) +
               (n.kind == NodeKind::kMaxPool ? " max pool" : " avg pool") + ", stride " + std::to_string(n.stride);
        break;
      case NodeKind::kGlobalAvgPool:
        what = "global avg pool";
        break;
      case NodeKind::kLinear:
        what = "linear " + std::to_string(n.in_channels) + " -> " + std::to_string(n.out_channels);
        break;
      default:
        continue;
    }
    const std::string layer = n.stage == "stem"         ? "First Layer"
                              : n.stage == "classifier" ? "Classification"
                                                        : "Transition Layer";
    rows.push_back({n.stage, layer, spatial, n.out_channels, what});
  }
  return rows;
}

std::vector<int64_t> stage_spatial_sizes(const ModelGraph& graph) {
  std::vector<int64_t> sizes;
  const auto& nodes = graph.nodes();
  for (const NodeSpec& n : nodes) {
    if (n.kind == NodeKind::kConv) {
      sizes.push_back(n.out_shape[1]);
      break;
    }
  }
  for (int blk = 1; blk <= kNumBlocks; ++blk) {
    const std::string stage = "block" + std::to_string(blk);
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
      if (it->stage == stage) {
        sizes.push_back(it->out_shape[1]);
        break;
      }
    }
  }
  for (const NodeSpec& n : nodes)
    if (n.kind == NodeKind::kGlobalAvgPool) sizes.push_back(n.out_shape[1]);
  return sizes;
}

}  // namespace triplenet
