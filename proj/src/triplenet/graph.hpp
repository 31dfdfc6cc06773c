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

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "triplenet/connectivity.hpp"
#include "triplenet/tensor.hpp"

namespace triplenet {

enum class Variant { kS, kB };

enum class NodeKind { kInput, kConv, kBatchNorm, kRelu, kMaxPool, kAvgPool, kGlobalAvgPool, kConcat, kAdd, kLinear };

enum class PoolKind { kAverage, kMax };

// Width of the 3x3 convolution inside the residual units of the last block.
// kHalf uses C/2 of the block width; kGrowthRate uses the block's growth rate.
enum class BottleneckWidth { kHalf, kGrowthRate };

const char* to_string(NodeKind kind);
const char* to_string(Variant variant);
const char* to_string(BottleneckWidth width);

inline constexpr int kNumBlocks = 5;

struct ModelConfig {
  Variant variant = Variant::kS;
  std::array<int, kNumBlocks> block_depths{6, 16, 16, 16, 2};
  // Input width of each block; the stem must emit block_channels[0].
  std::array<int, kNumBlocks> block_channels{128, 192, 256, 320, 720};
  std::array<int, kNumBlocks> growth_rates{32, 16, 20, 40, 160};
  int num_classes = 10;
  int input_size = 32;
  int stem_channels = 128;
  WidthRule width_rule{};
  BottleneckWidth bottleneck = BottleneckWidth::kHalf;
  PoolKind transition_pool = PoolKind::kAverage;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;

  static ModelConfig triplenet_s(int num_classes = 10, int input_size = 32);
  static ModelConfig triplenet_b(int num_classes = 10, int input_size = 32);
  static ModelConfig for_variant(Variant variant, int num_classes = 10, int input_size = 32);

  // Throws InvalidArgument describing the first violated precondition.
  void validate() const;
};

struct NodeSpec {
  int id = 0;
  std::string name;
  NodeKind kind = NodeKind::kInput;
  std::vector<int> inputs;
  int kernel = 0;
  int stride = 1;
  int pad = 0;
  int in_channels = 0;
  int out_channels = 0;
  Shape out_shape;  // per image: [C, H, W], or [K] for the classifier
  std::string stage;
  std::vector<std::string> params;   // trainable, in kind order (weight, bias | gamma, beta)
  std::vector<std::string> buffers;  // running mean, running var
};

struct Parameter {
  std::string name;
  TensorRef<float> tensor;
  bool trainable = true;
};

// Topologically ordered, shape-annotated network. Parameters are held by
// reference so the executor can accumulate gradients in place; copying a
// graph deep-copies every tensor.
class ModelGraph {
 public:
  ModelGraph() = default;
  ModelGraph(const ModelGraph& other);
  ModelGraph& operator=(const ModelGraph& other);
  ModelGraph(ModelGraph&&) noexcept = default;
  ModelGraph& operator=(ModelGraph&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const NodeSpec& node(int id) const { return nodes_.at(static_cast<size_t>(id)); }
  int output_node() const { return static_cast<int>(nodes_.size()) - 1; }
  const std::vector<Parameter>& parameters() const { return params_; }

  bool has_param(const std::string& name) const { return index_.count(name) != 0; }
  TensorRef<float> param_ref(const std::string& name) const;
  Tensor& param(const std::string& name) { return *param_ref(name); }
  const Tensor& param(const std::string& name) const { return *param_ref(name); }

  int64_t trainable_scalar_count() const;
  void zero_grad();

 private:
  friend class GraphBuilder;
  void add_param(std::string name, Tensor value, bool trainable);

  ModelConfig config_;
  std::vector<NodeSpec> nodes_;
  std::vector<Parameter> params_;
  std::map<std::string, size_t> index_;
};

// Builds the full network (stem, five blocks with their transitions, and
// classifier) with He-initialized weights drawn from `seed`.
ModelGraph build(const ModelConfig& config, uint64_t seed = 0);

struct ShapeRow {
  int node = 0;
  std::string name;
  NodeKind kind = NodeKind::kInput;
  Shape shape;  // including the batch extent
};

// Re-derives every node's output shape from its inputs and attributes and
// checks it against the declared metadata. A mismatch names the node.
std::vector<ShapeRow> dry_run_shapes(const ModelGraph& graph, int batch);

struct StageInfo {
  std::string stage;
  std::string layer;
  int64_t spatial = 0;
  int64_t channels = 0;
  std::string composition;
};

// Architecture table: one row per stem layer, block, transition layer and
// classifier layer, in execution order.
std::vector<StageInfo> architecture_table(const ModelGraph& graph);

// Spatial extent after the first stem conv, after each block, and after the
// global pool (seven entries).
std::vector<int64_t> stage_spatial_sizes(const ModelGraph& graph);

}  // namespace triplenet
