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

namespace triplenet {

enum class Scheme { kDense, kHarmonic };

// Sources feeding layer `layer_index` inside a block. Index 0 is the block
// input; sources are sorted ascending and all strictly below layer_index.
struct LinkSet {
  int layer_index = 0;
  std::vector<int> sources;
};

// Output width multiplier for layers whose output is kept for long-range
// reuse. Stored as a ratio so widths stay exact integers.
struct WidthRule {
  int numerator = 17;
  int denominator = 10;
};

// Layer n reads every earlier output: {0, 1, ..., n-1}.
LinkSet dense_links(int n);

// Odd n chains to n-1. Even n reads n - 2^i for i = 1..5 while 2^i <= n, so
// n itself being a power of two (up to 32) pulls in the block input.
LinkSet harmonic_links(int n);

// Dense layers always emit g channels. Harmonic even layers are the reused
// ones and emit floor(g * rule); odd layers emit g.
int layer_width(int n, Scheme scheme, int growth_rate, WidthRule rule = {});

// Layer outputs concatenated into the block output. Dense keeps everything;
// harmonic keeps the input, every even layer and the last layer.
std::vector<int> block_output_members(Scheme scheme, int depth);

// Channel width of every layer 0..depth of a block (index 0 is the input).
std::vector<int> block_layer_widths(Scheme scheme, int depth, int input_channels, int growth_rate,
                                    WidthRule rule = {});

// Concatenated input width of layer n given the per-layer widths.
int layer_input_channels(Scheme scheme, int n, const std::vector<int>& widths);

}  // namespace triplenet
