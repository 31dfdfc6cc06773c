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

#include <string>
#include <utility>
#include <vector>

#include "triplenet/graph.hpp"

namespace triplenet {

// Weight file layout, all integers little-endian:
//   "TPLN" | u16 version | u32 count |
//   count x ( u32 name_len | name bytes | u32 rank | rank x u32 extent | f32 data... )
inline constexpr char kCheckpointMagic[4] = {'T', 'P', 'L', 'N'};
inline constexpr uint16_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void write_tensors(const std::string& path, const NamedTensors& tensors);
NamedTensors read_tensors(const std::string& path);

// Saves trainable parameters and BN running statistics.
void save_checkpoint(const ModelGraph& graph, const std::string& path);

// Every tensor in the graph must be present with a matching shape.
void load_checkpoint(ModelGraph& graph, const std::string& path);

}  // namespace triplenet
