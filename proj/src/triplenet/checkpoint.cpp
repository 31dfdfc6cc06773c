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

#include "triplenet/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "triplenet/error.hpp"

namespace triplenet {

namespace {

static_assert(sizeof(float) == 4);

template <typename U>
U to_little(U v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(U)];
    std::memcpy(b, &v, sizeof(U));
    for (size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
    std::memcpy(&v, b, sizeof(U));
  }
  return v;
}

template <typename U>
void put(std::ostream& os, U v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U get(std::istream& is, const std::string& path) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(U))) throw IoError("truncated checkpoint " + path);
  return to_little(v);
}

}  // namespace

void write_tensors(const std::string& path, const NamedTensors& tensors) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kCheckpointMagic, 4);
  put<uint16_t>(os, kCheckpointVersion);
  put<uint32_t>(os, static_cast<uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    put<uint32_t>(os, static_cast<uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<uint32_t>(os, static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) put<uint32_t>(os, static_cast<uint32_t>(d));
    for (float v : t.data()) {
      uint32_t bits;
      std::memcpy(&bits, &v, 4);
      put<uint32_t>(os, bits);
    }
  }
  if (!os) throw IoError("failed writing " + path);
}

NamedTensors read_tensors(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
    throw IoError(path + " is not a TPLN checkpoint");
  }
  const auto version = get<uint16_t>(is, path);
  if (version != kCheckpointVersion) {
    throw IoError(path + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get<uint32_t>(is, path);
  NamedTensors out;
  for (uint32_t i = 0; i < count; ++i) {
    const auto len = get<uint32_t>(is, path);
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw IoError("truncated checkpoint " + path);
    const auto rank = get<uint32_t>(is, path);
    Shape shape;
    for (uint32_t r = 0; r < rank; ++r) shape.push_back(get<uint32_t>(is, path));
    std::vector<float> data(static_cast<size_t>(shape_numel(shape)));
    for (auto& v : data) {
      const auto bits = get<uint32_t>(is, path);
      std::memcpy(&v, &bits, 4);
    }
    out.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  if (is.peek() != std::char_traits<char>::eof()) throw IoError(path + " has trailing bytes");
  return out;
}

void save_checkpoint(const ModelGraph& graph, const std::string& path) {
  NamedTensors tensors;
  for (const auto& p : graph.parameters()) tensors.emplace_back(p.name, *p.tensor);
  write_tensors(path, tensors);
}

void load_checkpoint(ModelGraph& graph, const std::string& path) {
  std::map<std::string, Tensor> loaded;
  for (auto& [name, t] : read_tensors(path)) loaded.emplace(name, std::move(t));
  for (const auto& p : graph.parameters()) {
    auto it = loaded.find(p.name);
    if (it == loaded.end()) throw IoError(path + " is missing tensor '" + p.name + "'");
    if (it->second.shape() != p.tensor->shape()) {
      throw IoError(path + ": tensor '" + p.name + "' has shape " + shape_to_string(it->second.shape()) +
                    ", model expects " + shape_to_string(p.tensor->shape()));
    }
  }
  if (loaded.size() != graph.parameters().size()) {
    throw IoError(path + " holds " + std::to_string(loaded.size()) + " tensors, model has " +
                  std::to_string(graph.parameters().size()));
  }
  for (const auto& p : graph.parameters()) *p.tensor = std::move(loaded.at(p.name));
}

}  // namespace triplenet
