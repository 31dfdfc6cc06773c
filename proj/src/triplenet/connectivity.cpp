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

#include "triplenet/connectivity.hpp"

#include <set>
#include <string>

#include "triplenet/error.hpp"

namespace triplenet {

namespace {

// The power-of-two loop only runs i = 1..5; deeper blocks keep the same
// bound and simply stop reaching further back than 32 layers.
constexpr int kMaxHarmonicExponent = 5;

void require_layer(int n) {
  if (n < 1) throw InvalidArgument("layer index must be >= 1, got " + std::to_string(n));
}

}  // namespace

LinkSet dense_links(int n) {
  require_layer(n);
  LinkSet links{n, {}};
  links.sources.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) links.sources.push_back(i);
  return links;
}

LinkSet harmonic_links(int n) {
  require_layer(n);
  LinkSet links{n, {}};
  if (n % 2 == 1) {
    links.sources.push_back(n - 1);
    return links;
  }
  for (int i = kMaxHarmonicExponent; i >= 1; --i) {
    const int stride = 1 << i;
    if (stride <= n) links.sources.push_back(n - stride);
  }
  return links;
}

int layer_width(int n, Scheme scheme, int growth_rate, WidthRule rule) {
  if (growth_rate < 1) throw InvalidArgument("growth rate must be >= 1");
  if (rule.numerator < 1 || rule.denominator < 1) throw InvalidArgument("width multiplier must be positive");
  if (scheme == Scheme::kDense || n % 2 == 1) return growth_rate;
  const int wide = growth_rate * rule.numerator / rule.denominator;
  return wide < 1 ? 1 : wide;
}

std::vector<int> block_output_members(Scheme scheme, int depth) {
  if (depth < 1) throw InvalidArgument("block depth must be >= 1");
  std::set<int> members{0, depth};
  for (int n = 1; n < depth; ++n) {
    if (scheme == Scheme::kDense || n % 2 == 0) members.insert(n);
  }
  return {members.begin(), members.end()};
}

std::vector<int> block_layer_widths(Scheme scheme, int depth, int input_channels, int growth_rate,
                                    WidthRule rule) {
  if (depth < 1) throw InvalidArgument("block depth must be >= 1");
  std::vector<int> widths{input_channels};
  for (int n = 1; n <= depth; ++n) widths.push_back(layer_width(n, scheme, growth_rate, rule));
  return widths;
}

int layer_input_channels(Scheme scheme, int n, const std::vector<int>& widths) {
  const LinkSet links = scheme == Scheme::kDense ? dense_links(n) : harmonic_links(n);
  int total = 0;
  for (int s : links.sources) total += widths.at(static_cast<size_t>(s));
  return total;
}

}  // namespace triplenet
