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

#include <gtest/gtest.h>

#include <numeric>

#include "oracles.hpp"
#include "triplenet/connectivity.hpp"
#include "triplenet/error.hpp"

namespace tn = triplenet;

TEST(Connectivity, HarmonicMatchesExhaustiveSearch) {
  for (int n = 1; n <= 64; ++n) EXPECT_EQ(tn::harmonic_links(n).sources, oracle::harmonic_sources(n)) << "n=" << n;
}

TEST(Connectivity, DenseIsEveryEarlierLayer) {
  for (int n = 1; n <= 64; ++n) {
    std::vector<int> expect(static_cast<size_t>(n));
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(tn::dense_links(n).sources, expect);
  }
}

TEST(Connectivity, KnownHarmonicSets) {
  EXPECT_EQ(tn::harmonic_links(1).sources, (std::vector<int>{0}));
  EXPECT_EQ(tn::harmonic_links(2).sources, (std::vector<int>{0}));
  EXPECT_EQ(tn::harmonic_links(3).sources, (std::vector<int>{2}));
  EXPECT_EQ(tn::harmonic_links(4).sources, (std::vector<int>{0, 2}));
  EXPECT_EQ(tn::harmonic_links(8).sources, (std::vector<int>{0, 4, 6}));
  EXPECT_EQ(tn::harmonic_links(16).sources, (std::vector<int>{0, 8, 12, 14}));
  // The exponent stops at 5, so layer 40 cannot reach back to layer 0.
  EXPECT_EQ(tn::harmonic_links(40).sources, (std::vector<int>{8, 24, 32, 36, 38}));
}

TEST(Connectivity, SourcesAreSortedUniqueAndInRange) {
  for (int n = 1; n <= 64; ++n) {
    const auto s = tn::harmonic_links(n).sources;
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
    for (int v : s) {
      EXPECT_GE(v, 0);
      EXPECT_LT(v, n);
    }
    EXPECT_LE(s.size(), n % 2 ? 1u : 5u);
  }
}

TEST(Connectivity, RejectsLayerZero) {
  EXPECT_THROW(tn::harmonic_links(0), tn::InvalidArgument);
  EXPECT_THROW(tn::dense_links(0), tn::InvalidArgument);
}

TEST(Connectivity, WidthRule) {
  EXPECT_EQ(tn::layer_width(4, tn::Scheme::kHarmonic, 16), 27);
  EXPECT_EQ(tn::layer_width(3, tn::Scheme::kHarmonic, 16), 16);
  EXPECT_EQ(tn::layer_width(2, tn::Scheme::kHarmonic, 40), 68);
  EXPECT_EQ(tn::layer_width(4, tn::Scheme::kDense, 32), 32);
  EXPECT_EQ(tn::layer_width(2, tn::Scheme::kHarmonic, 20, {3, 2}), 30);
  EXPECT_THROW(tn::layer_width(2, tn::Scheme::kHarmonic, 0), tn::InvalidArgument);
}

TEST(Connectivity, BlockOutputMembers) {
  EXPECT_EQ(tn::block_output_members(tn::Scheme::kHarmonic, 16),
            (std::vector<int>{0, 2, 4, 6, 8, 10, 12, 14, 16}));
  EXPECT_EQ(tn::block_output_members(tn::Scheme::kHarmonic, 5), (std::vector<int>{0, 2, 4, 5}));
  EXPECT_EQ(tn::block_output_members(tn::Scheme::kDense, 3), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Connectivity, InputChannelsSumSourceWidths) {
  const auto widths = tn::block_layer_widths(tn::Scheme::kHarmonic, 16, 192, 16);
  ASSERT_EQ(widths.size(), 17u);
  EXPECT_EQ(widths[0], 192);
  EXPECT_EQ(tn::layer_input_channels(tn::Scheme::kHarmonic, 1, widths), 192);
  EXPECT_EQ(tn::layer_input_channels(tn::Scheme::kHarmonic, 3, widths), 27);
  EXPECT_EQ(tn::layer_input_channels(tn::Scheme::kHarmonic, 4, widths), 192 + 27);
  EXPECT_EQ(tn::layer_input_channels(tn::Scheme::kHarmonic, 16, widths), 192 + 27 * 3);
}
