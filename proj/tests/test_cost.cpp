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
#include <sstream>

#include "triplenet/cost.hpp"

namespace tn = triplenet;

namespace {

const tn::CostRow& row(const tn::CostReport& r, const std::string& name) {
  for (const auto& x : r.rows)
    if (x.name == name) return x;
  throw std::runtime_error("no row " + name);
}

}  // namespace

TEST(Cost, FirstConvAt224) {
  const auto r = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 224)));
  const auto& c = row(r, "stem.conv1");
  EXPECT_EQ(c.cost.params, 3u * 3 * 3 * 128);
  EXPECT_EQ(c.cost.macs, 3u * 3 * 3 * 128 * 112 * 112);
  EXPECT_EQ(c.cost.madd, 2 * c.cost.macs);
  EXPECT_EQ(c.cost.act_bytes, 4u * 128 * 112 * 112);
  EXPECT_EQ(c.cost.rw_bytes, 4u * (3 * 224 * 224 + 3456 + 128 * 112 * 112));
}

TEST(Cost, ElementwiseAndNormRows) {
  const auto r = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 32)));
  const auto& bn = row(r, "stem.bn1");
  EXPECT_EQ(bn.cost.params, 256u);
  EXPECT_EQ(bn.cost.madd, 2u * 128 * 16 * 16);
  const auto& relu = row(r, "stem.relu1");
  EXPECT_EQ(relu.cost.params, 0u);
  EXPECT_EQ(relu.cost.madd, 128u * 16 * 16);
  const auto& fc = row(r, "classifier.fc");
  EXPECT_EQ(fc.cost.params, 720u * 10 + 10);
  EXPECT_EQ(fc.cost.macs, 7200u);
}

TEST(Cost, ParamsEqualEnumeratedCount) {
  for (auto v : {tn::Variant::kS, tn::Variant::kB})
    for (int side : {32, 224}) {
      const auto g = tn::build(tn::ModelConfig::for_variant(v, 10, side));
      EXPECT_EQ(tn::analyze(g).totals.params, static_cast<uint64_t>(g.trainable_scalar_count()));
    }
}

TEST(Cost, TotalsAreSumOfRows) {
  const auto r = tn::analyze(tn::build(tn::ModelConfig::triplenet_b(10, 64)));
  std::vector<int> all(r.rows.size());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(tn::sum_rows(r, all), r.totals);
  std::vector<int> head(all.begin(), all.begin() + 40), tail(all.begin() + 40, all.end());
  auto split = tn::sum_rows(r, head);
  split += tn::sum_rows(r, tail);
  EXPECT_EQ(split, r.totals);
}

TEST(Cost, DoublingInputQuadruplesConvMacs) {
  const auto a = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 64)));
  const auto b = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 128)));
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].kind == tn::NodeKind::kConv) {
      EXPECT_EQ(b.rows[i].cost.macs, 4 * a.rows[i].cost.macs) << a.rows[i].name;
    }
  }
  EXPECT_EQ(a.totals.params, b.totals.params);
}

TEST(Cost, BatchScalesMacs) {
  const auto g = tn::build(tn::ModelConfig::triplenet_s(10, 32));
  EXPECT_EQ(tn::analyze(g, 4).totals.macs, 4 * tn::analyze(g, 1).totals.macs);
}

TEST(Cost, MaddAboutTwiceMacs) {
  for (auto v : {tn::Variant::kS, tn::Variant::kB}) {
    const auto t = tn::analyze(tn::build(tn::ModelConfig::for_variant(v, 1000, 224))).totals;
    const double ratio = static_cast<double>(t.madd) / static_cast<double>(t.macs);
    EXPECT_GE(ratio, 1.9);
    EXPECT_LE(ratio, 2.1);
  }
}

TEST(Cost, PeakIsBetweenLargestTensorAndTotal) {
  const auto r = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 224)));
  uint64_t largest = 0;
  for (const auto& x : r.rows) largest = std::max(largest, x.cost.act_bytes);
  EXPECT_GE(r.peak_activation_bytes, largest);
  EXPECT_LT(r.peak_activation_bytes, r.totals.act_bytes);
}

TEST(Cost, CompareSelfIsZeroAndBMinusSIsPositive) {
  const auto s = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 224)));
  const auto b = tn::analyze(tn::build(tn::ModelConfig::triplenet_b(10, 224)));
  for (const auto& d : tn::compare(s, s)) EXPECT_EQ(d.delta, 0.0) << d.column;
  const auto bs = tn::compare(b, s);
  EXPECT_EQ(bs.front().column, "params");
  EXPECT_GT(bs.front().delta, 0.0);
  // Block 5 runs at 7x7, so B adds far less compute than parameters.
  EXPECT_LT(bs[1].relative, bs[0].relative);
}

TEST(Cost, CsvHeaderAndRowCount) {
  const auto r = tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 32)));
  std::istringstream in(tn::format_csv(r));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "name,kind,out_shape,params,macs,madd,act_bytes,rw_bytes");
  size_t n = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7) << line;
    ++n;
  }
  EXPECT_EQ(n, r.rows.size());
}

TEST(Cost, TextReportHasTotalsLine) {
  const auto text = tn::format_text(tn::analyze(tn::build(tn::ModelConfig::triplenet_s(10, 224))));
  EXPECT_NE(text.find("total: params"), std::string::npos);
  EXPECT_NE(text.find("MAdd"), std::string::npos);
}

TEST(Cost, DiagnosticReportsDeviationAndReading) {
  const auto d = tn::param_diagnostic(tn::build(tn::ModelConfig::triplenet_s(1000, 224)));
  EXPECT_EQ(d.reference, 9.67e6);
  EXPECT_NEAR(d.deviation_pct, 100.0 * (static_cast<double>(d.params) - 9.67e6) / 9.67e6, 1e-9);
  const auto text = tn::format_diagnostic(d);
  EXPECT_NE(text.find("reading:"), std::string::npos);
  EXPECT_NE(text.find("9.67M"), std::string::npos);
}
