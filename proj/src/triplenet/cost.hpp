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
#include <string>
#include <vector>

#include "triplenet/graph.hpp"

namespace triplenet {

struct CostTotals {
  uint64_t params = 0;
  uint64_t macs = 0;
  uint64_t madd = 0;
  uint64_t act_bytes = 0;
  uint64_t rw_bytes = 0;

  CostTotals& operator+=(const CostTotals& o);
  bool operator==(const CostTotals&) const = default;
};

struct CostRow {
  int node = 0;
  std::string name;
  NodeKind kind = NodeKind::kInput;
  Shape out_shape;  // including batch
  CostTotals cost;
};

struct CostReport {
  std::string model;
  int batch = 1;
  int input_size = 0;
  std::vector<CostRow> rows;
  CostTotals totals;
  // Peak bytes of simultaneously live activations when each tensor is kept
  // from its producer until its last consumer.
  uint64_t peak_activation_bytes = 0;
};

// Static cost model. conv: params k*k*Cin*Cout, macs params*H'*W'.
// linear: params F*K+K, macs F*K. MAdd is 2*macs for conv/linear, 2*C*H*W for
// BN and one op per output element for pooling, ReLU, concat and add.
// act_bytes is the output footprint; rw_bytes counts one read of every input
// and weight plus one write of the output.
CostReport analyze(const ModelGraph& graph, int batch = 1);

// Totals over a subset of node ids.
CostTotals sum_rows(const CostReport& report, const std::vector<int>& nodes);

struct DeltaRow {
  std::string column;
  double a = 0;
  double b = 0;
  double delta = 0;     // a - b
  double relative = 0;  // (a - b) / b, 0 when b == 0
};

std::vector<DeltaRow> compare(const CostReport& a, const CostReport& b);

// Parameter count against the reference counts for the two variants
// (9.67M and 12.63M) with the acceptance band.
struct ParamDiagnostic {
  Variant variant = Variant::kS;
  uint64_t params = 0;
  double reference = 0;
  double band_low = 0;
  double band_high = 0;
  double deviation_pct = 0;
  bool in_band = false;
  std::string reading;
};

ParamDiagnostic param_diagnostic(const ModelGraph& graph);

std::string format_text(const CostReport& report);
std::string format_csv(const CostReport& report);
std::string format_compare(const std::string& name_a, const std::string& name_b, const std::vector<DeltaRow>& rows);
std::string format_diagnostic(const ParamDiagnostic& d);

inline constexpr const char* kCostCsvHeader = "name,kind,out_shape,params,macs,madd,act_bytes,rw_bytes";

}  // namespace triplenet
