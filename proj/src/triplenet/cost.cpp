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

#include "triplenet/cost.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "triplenet/error.hpp"

namespace triplenet {

namespace {

constexpr double kGiga = 1e9;
constexpr double kMega = 1e6;
constexpr double kMiB = 1024.0 * 1024.0;

uint64_t elements(const Shape& s) { return static_cast<uint64_t>(shape_numel(s)); }

std::string shape_cell(const Shape& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += 'x';
    out += std::to_string(s[i]);
  }
  return out;
}

}  // namespace

CostTotals& CostTotals::operator+=(const CostTotals& o) {
  params += o.params;
  macs += o.macs;
  madd += o.madd;
  act_bytes += o.act_bytes;
  rw_bytes += o.rw_bytes;
  return *this;
}

CostReport analyze(const ModelGraph& graph, int batch) {
  const std::vector<ShapeRow> shapes = dry_run_shapes(graph, batch);
  CostReport report;
  report.model = to_string(graph.config().variant);
  report.batch = batch;
  report.input_size = graph.config().input_size;

  std::vector<int> last(graph.nodes().size(), -1);
  for (const NodeSpec& n : graph.nodes())
    for (int id : n.inputs) last[static_cast<size_t>(id)] = n.id;
  uint64_t live = 0;

  for (const NodeSpec& n : graph.nodes()) {
    const Shape& out = shapes[static_cast<size_t>(n.id)].shape;
    const uint64_t out_elems = elements(out);
    uint64_t in_elems = 0;
    for (int id : n.inputs) in_elems += elements(shapes[static_cast<size_t>(id)].shape);

    CostTotals c;
    switch (n.kind) {
      case NodeKind::kInput:
        break;
      case NodeKind::kConv: {
        c.params = static_cast<uint64_t>(n.kernel) * n.kernel * n.in_channels * n.out_channels;
        c.macs = c.params * static_cast<uint64_t>(out[2] * out[3]) * static_cast<uint64_t>(batch);
        c.madd = 2 * c.macs;
        break;
      }
      case NodeKind::kLinear: {
        const uint64_t fk = static_cast<uint64_t>(n.in_channels) * n.out_channels;
        c.params = fk + static_cast<uint64_t>(n.out_channels);
        c.macs = fk * static_cast<uint64_t>(batch);
        c.madd = 2 * c.macs;
        break;
      }
      case NodeKind::kBatchNorm:
        c.params = 2 * static_cast<uint64_t>(n.out_channels);
        c.madd = 2 * out_elems;
        break;
      case NodeKind::kRelu:
      case NodeKind::kMaxPool:
      case NodeKind::kAvgPool:
      case NodeKind::kGlobalAvgPool:
      case NodeKind::kConcat:
      case NodeKind::kAdd:
        c.madd = out_elems;
        break;
    }
    c.act_bytes = 4 * out_elems;
    if (n.kind != NodeKind::kInput) c.rw_bytes = 4 * (in_elems + c.params + out_elems);
    report.rows.push_back({n.id, n.name, n.kind, out, c});
    report.totals += c;

    live += c.act_bytes;
    report.peak_activation_bytes = std::max(report.peak_activation_bytes, live);
    for (int id : n.inputs) {
      if (last[static_cast<size_t>(id)] == n.id) live -= report.rows[static_cast<size_t>(id)].cost.act_bytes;
    }
  }
  return report;
}

CostTotals sum_rows(const CostReport& report, const std::vector<int>& nodes) {
  CostTotals t;
  for (int id : nodes) t += report.rows.at(static_cast<size_t>(id)).cost;
  return t;
}

std::vector<DeltaRow> compare(const CostReport& a, const CostReport& b) {
  const auto row = [](const char* name, uint64_t x, uint64_t y) {
    DeltaRow r;
    r.column = name;
    r.a = static_cast<double>(x);
    r.b = static_cast<double>(y);
    r.delta = r.a - r.b;
    r.relative = y == 0 ? 0.0 : r.delta / r.b;
    return r;
  };
  return {row("params", a.totals.params, b.totals.params),
          row("macs", a.totals.macs, b.totals.macs),
          row("madd", a.totals.madd, b.totals.madd),
          row("act_bytes", a.totals.act_bytes, b.totals.act_bytes),
          row("rw_bytes", a.totals.rw_bytes, b.totals.rw_bytes),
          row("peak_bytes", a.peak_activation_bytes, b.peak_activation_bytes)};
}

ParamDiagnostic param_diagnostic(const ModelGraph& graph) {
  const ModelConfig& c = graph.config();
  ParamDiagnostic d;
  d.variant = c.variant;
  d.params = static_cast<uint64_t>(graph.trainable_scalar_count());
  if (c.variant == Variant::kS) {
    d.reference = 9.67e6;
    d.band_low = 8.0e6;
    d.band_high = 11.5e6;
  } else {
    d.reference = 12.63e6;
    d.band_low = 10.5e6;
    d.band_high = 15.0e6;
  }
  const double p = static_cast<double>(d.params);
  d.deviation_pct = 100.0 * (p - d.reference) / d.reference;
  d.in_band = p >= d.band_low && p <= d.band_high;
  std::ostringstream os;
  os << "block widths read as block inputs (stem " << c.stem_channels << "), last-block bottleneck "
     << to_string(c.bottleneck) << ", " << c.num_classes << " classes";
  d.reading = os.str();
  return d;
}

std::string format_text(const CostReport& r) {
  std::ostringstream os;
  char buf[512];
  os << "# " << r.model << " @ " << r.input_size << "x" << r.input_size << ", batch " << r.batch << "\n";
  os << "# units: G = 1e9, M = 1e6, MB = 2^20 bytes; macs = multiply-accumulates (Flops), madd = 2*macs + "
        "elementwise ops\n";
  std::snprintf(buf, sizeof buf, "%-36s %-8s %-16s %12s %14s %14s %12s %12s\n", "name", "kind", "out_shape", "params",
                "macs", "madd", "act_bytes", "rw_bytes");
  os << buf;
  for (const CostRow& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-36s %-8s %-16s %12llu %14llu %14llu %12llu %12llu\n", row.name.c_str(),
                  to_string(row.kind), shape_cell(row.out_shape).c_str(),
                  static_cast<unsigned long long>(row.cost.params), static_cast<unsigned long long>(row.cost.macs),
                  static_cast<unsigned long long>(row.cost.madd), static_cast<unsigned long long>(row.cost.act_bytes),
                  static_cast<unsigned long long>(row.cost.rw_bytes));
    os << buf;
  }
  const CostTotals& t = r.totals;
  std::snprintf(buf, sizeof buf,
                "total: params %.2fM | Flops(macs) %.3fG | MAdd %.3fG | Memory(peak) %.2fMB | activations %.2fMB | "
                "MemR+W %.2fMB\n",
                static_cast<double>(t.params) / kMega, static_cast<double>(t.macs) / kGiga,
                static_cast<double>(t.madd) / kGiga, static_cast<double>(r.peak_activation_bytes) / kMiB,
                static_cast<double>(t.act_bytes) / kMiB, static_cast<double>(t.rw_bytes) / kMiB);
  os << buf;
  return os.str();
}

std::string format_csv(const CostReport& r) {
  std::ostringstream os;
  os << kCostCsvHeader << "\n";
  for (const CostRow& row : r.rows) {
    os << row.name << ',' << to_string(row.kind) << ',' << shape_cell(row.out_shape) << ',' << row.cost.params << ','
       << row.cost.macs << ',' << row.cost.madd << ',' << row.cost.act_bytes << ',' << row.cost.rw_bytes << "\n";
  }
  return os.str();
}

std::string format_compare(const std::string& name_a, const std::string& name_b, const std::vector<DeltaRow>& rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %16s %16s %16s %10s\n", "column", name_a.c_str(), name_b.c_str(), "delta",
                "rel");
  os << buf;
  for (const DeltaRow& d : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %16.0f %16.0f %+16.0f %+9.2f%%\n", d.column.c_str(), d.a, d.b, d.delta,
                  100.0 * d.relative);
    os << buf;
  }
  return os.str();
}

std::string format_diagnostic(const ParamDiagnostic& d) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s params %.3fM vs reference %.2fM (%+.1f%%), band [%.1fM, %.1fM]: %s\n  reading: %s\n",
                to_string(d.variant), static_cast<double>(d.params) / kMega, d.reference / kMega, d.deviation_pct,
                d.band_low / kMega, d.band_high / kMega, d.in_band ? "inside" : "OUTSIDE", d.reading.c_str());
  return buf;
}

}  // namespace triplenet
