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

#include "triplenet/triplenet.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "triplenet/bench.hpp"
#include "triplenet/checkpoint.hpp"
#include "triplenet/cost.hpp"
#include "triplenet/data.hpp"
#include "triplenet/error.hpp"
#include "triplenet/executor.hpp"
#include "triplenet/gradcheck.hpp"
#include "triplenet/graph.hpp"
#include "triplenet/train.hpp"

struct tpn_model {
  triplenet::ModelGraph graph;
  triplenet::ChannelStats stats;
};

struct tpn_dataset {
  triplenet::LabeledImageSet set;
};

namespace {

thread_local std::string g_last_error;

tpn_status fail(tpn_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

template <typename Fn>
tpn_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return TPN_OK;
  } catch (const triplenet::InvalidArgument& e) {
    return fail(TPN_ERR_INVALID_ARGUMENT, e.what());
  } catch (const triplenet::IoError& e) {
    return fail(TPN_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(TPN_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(TPN_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(TPN_ERR_RUNTIME, "unknown error");
  }
}

void require(const void* p, const char* what) {
  if (!p) throw triplenet::InvalidArgument(std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string stats_path(const std::string& weights) { return weights + ".stats"; }

std::string summary_text(const triplenet::ModelGraph& g) {
  const auto& c = g.config();
  std::ostringstream os;
  os << "# " << triplenet::to_string(c.variant) << " @ " << c.input_size << "x" << c.input_size << ", "
     << c.num_classes << " classes\n";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%-12s %-22s %-12s %-9s %s\n", "stage", "layer", "output", "channels",
                "composition");
  os << buf;
  for (const auto& row : triplenet::architecture_table(g)) {
    const std::string size = std::to_string(row.spatial) + "x" + std::to_string(row.spatial);
    std::snprintf(buf, sizeof buf, "%-12s %-22s %-12s %-9lld %s\n", row.stage.c_str(), row.layer.c_str(),
                  size.c_str(), static_cast<long long>(row.channels), row.composition.c_str());
    os << buf;
  }
  return os.str();
}

}  // namespace

extern "C" {

const char* tpn_version(void) { return "1.0.0"; }

const char* tpn_last_error(void) { return g_last_error.c_str(); }

void tpn_string_free(char* s) { std::free(s); }

void tpn_model_options_init(tpn_model_options* options, tpn_variant variant) {
  if (!options) return;
  options->variant = variant;
  options->num_classes = 10;
  options->input_size = 32;
  options->bottleneck = TPN_BOTTLENECK_HALF;
  options->transition_pool = TPN_POOL_AVERAGE;
}

tpn_status tpn_model_create(const tpn_model_options* options, uint64_t seed, tpn_model** out) {
  return guarded([&] {
    require(options, "options");
    require(out, "out");
    *out = nullptr;
    if (options->variant != TPN_VARIANT_S && options->variant != TPN_VARIANT_B) {
      throw triplenet::InvalidArgument("unknown model variant");
    }
    auto config = triplenet::ModelConfig::for_variant(
        options->variant == TPN_VARIANT_S ? triplenet::Variant::kS : triplenet::Variant::kB, options->num_classes,
        options->input_size);
    config.bottleneck = options->bottleneck == TPN_BOTTLENECK_GROWTH ? triplenet::BottleneckWidth::kGrowthRate
                                                                      : triplenet::BottleneckWidth::kHalf;
    config.transition_pool =
        options->transition_pool == TPN_POOL_MAX ? triplenet::PoolKind::kMax : triplenet::PoolKind::kAverage;
    auto model = std::make_unique<tpn_model>();
    model->graph = triplenet::build(config, seed);
    *out = model.release();
  });
}

void tpn_model_destroy(tpn_model* model) { delete model; }

tpn_status tpn_model_summary(const tpn_model* model, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    *out = dup_string(summary_text(model->graph));
  });
}

tpn_status tpn_model_stage_sizes(const tpn_model* model, int64_t* sizes, size_t capacity, size_t* count) {
  return guarded([&] {
    require(model, "model");
    const auto v = triplenet::stage_spatial_sizes(model->graph);
    if (count) *count = v.size();
    if (sizes) {
      for (size_t i = 0; i < v.size() && i < capacity; ++i) sizes[i] = v[i];
    }
  });
}

tpn_status tpn_model_final_width(const tpn_model* model, int64_t* width) {
  return guarded([&] {
    require(model, "model");
    require(width, "width");
    const auto& g = model->graph;
    *width = g.node(g.output_node()).in_channels;
  });
}

tpn_status tpn_model_param_count(const tpn_model* model, uint64_t* count) {
  return guarded([&] {
    require(model, "model");
    require(count, "count");
    *count = static_cast<uint64_t>(model->graph.trainable_scalar_count());
  });
}

tpn_status tpn_model_num_classes(const tpn_model* model, int* num_classes) {
  return guarded([&] {
    require(model, "model");
    require(num_classes, "num_classes");
    *num_classes = model->graph.config().num_classes;
  });
}

tpn_status tpn_model_save(const tpn_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    triplenet::save_checkpoint(model->graph, path);
    triplenet::save_channel_stats(stats_path(path), model->stats);
  });
}

tpn_status tpn_model_load(tpn_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    triplenet::ModelGraph staged = model->graph;
    triplenet::load_checkpoint(staged, path);
    triplenet::ChannelStats stats;
    if (std::filesystem::exists(stats_path(path))) stats = triplenet::load_channel_stats(stats_path(path));
    model->graph = std::move(staged);
    model->stats = stats;
  });
}

tpn_status tpn_model_predict(const tpn_model* model, const float* images, int64_t batch, float* logits,
                             size_t logits_len) {
  return guarded([&] {
    require(model, "model");
    require(images, "images");
    require(logits, "logits");
    if (batch < 1) throw triplenet::InvalidArgument("batch must be >= 1");
    const auto& c = model->graph.config();
    const int64_t side = c.input_size;
    if (logits_len < static_cast<size_t>(batch * c.num_classes)) {
      throw triplenet::InvalidArgument("logits buffer holds " + std::to_string(logits_len) + " values, need " +
                                       std::to_string(batch * c.num_classes));
    }
    triplenet::Tensor x({batch, 3, side, side});
    std::memcpy(x.ptr(), images, x.numel() * sizeof(float));
    const triplenet::Tensor y = triplenet::predict(model->graph, x);
    std::memcpy(logits, y.ptr(), y.numel() * sizeof(float));
  });
}

tpn_status tpn_analyze(const tpn_model* model, int batch, tpn_format format, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto report = triplenet::analyze(model->graph, batch);
    *out = dup_string(format == TPN_FORMAT_CSV ? triplenet::format_csv(report) : triplenet::format_text(report));
  });
}

tpn_status tpn_analyze_totals(const tpn_model* model, int batch, tpn_cost_totals* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto report = triplenet::analyze(model->graph, batch);
    out->params = report.totals.params;
    out->macs = report.totals.macs;
    out->madd = report.totals.madd;
    out->act_bytes = report.totals.act_bytes;
    out->rw_bytes = report.totals.rw_bytes;
    out->peak_bytes = report.peak_activation_bytes;
  });
}

tpn_status tpn_compare(const tpn_model* a, const tpn_model* b, char** out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    const auto ra = triplenet::analyze(a->graph);
    const auto rb = triplenet::analyze(b->graph);
    *out = dup_string(triplenet::format_compare(ra.model, rb.model, triplenet::compare(ra, rb)));
  });
}

tpn_status tpn_param_diagnostic(const tpn_model* model, char** out, int* in_band) {
  return guarded([&] {
    require(model, "model");
    const auto d = triplenet::param_diagnostic(model->graph);
    if (in_band) *in_band = d.in_band ? 1 : 0;
    if (out) *out = dup_string(triplenet::format_diagnostic(d));
  });
}

tpn_status tpn_bench(const tpn_model* model, int images, int warmup, uint64_t seed, tpn_bench_result* out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const auto r = triplenet::benchmark(model->graph, images, warmup, seed);
    out->images = r.images;
    out->warmup = r.warmup;
    out->total_seconds = r.total_seconds;
    out->mean_ms = r.mean_ms;
    out->stddev_ms = r.stddev_ms;
  });
}

tpn_status tpn_dataset_load(const char* name, const char* dir, tpn_split split, tpn_dataset** out) {
  return guarded([&] {
    require(name, "name");
    require(dir, "dir");
    require(out, "out");
    *out = nullptr;
    const std::string n = name;
    triplenet::DatasetSplits splits;
    if (n == "cifar10") {
      splits = triplenet::load_cifar10(dir);
    } else if (n == "svhn") {
      splits = triplenet::load_svhn(dir);
    } else {
      throw triplenet::InvalidArgument("unknown dataset '" + n + "' (expected cifar10 or svhn)");
    }
    auto ds = std::make_unique<tpn_dataset>();
    ds->set = std::move(split == TPN_SPLIT_TEST ? splits.test : splits.train);
    *out = ds.release();
  });
}

tpn_status tpn_dataset_load_file(const char* path, tpn_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    auto ds = std::make_unique<tpn_dataset>();
    ds->set = triplenet::read_record_file(path, std::filesystem::path(path).stem().string(), triplenet::Split::kTrain);
    *out = ds.release();
  });
}

void tpn_dataset_destroy(tpn_dataset* dataset) { delete dataset; }

size_t tpn_dataset_size(const tpn_dataset* dataset) { return dataset ? dataset->set.size() : 0; }

tpn_status tpn_dataset_head(const tpn_dataset* dataset, size_t n, tpn_dataset** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    auto ds = std::make_unique<tpn_dataset>();
    ds->set = dataset->set.head(n);
    *out = ds.release();
  });
}

tpn_status tpn_train_options_init(tpn_train_options* options, const char* dataset) {
  return guarded([&] {
    require(options, "options");
    const auto c = triplenet::TrainConfig::for_dataset(dataset ? dataset : "cifar10");
    options->lr0 = c.lr0;
    options->batch = static_cast<int>(c.batch);
    options->epochs = c.epochs;
    options->seed = c.seed;
    options->shuffle = c.shuffle ? 1 : 0;
    options->log_path = nullptr;
    options->checkpoint_path = nullptr;
  });
}

tpn_status tpn_train(tpn_model* model, const tpn_dataset* train_set, const tpn_dataset* test_set,
                     const tpn_train_options* options, tpn_epoch_callback callback, void* user) {
  return guarded([&] {
    require(model, "model");
    require(train_set, "train_set");
    require(options, "options");
    if (options->batch < 1) throw triplenet::InvalidArgument("batch must be >= 1");
    triplenet::TrainConfig c;
    c.lr0 = options->lr0;
    c.batch = static_cast<size_t>(options->batch);
    c.epochs = options->epochs;
    c.seed = options->seed;
    c.shuffle = options->shuffle != 0;
    c.stats = triplenet::compute_channel_stats(train_set->set);
    if (options->log_path) c.log_path = options->log_path;
    c.validate();
    model->stats = c.stats;
    triplenet::EpochCallback cb;
    if (callback) {
      cb = [callback, user](const triplenet::EpochMetrics& m) {
        const tpn_epoch_metrics cm{m.epoch, m.lr, m.train_loss, m.test_error, m.steps};
        callback(&cm, user);
      };
    }
    triplenet::train(model->graph, train_set->set, test_set ? &test_set->set : nullptr, c, cb);
    if (options->checkpoint_path) {
      triplenet::save_checkpoint(model->graph, options->checkpoint_path);
      triplenet::save_channel_stats(stats_path(options->checkpoint_path), model->stats);
    }
  });
}

tpn_status tpn_evaluate(const tpn_model* model, const tpn_dataset* dataset, double* error_pct) {
  return guarded([&] {
    require(model, "model");
    require(dataset, "dataset");
    require(error_pct, "error_pct");
    *error_pct = triplenet::evaluate(model->graph, dataset->set, model->stats);
  });
}

tpn_status tpn_gradcheck(uint64_t seed, int inject_fault, char** report, int* all_passed) {
  return guarded([&] {
    triplenet::GradcheckOptions o;
    o.seed = seed;
    o.corrupt_conv_backward = inject_fault != 0;
    const auto r = triplenet::run_gradcheck(o);
    if (all_passed) *all_passed = r.all_passed() ? 1 : 0;
    if (report) *report = dup_string(r.format());
  });
}

}  // extern "C"
