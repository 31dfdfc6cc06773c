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

// triplenet: summaries, cost analysis, training, evaluation, latency
// benchmarking and gradient self-checks.
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "triplenet/triplenet.h"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct CliError {
  int code;
  std::string message;
};

void check(tpn_status s, const std::string& context) {
  if (s == TPN_OK) return;
  throw CliError{s == TPN_ERR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime, context + ": " + tpn_last_error()};
}

struct ModelDeleter {
  void operator()(tpn_model* m) const { tpn_model_destroy(m); }
};
struct DatasetDeleter {
  void operator()(tpn_dataset* d) const { tpn_dataset_destroy(d); }
};
struct StringDeleter {
  void operator()(char* s) const { tpn_string_free(s); }
};
using ModelPtr = std::unique_ptr<tpn_model, ModelDeleter>;
using DatasetPtr = std::unique_ptr<tpn_dataset, DatasetDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

struct ModelFlags {
  std::string variant = "s";
  int input = 32;
  int classes = 10;
  std::string bottleneck = "half";
  std::string pool = "avg";
  uint64_t seed = 0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_input = true) {
  cmd->add_option("--model", f.variant, "Model variant")->check(CLI::IsMember({"s", "b"}))->capture_default_str();
  if (with_input) {
    cmd->add_option("--input", f.input, "Input side (multiple of 32)")->capture_default_str();
  }
  cmd->add_option("--classes", f.classes, "Number of classes")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--bottleneck", f.bottleneck, "Last-block residual bottleneck width: half (C/2) or growth (g)")
      ->check(CLI::IsMember({"half", "growth"}))
      ->capture_default_str();
  cmd->add_option("--pool", f.pool, "Transition pooling")->check(CLI::IsMember({"avg", "max"}))->capture_default_str();
}

ModelPtr make_model(const ModelFlags& f, const std::string& variant) {
  if (f.input < 32 || f.input % 32 != 0) {
    throw CliError{kExitUsage, "--input must be a positive multiple of 32, got " + std::to_string(f.input)};
  }
  tpn_model_options o;
  tpn_model_options_init(&o, variant == "b" ? TPN_VARIANT_B : TPN_VARIANT_S);
  o.num_classes = f.classes;
  o.input_size = f.input;
  o.bottleneck = f.bottleneck == "growth" ? TPN_BOTTLENECK_GROWTH : TPN_BOTTLENECK_HALF;
  o.transition_pool = f.pool == "max" ? TPN_POOL_MAX : TPN_POOL_AVERAGE;
  tpn_model* m = nullptr;
  check(tpn_model_create(&o, f.seed, &m), "building model");
  return ModelPtr(m);
}

void print_owned(char* s) {
  StringPtr owned(s);
  std::fputs(owned.get(), stdout);
}

std::string resolve_data_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TRIPLENET_DATA_DIR"); env && *env) return env;
  throw CliError{kExitUsage, "no data directory: pass --data-dir or set TRIPLENET_DATA_DIR"};
}

DatasetPtr load_split(const std::string& dataset, const std::string& dir, tpn_split split) {
  tpn_dataset* d = nullptr;
  check(tpn_dataset_load(dataset.c_str(), dir.c_str(), split, &d), "loading " + dataset + " from " + dir);
  return DatasetPtr(d);
}

DatasetPtr take_head(DatasetPtr set, long long n) {
  if (n < 0 || static_cast<size_t>(n) >= tpn_dataset_size(set.get())) return set;
  tpn_dataset* d = nullptr;
  check(tpn_dataset_head(set.get(), static_cast<size_t>(n), &d), "taking subset");
  return DatasetPtr(d);
}

void print_epoch(const tpn_epoch_metrics* m, void*) {
  if (m->test_error >= 0) {
    std::printf("epoch %d  lr %.3g  train_loss %.6f  test_error %.2f%%\n", m->epoch, m->lr, m->train_loss,
                m->test_error);
  } else {
    std::printf("epoch %d  lr %.3g  train_loss %.6f\n", m->epoch, m->lr, m->train_loss);
  }
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TripleNet reference implementation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tpn_version()));

  ModelFlags summarize_flags;
  auto* summarize = app.add_subcommand("summarize", "Print the architecture table");
  add_model_flags(summarize, summarize_flags);

  ModelFlags analyze_flags;
  std::string format = "text";
  std::string compare_with;
  auto* analyze = app.add_subcommand("analyze", "Static cost report (params, MACs, MAdd, memory)");
  add_model_flags(analyze, analyze_flags);
  analyze->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
  analyze->add_option("--compare", compare_with, "Also print totals relative to this variant")
      ->check(CLI::IsMember({"s", "b"}));

  ModelFlags train_flags;
  std::string train_dataset = "cifar10", train_dir, out_path, log_path;
  int epochs = -1, batch = -1;
  long long subset = -1, test_subset = -1;
  double lr = -1;
  auto* train = app.add_subcommand("train", "Train on CIFAR-10 or SVHN");
  add_model_flags(train, train_flags, false);
  train->add_option("--dataset", train_dataset, "Dataset")->check(CLI::IsMember({"cifar10", "svhn"}))->capture_default_str();
  train->add_option("--data-dir", train_dir, "Record directory (default: $TRIPLENET_DATA_DIR)");
  train->add_option("--epochs", epochs, "Epochs (default 200 for cifar10, 60 for svhn)")->check(CLI::PositiveNumber);
  train->add_option("--batch", batch, "Batch size (default 64)")->check(CLI::PositiveNumber);
  train->add_option("--lr", lr, "Initial learning rate (default 1e-3)")->check(CLI::PositiveNumber);
  train->add_option("--subset", subset, "Train on the first N examples only")->check(CLI::NonNegativeNumber);
  train->add_option("--test-subset", test_subset, "Evaluate on the first N test examples (0 disables)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--seed", train_flags.seed, "Seed for weights and shuffling")->capture_default_str();
  train->add_option("--out", out_path, "Checkpoint written after training");
  train->add_option("--log", log_path, "Per-epoch metrics log");

  ModelFlags eval_flags;
  std::string eval_dataset = "cifar10", eval_dir, eval_weights, eval_split = "test";
  long long eval_subset = -1;
  auto* eval = app.add_subcommand("eval", "Top-1 error of a checkpoint");
  add_model_flags(eval, eval_flags, false);
  eval->add_option("--dataset", eval_dataset, "Dataset")->check(CLI::IsMember({"cifar10", "svhn"}))->capture_default_str();
  eval->add_option("--data-dir", eval_dir, "Record directory (default: $TRIPLENET_DATA_DIR)");
  eval->add_option("--weights", eval_weights, "Checkpoint to evaluate")->required();
  eval->add_option("--split", eval_split, "Split")->check(CLI::IsMember({"train", "test"}))->capture_default_str();
  eval->add_option("--subset", eval_subset, "First N examples only")->check(CLI::NonNegativeNumber);

  ModelFlags bench_flags;
  std::string bench_weights;
  int images = 100, warmup = 10;
  auto* bench = app.add_subcommand("bench", "Single-image inference latency");
  add_model_flags(bench, bench_flags);
  bench->add_option("--weights", bench_weights, "Checkpoint (random weights otherwise)");
  bench->add_option("--images", images, "Timed images")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--warmup", warmup, "Discarded warmup images")->check(CLI::NonNegativeNumber)->capture_default_str();
  bench->add_option("--seed", bench_flags.seed, "Seed for weights and input")->capture_default_str();

  uint64_t grad_seed = 0;
  bool inject_fault = false;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every primitive");
  gradcheck->add_option("--seed", grad_seed, "Seed for the random problems")->capture_default_str();
  gradcheck->add_flag("--inject-fault", inject_fault, "Perturb the conv weight gradient (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (summarize->parsed()) {
      auto m = make_model(summarize_flags, summarize_flags.variant);
      char* text = nullptr;
      check(tpn_model_summary(m.get(), &text), "summarize");
      print_owned(text);
    } else if (analyze->parsed()) {
      auto m = make_model(analyze_flags, analyze_flags.variant);
      char* text = nullptr;
      check(tpn_analyze(m.get(), 1, format == "csv" ? TPN_FORMAT_CSV : TPN_FORMAT_TEXT, &text), "analyze");
      print_owned(text);
      if (format == "text") {
        char* diag = nullptr;
        check(tpn_param_diagnostic(m.get(), &diag, nullptr), "analyze");
        print_owned(diag);
      }
      if (!compare_with.empty()) {
        auto other = make_model(analyze_flags, compare_with);
        char* cmp = nullptr;
        check(tpn_compare(m.get(), other.get(), &cmp), "compare");
        // Keep CSV output parseable: the comparison goes to stderr there.
        StringPtr owned(cmp);
        std::fputs(owned.get(), format == "csv" ? stderr : stdout);
      }
    } else if (train->parsed()) {
      const std::string dir = resolve_data_dir(train_dir);
      tpn_train_options o;
      check(tpn_train_options_init(&o, train_dataset.c_str()), "train");
      if (epochs > 0) o.epochs = epochs;
      if (batch > 0) o.batch = batch;
      if (lr > 0) o.lr0 = lr;
      o.seed = train_flags.seed;
      if (!log_path.empty()) o.log_path = log_path.c_str();
      if (!out_path.empty()) o.checkpoint_path = out_path.c_str();
      auto train_set = take_head(load_split(train_dataset, dir, TPN_SPLIT_TRAIN), subset);
      DatasetPtr test_set;
      if (test_subset != 0) test_set = take_head(load_split(train_dataset, dir, TPN_SPLIT_TEST), test_subset);
      auto m = make_model(train_flags, train_flags.variant);
      std::printf("training %s on %zu %s examples: epochs %d, batch %d, lr %.3g, seed %llu\n",
                  train_flags.variant == "b" ? "TripleNet-B" : "TripleNet-S", tpn_dataset_size(train_set.get()),
                  train_dataset.c_str(), o.epochs, o.batch, o.lr0, static_cast<unsigned long long>(o.seed));
      check(tpn_train(m.get(), train_set.get(), test_set.get(), &o, print_epoch, nullptr), "train");
      if (!out_path.empty()) std::printf("checkpoint: %s\n", out_path.c_str());
    } else if (eval->parsed()) {
      const std::string dir = resolve_data_dir(eval_dir);
      auto m = make_model(eval_flags, eval_flags.variant);
      check(tpn_model_load(m.get(), eval_weights.c_str()), "loading weights");
      auto set = take_head(load_split(eval_dataset, dir, eval_split == "train" ? TPN_SPLIT_TRAIN : TPN_SPLIT_TEST),
                           eval_subset);
      double err = 0;
      check(tpn_evaluate(m.get(), set.get(), &err), "eval");
      std::printf("%s %s: %zu examples, top-1 error %.2f%%\n", eval_dataset.c_str(), eval_split.c_str(),
                  tpn_dataset_size(set.get()), err);
    } else if (bench->parsed()) {
      auto m = make_model(bench_flags, bench_flags.variant);
      if (!bench_weights.empty()) check(tpn_model_load(m.get(), bench_weights.c_str()), "loading weights");
      tpn_bench_result r;
      check(tpn_bench(m.get(), images, warmup, bench_flags.seed, &r), "bench");
      std::printf("%s @ %dx%d: %d images after %d warmup, total %.3f s, per image %.3f ms (sd %.3f ms), "
                  "per 100 images %.3f s\n",
                  bench_flags.variant == "b" ? "TripleNet-B" : "TripleNet-S", bench_flags.input, bench_flags.input,
                  r.images, r.warmup, r.total_seconds, r.mean_ms, r.stddev_ms, r.mean_ms / 10.0);
    } else if (gradcheck->parsed()) {
      char* report = nullptr;
      int ok = 0;
      check(tpn_gradcheck(grad_seed, inject_fault ? 1 : 0, &report, &ok), "gradcheck");
      print_owned(report);
      if (!ok) {
        std::fprintf(stderr, "gradcheck: at least one primitive failed\n");
        return kExitRuntime;
      }
    }
  } catch (const CliError& e) {
    std::fprintf(stderr, "triplenet: %s\n", e.message.c_str());
    return e.code;
  }
  return 0;
}
