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

/* C interface to the TripleNet library.
 *
 * Every fallible call returns a tpn_status. On failure the message is
 * available from tpn_last_error() on the calling thread until the next call.
 * Strings handed out through char** parameters are owned by the caller and
 * released with tpn_string_free().
 */
#ifndef TRIPLENET_TRIPLENET_H_
#define TRIPLENET_TRIPLENET_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TRIPLENET_BUILDING_LIBRARY)
#define TPN_API __declspec(dllexport)
#else
#define TPN_API __declspec(dllimport)
#endif
#else
#define TPN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tpn_status {
  TPN_OK = 0,
  TPN_ERR_INVALID_ARGUMENT = 1,
  TPN_ERR_IO = 2,
  TPN_ERR_RUNTIME = 3
} tpn_status;

typedef enum tpn_variant { TPN_VARIANT_S = 0, TPN_VARIANT_B = 1 } tpn_variant;

/* Width of the middle conv in the last block's residual units. */
typedef enum tpn_bottleneck { TPN_BOTTLENECK_HALF = 0, TPN_BOTTLENECK_GROWTH = 1 } tpn_bottleneck;

typedef enum tpn_pool { TPN_POOL_AVERAGE = 0, TPN_POOL_MAX = 1 } tpn_pool;

typedef enum tpn_format { TPN_FORMAT_TEXT = 0, TPN_FORMAT_CSV = 1 } tpn_format;

typedef enum tpn_split { TPN_SPLIT_TRAIN = 0, TPN_SPLIT_TEST = 1 } tpn_split;

typedef struct tpn_model tpn_model;
typedef struct tpn_dataset tpn_dataset;

TPN_API const char* tpn_version(void);
TPN_API const char* tpn_last_error(void);
TPN_API void tpn_string_free(char* s);

/* ---- models ---- */

typedef struct tpn_model_options {
  tpn_variant variant;
  int num_classes;
  int input_size; /* square side, multiple of 32 */
  tpn_bottleneck bottleneck;
  tpn_pool transition_pool;
} tpn_model_options;

TPN_API void tpn_model_options_init(tpn_model_options* options, tpn_variant variant);

TPN_API tpn_status tpn_model_create(const tpn_model_options* options, uint64_t seed, tpn_model** out);
TPN_API void tpn_model_destroy(tpn_model* model);

/* Architecture table derived from the built graph (no execution). */
TPN_API tpn_status tpn_model_summary(const tpn_model* model, char** out);

/* Spatial side after the first stem conv, each block, and the global pool.
 * Writes up to `capacity` entries and stores the full count in *count. */
TPN_API tpn_status tpn_model_stage_sizes(const tpn_model* model, int64_t* sizes, size_t capacity, size_t* count);

TPN_API tpn_status tpn_model_final_width(const tpn_model* model, int64_t* width);
TPN_API tpn_status tpn_model_param_count(const tpn_model* model, uint64_t* count);
TPN_API tpn_status tpn_model_num_classes(const tpn_model* model, int* num_classes);

/* Weights plus a "<path>.stats" sidecar holding the normalization stats. */
TPN_API tpn_status tpn_model_save(const tpn_model* model, const char* path);
TPN_API tpn_status tpn_model_load(tpn_model* model, const char* path);

/* Eval-mode logits for `batch` images of 3 x S x S floats. `logits` must
 * hold batch * num_classes values. */
TPN_API tpn_status tpn_model_predict(const tpn_model* model, const float* images, int64_t batch, float* logits,
                                     size_t logits_len);

/* ---- cost analysis ---- */

typedef struct tpn_cost_totals {
  uint64_t params;
  uint64_t macs;
  uint64_t madd;
  uint64_t act_bytes;
  uint64_t rw_bytes;
  uint64_t peak_bytes;
} tpn_cost_totals;

TPN_API tpn_status tpn_analyze(const tpn_model* model, int batch, tpn_format format, char** out);
TPN_API tpn_status tpn_analyze_totals(const tpn_model* model, int batch, tpn_cost_totals* out);
/* Column-wise totals of a minus b. */
TPN_API tpn_status tpn_compare(const tpn_model* a, const tpn_model* b, char** out);
/* Parameter count against the reference figure; *in_band is 1 inside the
 * acceptance band. Either output may be NULL. */
TPN_API tpn_status tpn_param_diagnostic(const tpn_model* model, char** out, int* in_band);

/* ---- benchmark ---- */

typedef struct tpn_bench_result {
  int images;
  int warmup;
  double total_seconds;
  double mean_ms;
  double stddev_ms;
} tpn_bench_result;

TPN_API tpn_status tpn_bench(const tpn_model* model, int images, int warmup, uint64_t seed, tpn_bench_result* out);

/* ---- data ---- */

/* name is "cifar10" or "svhn"; dir holds the record files. */
TPN_API tpn_status tpn_dataset_load(const char* name, const char* dir, tpn_split split, tpn_dataset** out);
/* A single record file of any whole number of records. */
TPN_API tpn_status tpn_dataset_load_file(const char* path, tpn_dataset** out);
TPN_API void tpn_dataset_destroy(tpn_dataset* dataset);
TPN_API size_t tpn_dataset_size(const tpn_dataset* dataset);
/* First n examples as a new dataset. */
TPN_API tpn_status tpn_dataset_head(const tpn_dataset* dataset, size_t n, tpn_dataset** out);

/* ---- training ---- */

typedef struct tpn_train_options {
  double lr0;
  int batch;
  int epochs;
  uint64_t seed;
  int shuffle;
  const char* log_path;        /* NULL to skip */
  const char* checkpoint_path; /* NULL to skip */
} tpn_train_options;

/* Defaults for "cifar10" (200 epochs) or "svhn" (60 epochs). */
TPN_API tpn_status tpn_train_options_init(tpn_train_options* options, const char* dataset);

typedef struct tpn_epoch_metrics {
  int epoch;
  double lr;
  double train_loss;
  double test_error; /* percent, -1 without a test set */
  int steps;
} tpn_epoch_metrics;

typedef void (*tpn_epoch_callback)(const tpn_epoch_metrics* metrics, void* user);

/* Normalization stats are computed from `train_set` and kept with the model.
 * test_set may be NULL. */
TPN_API tpn_status tpn_train(tpn_model* model, const tpn_dataset* train_set, const tpn_dataset* test_set,
                             const tpn_train_options* options, tpn_epoch_callback callback, void* user);

/* Top-1 error in percent. */
TPN_API tpn_status tpn_evaluate(const tpn_model* model, const tpn_dataset* dataset, double* error_pct);

/* ---- gradient self-check ---- */

/* Finite-difference check of every differentiable primitive. `inject_fault`
 * perturbs the conv weight gradient as a negative control. */
TPN_API tpn_status tpn_gradcheck(uint64_t seed, int inject_fault, char** report, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif /* TRIPLENET_TRIPLENET_H_ */
