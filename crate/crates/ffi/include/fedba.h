#ifndef FEDBA_H
#define FEDBA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum FedbaStatus {
  FEDBA_STATUS_OK = 0,
  FEDBA_STATUS_NULL_POINTER = 1,
  FEDBA_STATUS_INVALID_UTF8 = 2,
  FEDBA_STATUS_SHAPE = 3,
  FEDBA_STATUS_VALIDATION = 4,
  FEDBA_STATUS_DOMAIN = 5,
  FEDBA_STATUS_FORMAT = 6,
  FEDBA_STATUS_CAPACITY = 7,
  FEDBA_STATUS_NON_FINITE = 8,
  FEDBA_STATUS_CLIENT = 9,
  FEDBA_STATUS_CONFIG = 10,
  FEDBA_STATUS_IO = 11,
  FEDBA_STATUS_OUT_OF_RANGE = 12,
  FEDBA_STATUS_PANIC = 13,
} FedbaStatus;

typedef enum FedbaAlgorithm {
  FEDBA_ALGORITHM_FED_AVG = 0,
  FEDBA_ALGORITHM_FED_BA = 1,
} FedbaAlgorithm;

/**
 * Opaque experiment configuration.
 */
typedef struct FedbaConfig FedbaConfig;

/**
 * Opaque list of round records.
 */
typedef struct FedbaRecords FedbaRecords;

/**
 * One evaluated round, as written to the metrics CSV.
 */
typedef struct FedbaRecord {
  uint64_t round;
  enum FedbaAlgorithm algorithm;
  uint64_t seed;
  double test_accuracy;
  double test_loss;
  double global_train_loss;
  double min_weight;
  double max_weight;
  double weight_entropy;
  double mean_sq_distance;
} FedbaRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *fedba_last_error(void);

/**
 * Creates a configuration holding the default hyperparameters.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum FedbaStatus fedba_config_new(struct FedbaConfig **out);

/**
 * Creates a configuration from a named preset such as `mnist-paper`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum FedbaStatus fedba_config_preset(const char *name, struct FedbaConfig **out);

/**
 * Sets one field by its config-file key.
 *
 * # Safety
 * `cfg` must come from this library; `key` and `value` must be
 * NUL-terminated strings.
 */
enum FedbaStatus fedba_config_set(struct FedbaConfig *cfg, const char *key, const char *value);

/**
 * Applies the `key=value` lines of a config file to `cfg`.
 *
 * # Safety
 * `cfg` must come from this library; `text` must be NUL-terminated.
 */
enum FedbaStatus fedba_config_apply_text(struct FedbaConfig *cfg, const char *text);

/**
 * Checks every field's range.
 *
 * # Safety
 * `cfg` must come from this library.
 */
enum FedbaStatus fedba_config_validate(const struct FedbaConfig *cfg);

/**
 * # Safety
 * `cfg` must come from this library (or be null) and not be used again.
 */
void fedba_config_free(struct FedbaConfig *cfg);

/**
 * Loads the configured dataset and runs the whole experiment.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum FedbaStatus fedba_run_experiment(const struct FedbaConfig *cfg, struct FedbaRecords **out);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `records` must come from this library or be null.
 */
size_t fedba_records_len(const struct FedbaRecords *records);

/**
 * Copies record `index` into `out`.
 *
 * # Safety
 * `records` must come from this library; `out` must be writable.
 */
enum FedbaStatus fedba_records_get(const struct FedbaRecords *records,
                                   size_t index,
                                   struct FedbaRecord *out);

/**
 * Writes the metrics CSV to `path`.
 *
 * # Safety
 * `records` must come from this library; `path` must be NUL-terminated.
 */
enum FedbaStatus fedba_records_write_csv(const struct FedbaRecords *records, const char *path);

/**
 * # Safety
 * `records` must come from this library (or be null) and not be used again.
 */
void fedba_records_free(struct FedbaRecords *records);

/**
 * Bounded distance map: `x` on `[0, 1]`, `atan(x)` above.
 *
 * # Safety
 * `out` must be writable.
 */
enum FedbaStatus fedba_g(double x, double *out);

/**
 * Log-score `ln(max(g(x), g_floor))`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FedbaStatus fedba_distance_transform(double x, double g_floor, double *out);

/**
 * FedBA aggregation weights from squared model distances.
 *
 * Writes `len` weights, in the order of `client_ids`, to `out_weights`.
 *
 * # Safety
 * `client_ids` and `sq_distances` must point to `len` elements and
 * `out_weights` to `len` writable elements.
 */
enum FedbaStatus fedba_fedba_weights(const size_t *client_ids,
                                     const double *sq_distances,
                                     size_t len,
                                     double epsilon,
                                     double g_floor,
                                     double *out_weights);

/**
 * FedAvg weights `n_k / sum(n)`, written in the order of `client_ids`.
 *
 * # Safety
 * `client_ids` and `num_samples` must point to `len` elements and
 * `out_weights` to `len` writable elements.
 */
enum FedbaStatus fedba_fedavg_weights(const size_t *client_ids,
                                      const size_t *num_samples,
                                      size_t len,
                                      double *out_weights);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEDBA_H */
