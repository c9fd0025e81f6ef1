#ifndef DQGNN_H
#define DQGNN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every call.
typedef enum DqgnnStatus {
  DQGNN_STATUS_OK = 0,
  // A required pointer argument was null.
  DQGNN_STATUS_NULL_POINTER = 1,
  // An argument was out of range or not valid UTF-8.
  DQGNN_STATUS_INVALID_ARGUMENT = 2,
  // Dataset or checkpoint missing, malformed or incompatible.
  DQGNN_STATUS_DATA_ERROR = 3,
  // Training or evaluation failed.
  DQGNN_STATUS_INTERNAL_ERROR = 4,
  // A Rust panic was caught at the boundary.
  DQGNN_STATUS_PANIC = 5,
} DqgnnStatus;

typedef enum DqgnnEntanglement {
  DQGNN_ENTANGLEMENT_FULL = 0,
  DQGNN_ENTANGLEMENT_RING = 1,
  DQGNN_ENTANGLEMENT_OFF = 2,
} DqgnnEntanglement;

// A parsed graph dataset.
typedef struct DqgnnDataset DqgnnDataset;

// A trained classifier with its encoder and forward settings.
typedef struct DqgnnModel DqgnnModel;

// Training settings; start from `dqgnn_train_options_default`.
typedef struct DqgnnTrainOptions {
  size_t layers;
  size_t capacity;
  enum DqgnnEntanglement entanglement;
  uint64_t seed;
  size_t mapping_budget;
  size_t model_budget;
} DqgnnTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread. Empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *dqgnn_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *dqgnn_version(void);

// Parses `<dir>/<name>_*.txt` into a new dataset handle.
//
// # Safety
// `dir` and `name` must be NUL-terminated strings; `out` must be writable.
enum DqgnnStatus dqgnn_dataset_load(const char *dir, const char *name, struct DqgnnDataset **out);

// # Safety
// `ds` must come from `dqgnn_dataset_load` and not be used afterwards.
// Null is ignored.
void dqgnn_dataset_free(struct DqgnnDataset *ds);

// # Safety
// `ds` must be a live dataset handle; `out` must be writable.
enum DqgnnStatus dqgnn_dataset_len(const struct DqgnnDataset *ds, size_t *out);

// Length of each node feature vector.
//
// # Safety
// `ds` must be a live dataset handle; `out` must be writable.
enum DqgnnStatus dqgnn_dataset_feature_dim(const struct DqgnnDataset *ds, size_t *out);

// Class label (0 or 1) of graph `index`.
//
// # Safety
// `ds` must be a live dataset handle; `out` must be writable.
enum DqgnnStatus dqgnn_dataset_label(const struct DqgnnDataset *ds, size_t index, uint8_t *out);

// Default settings: 3 layers, capacity 8, full entanglement, seed 0,
// budgets 500 (encoder) and 2000 (model).
struct DqgnnTrainOptions dqgnn_train_options_default(void);

// Trains encoder and classifier on every graph of `ds`.
//
// # Safety
// `ds` must be a live dataset handle; `options` must point to valid
// options; `out` must be writable.
enum DqgnnStatus dqgnn_model_train(const struct DqgnnDataset *ds,
                                   const struct DqgnnTrainOptions *options,
                                   struct DqgnnModel **out);

// # Safety
// `model` must be a live model handle; `path` a NUL-terminated string.
enum DqgnnStatus dqgnn_model_save(const struct DqgnnModel *model, const char *path);

// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DqgnnStatus dqgnn_model_load(const char *path, struct DqgnnModel **out);

// # Safety
// `model` must come from `dqgnn_model_train` or `dqgnn_model_load` and not
// be used afterwards. Null is ignored.
void dqgnn_model_free(struct DqgnnModel *model);

// Layer angles plus centroids plus encoder angles.
//
// # Safety
// `model` must be a live model handle; `out` must be writable.
enum DqgnnStatus dqgnn_model_parameter_count(const struct DqgnnModel *model, size_t *out);

// Scalar embedding (sum of node entropies, in bits) of graph `index`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum DqgnnStatus dqgnn_model_embed(const struct DqgnnModel *model,
                                   const struct DqgnnDataset *ds,
                                   size_t index,
                                   double *out);

// Predicted label (0 or 1) of graph `index`.
//
// # Safety
// Handles must be live; `out` must be writable.
enum DqgnnStatus dqgnn_model_classify(const struct DqgnnModel *model,
                                      const struct DqgnnDataset *ds,
                                      size_t index,
                                      uint8_t *out);

// Fraction of graphs in `ds` classified correctly.
//
// # Safety
// Handles must be live; `out` must be writable.
enum DqgnnStatus dqgnn_model_accuracy(const struct DqgnnModel *model,
                                      const struct DqgnnDataset *ds,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DQGNN_H */
