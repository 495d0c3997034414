/* C interface for the offlang offensive-language classifier. */

#ifndef OFFLANG_H
#define OFFLANG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes for all fallible FFI calls.
typedef enum OfflangStatus {
  // Success.
  OFFLANG_STATUS_OK = 0,
  // A required pointer argument was null.
  OFFLANG_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  OFFLANG_STATUS_INVALID_UTF8 = 2,
  // The model file could not be read or parsed.
  OFFLANG_STATUS_LOAD_FAILED = 3,
  // Prediction failed (see `offlang_last_error`).
  OFFLANG_STATUS_PREDICT_FAILED = 4,
  // The caller-provided buffer is too small.
  OFFLANG_STATUS_BUFFER_TOO_SMALL = 5,
  // This model family does not define class probabilities.
  OFFLANG_STATUS_NO_PROBABILITIES = 6,
  // The class index is out of range.
  OFFLANG_STATUS_INDEX_OUT_OF_RANGE = 7,
} OfflangStatus;

// Opaque classifier handle; create with [`offlang_model_load`], destroy with
// [`offlang_model_free`].
typedef struct OfflangModel OfflangModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on the calling thread. The
// pointer stays valid until the next failing call on the same thread.
const char *offlang_last_error(void);

// Library version as a static NUL-terminated string.
const char *offlang_version(void);

// Load a model file written by `offlang train`.
//
// On success writes a handle to `out_model` and returns `Ok`; the caller
// owns the handle and must release it with [`offlang_model_free`].
//
// # Safety
// `path` must be a NUL-terminated string and `out_model` a valid pointer.
enum OfflangStatus offlang_model_load(const char *path, struct OfflangModel **out_model);

// Release a handle returned by [`offlang_model_load`]. A null pointer is a
// no-op.
//
// # Safety
// `model` must be a pointer previously returned by [`offlang_model_load`]
// that has not yet been freed.
void offlang_model_free(struct OfflangModel *model);

// Number of classes the model distinguishes.
//
// # Safety
// `model` must be a live handle from [`offlang_model_load`].
size_t offlang_model_num_classes(const struct OfflangModel *model);

// Name of class `index` (NUL-terminated, owned by the handle, valid until
// the handle is freed). Returns null when `index` is out of range.
//
// # Safety
// `model` must be a live handle from [`offlang_model_load`].
const char *offlang_model_class_name(const struct OfflangModel *model, size_t index);

// Classify one tweet. The predicted label is written NUL-terminated into
// `out_label` (`label_capacity` bytes; 8 is always enough for the built-in
// tasks).
//
// # Safety
// `model` must be a live handle, `text` a NUL-terminated string, and
// `out_label` writable for `label_capacity` bytes.
enum OfflangStatus offlang_predict(const struct OfflangModel *model,
                                   const char *text,
                                   char *out_label,
                                   size_t label_capacity);

// Classify one tweet and also write per-class probabilities (indexed like
// [`offlang_model_class_name`]) into `out_probs`. Fails with
// `NoProbabilities` for model families without a probability reading
// (the hinge-loss classifier).
//
// # Safety
// As [`offlang_predict`]; additionally `out_probs` must be writable for
// `probs_capacity` doubles.
enum OfflangStatus offlang_predict_proba(const struct OfflangModel *model,
                                         const char *text,
                                         char *out_label,
                                         size_t label_capacity,
                                         double *out_probs,
                                         size_t probs_capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OFFLANG_H */
