#ifndef SKEWSPEC_H
#define SKEWSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SkewspecForm {
  // `V(n) = f(y + n x + n (n-1) alpha)`.
  SKEWSPEC_FORM_SKEW = 0,
  // `V(n) = f(y + alpha n^2)`.
  SKEWSPEC_FORM_SQUARE = 1,
} SkewspecForm;

typedef enum SkewspecStatus {
  SKEWSPEC_STATUS_OK = 0,
  SKEWSPEC_STATUS_NULL_POINTER = 1,
  SKEWSPEC_STATUS_VALIDATION = 2,
  SKEWSPEC_STATUS_NUMERIC = 3,
  SKEWSPEC_STATUS_BUFFER_TOO_SMALL = 4,
  SKEWSPEC_STATUS_PANIC = 5,
} SkewspecStatus;

// Opaque model handle.
typedef struct SkewspecModel SkewspecModel;

// Opaque handle for a finite restriction together with its spectrum.
typedef struct SkewspecWindow SkewspecWindow;

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *skewspec_last_error(void);

// Library version as a static NUL-terminated string.
const char *skewspec_version(void);

// `amplitude * cos(2 pi t)` sampled along the skew-shift orbit of `(x, y)`
// with `alpha = sqrt 2`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SkewspecStatus skewspec_model_cosine_skew(double amplitude,
                                               double h,
                                               double x,
                                               double y,
                                               struct SkewspecModel **out);

// The density-table model `2 cos(2 pi sqrt(2) n^2)` with `h = 1`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SkewspecStatus skewspec_model_sqrt2(struct SkewspecModel **out);

// Model from a sampling-function JSON document; `alpha` must lie in `[0, 1)`.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a valid pointer.
enum SkewspecStatus skewspec_model_from_json(const char *json,
                                             double alpha,
                                             double h,
                                             enum SkewspecForm form,
                                             double x,
                                             double y,
                                             struct SkewspecModel **out);

// # Safety
// `model` must be null or a handle from this library not yet freed.
void skewspec_model_free(struct SkewspecModel *model);

// `V(n)` for the model.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum SkewspecStatus skewspec_model_potential(const struct SkewspecModel *model,
                                             int64_t n,
                                             double *out);

// Restriction of the model to `[a, b]`; its spectrum is computed once here.
//
// # Safety
// `model` must be a live handle and `out` a valid pointer.
enum SkewspecStatus skewspec_window_new(const struct SkewspecModel *model,
                                        int64_t a,
                                        int64_t b,
                                        struct SkewspecWindow **out);

// # Safety
// `window` must be null or a handle from this library not yet freed.
void skewspec_window_free(struct SkewspecWindow *window);

// Number of sites, or 0 for a null handle.
//
// # Safety
// `window` must be null or a live handle.
uintptr_t skewspec_window_len(const struct SkewspecWindow *window);

// Number of eigenvalues strictly below `e`.
//
// # Safety
// `window` must be a live handle and `out` a valid pointer.
enum SkewspecStatus skewspec_window_sturm_count(const struct SkewspecWindow *window,
                                                double e,
                                                uintptr_t *out);

// Copies the ascending eigenvalues into `buf`. `len_out` always receives the
// window length; a short buffer gives `BufferTooSmall` and writes nothing.
//
// # Safety
// `buf` must point to `cap` writable doubles (or be null when `cap == 0`).
enum SkewspecStatus skewspec_window_eigenvalues(const struct SkewspecWindow *window,
                                                double *buf,
                                                uintptr_t cap,
                                                uintptr_t *len_out);

// Eigenvalue nearest `e0` and its 0-based index in ascending order.
//
// # Safety
// `window` must be a live handle; output pointers must be valid.
enum SkewspecStatus skewspec_window_nearest_eigenvalue(const struct SkewspecWindow *window,
                                                       double e0,
                                                       double *lambda_out,
                                                       uintptr_t *index_out);

// Minimal width of `count` consecutive eigenvalues (6 for the density test).
//
// # Safety
// `window` must be a live handle and `out` a valid pointer.
enum SkewspecStatus skewspec_window_delta(const struct SkewspecWindow *window,
                                          uintptr_t count,
                                          double *out);

// Green's function entry `G(e)(k, l)` for absolute sites `k`, `l`.
//
// # Safety
// `window` must be a live handle and `out` a valid pointer.
enum SkewspecStatus skewspec_window_greens_entry(const struct SkewspecWindow *window,
                                                 double e,
                                                 int64_t k,
                                                 int64_t l,
                                                 double *out);

#endif  /* SKEWSPEC_H */
