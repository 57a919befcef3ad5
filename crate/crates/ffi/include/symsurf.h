#ifndef SYMSURF_H
#define SYMSURF_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SymsurfStatus {
  SYMSURF_STATUS_OK = 0,
  SYMSURF_STATUS_NULL_POINTER = 1,
  SYMSURF_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Shapes or dimensions of the inputs disagree.
   */
  SYMSURF_STATUS_DIMENSION_MISMATCH = 3,
  SYMSURF_STATUS_DEGENERATE_FORM = 4,
  /**
   * The map is not an immersion or not a positively oriented symplectic surface.
   */
  SYMSURF_STATUS_NOT_SYMPLECTIC = 5,
  SYMSURF_STATUS_AREA_MISMATCH = 6,
  SYMSURF_STATUS_MESH_FOLDING = 7,
  /**
   * Closedness, mean-zero or positivity preconditions failed.
   */
  SYMSURF_STATUS_NUMERICAL = 8,
  SYMSURF_STATUS_IO = 9,
  SYMSURF_STATUS_PARSE = 10,
  /**
   * A Rust panic was caught at the boundary.
   */
  SYMSURF_STATUS_INTERNAL = 11,
} SymsurfStatus;

/**
 * Classification of `α_v`.
 */
typedef enum SymsurfVerdict {
  SYMSURF_VERDICT_EXACT = 0,
  SYMSURF_VERDICT_CLOSED_NOT_EXACT = 1,
  SYMSURF_VERDICT_NOT_CLOSED = 2,
} SymsurfVerdict;

/**
 * Embedded torus on a grid, together with its ambient model.
 */
typedef struct SymsurfEmbedding SymsurfEmbedding;

/**
 * Ambient model `(T^{2n}, ω)`.
 */
typedef struct SymsurfModel SymsurfModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call into this library on the
 * same thread.
 */
const char *symsurf_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *symsurf_version(void);

/**
 * Standard model on `T^{2n}` with `η = 0`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SymsurfStatus symsurf_model_standard(size_t half_dim, struct SymsurfModel **out);

/**
 * Model from JSON `{"n": …, "omega": "standard" | [[…]], "eta": [...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum SymsurfStatus symsurf_model_from_json(const char *json, struct SymsurfModel **out);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards. Null is ignored.
 */
void symsurf_model_free(struct SymsurfModel *model);

/**
 * Ambient dimension `2n`, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t symsurf_model_dim(const struct SymsurfModel *model);

/**
 * Sheared family `f_a(x, y) = (x + (a/2π) sin 2πx, y, 0, …)`; `a = 0` gives
 * the flat embedding.
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum SymsurfStatus symsurf_embedding_sheared(const struct SymsurfModel *model,
                                             size_t nx,
                                             size_t ny,
                                             double a,
                                             struct SymsurfEmbedding **out);

/**
 * Embedding from lift samples (`nx·ny·2n` entries) and an integer winding
 * matrix (`2n·2` entries, row per ambient component).
 *
 * # Safety
 * `lift` and `winding` must point to arrays of the stated lengths.
 */
enum SymsurfStatus symsurf_embedding_from_lift(const struct SymsurfModel *model,
                                               size_t nx,
                                               size_t ny,
                                               const double *lift,
                                               size_t lift_len,
                                               const int64_t *winding,
                                               struct SymsurfEmbedding **out);

/**
 * Loads an embedding file (JSON header plus binary payload).
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum SymsurfStatus symsurf_embedding_load(const struct SymsurfModel *model,
                                          const char *path,
                                          struct SymsurfEmbedding **out);

/**
 * # Safety
 * `f` must be a live handle and `path` NUL-terminated.
 */
enum SymsurfStatus symsurf_embedding_save(const struct SymsurfEmbedding *f, const char *path);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards. Null is ignored.
 */
void symsurf_embedding_free(struct SymsurfEmbedding *f);

/**
 * Grid sizes and ambient dimension. Any output pointer may be null.
 *
 * # Safety
 * Non-null pointers must be writable.
 */
enum SymsurfStatus symsurf_embedding_shape(const struct SymsurfEmbedding *f,
                                           size_t *nx,
                                           size_t *ny,
                                           size_t *dim);

/**
 * Writes the pullback density `f*ω / dx∧dy` (`nx·ny` entries).
 *
 * # Safety
 * `out` must have room for `len` values.
 */
enum SymsurfStatus symsurf_embedding_pullback(const struct SymsurfEmbedding *f,
                                              double *out,
                                              size_t len);

/**
 * `ω^D(v1, v2) = ∫ ω(v1, v2) σ`. A null `sigma_density` means `σ = dx∧dy`.
 *
 * # Safety
 * `v1`, `v2` must hold `len = nx·ny·2n` values; `sigma_density`, when
 * non-null, `nx·ny` values.
 */
enum SymsurfStatus symsurf_omega_d(const struct SymsurfEmbedding *f,
                                   const double *v1,
                                   const double *v2,
                                   size_t len,
                                   const double *sigma_density,
                                   double *out);

/**
 * `ω_S(v1, v2)`, the pairing induced on the space of symplectic surfaces.
 *
 * # Safety
 * As for [`symsurf_omega_d`].
 */
enum SymsurfStatus symsurf_omega_s(const struct SymsurfEmbedding *f,
                                   const double *v1,
                                   const double *v2,
                                   size_t len,
                                   double *out);

/**
 * Classifies `α_v = ω(v, df·)` as exact, closed or neither. `periods`, when
 * non-null, receives the two periods.
 *
 * # Safety
 * `v` must hold `len` values; `periods` must have room for 2 values or be null.
 */
enum SymsurfStatus symsurf_classify(const struct SymsurfEmbedding *f,
                                    const double *v,
                                    size_t len,
                                    double closed_tol,
                                    double exact_tol,
                                    enum SymsurfVerdict *verdict,
                                    double *periods);

/**
 * Splits `v` into its tangential and ω-orthogonal parts.
 *
 * # Safety
 * `v`, `tangential` and `orthogonal` must each hold `len` values.
 */
enum SymsurfStatus symsurf_split(const struct SymsurfEmbedding *f,
                                 const double *v,
                                 size_t len,
                                 double *tangential,
                                 double *orthogonal);

/**
 * Reparametrises `f` so that it pulls `ω` back to `σ` (unit when
 * `sigma_density` is null). On success `out` receives a new embedding and
 * `residual` the achieved `‖(f∘φ)*ω − σ‖∞`. `converged` is set to 1 when the
 * residual is within `tol`.
 *
 * # Safety
 * Pointers as documented; `sigma_density` holds `nx·ny` values when non-null.
 */
enum SymsurfStatus symsurf_moser(const struct SymsurfEmbedding *f,
                                 const double *sigma_density,
                                 size_t steps,
                                 double tol,
                                 struct SymsurfEmbedding **out,
                                 double *residual,
                                 int32_t *converged);

/**
 * Runs a scenario given as JSON text. Relative file references resolve
 * against `base_dir` (current directory when null). On success `report`
 * receives the JSON report, to be released with [`symsurf_string_free`], and
 * `pass` is set to 1 when every gating suite passed.
 *
 * # Safety
 * `json` (and `base_dir` when non-null) must be NUL-terminated strings.
 */
enum SymsurfStatus symsurf_run_scenario_json(const char *json,
                                             const char *base_dir,
                                             char **report,
                                             int32_t *pass);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void symsurf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMSURF_H */
