/* Generated by cbindgen. Do not edit. */

#ifndef DISTBOUND_H
#define DISTBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum DbStatus {
  DB_STATUS_OK = 0,
  DB_STATUS_NULL_POINTER = 1,
  DB_STATUS_INVALID_INPUT = 2,
  /**
   * A precondition of the requested bound does not hold.
   */
  DB_STATUS_DOMAIN_ERROR = 3,
  DB_STATUS_BUDGET_EXCEEDED = 4,
  DB_STATUS_INFEASIBLE = 5,
  DB_STATUS_PANIC = 6,
} DbStatus;

/**
 * An upper bound curve `(R, δ)`.
 */
typedef struct DbCurve DbCurve;

/**
 * A validated symbol distance matrix.
 */
typedef struct DbDistance DbDistance;

/**
 * Solver settings; obtain defaults from [`db_solver_options_default`].
 */
typedef struct DbSolverOptions {
  uint32_t starts;
  uint64_t seed;
  uint32_t max_iter;
  double gap_tol;
} DbSolverOptions;

/**
 * Outcome of the squared-Euclidean classification. Each flag is 1, 0, or
 * -1 when the check was not evaluated.
 */
typedef struct DbEmbeddingFlags {
  int32_t divisible;
  int32_t negative_type;
  int32_t concave_form;
  int32_t embeddable;
} DbEmbeddingFlags;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *db_last_error(void);

struct DbSolverOptions db_solver_options_default(void);

/**
 * Builds a distance from a built-in name (`hamming:4`, `pentagon`, ...), a
 * JSON file path, or an inline JSON document.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum DbStatus db_distance_new(const char *spec, struct DbDistance **out);

/**
 * Builds a distance from a row-major `k×k` array; `+inf` entries are allowed.
 *
 * # Safety
 * `entries` must point to `k*k` doubles and `out` must be valid.
 */
enum DbStatus db_distance_from_matrix(const double *entries, size_t k, struct DbDistance **out);

/**
 * # Safety
 * `d` must come from a `db_distance_*` constructor and not be used afterwards.
 */
void db_distance_free(struct DbDistance *d);

/**
 * Alphabet size, or 0 for a null handle.
 *
 * # Safety
 * `d` must be a live handle or null.
 */
size_t db_distance_size(const struct DbDistance *d);

/**
 * # Safety
 * `d` must be a live handle and `out` valid.
 */
enum DbStatus db_distance_get(const struct DbDistance *d, size_t x, size_t y, double *out);

/**
 * `ϑ(ρ)` when `p` is null, otherwise `ϑ(ρ, P)` with `p` of length K.
 * Pass `rho = +inf` for the zero-pattern variant; `opts` may be null.
 *
 * # Safety
 * `d` must be live, `p` null or of length K, and `out` valid.
 */
enum DbStatus db_theta(const struct DbDistance *d,
                       double rho,
                       const double *p,
                       const struct DbSolverOptions *opts,
                       double *out);

/**
 * # Safety
 * `d` must be live and `out` valid.
 */
enum DbStatus db_classify(const struct DbDistance *d, struct DbEmbeddingFlags *out);

/**
 * Chernoff distance between two distributions of length `len`.
 * `argmin_s` may be null.
 *
 * # Safety
 * `q1` and `q2` must point to `len` doubles; `out` must be valid.
 */
enum DbStatus db_chernoff(const double *q1,
                          const double *q2,
                          size_t len,
                          double *out,
                          double *argmin_s);

/**
 * Largest minimum distance of an `m`-word code of length `n`, searched
 * exhaustively.
 *
 * # Safety
 * `d` must be live and `out` valid.
 */
enum DbStatus db_optimal_min_distance(const struct DbDistance *d, size_t n, size_t m, double *out);

/**
 * Best-of upper bound curve at `n_rates` rates. `p` (length K) restricts to
 * constant-composition codes and may be null; `opts` may be null.
 *
 * # Safety
 * `d` must be live, `rates` must hold `n_rates` doubles, and `out` be valid.
 */
enum DbStatus db_curve_best(const struct DbDistance *d,
                            const double *rates,
                            size_t n_rates,
                            const double *p,
                            const struct DbSolverOptions *opts,
                            struct DbCurve **out);

/**
 * # Safety
 * `c` must be live or null.
 */
size_t db_curve_len(const struct DbCurve *c);

/**
 * Rate and bound of point `i`, in increasing rate order.
 *
 * # Safety
 * `c` must be live; `r` and `delta` valid.
 */
enum DbStatus db_curve_point(const struct DbCurve *c, size_t i, double *r, double *delta);

/**
 * CSV text `R,delta,method,params_json`; release with [`db_string_free`].
 *
 * # Safety
 * `c` must be live and `out` valid.
 */
enum DbStatus db_curve_to_csv(const struct DbCurve *c, char **out);

/**
 * # Safety
 * `c` must come from [`db_curve_best`] and not be used afterwards.
 */
void db_curve_free(struct DbCurve *c);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void db_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISTBOUND_H */
