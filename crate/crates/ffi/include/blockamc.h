/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef BLOCKAMC_H
#define BLOCKAMC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define BAMC_KIND_WISHART 0

#define BAMC_KIND_TOEPLITZ 1

#define BAMC_KIND_UNIFORM 2

#define BAMC_ENGINE_IDEAL 0

#define BAMC_ENGINE_NETWORK 1

// Result of every fallible call.
typedef enum BamcStatus {
  BAMC_STATUS_OK = 0,
  BAMC_STATUS_NULL_POINTER = 1,
  BAMC_STATUS_INVALID_ARGUMENT = 2,
  BAMC_STATUS_CONFIG = 3,
  BAMC_STATUS_DIMENSION = 4,
  BAMC_STATUS_SINGULAR = 5,
  BAMC_STATUS_ARRAY_TOO_LARGE = 6,
  BAMC_STATUS_NUMERICAL = 7,
  BAMC_STATUS_IO = 8,
  BAMC_STATUS_PARSE = 9,
  BAMC_STATUS_PANIC = 10,
} BamcStatus;

// Dense row-major matrix.
typedef struct BamcMatrix BamcMatrix;

// Result of one solve.
typedef struct BamcReport BamcReport;

// Solve settings. Initialize with `bamc_solve_options_default`.
typedef struct BamcSolveOptions {
  // Partitioning stages: 0 original, 1 one-stage, 2 two-stage.
  uint32_t depth;
  // `BAMC_ENGINE_IDEAL` or `BAMC_ENGINE_NETWORK`.
  uint32_t engine;
  // Wire segment resistance, ohms.
  double r_seg;
  // Programming noise relative to `g0`.
  double sigma_rel;
  // Unit conductance, siemens.
  double g0;
  // Programming-noise seed.
  uint64_t seed;
  // Largest physical array; 0 picks the smallest that fits.
  size_t array_max;
  // Top-level split index; 0 picks the default.
  size_t k;
} BamcSolveOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failure on this thread; empty after a
// success. Valid until the next call into this library on the same thread.
const char *bamc_last_error(void);

// Library version as a static NUL-terminated string.
const char *bamc_version(void);

// Fills `opts` with the defaults: one-stage, ideal engine, 1 ohm wires,
// 5% programming noise, G0 = 100 µS, seed 0, automatic array size and split.
//
// # Safety
// `opts` must be null or point to writable memory for one `BamcSolveOptions`.
enum BamcStatus bamc_solve_options_default(struct BamcSolveOptions *opts);

// Copies `rows * cols` row-major values into a new matrix.
//
// # Safety
// `data` must point to `rows * cols` readable doubles; `out` must be
// writable.
enum BamcStatus bamc_matrix_new(size_t rows,
                                size_t cols,
                                const double *data,
                                struct BamcMatrix **out);

// Generates an `n x n` test matrix of the given `BAMC_KIND_*`.
//
// # Safety
// `out` must be writable.
enum BamcStatus bamc_matrix_generate(uint32_t kind,
                                     size_t n,
                                     uint64_t seed,
                                     struct BamcMatrix **out);

// Releases a matrix. Null is ignored.
//
// # Safety
// `m` must be null or a handle from this library not yet freed.
void bamc_matrix_free(struct BamcMatrix *m);

// Row count, or 0 for null.
//
// # Safety
// `m` must be null or a live matrix handle.
size_t bamc_matrix_rows(const struct BamcMatrix *m);

// Column count, or 0 for null.
//
// # Safety
// `m` must be null or a live matrix handle.
size_t bamc_matrix_cols(const struct BamcMatrix *m);

// Copies the row-major entries into `out`, which must hold exactly
// `rows * cols` values.
//
// # Safety
// `m` must be a live matrix handle; `out` must point to `len` writable doubles.
enum BamcStatus bamc_matrix_copy(const struct BamcMatrix *m, double *out, size_t len);

// Fills `out[0..n]` with a seeded right-hand side, entries in [-1, 1].
//
// # Safety
// `out` must point to `n` writable doubles.
enum BamcStatus bamc_rhs_generate(size_t n, uint64_t seed, double *out);

// Direct dense solve of `A x = b` with partial pivoting.
//
// # Safety
// `a` must be a live handle; `b` and `x` must each hold `n` doubles.
enum BamcStatus bamc_direct_solve(const struct BamcMatrix *a, const double *b, size_t n, double *x);

// Solves `A x = b` on simulated analog hardware. `opts` may be null for
// the defaults. When `A` is invertible digitally the report carries the
// relative error against the direct solution.
//
// # Safety
// `a` must be a live handle; `b` must hold `n` doubles; `opts` must be
// null or valid; `out` must be writable.
enum BamcStatus bamc_solve(const struct BamcMatrix *a,
                           const double *b,
                           size_t n,
                           const struct BamcSolveOptions *opts,
                           struct BamcReport **out);

// Releases a report. Null is ignored.
//
// # Safety
// `r` must be null or a handle from this library not yet freed.
void bamc_report_free(struct BamcReport *r);

// Length of the solution vector, or 0 for null.
//
// # Safety
// `r` must be null or a live report handle.
size_t bamc_report_len(const struct BamcReport *r);

// Copies the solution into `out`, which must hold exactly
// `bamc_report_len` values.
//
// # Safety
// `r` must be a live handle; `out` must point to `len` writable doubles.
enum BamcStatus bamc_report_solution(const struct BamcReport *r, double *out, size_t len);

// Relative error stored in the report; NaN when no reference was
// available or `r` is null.
//
// # Safety
// `r` must be null or a live report handle.
double bamc_report_relative_error(const struct BamcReport *r);

// Full report as JSON (solution, intermediates, programmed arrays,
// configuration). Release with `bamc_string_free`.
//
// # Safety
// `r` must be a live handle; `out` must be writable.
enum BamcStatus bamc_report_json(const struct BamcReport *r, char **out);

// `sum |x_ref - x_hat| / sum |x_ref|`.
//
// # Safety
// `x_ref` and `x_hat` must hold `n` doubles; `out` must be writable.
enum BamcStatus bamc_relative_error(const double *x_ref,
                                    const double *x_hat,
                                    size_t n,
                                    double *out);

// Area, power and latency of every solver for an `n x n` system under the
// shipped calibration, as a JSON array. `array_max` 0 means automatic.
// Release with `bamc_string_free`.
//
// # Safety
// `out` must be writable.
enum BamcStatus bamc_cost_json(size_t n, size_t array_max, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not yet freed.
void bamc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BLOCKAMC_H */
