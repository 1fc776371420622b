#ifndef QFTCONV_H
#define QFTCONV_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_UTF8 = 2,
  QC_STATUS_PARSE_ERROR = 3,
  QC_STATUS_DOMAIN_ERROR = 4,
  QC_STATUS_OUT_OF_RANGE = 5,
  QC_STATUS_PANIC = 6,
} QcStatus;

/*
 Law on the natural numbers with exact rational masses.
 */
typedef struct QcLaw QcLaw;

/*
 Gaussian measure on a periodic lattice, diagonal in momentum space.
 */
typedef struct QcMeasure QcMeasure;

/*
 Rooted tree.
 */
typedef struct QcTree QcTree;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failure on this thread, or null. Valid until the next
 failing call on the same thread.
 */
const char *qc_last_error(void);

/*
 Library version as a static string.
 */
const char *qc_version(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void qc_string_free(char *s);

/*
 Parses the parenthesis encoding, e.g. `"(()())"`.

 # Safety
 `encoding` must be a valid C string and `out` a valid pointer.
 */
enum QcStatus qc_tree_parse(const char *encoding, struct QcTree **out);

/*
 Number of vertices; 0 for a null handle.

 # Safety
 `tree` must be null or a live handle.
 */
size_t qc_tree_size(const struct QcTree *tree);

/*
 # Safety
 `tree` must be null or a handle not freed before.
 */
void qc_tree_free(struct QcTree *tree);

/*
 Renormalized amplitude `R(t)` under the tree-factorial rules, as JSON
 `{"order", "terms"}`. `scale_log` may be null for a symbolic `L`; an
 `order` below zero selects size + 2.

 # Safety
 `tree` must be a live handle, `scale_log` null or a C string, `out` valid.
 */
enum QcStatus qc_tree_renormalize_json(const struct QcTree *tree,
                                       const char *scale_log,
                                       int32_t order,
                                       char **out);

/*
 `Bin(n, p)` with `p` given as `"num/den"` or a decimal.

 # Safety
 `p` must be a C string and `out` valid.
 */
enum QcStatus qc_law_binomial(size_t n, const char *p, struct QcLaw **out);

/*
 Pointwise-interacting law with weights `a^k b^(n−k)`.

 # Safety
 `p`, `a`, `b` must be C strings and `out` valid.
 */
enum QcStatus qc_law_pointwise(size_t n,
                               const char *p,
                               const char *a,
                               const char *b,
                               struct QcLaw **out);

/*
 Largest point carrying mass; 0 for a null handle.

 # Safety
 `law` must be null or a live handle.
 */
size_t qc_law_order(const struct QcLaw *law);

/*
 Mass at `k` as a double.

 # Safety
 `law` must be a live handle and `out` valid.
 */
enum QcStatus qc_law_mass(const struct QcLaw *law, size_t k, double *out);

/*
 Mass at `k` rendered exactly as `"num/den"`.

 # Safety
 `law` must be a live handle and `out` valid.
 */
enum QcStatus qc_law_mass_exact(const struct QcLaw *law, size_t k, char **out);

/*
 # Safety
 `law` must be null or a handle not freed before.
 */
void qc_law_free(struct QcLaw *law);

/*
 Total variation between `Bin(n, λ/n)` and `Poisson(λ)`.

 # Safety
 `out` must be valid.
 */
enum QcStatus qc_poisson_limit_tv(uint64_t n, double lambda, double *out);

/*
 Measure with the sharp-band propagator on `ir² ≤ p² < uv²`; pass
 `INFINITY` for no upper cutoff.

 # Safety
 `out` must be valid.
 */
enum QcStatus qc_measure_sharp(size_t n, double mass, double ir, double uv, struct QcMeasure **out);

/*
 Convolution: covariances add.

 # Safety
 `a`, `b` must be live handles and `out` valid.
 */
enum QcStatus qc_measure_convolve(const struct QcMeasure *a,
                                  const struct QcMeasure *b,
                                  struct QcMeasure **out);

/*
 Number of modes; 0 for a null handle.

 # Safety
 `m` must be null or a live handle.
 */
size_t qc_measure_modes(const struct QcMeasure *m);

/*
 Copies the per-mode covariance into `buf`, which must hold `len` values
 with `len` equal to the number of modes.

 # Safety
 `m` must be a live handle and `buf` valid for `len` writes.
 */
enum QcStatus qc_measure_covariance(const struct QcMeasure *m, double *buf, size_t len);

/*
 # Safety
 `m` must be null or a handle not freed before.
 */
void qc_measure_free(struct QcMeasure *m);

/*
 Runs the command line with `argv[0..argc]` (without the program name).
 The report goes to `*out` (free with [`qc_string_free`]), the process
 exit code to `*exit_code`; diagnostics are available from
 [`qc_last_error`] when the code is nonzero.

 # Safety
 `argv` must hold `argc` C strings; `out` and `exit_code` must be valid.
 */
enum QcStatus qc_cli_run(int argc, const char *const *argv, char **out, int *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QFTCONV_H */
