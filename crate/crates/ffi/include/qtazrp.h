#ifndef QTAZRP_H
#define QTAZRP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes.
 */
typedef enum QtzStatus {
  QTZ_STATUS_OK = 0,
  QTZ_STATUS_NULL_POINTER = 1,
  QTZ_STATUS_DOMAIN = 2,
  QTZ_STATUS_POLE = 3,
  QTZ_STATUS_RESOURCE = 4,
  QTZ_STATUS_CONTOUR = 5,
  QTZ_STATUS_NUMERICAL_POLE = 6,
  QTZ_STATUS_CONSISTENCY = 7,
  QTZ_STATUS_PARSE = 8,
  QTZ_STATUS_PANIC = 9,
} QtzStatus;

/*
 Exact hitting probability as a rational function of `q`.
 */
typedef struct QtzRational QtzRational;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next failing call on the same thread.
 */
const char *qtz_last_error(void);

/*
 Exact probability that the embedded chain from `x` visits `y`.

 # Safety
 `x` and `y` must point to `n` integers and `out` must be writable.
 */
enum QtzStatus qtz_hitting_symbolic(const int64_t *x,
                                    const int64_t *y,
                                    size_t n,
                                    struct QtzRational **out);

/*
 Value of a rational function at `q`.

 # Safety
 `h` must be a live handle and `out` writable.
 */
enum QtzStatus qtz_rational_eval(const struct QtzRational *h, double q, double *out);

/*
 Canonical text `(c0 + c1*q + ...)/(d0 + ...)`; release with
 [`qtz_string_free`]. Null on failure.

 # Safety
 `h` must be null or a live handle.
 */
char *qtz_rational_to_string(const struct QtzRational *h);

/*
 Whether two handles hold the same canonical rational function.

 # Safety
 Both pointers must be null or live handles.
 */
bool qtz_rational_equal(const struct QtzRational *a, const struct QtzRational *b);

/*
 # Safety
 `h` must be null or a handle not yet freed.
 */
void qtz_rational_free(struct QtzRational *h);

/*
 # Safety
 `s` must be null or a string returned by this library and not yet freed.
 */
void qtz_string_free(char *s);

/*
 Exact `P_x(X(t) <= y)` from the forward equations.

 # Safety
 `x` and `y` must point to `n` integers and `out` must be writable.
 */
enum QtzStatus qtz_cdf_exact(const int64_t *x,
                             const int64_t *y,
                             size_t n,
                             double q,
                             double t,
                             double *out);

/*
 Small-contour q-moment with exponents `m[0] >= m[1] >= ...`. `nodes = 0`
 picks the node count automatically; `est_error` may be null.

 # Safety
 `m` must point to `len` integers; `out` must be writable and
 `est_error` null or writable.
 */
enum QtzStatus qtz_qmoment_contour(const int64_t *m,
                                   size_t len,
                                   double q,
                                   double t,
                                   size_t nodes,
                                   double *out,
                                   double *est_error);

/*
 Monte Carlo estimate of `P_x(X(t) <= y)` with its standard error.

 # Safety
 `x` and `y` must point to `n` integers; `mean` and `stderr` must be
 writable.
 */
enum QtzStatus qtz_cdf_mc(const int64_t *x,
                          const int64_t *y,
                          size_t n,
                          double q,
                          double t,
                          uint64_t samples,
                          uint64_t seed,
                          double *mean,
                          double *stderr);

/*
 Library version as a static string.
 */
const char *qtz_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QTAZRP_H */
