#ifndef RMTEDGE_H
#define RMTEDGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum RmtStatus {
  RMT_STATUS_OK = 0,
  RMT_STATUS_NULL_POINTER = 1,
  RMT_STATUS_INVALID_ARGUMENT = 2,
  RMT_STATUS_INVALID_SPECTRUM = 3,
  RMT_STATUS_NUMERICAL = 4,
  RMT_STATUS_BUFFER_TOO_SMALL = 5,
  RMT_STATUS_PANIC = 6,
} RmtStatus;

/**
 * Opaque Pearcey kernel with fixed tau.
 */
typedef struct RmtPearcey RmtPearcey;

/**
 * Opaque population spectrum.
 */
typedef struct RmtSpectrum RmtSpectrum;

/**
 * Cusp point and its scaling constants.
 */
typedef struct RmtCusp {
  double a;
  double c;
  double g3;
  double sigma;
  double cube_root_coefficient;
} RmtCusp;

/**
 * Gap probability with its self-convergence estimate.
 */
typedef struct RmtGap {
  double value;
  double error_estimate;
  size_t order;
} RmtGap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to
 * `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t rmt_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rmt_version(void);

/**
 * Builds a spectrum from `len` atoms.
 *
 * # Safety
 * `lambdas` and `weights` must point to `len` doubles; `out` must be writable.
 */
enum RmtStatus rmt_spectrum_new(double gamma,
                                const double *lambdas,
                                const double *weights,
                                size_t len,
                                struct RmtSpectrum **out);

/**
 * Parses a spectrum from its JSON description.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum RmtStatus rmt_spectrum_from_json(const char *json, struct RmtSpectrum **out);

/**
 * Releases a spectrum; null is ignored.
 *
 * # Safety
 * `spec` must be null or a handle from this library not yet freed.
 */
void rmt_spectrum_free(struct RmtSpectrum *spec);

/**
 * Limiting density at x > 0.
 *
 * # Safety
 * `spec` must be a live handle and `out` writable.
 */
enum RmtStatus rmt_density(const struct RmtSpectrum *spec, double x, double *out);

/**
 * Stieltjes transform at z = re + i im with im > 0.
 *
 * # Safety
 * `spec` must be a live handle; `out_re` and `out_im` writable.
 */
enum RmtStatus rmt_stieltjes(const struct RmtSpectrum *spec,
                             double re,
                             double im,
                             double *out_re,
                             double *out_im);

/**
 * Writes the support intervals into `lo[i], hi[i]` for i < capacity and their number into
 * `count`. Returns BufferTooSmall (with `count` set) when capacity is insufficient.
 *
 * # Safety
 * `lo` and `hi` must hold `capacity` doubles; `count` must be writable.
 */
enum RmtStatus rmt_support(const struct RmtSpectrum *spec,
                           double *lo,
                           double *hi,
                           size_t capacity,
                           size_t *count);

/**
 * First cusp of the spectrum; `found` is set to 0 when there is none.
 *
 * # Safety
 * `spec` must be a live handle; `out` and `found` writable.
 */
enum RmtStatus rmt_cusp(const struct RmtSpectrum *spec, struct RmtCusp *out, int32_t *found);

/**
 * Creates a Pearcey kernel with parameter tau.
 *
 * # Safety
 * `out` must be writable.
 */
enum RmtStatus rmt_pearcey_new(double tau, struct RmtPearcey **out);

/**
 * # Safety
 * `k` must be a live handle; `out` writable.
 */
enum RmtStatus rmt_pearcey_eval(const struct RmtPearcey *k, double x, double y, double *out);

/**
 * Releases a Pearcey kernel; null is ignored.
 *
 * # Safety
 * `k` must be null or a handle from this library not yet freed.
 */
void rmt_pearcey_free(struct RmtPearcey *k);

/**
 * Bessel kernel K_alpha(x, y) for x, y > 0.
 *
 * # Safety
 * `out` must be writable.
 */
enum RmtStatus rmt_bessel_kernel(int32_t alpha, double x, double y, double *out);

/**
 * Hard-edge gap probability F_alpha(s).
 *
 * # Safety
 * `out` must be writable.
 */
enum RmtStatus rmt_f_alpha(int32_t alpha, double s, size_t order, struct RmtGap *out);

/**
 * s F_alpha'(s).
 *
 * # Safety
 * `out` must be writable.
 */
enum RmtStatus rmt_s_df_ds(int32_t alpha, double s, size_t order, double *out);

/**
 * F_alpha(s) corrected at order 1/N.
 *
 * # Safety
 * `out` must be writable.
 */
enum RmtStatus rmt_hard_edge_prediction(int32_t alpha,
                                        double s,
                                        size_t big_n,
                                        double sigma_n,
                                        double zeta_n,
                                        size_t order,
                                        double *out);

/**
 * Pearcey gap probability on [s, t].
 *
 * # Safety
 * `out` must be writable.
 */
enum RmtStatus rmt_pearcey_gap(double tau, double s, double t, size_t order, struct RmtGap *out);

/**
 * Eigenvalues of one sampled matrix (1/N) X diag(lambdas) X^*, ascending, into `out`
 * which must hold `big_n` doubles.
 *
 * # Safety
 * `lambdas` must point to `n` doubles and `out` to `big_n` writable doubles.
 */
enum RmtStatus rmt_sample_eigenvalues(const double *lambdas,
                                      size_t n,
                                      size_t big_n,
                                      uint64_t seed,
                                      uint64_t replica,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMTEDGE_H */
