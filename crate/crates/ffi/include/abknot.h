#ifndef ABKNOT_H
#define ABKNOT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AbkStatus {
  ABK_STATUS_OK = 0,
  ABK_STATUS_NULL_POINTER = 1,
  ABK_STATUS_INVALID_ARGUMENT = 2,
  ABK_STATUS_NUMERICAL = 3,
  ABK_STATUS_PANIC = 4,
} AbkStatus;

/**
 * Opaque knot handle with its curve moments.
 */
typedef struct AbkKnot AbkKnot;

/**
 * Incoming and outgoing wave vectors and the excluded radius.
 */
typedef struct AbkKinematics {
  double k_i[3];
  double k_n[3];
  double lambda0;
} AbkKinematics;

/**
 * Complex values as `[re, im]`.
 */
typedef struct AbkAmplitude {
  double v1[2];
  double v2[2];
  double v3[2];
  double v4[2];
  double total[2];
} AbkAmplitude;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse `torus:P,Q`, `unknot-xy`, `unknot-xz`, `unknot-yz` or `file:PATH`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AbkStatus abk_knot_parse(const char *spec, struct AbkKnot **out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum AbkStatus abk_knot_torus(uint32_t p, uint32_t q, struct AbkKnot **out);

/**
 * Closed polyline from `n` points stored as `x0 y0 z0 x1 y1 z1 ...`.
 *
 * # Safety
 * `xyz` must point to `3 * n` doubles and `out` must be valid.
 */
enum AbkStatus abk_knot_from_points(const double *xyz, size_t n, struct AbkKnot **out);

/**
 * # Safety
 * `knot` must come from this library and not be freed twice. Null is ignored.
 */
void abk_knot_free(struct AbkKnot *knot);

/**
 * The quadrupole scalars `K^1, K^2, K^3`.
 *
 * # Safety
 * `knot` must be a live handle and `out` must hold three doubles.
 */
enum AbkStatus abk_knot_quadrupole(const struct AbkKnot *knot, double *out);

/**
 * Dipole moment, zero for closed knots up to quadrature error.
 *
 * # Safety
 * `knot` must be a live handle and `out` must hold three doubles.
 */
enum AbkStatus abk_knot_dipole(const struct AbkKnot *knot, double *out);

/**
 * Born matrix element split into its four parts.
 *
 * # Safety
 * All pointers must be valid; `knot` must be a live handle.
 */
enum AbkStatus abk_born_amplitude(const struct AbkKnot *knot,
                                  const struct AbkKinematics *kin,
                                  double coupling,
                                  struct AbkAmplitude *out);

/**
 * Largest relative gap between the torus amplitude and its unknot triad.
 *
 * # Safety
 * `kins` must point to `n` records and `out` must be valid.
 */
enum AbkStatus abk_factorization_residual(uint32_t p,
                                          uint32_t q,
                                          const struct AbkKinematics *kins,
                                          size_t n,
                                          double coupling,
                                          double *out);

/**
 * Message for the last failure on this thread, or null.
 *
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *abk_last_error_message(void);

const char *abk_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ABKNOT_H */
