#ifndef SMOOTHING_LAB_H
#define SMOOTHING_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_INVALID_PARAMETER = 2,
  SL_STATUS_ORIGIN_SINGULARITY = 3,
  SL_STATUS_BOUNDARY_MASS = 4,
  SL_STATUS_TOLERANCE_NOT_MET = 5,
  SL_STATUS_INVALID_WEIGHT = 6,
  SL_STATUS_NON_CONVERGENT = 7,
  SL_STATUS_DIMENSION_MISMATCH = 8,
  SL_STATUS_PANIC = 9,
} SlStatus;

/**
 * Opaque wave-packet sum.
 */
typedef struct SlDatum SlDatum;

/**
 * Opaque radial weight.
 */
typedef struct SlWeight SlWeight;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *sl_last_error_message(void);

/**
 * Zero datum in dimension `n` (1 to 3).
 *
 * # Safety
 * `out` must be a valid pointer to writable storage.
 */
enum SlStatus sl_datum_new(size_t dimension, struct SlDatum **out);

/**
 * Appends `A exp(-a|x-c|² + 2πi v·x)` with `A = amplitude_re + i amplitude_im`.
 *
 * # Safety
 * `datum` must come from `sl_datum_new`; `center` and `momentum` must point
 * to `dimension` doubles.
 */
enum SlStatus sl_datum_add_packet(struct SlDatum *datum,
                                  double amplitude_re,
                                  double amplitude_im,
                                  double width,
                                  const double *center,
                                  const double *momentum);

/**
 * # Safety
 * `datum` must come from `sl_datum_new` and not be used afterwards; null is ignored.
 */
void sl_datum_free(struct SlDatum *datum);

/**
 * # Safety
 * `datum` must be a valid handle and `out` writable.
 */
enum SlStatus sl_datum_l2_norm_sq(const struct SlDatum *datum, double *out);

/**
 * `‖f‖²_{Ḣ^s}` for `s ∈ [0, n/2)`.
 *
 * # Safety
 * `datum` must be a valid handle and `out` writable.
 */
enum SlStatus sl_datum_hs_norm_sq(const struct SlDatum *datum, double s, double *out);

/**
 * `u(t, x)` for the free evolution of the datum.
 *
 * # Safety
 * `datum` must be a valid handle, `x` must point to `dimension` doubles and
 * the outputs must be writable.
 */
enum SlStatus sl_evolve_value(const struct SlDatum *datum,
                              double t,
                              const double *x,
                              double *out_re,
                              double *out_im);

/**
 * # Safety
 * `out` must be writable.
 */
enum SlStatus sl_weight_psi_eps(double eps, struct SlWeight **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum SlStatus sl_weight_psi_k(uint32_t k, struct SlWeight **out);

/**
 * # Safety
 * `out` must be writable.
 */
enum SlStatus sl_weight_constant(double value, struct SlWeight **out);

/**
 * New handle for `R ψ(r/R)`; the input handle is left untouched.
 *
 * # Safety
 * `weight` must be a valid handle and `out` writable.
 */
enum SlStatus sl_weight_rescale(const struct SlWeight *weight,
                                double radius,
                                struct SlWeight **out);

/**
 * `[ψ, ψ′, ψ″, ψ‴, ψ⁗]` at `r ≥ 0`.
 *
 * # Safety
 * `weight` must be a valid handle and `out` must point to 5 writable doubles.
 */
enum SlStatus sl_weight_derivatives(const struct SlWeight *weight, double r, double *out);

/**
 * # Safety
 * `weight` must come from an `sl_weight_*` constructor and not be used
 * afterwards; null is ignored.
 */
void sl_weight_free(struct SlWeight *weight);

/**
 * Space-time bulk side of the finite-horizon identity on `[-T, T]`.
 *
 * # Safety
 * Handles must be valid and `out` writable.
 */
enum SlStatus sl_morawetz_lhs(const struct SlDatum *datum,
                              const struct SlWeight *weight,
                              double horizon,
                              double *out);

/**
 * Boundary side `½[flux(T) - flux(-T)]` of the finite-horizon identity.
 *
 * # Safety
 * Handles must be valid and `out` writable.
 */
enum SlStatus sl_boundary_term(const struct SlDatum *datum,
                               const struct SlWeight *weight,
                               double horizon,
                               double *out);

/**
 * `Im ∫ ū ψ′(|x|) ∂_r u dx` at time `t`.
 *
 * # Safety
 * Handles must be valid and `out` writable.
 */
enum SlStatus sl_flux(const struct SlDatum *datum,
                      const struct SlWeight *weight,
                      double t,
                      double *out);

/**
 * `(1/R) ∫_ℝ ∫_{B_R} |∇u|² dx dt`.
 *
 * # Safety
 * `datum` must be valid and `out` writable.
 */
enum SlStatus sl_smoothing_profile(const struct SlDatum *datum, double radius, double *out);

/**
 * `(1/R) ∫_ℝ ∫_{B_R} |∂_r u|² dx dt`.
 *
 * # Safety
 * `datum` must be valid and `out` writable.
 */
enum SlStatus sl_radial_profile(const struct SlDatum *datum, double radius, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMOOTHING_LAB_H */
