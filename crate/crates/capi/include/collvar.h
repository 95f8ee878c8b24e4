/* C interface to the collvar library. Generated by cbindgen; do not edit. */

#ifndef COLLVAR_H
#define COLLVAR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum CollvarStatus {
  CollvarStatus_Ok = 0,
  CollvarStatus_NullPointer = 1,
  CollvarStatus_InvalidArgument = 2,
  CollvarStatus_InvariantViolation = 3,
  CollvarStatus_Infeasible = 4,
  CollvarStatus_ParseError = 5,
} CollvarStatus;

// Opaque handle to a local observable.
typedef struct CollvarObservable CollvarObservable;

// Opaque handle to a pure, density, or ensemble state.
typedef struct CollvarState CollvarState;

// A certified interval around a mixed-state quantifier.
typedef struct CollvarBracket {
  double lower;
  double upper;
  double estimate;
  bool certified_exact;
} CollvarBracket;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or NULL.
// The pointer stays valid until the next failing call on the same thread.
const char *collvar_last_error_message(void);

// Builds an observable from `len` eigenvalues.
//
// # Safety
// `eigenvalues` must point to `len` readable doubles; `out` must be a valid
// writable pointer. On success the caller owns the handle and must release
// it with [`collvar_observable_free`].
enum CollvarStatus collvar_observable_new(const double *eigenvalues,
                                          size_t len,
                                          struct CollvarObservable **out);

// Releases an observable handle; NULL is allowed.
//
// # Safety
// `obs` must be a pointer from [`collvar_observable_new`], not yet freed.
void collvar_observable_free(struct CollvarObservable *obs);

// Builds the GHZ-like superposition of the extremal grid points.
//
// # Safety
// `obs` must be a live observable handle; `out` must be writable. The
// caller owns the returned state handle.
enum CollvarStatus collvar_state_ghz(const struct CollvarObservable *obs,
                                     size_t n,
                                     double phase,
                                     struct CollvarState **out);

// Builds the depolarized GHZ density state on qubits.
//
// # Safety
// `out` must be writable; the caller owns the returned handle.
enum CollvarStatus collvar_state_depolarized_ghz(size_t n, double eps, struct CollvarState **out);

// Builds the GHZ state mixed with its half-flipped partner (even `n`).
//
// # Safety
// `out` must be writable; the caller owns the returned handle.
enum CollvarStatus collvar_state_ghz_mix(size_t n, double eps, struct CollvarState **out);

// Parses a state from the JSON file format.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable. The
// caller owns the returned handle.
enum CollvarStatus collvar_state_from_json(const char *json,
                                           double norm_tol,
                                           struct CollvarState **out);

// Serializes a state to the JSON file format. The returned string must be
// released with [`collvar_string_free`].
//
// # Safety
// `state` must be a live state handle; `out` must be writable.
enum CollvarStatus collvar_state_to_json(const struct CollvarState *state, char **out);

// Releases a state handle; NULL is allowed.
//
// # Safety
// `state` must be a pointer previously returned by a state constructor.
void collvar_state_free(struct CollvarState *state);

// Releases a string returned by this library; NULL is allowed.
//
// # Safety
// `s` must be a pointer previously returned by [`collvar_state_to_json`].
void collvar_string_free(char *s);

// Party count of a state.
//
// # Safety
// `state` must be live; `out` must be writable.
enum CollvarStatus collvar_state_party_count(const struct CollvarState *state, size_t *out);

// Pure-state quantifier with uniform signs; fails on mixed states.
//
// # Safety
// `state` must be live; `out` must be writable.
enum CollvarStatus collvar_f_pure(const struct CollvarState *state, double *out);

// Fisher-ratio extension with the spectrum ceiling; exact.
//
// # Safety
// `state` must be live; `out` must be writable.
enum CollvarStatus collvar_f_qfi_ratio(const struct CollvarState *state,
                                       struct CollvarBracket *out);

// Support-normalized extension; `restarts = 0` uses the default budget.
//
// # Safety
// `state` must be live; `out` must be writable.
enum CollvarStatus collvar_f_support(const struct CollvarState *state,
                                     uint64_t seed,
                                     size_t restarts,
                                     struct CollvarBracket *out);

// Convex-roof extension; `restarts = 0` uses the default budget.
//
// # Safety
// `state` must be live; `out` must be writable.
enum CollvarStatus collvar_f_convex_roof(const struct CollvarState *state,
                                         uint64_t seed,
                                         size_t restarts,
                                         struct CollvarBracket *out);

// Thickness of the state across the canonical orthogonal frame.
// `out_defined` is false when the collective spread vanishes.
//
// # Safety
// `state` must be live; both out-pointers must be writable.
enum CollvarStatus collvar_thickness(const struct CollvarState *state,
                                     double *out_zeta,
                                     bool *out_defined);

// Both k-separability bounds.
//
// # Safety
// Out-pointers must be writable.
enum CollvarStatus collvar_bound_k(size_t n, size_t k, double *out_floor, double *out_linear);

// Thickness ceiling `n²/((1-ζ)+ζn)`.
//
// # Safety
// `out` must be writable.
enum CollvarStatus collvar_bound_thick(size_t n, double zeta, double *out);

// Entanglement-depth lower bound from a certified quantifier lower bound.
// Pass `has_zeta = false` to use the plain bounds.
//
// # Safety
// `out_depth` must be writable.
enum CollvarStatus collvar_certify(double f_lower,
                                   size_t n,
                                   bool has_zeta,
                                   double zeta,
                                   size_t *out_depth);

// Trade-off curve `ζ(k) = (n-k)/(k(n-1))`.
//
// # Safety
// `out` must be writable.
enum CollvarStatus collvar_zeta_of_k(size_t n, double k, double *out);

// Trade-off curve `k(ζ) = n/((1-ζ)+nζ)`.
//
// # Safety
// `out` must be writable.
enum CollvarStatus collvar_k_of_zeta(size_t n, double zeta, double *out);

// Level-set solve for ζ at fixed block size and level.
//
// # Safety
// `out` must be writable.
enum CollvarStatus collvar_zeta_for_f(size_t n, double k, double f, double *out);

// Level-set solve for k at fixed thickness and level.
//
// # Safety
// `out` must be writable.
enum CollvarStatus collvar_k_for_f(size_t n, double zeta, double f, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COLLVAR_H */
