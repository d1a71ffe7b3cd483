#ifndef HYPERLOC_H
#define HYPERLOC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code of every fallible call.
typedef enum {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_ARGUMENT = 1,
  HL_STATUS_INVALID_UTF8 = 2,
  HL_STATUS_INVALID_INPUT = 3,
  HL_STATUS_NUMERICAL_FAILURE = 4,
  HL_STATUS_PANIC = 5,
} HlStatus;

// Hyperfunction handle.
typedef struct HlHyperfunction HlHyperfunction;

// Localization problem handle.
typedef struct HlProblem HlProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call on the same thread.
const char *hl_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *hl_version(void);

// Built-in `S²` problem with polarization `ξ = −1`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
HlStatus hl_problem_s2(HlProblem **out);

// Problem parsed from JSON `{rank, polarization, fixed_points}`.
//
// # Safety
// `json` must be NUL-terminated; `out` must be writable.
HlStatus hl_problem_from_json(const char *json, HlProblem **out);

// # Safety
// `problem` must come from this library and not be freed twice; null is ignored.
void hl_problem_free(HlProblem *problem);

// Picken hyperfunction of `problem`.
//
// # Safety
// `problem` must be a live handle; `out` must be writable.
HlStatus hl_picken(const HlProblem *problem, HlHyperfunction **out);

// Fourier transform over the orthant partition of unity, with default
// contour settings.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
HlStatus hl_fourier_transform_orthant(const HlHyperfunction *f, HlHyperfunction **out);

// Dimension of the ambient space.
//
// # Safety
// `f` must be a live handle or null (returns 0).
size_t hl_hyperfunction_dim(const HlHyperfunction *f);

// Boundary value at `x` (length `dim`) extrapolated from `ε = 2^{-k}`,
// `k = eps_first..=eps_last`, over `levels` Richardson levels.
//
// # Safety
// `x` must point to `len` doubles; `re`, `im`, `err` must be writable.
HlStatus hl_hyperfunction_boundary_evaluate(const HlHyperfunction *f,
                                            const double *x,
                                            size_t len,
                                            int32_t eps_first,
                                            int32_t eps_last,
                                            size_t levels,
                                            double *re,
                                            double *im,
                                            double *err);

// JSON serialization of `f`; release with [`hl_string_free`].
//
// # Safety
// `f` must be a live handle; `out` must be writable.
HlStatus hl_hyperfunction_to_json(const HlHyperfunction *f, char **out);

// # Safety
// `f` must come from this library and not be freed twice; null is ignored.
void hl_hyperfunction_free(HlHyperfunction *f);

// Fixed loop of the circle `(n, m)` with modes `k, k2`, orbit angles
// `phi, psi`, verified on `samples` points; JSON with coefficients and
// residuals. Release with [`hl_string_free`].
//
// # Safety
// `out` must be writable.
HlStatus hl_su2_fixed_loop_json(int64_t n,
                                int64_t m,
                                int64_t k,
                                int64_t k2,
                                double phi,
                                double psi,
                                size_t samples,
                                char **out);

// # Safety
// `s` must come from this library and not be freed twice; null is ignored.
void hl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERLOC_H */
