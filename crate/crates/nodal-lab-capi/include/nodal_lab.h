#ifndef NODAL_LAB_H
#define NODAL_LAB_H

/* Generated by cbindgen from the nodal-lab-capi crate; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Boundary condition selector.
typedef enum NodalBc {
  // Solution vanishes on the unit-ball boundary.
  NodalBc_Dirichlet = 0,
  // Normal derivative vanishes on the unit-ball boundary.
  NodalBc_Neumann = 1,
  // Entire-space solution (constant lookups only).
  NodalBc_WholeSpace = 2,
} NodalBc;

// Limit-constant family selector, mirroring the feature kinds.
typedef enum NodalFamily {
  // Scaled critical values `|u(delta_k)|`.
  NodalFamily_CritValue = 0,
  // Scaled critical radii `delta_k`.
  NodalFamily_CritRadius = 1,
  // Scaled zero slopes `|u'(rho_k)|`.
  NodalFamily_ZeroSlope = 2,
  // Scaled zero radii `rho_k`.
  NodalFamily_ZeroRadius = 3,
} NodalFamily;

// Status code returned by every fallible entry point.
typedef enum NodalStatus {
  // Success.
  NodalStatus_Ok = 0,
  // A parameter is outside its documented domain.
  NodalStatus_InvalidParams = 1,
  // A feature or constant index is outside its family's range.
  NodalStatus_IndexOutOfRange = 2,
  // The computation failed numerically (non-convergence, overflow, ...).
  NodalStatus_NumericFailure = 3,
  // A required pointer argument was null.
  NodalStatus_NullPointer = 4,
  // The library panicked; treat the handle as poisoned.
  NodalStatus_Panic = 5,
} NodalStatus;

// Opaque handle to a constructed nodal ball solution.
typedef struct NodalSolutionHandle NodalSolutionHandle;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the message for the most recent error on this thread into
// `buf` (NUL-terminated, truncated to `cap - 1` bytes) and returns the
// full message length in bytes, excluding the NUL. With a null `buf` or
// zero `cap`, only the length is reported.
//
// # Safety
//
// `buf` must be null or point to at least `cap` writable bytes.
size_t nodal_last_error_message(char *buf, size_t cap);

// Constructs the nodal radial solution with `m` nodal regions on the
// unit ball and stores an owned handle in `*out`. Neumann solutions
// need `m >= 2`; `NodalBc_WholeSpace` is rejected here. Free the handle
// with [`nodal_solution_free`].
//
// # Safety
//
// `out` must point to writable storage for one pointer.
enum NodalStatus nodal_solution_create(uint32_t n,
                                       double eps,
                                       size_t m,
                                       enum NodalBc bc,
                                       struct NodalSolutionHandle **out);

// Releases a handle returned by [`nodal_solution_create`]. Null is
// accepted and ignored.
//
// # Safety
//
// `sol` must be null or a handle from [`nodal_solution_create`] that
// has not been freed already.
void nodal_solution_free(struct NodalSolutionHandle *sol);

// Reports the solution's parameters and normalization: dimension,
// nodal regions, subcriticality, sign of `u(0)`, interior scale radius
// `R`, and amplitude `A = R^{2/(p-1)}`. Any output pointer may be null
// to skip that field.
//
// # Safety
//
// `sol` must be a live handle; non-null outputs must be writable.
enum NodalStatus nodal_solution_info(const struct NodalSolutionHandle *sol,
                                     uint32_t *n,
                                     size_t *m,
                                     double *eps,
                                     double *sign,
                                     double *scale_radius,
                                     double *amplitude);

// Evaluates the solution and its radial derivative at `x` in `[0, 1]`.
//
// # Safety
//
// `sol` must be a live handle; `u` and `du` must be writable.
enum NodalStatus nodal_solution_evaluate(const struct NodalSolutionHandle *sol,
                                         double x,
                                         double *u,
                                         double *du);

// Number of interior critical points (equals the region count `m`;
// the innermost is the origin).
//
// # Safety
//
// `sol` must be a live handle; `count` must be writable.
enum NodalStatus nodal_solution_critical_count(const struct NodalSolutionHandle *sol,
                                               size_t *count);

// Number of zeros (Dirichlet: `m`, counting the boundary; Neumann:
// `m - 1`, all interior).
//
// # Safety
//
// `sol` must be a live handle; `count` must be writable.
enum NodalStatus nodal_solution_zero_count(const struct NodalSolutionHandle *sol, size_t *count);

// Looks up critical point `k` (1-based, outermost first): its radius
// `delta_k` and signed value `u(delta_k)`.
//
// # Safety
//
// `sol` must be a live handle; `radius` and `value` must be writable.
enum NodalStatus nodal_solution_critical(const struct NodalSolutionHandle *sol,
                                         size_t k,
                                         double *radius,
                                         double *value);

// Looks up zero `k` (1-based, outermost first): its radius `rho_k` and
// signed slope `u'(rho_k)`.
//
// # Safety
//
// `sol` must be a live handle; `radius` and `slope` must be writable.
enum NodalStatus nodal_solution_zero(const struct NodalSolutionHandle *sol,
                                     size_t k,
                                     double *radius,
                                     double *slope);

// Computes the energy pair: the Dirichlet integral of `|grad u|^2` and
// the `L^{p+1}` power integral (equal for every solution here).
//
// # Safety
//
// `sol` must be a live handle; `grad_sq` and `lp_integral` must be
// writable.
enum NodalStatus nodal_solution_energy(const struct NodalSolutionHandle *sol,
                                       double *grad_sq,
                                       double *lp_integral);

// Computes the relative residual of the variational balance identity;
// values near machine precision confirm the profile solves the
// equation.
//
// # Safety
//
// `sol` must be a live handle; `residual` must be writable.
enum NodalStatus nodal_solution_pohozaev_residual(const struct NodalSolutionHandle *sol,
                                                  double *residual);

// Stores the dimensional constant `kappa_n = (n-2)/4 * Gamma(n/2)^2 /
// Gamma(n)` in `*out`.
//
// # Safety
//
// `out` must be writable.
enum NodalStatus nodal_kappa(uint32_t n, double *out);

// Stores the bubble normalization `gamma_n = (n(n-2))^{(n-2)/4}` in
// `*out`.
//
// # Safety
//
// `out` must be writable.
enum NodalStatus nodal_gamma(uint32_t n, double *out);

// Stores the largest admissible subcriticality `4/(n-2)` in `*out`.
//
// # Safety
//
// `out` must be writable.
enum NodalStatus nodal_eps_max(uint32_t n, double *out);

// Stores the limit constant for feature `k` of `family` under `bc` in
// `*out`: the value the suitably rescaled feature approaches as the
// subcriticality vanishes. `m` is the region count for ball boundary
// conditions and is ignored for `NodalBc_WholeSpace`, where `k` indexes
// features of the entire-space profile directly.
//
// # Safety
//
// `out` must be writable.
enum NodalStatus nodal_limit_constant(uint32_t n,
                                      size_t m,
                                      enum NodalBc bc,
                                      enum NodalFamily family,
                                      size_t k,
                                      double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NODAL_LAB_H */
