#ifndef OHSIM_H
#define OHSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OhFluxKind {
  /*
   `u^2 / 2`
   */
  OH_FLUX_KIND_BURGERS = 0,
  /*
   `u^3 / 3`, restricted to `[range_lo, range_hi]`
   */
  OH_FLUX_KIND_CUBIC = 1,
  /*
   `sum_j c_j u^j`, validated on `[range_lo, range_hi]`
   */
  OH_FLUX_KIND_CUSTOM = 2,
} OhFluxKind;

typedef enum OhStatus {
  OH_STATUS_OK = 0,
  OH_STATUS_NULL_POINTER = 1,
  OH_STATUS_INVALID_ARGUMENT = 2,
  OH_STATUS_LENGTH_MISMATCH = 3,
  OH_STATUS_NON_ZERO_MEAN = 4,
  OH_STATUS_NON_FINITE = 5,
  OH_STATUS_BLOW_UP = 6,
  OH_STATUS_GRID_MISMATCH = 7,
  OH_STATUS_INTERNAL = 99,
} OhStatus;

/*
 Opaque periodic grid.
 */
typedef struct OhGrid OhGrid;

/*
 Opaque time integrator.
 */
typedef struct OhSimulation OhSimulation;

/*
 Solver parameters. `dt <= 0` selects the adaptive CFL step.
 */
typedef struct OhSolverParams {
  double gamma;
  double delta;
  double dt;
  double t_end;
  double cfl_safety;
  bool dealias;
  double blowup_threshold;
  size_t record_every;
} OhSolverParams;

typedef struct OhFluxSpec {
  enum OhFluxKind kind;
  /*
   Polynomial coefficients for [`OhFluxKind::Custom`]; may be null otherwise.
   */
  const double *coefficients;
  size_t num_coefficients;
  double range_lo;
  double range_hi;
} OhFluxSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *ohsim_version(void);

/*
 Message of the last failed call on this thread (empty if none). The
 pointer stays valid until the next failing call on the same thread.
 */
const char *ohsim_last_error_message(void);

/*
 Default solver parameters (adaptive step).
 */
struct OhSolverParams ohsim_solver_params_default(void);

/*
 Creates a grid of `num_points` (even, >= 4) points on `[-half_length, half_length)`.

 # Safety
 `out` must be a valid pointer to writable storage for one handle.
 */
enum OhStatus ohsim_grid_new(double half_length, size_t num_points, struct OhGrid **out);

/*
 Releases a grid. Null is ignored.

 # Safety
 `grid` must come from [`ohsim_grid_new`] and not be used afterwards.
 */
void ohsim_grid_free(struct OhGrid *grid);

/*
 Number of points, or 0 for a null handle.

 # Safety
 `grid` must be null or a live handle.
 */
size_t ohsim_grid_len(const struct OhGrid *grid);

/*
 Writes the grid coordinates `x_j = -L + j dx`.

 # Safety
 `grid` must be a live handle and `out` must hold `len` doubles.
 */
enum OhStatus ohsim_grid_points(const struct OhGrid *grid, double *out, size_t len);

/*
 Solves `-delta P'' + P' = u` for zero-mean `P`.

 # Safety
 `grid` must be a live handle; `u` and `p_out` must hold `len` doubles.
 */
enum OhStatus ohsim_solve_p(const struct OhGrid *grid,
                            const double *u,
                            size_t len,
                            double delta,
                            double *p_out);

/*
 Starts a simulation from `u0`. A null `flux` selects Burgers.

 # Safety
 `grid`, `params` and `out` must be valid; `u0` must hold `len` doubles;
 `flux` must be null or valid.
 */
enum OhStatus ohsim_simulation_new(const struct OhGrid *grid,
                                   const double *u0,
                                   size_t len,
                                   const struct OhSolverParams *params,
                                   const struct OhFluxSpec *flux,
                                   struct OhSimulation **out);

/*
 Releases a simulation. Null is ignored.

 # Safety
 `sim` must come from [`ohsim_simulation_new`] and not be used afterwards.
 */
void ohsim_simulation_free(struct OhSimulation *sim);

/*
 One step of size `dt`.

 # Safety
 `sim` must be a live handle.
 */
enum OhStatus ohsim_simulation_step(struct OhSimulation *sim, double dt);

/*
 Steps until time `t`, using the fixed step from the parameters or the
 CFL step, shortening the last step to land on `t`.

 # Safety
 `sim` must be a live handle.
 */
enum OhStatus ohsim_simulation_advance_to(struct OhSimulation *sim, double t);

/*
 Current time, or NaN for a null handle.

 # Safety
 `sim` must be null or a live handle.
 */
double ohsim_simulation_time(const struct OhSimulation *sim);

/*
 Number of steps taken, or 0 for a null handle.

 # Safety
 `sim` must be null or a live handle.
 */
size_t ohsim_simulation_step_index(const struct OhSimulation *sim);

/*
 Copies the current `u` into `out`.

 # Safety
 `sim` must be a live handle and `out` must hold `len` doubles.
 */
enum OhStatus ohsim_simulation_copy_u(const struct OhSimulation *sim, double *out, size_t len);

/*
 Copies the current nonlocal term `P` into `out`.

 # Safety
 `sim` must be a live handle and `out` must hold `len` doubles.
 */
enum OhStatus ohsim_simulation_copy_p(const struct OhSimulation *sim, double *out, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OHSIM_H */
