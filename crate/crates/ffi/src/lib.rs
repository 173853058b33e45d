//! C ABI for the `ohsim` solver.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns an [`OhStatus`]; on failure a description is
//! kept per thread and can be read with [`ohsim_last_error_message`].
//! Array arguments are `(pointer, length)` pairs and lengths are checked
//! against the grid. Panics never cross the boundary; they surface as
//! [`OhStatus::Internal`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ohsim::evolution::cfl_dt;
use ohsim::{
    burgers_flux, cubic_flux, custom_flux, make_grid, solve_p, DtPolicy, Field, FluxModel,
    GridSpec, OhError, Simulation, SolverConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    LengthMismatch = 3,
    NonZeroMean = 4,
    NonFinite = 5,
    BlowUp = 6,
    GridMismatch = 7,
    Internal = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OhFluxKind {
    /// `u^2 / 2`
    Burgers = 0,
    /// `u^3 / 3`, restricted to `[range_lo, range_hi]`
    Cubic = 1,
    /// `sum_j c_j u^j`, validated on `[range_lo, range_hi]`
    Custom = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OhFluxSpec {
    pub kind: OhFluxKind,
    /// Polynomial coefficients for [`OhFluxKind::Custom`]; may be null otherwise.
    pub coefficients: *const f64,
    pub num_coefficients: usize,
    pub range_lo: f64,
    pub range_hi: f64,
}

/// Solver parameters. `dt <= 0` selects the adaptive CFL step.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OhSolverParams {
    pub gamma: f64,
    pub delta: f64,
    pub dt: f64,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub dealias: bool,
    pub blowup_threshold: f64,
    pub record_every: usize,
}

/// Opaque periodic grid.
pub struct OhGrid {
    inner: GridSpec,
}

/// Opaque time integrator.
pub struct OhSimulation {
    sim: Simulation,
    config: SolverConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn status_of(err: &OhError) -> OhStatus {
    match err {
        OhError::LengthMismatch { .. } => OhStatus::LengthMismatch,
        OhError::NonZeroMean { .. } => OhStatus::NonZeroMean,
        OhError::NonFinite(_) => OhStatus::NonFinite,
        OhError::BlowUp { .. } => OhStatus::BlowUp,
        OhError::GridMismatch => OhStatus::GridMismatch,
        _ => OhStatus::InvalidArgument,
    }
}

fn fail(status: OhStatus, message: &str) -> OhStatus {
    set_error(message);
    status
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), OhStatus>) -> OhStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => OhStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(OhStatus::Internal, "internal panic"),
    }
}

fn check(r: ohsim::Result<()>) -> Result<(), OhStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn lift<T>(r: ohsim::Result<T>) -> Result<T, OhStatus> {
    r.map_err(|e| fail(status_of(&e), &e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), OhStatus> {
    if p.is_null() {
        Err(fail(OhStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn input_slice<'a>(data: *const f64, len: usize, grid: &GridSpec) -> Result<&'a [f64], OhStatus> {
    non_null(data, "input array")?;
    if len != grid.len() {
        return Err(fail(
            OhStatus::LengthMismatch,
            &format!("array has {len} entries, grid has {}", grid.len()),
        ));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn output_slice<'a>(data: *mut f64, len: usize, grid: &GridSpec) -> Result<&'a mut [f64], OhStatus> {
    non_null(data, "output array")?;
    if len != grid.len() {
        return Err(fail(
            OhStatus::LengthMismatch,
            &format!("array has {len} entries, grid has {}", grid.len()),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(data, len))
}

unsafe fn flux_from_spec(spec: *const OhFluxSpec) -> Result<FluxModel, OhStatus> {
    if spec.is_null() {
        return Ok(burgers_flux());
    }
    let s = &*spec;
    match s.kind {
        OhFluxKind::Burgers => Ok(burgers_flux()),
        OhFluxKind::Cubic => Ok(cubic_flux((s.range_lo, s.range_hi))),
        OhFluxKind::Custom => {
            non_null(s.coefficients, "flux coefficients")?;
            let coeffs = std::slice::from_raw_parts(s.coefficients, s.num_coefficients).to_vec();
            lift(custom_flux(coeffs, (s.range_lo, s.range_hi)))
        }
    }
}

fn config_from_params(p: &OhSolverParams) -> SolverConfig {
    SolverConfig {
        gamma: p.gamma,
        delta: p.delta,
        dt: if p.dt > 0.0 {
            DtPolicy::Fixed(p.dt)
        } else {
            DtPolicy::Auto
        },
        t_end: p.t_end,
        cfl_safety: p.cfl_safety,
        dealias: p.dealias,
        blowup_threshold: p.blowup_threshold,
        record_every: p.record_every,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ohsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread (empty if none). The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ohsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Default solver parameters (adaptive step).
#[no_mangle]
pub extern "C" fn ohsim_solver_params_default() -> OhSolverParams {
    let d = SolverConfig::default();
    OhSolverParams {
        gamma: d.gamma,
        delta: d.delta,
        dt: 0.0,
        t_end: d.t_end,
        cfl_safety: d.cfl_safety,
        dealias: d.dealias,
        blowup_threshold: d.blowup_threshold,
        record_every: d.record_every,
    }
}

/// Creates a grid of `num_points` (even, >= 4) points on `[-half_length, half_length)`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ohsim_grid_new(half_length: f64, num_points: usize, out: *mut *mut OhGrid) -> OhStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = lift(make_grid(half_length, num_points))?;
        *out = Box::into_raw(Box::new(OhGrid { inner }));
        Ok(())
    })
}

/// Releases a grid. Null is ignored.
///
/// # Safety
/// `grid` must come from [`ohsim_grid_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ohsim_grid_free(grid: *mut OhGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ohsim_grid_len(grid: *const OhGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.inner.len())
}

/// Writes the grid coordinates `x_j = -L + j dx`.
///
/// # Safety
/// `grid` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ohsim_grid_points(grid: *const OhGrid, out: *mut f64, len: usize) -> OhStatus {
    guard(|| {
        non_null(grid, "grid")?;
        let g = &(*grid).inner;
        let dst = output_slice(out, len, g)?;
        dst.copy_from_slice(&g.points());
        Ok(())
    })
}

/// Solves `-delta P'' + P' = u` for zero-mean `P`.
///
/// # Safety
/// `grid` must be a live handle; `u` and `p_out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ohsim_solve_p(
    grid: *const OhGrid,
    u: *const f64,
    len: usize,
    delta: f64,
    p_out: *mut f64,
) -> OhStatus {
    guard(|| {
        non_null(grid, "grid")?;
        let g = &(*grid).inner;
        let field = lift(Field::new(g, input_slice(u, len, g)?.to_vec()))?;
        let p = lift(solve_p(&field, delta))?;
        output_slice(p_out, len, g)?.copy_from_slice(p.values());
        Ok(())
    })
}

/// Starts a simulation from `u0`. A null `flux` selects Burgers.
///
/// # Safety
/// `grid`, `params` and `out` must be valid; `u0` must hold `len` doubles;
/// `flux` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_new(
    grid: *const OhGrid,
    u0: *const f64,
    len: usize,
    params: *const OhSolverParams,
    flux: *const OhFluxSpec,
    out: *mut *mut OhSimulation,
) -> OhStatus {
    guard(|| {
        non_null(grid, "grid")?;
        non_null(params, "params")?;
        non_null(out, "out")?;
        let g = &(*grid).inner;
        let field = lift(Field::new(g, input_slice(u0, len, g)?.to_vec()))?;
        let config = config_from_params(&*params);
        let flux = flux_from_spec(flux)?;
        let sim = lift(Simulation::new(&field, &config, &flux))?;
        *out = Box::into_raw(Box::new(OhSimulation { sim, config }));
        Ok(())
    })
}

/// Releases a simulation. Null is ignored.
///
/// # Safety
/// `sim` must come from [`ohsim_simulation_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_free(sim: *mut OhSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// One step of size `dt`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_step(sim: *mut OhSimulation, dt: f64) -> OhStatus {
    guard(|| {
        non_null(sim, "simulation")?;
        check((*sim).sim.step(dt))
    })
}

/// Steps until time `t`, using the fixed step from the parameters or the
/// CFL step, shortening the last step to land on `t`.
///
/// # Safety
/// `sim` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_advance_to(sim: *mut OhSimulation, t: f64) -> OhStatus {
    guard(|| {
        non_null(sim, "simulation")?;
        let s = &mut *sim;
        if !t.is_finite() || t < s.sim.time() {
            return Err(fail(
                OhStatus::InvalidArgument,
                &format!("target time {t} is before the current time {}", s.sim.time()),
            ));
        }
        while t - s.sim.time() > 1e-12 * t.abs().max(1.0) {
            let dt = match s.config.dt {
                DtPolicy::Fixed(dt) => dt,
                DtPolicy::Auto => cfl_dt(&s.sim.u(), s.sim.flux(), s.config.cfl_safety),
            };
            let remaining = t - s.sim.time();
            // a tail within round-off of a full step keeps the cached coefficients
            let h = if remaining < dt * (1.0 - 1e-9) { remaining } else { dt };
            check(s.sim.step(h))?;
        }
        Ok(())
    })
}

/// Current time, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_time(sim: *const OhSimulation) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.sim.time())
}

/// Number of steps taken, or 0 for a null handle.
///
/// # Safety
/// `sim` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_step_index(sim: *const OhSimulation) -> usize {
    sim.as_ref().map_or(0, |s| s.sim.step_index())
}

/// Copies the current `u` into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_copy_u(sim: *const OhSimulation, out: *mut f64, len: usize) -> OhStatus {
    guard(|| {
        non_null(sim, "simulation")?;
        let s = &*sim;
        output_slice(out, len, s.sim.grid())?.copy_from_slice(s.sim.u().values());
        Ok(())
    })
}

/// Copies the current nonlocal term `P` into `out`.
///
/// # Safety
/// `sim` must be a live handle and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ohsim_simulation_copy_p(sim: *const OhSimulation, out: *mut f64, len: usize) -> OhStatus {
    guard(|| {
        non_null(sim, "simulation")?;
        let s = &*sim;
        output_slice(out, len, s.sim.grid())?.copy_from_slice(s.sim.p().values());
        Ok(())
    })
}
