use std::f64::consts::PI;
use std::ffi::CStr;
use std::ptr;

use ohsim_ffi::*;

fn grid(n: usize) -> *mut OhGrid {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ohsim_grid_new(PI, n, &mut g) }, OhStatus::Ok);
    assert!(!g.is_null());
    g
}

fn points(g: *const OhGrid) -> Vec<f64> {
    let n = unsafe { ohsim_grid_len(g) };
    let mut x = vec![0.0; n];
    assert_eq!(unsafe { ohsim_grid_points(g, x.as_mut_ptr(), n) }, OhStatus::Ok);
    x
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ohsim_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn grid_coordinates() {
    let g = grid(8);
    let x = points(g);
    assert_eq!(x.len(), 8);
    assert_eq!(x[0], -PI);
    assert!((x[1] - (-PI + PI / 4.0)).abs() < 1e-15);
    unsafe { ohsim_grid_free(g) };
}

#[test]
fn invalid_grid_reports_message() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ohsim_grid_new(PI, 7, &mut g) }, OhStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(last_error().contains("grid"), "{}", last_error());
}

#[test]
fn solve_p_closed_form() {
    let g = grid(64);
    let u: Vec<f64> = points(g).iter().map(|x| x.sin()).collect();
    let mut p = vec![0.0; 64];
    let st = unsafe { ohsim_solve_p(g, u.as_ptr(), 64, 1.0, p.as_mut_ptr()) };
    assert_eq!(st, OhStatus::Ok);
    for (x, p) in points(g).iter().zip(&p) {
        assert!((p - (x.sin() - x.cos()) / 2.0).abs() < 1e-12);
    }
    unsafe { ohsim_grid_free(g) };
}

#[test]
fn argument_errors() {
    let g = grid(16);
    let u = [1.0; 16];
    let mut p = vec![0.0; 16];
    unsafe {
        assert_eq!(ohsim_solve_p(g, u.as_ptr(), 16, 0.1, p.as_mut_ptr()), OhStatus::NonZeroMean);
        assert_eq!(ohsim_solve_p(g, u.as_ptr(), 15, 0.1, p.as_mut_ptr()), OhStatus::LengthMismatch);
        assert_eq!(ohsim_solve_p(g, ptr::null(), 16, 0.1, p.as_mut_ptr()), OhStatus::NullPointer);
        assert_eq!(ohsim_solve_p(ptr::null(), u.as_ptr(), 16, 0.1, p.as_mut_ptr()), OhStatus::NullPointer);
        ohsim_grid_free(g);
    }
}

#[test]
fn simulation_matches_library() {
    let g = grid(64);
    let u0: Vec<f64> = points(g).iter().map(|x| x.sin()).collect();
    let mut params = ohsim_solver_params_default();
    params.dt = 0.01;
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(ohsim_simulation_new(g, u0.as_ptr(), 64, &params, ptr::null(), &mut sim), OhStatus::Ok);
        assert_eq!(ohsim_simulation_advance_to(sim, 0.5), OhStatus::Ok);
        assert!((ohsim_simulation_time(sim) - 0.5).abs() < 1e-12);
        assert_eq!(ohsim_simulation_step_index(sim), 50);
    }
    let mut u = vec![0.0; 64];
    let mut p = vec![0.0; 64];
    unsafe {
        assert_eq!(ohsim_simulation_copy_u(sim, u.as_mut_ptr(), 64), OhStatus::Ok);
        assert_eq!(ohsim_simulation_copy_p(sim, p.as_mut_ptr(), 64), OhStatus::Ok);
    }

    let lg = ohsim::make_grid(PI, 64).unwrap();
    let cfg = ohsim::SolverConfig {
        dt: ohsim::DtPolicy::Fixed(0.01),
        ..ohsim::SolverConfig::default()
    };
    let mut reference = ohsim::Simulation::new(&ohsim::Field::from_fn(&lg, f64::sin), &cfg, &ohsim::burgers_flux()).unwrap();
    for _ in 0..50 {
        reference.step(0.01).unwrap();
    }
    assert_eq!(u.as_slice(), reference.u().values());
    assert_eq!(p.as_slice(), reference.p().values());
    unsafe {
        ohsim_simulation_free(sim);
        ohsim_grid_free(g);
    }
}

#[test]
fn blow_up_status() {
    let g = grid(32);
    let u0: Vec<f64> = points(g).iter().map(|x| x.sin()).collect();
    let mut params = ohsim_solver_params_default();
    params.blowup_threshold = 0.5;
    let mut sim = ptr::null_mut();
    let st = unsafe { ohsim_simulation_new(g, u0.as_ptr(), 32, &params, ptr::null(), &mut sim) };
    assert_eq!(st, OhStatus::BlowUp);
    assert!(last_error().contains("blow-up at t = 0"));
    unsafe { ohsim_grid_free(g) };
}

#[test]
fn custom_flux_spec() {
    let g = grid(32);
    let u0: Vec<f64> = points(g).iter().map(|x| 0.1 * x.sin()).collect();
    let params = ohsim_solver_params_default();
    let good = [0.0, 0.0, 0.5];
    let spec = OhFluxSpec {
        kind: OhFluxKind::Custom,
        coefficients: good.as_ptr(),
        num_coefficients: good.len(),
        range_lo: -1.0,
        range_hi: 1.0,
    };
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(ohsim_simulation_new(g, u0.as_ptr(), 32, &params, &spec, &mut sim), OhStatus::Ok);
        assert_eq!(ohsim_simulation_step(sim, 0.01), OhStatus::Ok);
        assert_eq!(ohsim_simulation_step(sim, -1.0), OhStatus::InvalidArgument);
        ohsim_simulation_free(sim);
    }
    // f(u) = u grows linearly in f'(u)/u near zero
    let bad = [0.0, 1.0];
    let spec = OhFluxSpec {
        coefficients: bad.as_ptr(),
        num_coefficients: bad.len(),
        ..spec
    };
    let mut sim = ptr::null_mut();
    let st = unsafe { ohsim_simulation_new(g, u0.as_ptr(), 32, &params, &spec, &mut sim) };
    assert_eq!(st, OhStatus::InvalidArgument);
    assert!(sim.is_null());
    unsafe { ohsim_grid_free(g) };
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        ohsim_grid_free(ptr::null_mut());
        ohsim_simulation_free(ptr::null_mut());
        assert_eq!(ohsim_grid_len(ptr::null()), 0);
        assert!(ohsim_simulation_time(ptr::null()).is_nan());
        assert_eq!(ohsim_simulation_step(ptr::null_mut(), 0.1), OhStatus::NullPointer);
    }
    let v = unsafe { CStr::from_ptr(ohsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
