//! Time integration of the regularized system
//!
//! ```text
//! u_t + f(u)_x = gamma P + u_xx,    -delta P_xx + P_x = u
//! ```
//!
//! and of its `delta = 0` limit, with the linear part (diffusion and
//! `gamma P`) propagated exactly per Fourier mode.

mod config;
mod etd;
mod initial;

pub use config::{DtPolicy, SolverConfig};
pub use etd::{linear_symbol, phi_functions, Simulation, Source};
pub use initial::{prepare_initial_data, remove_mean, InitialData, Profile};

use serde::Serialize;

use crate::diagnostics::{DiagnosticsRecorder, DiagnosticsReport};
use crate::error::Result;
use crate::flux::FluxModel;
use crate::grid::{derivative, linf_norm, Field};

/// Snapshot of a run. `p` is always `solve_p(u, delta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub u: Field,
    pub p: Field,
    pub step_index: usize,
}

/// Called on every recorded state of a run.
pub trait Observer {
    fn observe(&mut self, state: &SimState);
}

impl<F: FnMut(&SimState)> Observer for F {
    fn observe(&mut self, state: &SimState) {
        self(state)
    }
}

/// Advances `state` by one ETDRK4 step.
pub fn step(state: &SimState, config: &SolverConfig, flux: &FluxModel, dt: f64) -> Result<SimState> {
    let mut sim = Simulation::resume(&state.u, state.t, state.step_index, config, flux)?;
    sim.step(dt)?;
    Ok(sim.state())
}

/// Floor on the advective speed in [`cfl_dt`].
pub const SPEED_FLOOR: f64 = 1e-12;
/// Fraction of the nonlinear turnover time `1/|d_x f'(u)|_inf` allowed per step.
pub const TURNOVER_FRACTION: f64 = 0.25;
/// Largest step ever returned, reached for quiescent data.
pub const DT_CEILING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CflBound {
    pub advective: f64,
    pub turnover: f64,
    pub dt: f64,
}

pub fn cfl_bounds(u: &Field, flux: &FluxModel, cfl_safety: f64) -> CflBound {
    let speed = u
        .values()
        .iter()
        .fold(0.0_f64, |m, &v| m.max(flux.f_prime(v).abs()));
    let advective = cfl_safety * u.grid().dx() / speed.max(SPEED_FLOOR);
    let ux = derivative(u, 1).expect("order 1 is valid");
    let strain = u
        .values()
        .iter()
        .zip(ux.values())
        .fold(0.0_f64, |m, (&v, &d)| m.max((flux.f_second(v) * d).abs()));
    let turnover = TURNOVER_FRACTION / strain.max(SPEED_FLOOR);
    CflBound {
        advective,
        turnover,
        dt: advective.min(turnover).min(DT_CEILING),
    }
}

/// `cfl_safety * dx / max|f'(u)|`, capped by the turnover bound and [`DT_CEILING`].
pub fn cfl_dt(u: &Field, flux: &FluxModel, cfl_safety: f64) -> f64 {
    cfl_bounds(u, flux, cfl_safety).dt
}

/// Drives `sim` to `config.t_end`, recording every `record_every` steps
/// (and always the first and last state).
pub fn run_simulation(
    sim: &mut Simulation,
    config: &SolverConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<DiagnosticsReport> {
    let mut recorder = DiagnosticsRecorder::new(config.gamma, config.delta);
    let emit = |sim: &Simulation, recorder: &mut DiagnosticsRecorder, obs: &mut [&mut dyn Observer]| {
        let state = sim.state();
        recorder.record(&state);
        for o in obs.iter_mut() {
            o.observe(&state);
        }
    };
    emit(sim, &mut recorder, observers);
    let t_end = config.t_end;
    let start_step = sim.step_index();
    let t0 = sim.time();
    loop {
        let remaining = t_end - sim.time();
        if remaining <= 1e-12 * t_end.max(1.0) {
            break;
        }
        let (dt, last) = match config.dt {
            DtPolicy::Fixed(dt) => {
                let taken = sim.step_index() - start_step;
                let target = t0 + (taken + 1) as f64 * dt;
                if target >= t_end - 1e-9 * dt {
                    let rem = t_end - sim.time();
                    // keep the cached coefficients when the tail step is a full one
                    let h = if (rem - dt).abs() <= 1e-9 * dt { dt } else { rem };
                    (h, true)
                } else {
                    (dt, false)
                }
            }
            DtPolicy::Auto => {
                let dt = cfl_dt(&sim.u(), sim.flux(), config.cfl_safety);
                if dt >= remaining {
                    (remaining, true)
                } else {
                    (dt, false)
                }
            }
        };
        sim.step(dt)?;
        if last {
            sim.set_time(t_end);
        } else if let DtPolicy::Fixed(h) = config.dt {
            sim.set_time(t0 + (sim.step_index() - start_step) as f64 * h);
        }
        let recorded = (sim.step_index() - start_step).is_multiple_of(config.record_every);
        if recorded || last {
            emit(sim, &mut recorder, observers);
        }
        if last {
            break;
        }
    }
    Ok(recorder.finish())
}

/// Integrates `u0` to `config.t_end`.
pub fn run(
    u0: &Field,
    config: &SolverConfig,
    flux: &FluxModel,
    observers: &mut [&mut dyn Observer],
) -> Result<(SimState, DiagnosticsReport)> {
    let mut sim = Simulation::new(u0, config, flux)?;
    let report = run_simulation(&mut sim, config, observers)?;
    Ok((sim.state(), report))
}

/// Largest `|u|` in a state; convenience for callers reporting blow-up margins.
pub fn amplitude(state: &SimState) -> f64 {
    linf_norm(&state.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::OhError;
    use crate::flux::{burgers_flux, cubic_flux};
    use crate::grid::{make_grid, mean};
    use crate::rng::SplitMix64;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn config(gamma: f64, delta: f64, dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig {
            gamma,
            delta,
            dt: DtPolicy::Fixed(dt),
            t_end,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let g = make_grid(PI, 32).unwrap();
        let cfg = config(0.5, 0.1, 0.1, 1.0);
        let mut sim = Simulation::new(&Field::zeros(&g), &cfg, &burgers_flux()).unwrap();
        for _ in 0..100 {
            sim.step(0.1).unwrap();
        }
        assert!(sim.spectrum().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn small_sine_follows_linear_propagator() {
        let g = make_grid(PI, 64).unwrap();
        let eps = 1e-8;
        let u = Field::from_fn(&g, |x| eps * x.sin());
        let cfg = config(1.0, 0.0, 0.1, 1.0);
        let state = SimState {
            t: 0.0,
            p: crate::nonlocal::solve_p(&u, 0.0).unwrap(),
            u: u.clone(),
            step_index: 0,
        };
        let dt = 0.1;
        let next = step(&state, &cfg, &burgers_flux(), dt).unwrap();
        let before = u.spectrum()[1];
        let after = next.u.spectrum()[1];
        let expected = before * (Complex64::new(-1.0, -1.0) * dt).exp();
        assert!((after - expected).norm() <= 1e-8 * expected.norm());
        assert_eq!(next.step_index, 1);
    }

    #[test]
    fn mean_is_preserved_exactly_in_spectrum() {
        let g = make_grid(PI, 64).unwrap();
        let mut rng = SplitMix64::new(4);
        let raw = Field::new(&g, (0..64).map(|_| rng.next_symmetric()).collect()).unwrap();
        let u = remove_mean(&raw);
        let cfg = config(0.5, 0.2, 0.01, 1.0);
        let mut sim = Simulation::new(&u, &cfg, &burgers_flux()).unwrap();
        let zero_mode = sim.spectrum()[0];
        let m0 = mean(&sim.u());
        for _ in 0..10 {
            sim.step(0.01).unwrap();
        }
        assert_eq!(sim.spectrum()[0], zero_mode);
        assert!((mean(&sim.u()) - m0).abs() <= 1e-15);
    }

    #[test]
    fn cfl_examples() {
        let g = make_grid(PI, 64).unwrap();
        let zero = Field::zeros(&g);
        let b = cfl_bounds(&zero, &burgers_flux(), 0.5);
        assert_eq!(b.dt, DT_CEILING);

        // dx = 0.1 with L = 1.6, N = 32
        let g = make_grid(1.6, 32).unwrap();
        let u = Field::from_fn(&g, |x| 2.0 * (PI * x / 1.6).sin());
        let b = cfl_bounds(&u, &burgers_flux(), 0.5);
        assert!((b.advective - 0.025).abs() < 1e-12);
        let c = cfl_bounds(&u, &cubic_flux((-2.0, 2.0)), 0.5);
        assert!((c.advective - 0.5 * 0.1 / 4.0).abs() < 1e-12);
        assert!(b.dt <= b.advective && b.dt <= b.turnover);
    }

    #[test]
    fn run_reaches_t_end_and_records() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        let cfg = SolverConfig {
            record_every: 3,
            ..config(0.5, 0.1, 0.03, 1.0)
        };
        let mut count = 0;
        let mut counter = |_: &SimState| count += 1;
        let (state, report) = run(&u, &cfg, &burgers_flux(), &mut [&mut counter]).unwrap();
        assert_eq!(state.t, 1.0);
        assert_eq!(*report.times.last().unwrap(), 1.0);
        // 34 steps (last one shortened), records at 0, 3, .., 33 and 34
        assert_eq!(state.step_index, 34);
        assert_eq!(report.times.len(), 13);
        assert_eq!(count, 13);
    }

    #[test]
    fn auto_dt_run_finishes() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        let cfg = SolverConfig {
            t_end: 0.5,
            ..SolverConfig::default()
        };
        let (state, _) = run(&u, &cfg, &burgers_flux(), &mut []).unwrap();
        assert_eq!(state.t, 0.5);
    }

    #[test]
    fn blowup_detected_at_start() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        let cfg = SolverConfig {
            blowup_threshold: 0.5,
            ..config(0.5, 0.1, 0.01, 1.0)
        };
        match run(&u, &cfg, &burgers_flux(), &mut []) {
            Err(OhError::BlowUp { t, step, .. }) => {
                assert_eq!(t, 0.0);
                assert_eq!(step, 0);
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_mean_rejected() {
        let g = make_grid(PI, 32).unwrap();
        let u = Field::from_fn(&g, |x| 0.5 + x.sin());
        let cfg = config(0.5, 0.1, 0.01, 1.0);
        assert!(matches!(
            Simulation::new(&u, &cfg, &burgers_flux()),
            Err(OhError::NonZeroMean { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, |x| x.sin() + 0.3 * (2.0 * x).cos());
        let cfg = SolverConfig {
            t_end: 0.7,
            ..SolverConfig::default()
        };
        let (a, ra) = run(&u, &cfg, &burgers_flux(), &mut []).unwrap();
        let (b, rb) = run(&u, &cfg, &burgers_flux(), &mut []).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }
}
