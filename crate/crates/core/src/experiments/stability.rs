//! Twin-run stability: evolve `u0` and `v0` in lock step and compare the
//! growth of `omega = u - v` with the exponent assembled from the measured
//! solutions,
//!
//! ```text
//! C_bound = sup_t ( |f''(u) u_x|_inf + 2 S |v_x|_inf ),   S = sup |f''| over the attained range.
//! ```

use serde::Serialize;

use crate::error::Result;
use crate::evolution::{cfl_dt, DtPolicy, Simulation, SolverConfig};
use crate::flux::FluxModel;
use crate::grid::{derivative, l2_norm, linf_norm, Field};
use crate::nonlocal::solve_p;

/// Relative slack on `|omega(t)| <= e^{C_bound t} |omega_0|`.
pub const STABILITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    pub omega_l2: Vec<f64>,
    /// `max_{t > 0} ln(|omega(t)| / |omega_0|) / t`; `0` when `omega_0 = 0`.
    pub c_fit: f64,
    pub c_bound: f64,
    /// Worst `|solve_p(u - v) - (P^u - P^v)|_inf / (|u|_inf + |v|_inf)`.
    pub omega_linearity_residual: f64,
    pub passed: bool,
    pub worst_margin: f64,
}

struct Sample {
    t: f64,
    omega_l2: f64,
    strain_u: f64,
    grad_v: f64,
}

/// Runs both trajectories with identical step sizes and builds the report.
pub fn stability_experiment(
    config: &SolverConfig,
    flux: &FluxModel,
    u0: &Field,
    v0: &Field,
) -> Result<StabilityReport> {
    u0.same_grid(v0)?;
    let mut su = Simulation::new(u0, config, flux)?;
    let mut sv = Simulation::new(v0, config, flux)?;
    let mut samples = Vec::new();
    let mut range = (0.0_f64, 0.0_f64);
    let mut linearity = 0.0_f64;

    let mut observe = |su: &Simulation, sv: &Simulation| -> Result<()> {
        let (u, v) = (su.u(), sv.u());
        let (pu, pv) = (su.p(), sv.p());
        let omega = u.sub(&v)?;
        let big_omega = solve_p(&omega, config.delta)?;
        let diff = big_omega.sub(&pu.sub(&pv)?)?;
        let scale = linf_norm(&u) + linf_norm(&v);
        if scale > 0.0 {
            linearity = linearity.max(linf_norm(&diff) / scale);
        }
        for &x in u.values().iter().chain(v.values()) {
            range.0 = range.0.min(x);
            range.1 = range.1.max(x);
        }
        let ux = derivative(&u, 1)?;
        let vx = derivative(&v, 1)?;
        let strain_u = u
            .values()
            .iter()
            .zip(ux.values())
            .fold(0.0_f64, |m, (&a, &d)| m.max((flux.f_second(a) * d).abs()));
        samples.push(Sample {
            t: su.time(),
            omega_l2: l2_norm(&omega),
            strain_u,
            grad_v: linf_norm(&vx),
        });
        Ok(())
    };

    observe(&su, &sv)?;
    let t_end = config.t_end;
    let mut taken = 0usize;
    while t_end - su.time() > 1e-12 * t_end.max(1.0) {
        let mut dt = match config.dt {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Auto => cfl_dt(&su.u(), flux, config.cfl_safety)
                .min(cfl_dt(&sv.u(), flux, config.cfl_safety)),
        };
        let remaining = t_end - su.time();
        let last = dt >= remaining * (1.0 - 1e-9);
        if last {
            dt = remaining;
        }
        su.step(dt)?;
        sv.step(dt)?;
        taken += 1;
        if last || taken.is_multiple_of(config.record_every) {
            observe(&su, &sv)?;
        }
    }

    let sup_f2 = flux.sup_abs_f_second(range.0, range.1);
    let c_bound = samples
        .iter()
        .map(|s| s.strain_u + 2.0 * sup_f2 * s.grad_v)
        .fold(0.0, f64::max);
    let omega0 = samples[0].omega_l2;
    let c_fit = if omega0 > 0.0 {
        samples
            .iter()
            .filter(|s| s.t > 0.0)
            .map(|s| (s.omega_l2 / omega0).ln() / s.t)
            .fold(f64::NEG_INFINITY, f64::max)
    } else {
        0.0
    };
    let mut passed = true;
    let mut worst_margin = f64::INFINITY;
    for s in &samples {
        let bound = (c_bound * s.t).exp() * omega0 * (1.0 + STABILITY_TOLERANCE);
        let margin = bound - s.omega_l2;
        if s.omega_l2.is_nan() || s.omega_l2 > bound {
            passed = false;
        }
        worst_margin = worst_margin.min(margin);
    }
    Ok(StabilityReport {
        times: samples.iter().map(|s| s.t).collect(),
        omega_l2: samples.iter().map(|s| s.omega_l2).collect(),
        c_fit,
        c_bound,
        omega_linearity_residual: linearity,
        passed,
        worst_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::burgers_flux;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    fn cfg() -> SolverConfig {
        SolverConfig {
            gamma: 0.5,
            delta: 0.1,
            t_end: 1.0,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn identical_data_gives_zero_separation() {
        let g = make_grid(PI, 64).unwrap();
        let u0 = Field::from_fn(&g, f64::sin);
        let r = stability_experiment(&cfg(), &burgers_flux(), &u0, &u0).unwrap();
        assert!(r.omega_l2.iter().all(|&w| w == 0.0));
        assert!(r.passed);
        assert_eq!(r.c_fit, 0.0);
    }

    #[test]
    fn perturbed_sine_passes() {
        let g = make_grid(PI, 128).unwrap();
        let u0 = Field::from_fn(&g, f64::sin);
        let v0 = Field::from_fn(&g, |x| x.sin() + 1e-3 * (2.0 * x).sin());
        let r = stability_experiment(&cfg(), &burgers_flux(), &u0, &v0).unwrap();
        assert!(r.passed);
        assert!(r.c_fit <= r.c_bound);
        assert!(r.omega_linearity_residual <= 1e-12);
    }

    #[test]
    fn linear_regime_has_tiny_bound() {
        let g = make_grid(PI, 64).unwrap();
        let u0 = Field::from_fn(&g, |x| 1e-8 * x.sin());
        let v0 = Field::from_fn(&g, |x| 0.5e-8 * x.sin());
        let r = stability_experiment(&cfg(), &burgers_flux(), &u0, &v0).unwrap();
        assert!(r.passed);
        assert!(r.c_bound < 1e-7, "{}", r.c_bound);
        // separation decays with the linear symbol
        assert!(r.c_fit < 0.0);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = Field::zeros(&make_grid(PI, 32).unwrap());
        let b = Field::zeros(&make_grid(PI, 64).unwrap());
        assert!(stability_experiment(&cfg(), &burgers_flux(), &a, &b).is_err());
    }
}
