//! Built-in verification scenarios. Each criterion runs a fixed scenario and
//! reports a verdict with the measured quantity that decided it.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{
    energy_bound_check, linf_bound_check, mean_conservation_check, p_bounds_check, IDENTITY_TOLERANCE,
};
use crate::error::Result;
use crate::evolution::{run, DtPolicy, Profile, Simulation, SolverConfig};
use crate::flux::burgers_flux;
use crate::grid::{inner_product, l2_norm_sq, make_grid, Field, GridSpec};
use crate::nonlocal::{check_elliptic_identity, coupling_residual, solve_p};

use super::mms::{mms_study, ManufacturedSolution};
use super::refine::recording_check;
use super::stability::stability_experiment;
use super::sweep::delta_sweep;

pub const STANDARD_GAMMA: f64 = 0.5;
pub const STANDARD_DELTA: f64 = 0.1;
pub const STANDARD_T: f64 = 2.0;
pub const STANDARD_N: usize = 256;
pub const RANDOM_SAMPLES: u64 = 100;
pub const IDENTITY_DELTAS: [f64; 5] = [0.0, 0.01, 0.1, 0.5, 0.99];
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;
pub const SWEEP_DELTAS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
pub const MIN_SWEEP_ORDER: f64 = 0.8;
pub const MIN_SPATIAL_REDUCTION: f64 = 10.0;
pub const TEMPORAL_ORDER_SLACK: f64 = 0.3;
pub const ZERO_DATA_STEPS: usize = 10_000;
/// Step of the recording-interval check; resolves the sine scenario's
/// integrals well below the tolerance.
pub const RECORDING_CHECK_DT: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub criteria: Vec<CriterionResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!(
                "{:>2}  {:<22} {}  {}\n",
                c.id,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.detail
            ));
        }
        out
    }
}

pub fn standard_config() -> SolverConfig {
    SolverConfig {
        gamma: STANDARD_GAMMA,
        delta: STANDARD_DELTA,
        dt: DtPolicy::Auto,
        t_end: STANDARD_T,
        ..SolverConfig::default()
    }
}

fn standard_grid() -> GridSpec {
    make_grid(PI, STANDARD_N).expect("valid grid")
}

fn sine(grid: &GridSpec) -> Field {
    Field::from_fn(grid, f64::sin)
}

/// Zero-mean, Nyquist-free random fields drawn from consecutive seeds.
fn random_fields(grid: &GridSpec) -> Result<Vec<Field>> {
    (0..RANDOM_SAMPLES)
        .map(|seed| {
            Profile::Random {
                amplitude: 1.0,
                modes: (grid.len() / 2 - 1) as u32,
                seed,
            }
            .sample(grid)
        })
        .collect()
}

fn outcome(id: u32, name: &'static str, r: Result<(bool, String)>) -> CriterionResult {
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name,
        passed,
        detail,
    }
}

pub fn elliptic_identity() -> CriterionResult {
    outcome(1, "elliptic_identity", (|| {
        let g = standard_grid();
        let mut worst = 0.0_f64;
        for u in random_fields(&g)? {
            for &d in &IDENTITY_DELTAS {
                worst = worst.max(check_elliptic_identity(&u, &solve_p(&u, d)?, d)?);
            }
        }
        Ok((worst <= IDENTITY_TOLERANCE, format!("max relative residual {worst:.3e}")))
    })())
}

pub fn coupling_identity() -> CriterionResult {
    outcome(2, "coupling_identity", (|| {
        let g = standard_grid();
        let mut worst = 0.0_f64;
        let mut worst_ratio = f64::NEG_INFINITY;
        for u in random_fields(&g)? {
            for &d in &IDENTITY_DELTAS {
                let p = solve_p(&u, d)?;
                worst = worst.max(coupling_residual(&u, &p, d)?);
                worst_ratio = worst_ratio.max(inner_product(&u, &p)? / l2_norm_sq(&u));
            }
        }
        let passed = worst <= IDENTITY_TOLERANCE && worst_ratio <= 1.0 + IDENTITY_TOLERANCE;
        Ok((
            passed,
            format!("max residual {worst:.3e}, max (u,P)/|u|^2 {worst_ratio:.6}"),
        ))
    })())
}

pub fn closed_form_p() -> CriterionResult {
    outcome(3, "closed_form_p", (|| {
        let g = standard_grid();
        let u = sine(&g);
        let err = |p: &Field, exact: &dyn Fn(f64) -> f64| {
            p.values()
                .iter()
                .enumerate()
                .fold(0.0_f64, |m, (i, v)| m.max((v - exact(g.x(i))).abs()))
        };
        let e1 = err(&solve_p(&u, 1.0)?, &|x: f64| (x.sin() - x.cos()) / 2.0);
        let e0 = err(&solve_p(&u, 0.0)?, &|x: f64| -x.cos());
        let worst = e1.max(e0);
        Ok((
            worst <= CLOSED_FORM_TOLERANCE,
            format!("max error delta=1 {e1:.3e}, delta=0 {e0:.3e}"),
        ))
    })())
}

pub fn mean_conservation() -> CriterionResult {
    outcome(4, "mean_conservation", (|| {
        let cfg = SolverConfig {
            t_end: 5.0,
            ..standard_config()
        };
        let (_, report) = run(&sine(&standard_grid()), &cfg, &burgers_flux(), &mut [])?;
        let v = mean_conservation_check(&report);
        Ok((
            v.verdict.passed,
            format!("worst |mean(u)| {:.3e}", v.worst_abs_mean),
        ))
    })())
}

pub fn energy_bounds() -> CriterionResult {
    outcome(5, "energy_bounds", (|| {
        let (_, report) = run(&sine(&standard_grid()), &standard_config(), &burgers_flux(), &mut [])?;
        let e = energy_bound_check(&report, STANDARD_GAMMA);
        let p = p_bounds_check(&report, STANDARD_GAMMA, report.u0_l2());
        let passed = e.plain.passed && e.dissipation.passed && p.gradient_l2.passed;
        Ok((
            passed,
            format!(
                "margins: plain {:.3e}, dissipation {:.3e}, |P_x| {:.3e}",
                e.plain.worst_margin, e.dissipation.worst_margin, p.gradient_l2.worst_margin
            ),
        ))
    })())
}

pub fn linf_bound() -> CriterionResult {
    outcome(6, "linf_bound", (|| {
        let (_, report) = run(&sine(&standard_grid()), &standard_config(), &burgers_flux(), &mut [])?;
        let v = linf_bound_check(&report, STANDARD_GAMMA, report.u0_linf());
        Ok((v.passed, format!("worst margin {:.3e}", v.worst_margin)))
    })())
}

pub fn stability() -> CriterionResult {
    outcome(7, "stability", (|| {
        let g = standard_grid();
        let cfg = standard_config();
        let u0 = sine(&g);
        let v0 = Field::from_fn(&g, |x| x.sin() + 1e-3 * (2.0 * x).sin());
        let r = stability_experiment(&cfg, &burgers_flux(), &u0, &v0)?;
        let twin = stability_experiment(&cfg, &burgers_flux(), &u0, &u0)?;
        let identical = twin.omega_l2.iter().all(|&w| w == 0.0);
        let passed = r.passed && r.c_fit <= r.c_bound && identical;
        Ok((
            passed,
            format!(
                "C_fit {:.4}, C_bound {:.4}, identical twins zero: {identical}",
                r.c_fit, r.c_bound
            ),
        ))
    })())
}

pub fn delta_convergence() -> CriterionResult {
    outcome(8, "delta_convergence", (|| {
        let g = standard_grid();
        let (table, _) = delta_sweep(&standard_config(), &burgers_flux(), &sine(&g), &SWEEP_DELTAS)?;
        let order = table.min_order();
        let passed = table.errors_strictly_decreasing()
            && order >= MIN_SWEEP_ORDER
            && table.sqrt_delta_sup_px_decreasing()
            && table.within_majorant();
        let errors: Vec<String> = table.rows.iter().map(|r| format!("{:.3e}", r.error)).collect();
        Ok((
            passed,
            format!("E = [{}], min order {order:.3}", errors.join(", ")),
        ))
    })())
}

/// Temporal order and spatial reduction of the manufactured solutions plus
/// the recording-interval check. The sine solution is band-limited, so its
/// spatial error sits at the temporal floor from the coarsest grid on; the
/// spatial reduction is therefore measured on a Gaussian-derivative solution
/// whose spectrum is not resolved at the coarse grid.
pub fn manufactured_solutions() -> CriterionResult {
    outcome(9, "verification", (|| {
        let cfg = standard_config();
        let flux = burgers_flux();
        let dts = [0.1, 0.05, 0.025, 0.0125];
        let sine_study = mms_study(
            &cfg,
            &flux,
            ManufacturedSolution::DecayingSine { mode: 1 },
            PI,
            &[64, 128],
            &dts,
        )?;
        let gauss_study = mms_study(
            &cfg,
            &flux,
            ManufacturedSolution::DecayingGaussianDerivative { width: MMS_WIDTH },
            MMS_HALF_LENGTH,
            &[64, 128],
            &dts[dts.len() - 1..],
        )?;
        let orders_ok = sine_study
            .temporal_orders
            .iter()
            .all(|p| (p - 4.0).abs() <= TEMPORAL_ORDER_SLACK);
        let reduction = gauss_study.spatial_reduction().unwrap_or(0.0);
        let sine_reduction = sine_study.spatial_reduction().unwrap_or(0.0);
        let recording = recording_check(
            &cfg,
            &flux,
            &sine(&standard_grid()),
            RECORDING_CHECK_DT,
        )?;
        let worst_change = recording.relative_changes.iter().copied().fold(0.0, f64::max);
        let passed = orders_ok && reduction > MIN_SPATIAL_REDUCTION && recording.passed;
        let orders: Vec<String> = sine_study
            .temporal_orders
            .iter()
            .map(|p| format!("{p:.3}"))
            .collect();
        Ok((
            passed,
            format!(
                "orders [{}], spatial reduction {reduction:.3e} (sine {sine_reduction:.3}), record change {worst_change:.3e}",
                orders.join(", ")
            ),
        ))
    })())
}

pub const MMS_HALF_LENGTH: f64 = 10.0;
pub const MMS_WIDTH: f64 = 1.0;

pub fn zero_data() -> CriterionResult {
    outcome(10, "zero_data", (|| {
        let g = standard_grid();
        let cfg = SolverConfig {
            dt: DtPolicy::Fixed(0.01),
            ..standard_config()
        };
        let mut sim = Simulation::new(&Field::zeros(&g), &cfg, &burgers_flux())?;
        for _ in 0..ZERO_DATA_STEPS {
            sim.step(0.01)?;
        }
        let zero = sim.u().values().iter().all(|&v| v == 0.0);
        Ok((zero, format!("{ZERO_DATA_STEPS} steps, exactly zero: {zero}")))
    })())
}

/// Runs every criterion (concurrently) and returns them in order.
pub fn verify_all() -> VerifyReport {
    let checks: [fn() -> CriterionResult; 10] = [
        elliptic_identity,
        coupling_identity,
        closed_form_p,
        mean_conservation,
        energy_bounds,
        linf_bound,
        stability,
        delta_convergence,
        manufactured_solutions,
        zero_data,
    ];
    VerifyReport {
        criteria: checks.par_iter().map(|c| c()).collect(),
    }
}
