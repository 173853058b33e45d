//! Self-convergence studies: grids are compared with the finest one by
//! spectral interpolation, step sizes with the smallest step.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::DiagnosticsReport;
use crate::error::{OhError, Result};
use crate::evolution::{run, DtPolicy, SolverConfig};
use crate::flux::FluxModel;
use crate::grid::{l2_norm, make_grid, Field, GridSpec};

use super::observed_order;

/// Largest relative change of an integral diagnostic allowed when the
/// recording interval is halved.
pub const RECORDING_TOLERANCE: f64 = 1e-6;
/// Largest step used by [`recording_check`] inside [`refinement_study`]; the
/// trapezoid sampling error scales with the square of the recording interval.
pub const RECORDING_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    /// `N` for spatial studies, `dt` for temporal ones.
    pub resolution: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordingCheck {
    pub record_every: usize,
    /// Relative changes of `int |u_x|^2`, `int |u_xx|^2`, `int |u_xxx|^2`
    /// and of the weighted dissipation integral.
    pub relative_changes: [f64; 4],
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub spatial: Vec<ConvergencePoint>,
    pub temporal: Vec<ConvergencePoint>,
    pub temporal_orders: Vec<f64>,
    pub recording: RecordingCheck,
}

/// Samples `coarse` on `fine` by zero-padding its spectrum. The coarse
/// Nyquist mode is dropped.
pub fn spectral_interpolate(coarse: &Field, fine: &GridSpec) -> Result<Field> {
    let cg = coarse.grid();
    if cg.half_length() != fine.half_length() || cg.len() > fine.len() {
        return Err(OhError::GridMismatch);
    }
    let (nc, nf) = (cg.len(), fine.len());
    let spec = coarse.spectrum();
    let mut out = vec![Complex64::new(0.0, 0.0); nf];
    let scale = nf as f64 / nc as f64;
    for (slot, c) in spec.iter().enumerate() {
        if slot == cg.nyquist_slot() {
            continue;
        }
        let m = cg.mode_index(slot);
        let target = if m >= 0 { m as usize } else { (nf as i64 + m) as usize };
        out[target] = c * scale;
    }
    Field::from_spectrum(fine, &out)
}

fn integrals(report: &DiagnosticsReport) -> [f64; 4] {
    let last = |v: &[f64]| v.last().copied().unwrap_or(0.0);
    [
        last(&report.int_ux_l2_sq),
        last(&report.int_uxx_l2_sq),
        last(&report.int_uxxx_l2_sq),
        last(&report.dissipation_integral),
    ]
}

/// Compares integral diagnostics recorded every `2 r` steps with those
/// recorded every `r` steps of the same fixed-step run.
pub fn recording_check(
    config: &SolverConfig,
    flux: &FluxModel,
    u0: &Field,
    dt: f64,
) -> Result<RecordingCheck> {
    let r = config.record_every;
    let base = SolverConfig {
        dt: DtPolicy::Fixed(dt),
        ..config.clone()
    };
    let coarse = SolverConfig {
        record_every: 2 * r,
        ..base.clone()
    };
    let (_, a) = run(u0, &coarse, flux, &mut [])?;
    let (_, b) = run(u0, &base, flux, &mut [])?;
    let (ia, ib) = (integrals(&a), integrals(&b));
    let mut rel = [0.0; 4];
    for i in 0..4 {
        let scale = ib[i].abs().max(f64::MIN_POSITIVE);
        rel[i] = if ia[i] == ib[i] {
            0.0
        } else {
            (ia[i] - ib[i]).abs() / scale
        };
    }
    Ok(RecordingCheck {
        record_every: r,
        relative_changes: rel,
        passed: rel.iter().all(|&c| c < RECORDING_TOLERANCE),
    })
}

/// Runs `profile` on every `N` in `n_list` (at the smallest `dt`) and with
/// every `dt` in `dt_list` (on the largest `N`).
pub fn refinement_study(
    config: &SolverConfig,
    flux: &FluxModel,
    u0_on: &(dyn Fn(&GridSpec) -> Result<Field> + Sync),
    half_length: f64,
    n_list: &[usize],
    dt_list: &[f64],
) -> Result<RefinementStudy> {
    if n_list.is_empty() || dt_list.is_empty() {
        return Err(OhError::InvalidConfig("refinement lists must be non-empty".into()));
    }
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    let mut dts = dt_list.to_vec();
    dts.sort_by(|a, b| b.total_cmp(a));
    let dt_min = *dts.last().unwrap();
    let n_max = *ns.last().unwrap();

    let with_dt = |dt: f64| SolverConfig {
        dt: DtPolicy::Fixed(dt),
        ..config.clone()
    };
    let spatial_runs = ns
        .par_iter()
        .map(|&n| {
            let g = make_grid(half_length, n)?;
            let u0 = u0_on(&g)?;
            run(&u0, &with_dt(dt_min), flux, &mut []).map(|(s, _)| s.u)
        })
        .collect::<Result<Vec<_>>>()?;
    let fine_grid = make_grid(half_length, n_max)?;
    let reference = spatial_runs.last().unwrap();
    let mut spatial = Vec::new();
    for (n, u) in ns.iter().zip(&spatial_runs).take(ns.len() - 1) {
        let up = spectral_interpolate(u, &fine_grid)?;
        spatial.push(ConvergencePoint {
            resolution: *n as f64,
            error: l2_norm(&up.sub(reference)?),
        });
    }

    let u0_fine = u0_on(&fine_grid)?;
    let temporal_runs = dts
        .par_iter()
        .map(|&dt| run(&u0_fine, &with_dt(dt), flux, &mut []).map(|(s, _)| s.u))
        .collect::<Result<Vec<_>>>()?;
    let reference = temporal_runs.last().unwrap();
    let mut temporal = Vec::new();
    for (dt, u) in dts.iter().zip(&temporal_runs).take(dts.len() - 1) {
        temporal.push(ConvergencePoint {
            resolution: *dt,
            error: l2_norm(&u.sub(reference)?),
        });
    }
    let temporal_orders = temporal
        .windows(2)
        .map(|w| observed_order(w[0].error, w[1].error, w[0].resolution / w[1].resolution))
        .collect();
    let recording = recording_check(config, flux, &u0_fine, dt_min.min(RECORDING_DT))?;
    Ok(RefinementStudy {
        spatial,
        temporal,
        temporal_orders,
        recording,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::burgers_flux;
    use std::f64::consts::PI;

    #[test]
    fn interpolation_is_exact_for_resolved_modes() {
        let c = make_grid(PI, 16).unwrap();
        let f = make_grid(PI, 64).unwrap();
        let profile = |x: f64| x.sin() + 0.3 * (3.0 * x).cos() - 0.1 * (5.0 * x).sin();
        let up = spectral_interpolate(&Field::from_fn(&c, profile), &f).unwrap();
        let exact = Field::from_fn(&f, profile);
        assert!(l2_norm(&up.sub(&exact).unwrap()) < 1e-13);
    }

    #[test]
    fn interpolation_rejects_coarser_target() {
        let c = make_grid(PI, 64).unwrap();
        let f = make_grid(PI, 32).unwrap();
        assert!(spectral_interpolate(&Field::zeros(&c), &f).is_err());
    }

    #[test]
    fn temporal_order_near_four() {
        let cfg = SolverConfig {
            gamma: 0.5,
            delta: 0.1,
            t_end: 1.0,
            ..SolverConfig::default()
        };
        let profile = |g: &GridSpec| Ok(Field::from_fn(g, |x| 2.0 * x * (-x * x).exp()));
        let study = refinement_study(
            &cfg,
            &burgers_flux(),
            &profile,
            8.0,
            &[64, 128],
            &[0.1, 0.05, 0.025, 0.0125],
        )
        .unwrap();
        for p in &study.temporal_orders {
            assert!((p - 4.0).abs() < 0.3, "{:?}", study.temporal_orders);
        }
        assert!(study.recording.passed, "{:?}", study.recording);
    }
}
