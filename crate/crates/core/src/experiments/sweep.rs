use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::DiagnosticsReport;
use crate::error::{OhError, Result};
use crate::evolution::{cfl_dt, run, DtPolicy, SolverConfig};
use crate::flux::FluxModel;
use crate::grid::{l2_norm, Field};

use super::observed_order;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    /// `|u_delta(T) - u_0(T)|_2`
    pub error: f64,
    /// Observed order against the previous row; `None` on the first row.
    pub order: Option<f64>,
    /// `sqrt(delta) sup_t |P_x|_inf`
    pub sqrt_delta_sup_px: f64,
    /// `delta sup_t |P_x|_inf`, the quantity that vanishes in the limit.
    pub delta_sup_px: f64,
    /// `sqrt(delta) e^{gamma T} |u0|_2`
    pub majorant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub dt: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn errors_strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn min_order(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.order)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sqrt_delta_sup_px_decreasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sqrt_delta_sup_px < w[0].sqrt_delta_sup_px)
    }

    pub fn within_majorant(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.sqrt_delta_sup_px <= r.majorant && r.delta_sup_px <= r.majorant)
    }
}

/// Step used by every member run: the configured fixed step, or half the
/// CFL step of `u0` when the policy is `auto`.
pub fn shared_dt(config: &SolverConfig, flux: &FluxModel, u0: &Field) -> f64 {
    match config.dt {
        DtPolicy::Fixed(dt) => dt,
        DtPolicy::Auto => 0.5 * cfl_dt(u0, flux, config.cfl_safety),
    }
}

/// Runs each `delta` in `deltas` plus the reference `delta = 0` with a
/// shared step, and tabulates the distance to the reference at `t_end`.
pub fn delta_sweep(
    config: &SolverConfig,
    flux: &FluxModel,
    u0: &Field,
    deltas: &[f64],
) -> Result<(SweepTable, Vec<DiagnosticsReport>)> {
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(OhError::InvalidConfig(
            "delta list must be strictly decreasing".into(),
        ));
    }
    let dt = shared_dt(config, flux, u0);
    let member = |delta: f64| {
        let cfg = SolverConfig {
            delta,
            dt: DtPolicy::Fixed(dt),
            ..config.clone()
        };
        run(u0, &cfg, flux, &mut [])
    };
    let mut all: Vec<f64> = deltas.to_vec();
    all.push(0.0);
    let results = all
        .par_iter()
        .map(|&d| member(d))
        .collect::<Result<Vec<_>>>()?;
    let (reference, _) = results.last().expect("reference run present");
    let u0_l2 = l2_norm(u0);
    let growth = (config.gamma * config.t_end).exp();
    let mut rows: Vec<SweepRow> = Vec::with_capacity(deltas.len());
    for (i, &delta) in deltas.iter().enumerate() {
        let (state, report) = &results[i];
        let error = l2_norm(&state.u.sub(&reference.u)?);
        let sup_px = report.sup_px_linf();
        let order = rows
            .last()
            .map(|prev: &SweepRow| observed_order(prev.error, error, prev.delta / delta));
        rows.push(SweepRow {
            delta,
            error,
            order,
            sqrt_delta_sup_px: delta.sqrt() * sup_px,
            delta_sup_px: delta * sup_px,
            majorant: delta.sqrt() * growth * u0_l2,
        });
    }
    let reports = results.into_iter().map(|(_, r)| r).collect();
    Ok((SweepTable { dt, rows }, reports))
}
