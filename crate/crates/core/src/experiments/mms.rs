//! Manufactured solutions: a chosen `u*(t, x) = a(t) g(x)` is made an exact
//! solution by adding the source
//!
//! ```text
//! S = u*_t + f'(u*) u*_x - gamma P* - u*_xx,   P* = solve_p(u*, delta)
//! ```
//!
//! to the right-hand side. The recovered solution is then compared with
//! `u*` to measure discretization error.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::evolution::{DtPolicy, Simulation, SolverConfig};
use crate::flux::FluxModel;
use crate::grid::{l2_norm, make_grid, Field, GridSpec};
use crate::nonlocal::solve_p;

use super::observed_order;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ManufacturedSolution {
    /// `e^{-t} sin(m pi x / L)`
    DecayingSine { mode: u32 },
    /// `sin(m pi x / L)`, constant in time.
    SteadySine { mode: u32 },
    /// `e^{-t} (x/w) exp(-(x/w)^2)`
    DecayingGaussianDerivative { width: f64 },
}

impl ManufacturedSolution {
    pub fn from_name(name: &str, current: &Self) -> std::result::Result<Self, String> {
        let mode = match *current {
            Self::DecayingSine { mode } | Self::SteadySine { mode } => mode,
            Self::DecayingGaussianDerivative { .. } => 1,
        };
        let width = match *current {
            Self::DecayingGaussianDerivative { width } => width,
            _ => 1.0,
        };
        match name {
            "decaying_sine" => Ok(Self::DecayingSine { mode }),
            "steady_sine" => Ok(Self::SteadySine { mode }),
            "decaying_gaussian_derivative" => Ok(Self::DecayingGaussianDerivative { width }),
            other => Err(format!("unknown manufactured solution '{other}'")),
        }
    }

    pub fn with_mode(self, mode: u32) -> Self {
        match self {
            Self::DecayingSine { .. } => Self::DecayingSine { mode },
            Self::SteadySine { .. } => Self::SteadySine { mode },
            other => other,
        }
    }

    pub fn with_width(self, width: f64) -> Self {
        match self {
            Self::DecayingGaussianDerivative { .. } => Self::DecayingGaussianDerivative { width },
            other => other,
        }
    }

    /// `(a(t), a'(t))`
    pub fn amplitude(&self, t: f64) -> (f64, f64) {
        match self {
            Self::SteadySine { .. } => (1.0, 0.0),
            _ => {
                let a = (-t).exp();
                (a, -a)
            }
        }
    }

    /// `(g, g', g'')` at `x` on a domain of half length `half_length`.
    pub fn shape(&self, x: f64, half_length: f64) -> (f64, f64, f64) {
        match *self {
            Self::DecayingSine { mode } | Self::SteadySine { mode } => {
                let k = mode as f64 * std::f64::consts::PI / half_length;
                let (s, c) = (k * x).sin_cos();
                (s, k * c, -k * k * s)
            }
            Self::DecayingGaussianDerivative { width } => {
                let s = x / width;
                let e = (-s * s).exp();
                let g = s * e;
                let g1 = (1.0 - 2.0 * s * s) * e / width;
                let g2 = (4.0 * s * s * s - 6.0 * s) * e / (width * width);
                (g, g1, g2)
            }
        }
    }

    pub fn exact(&self, grid: &GridSpec, t: f64) -> Field {
        let (a, _) = self.amplitude(t);
        Field::from_fn(grid, |x| a * self.shape(x, grid.half_length()).0)
    }

    /// Real-space source evaluator for [`Simulation::with_source`].
    pub fn source(
        &self,
        grid: &GridSpec,
        gamma: f64,
        delta: f64,
        flux: &FluxModel,
    ) -> Result<crate::evolution::Source> {
        let g = self.exact(grid, 0.0);
        let (a0, _) = self.amplitude(0.0);
        let p_shape = solve_p(&g.map(|v| v / a0), delta)?;
        let shapes: Vec<(f64, f64, f64)> = (0..grid.len())
            .map(|i| self.shape(grid.x(i), grid.half_length()))
            .collect();
        let shapes = Arc::new(shapes);
        let p_shape = Arc::new(p_shape.into_values());
        let flux = flux.clone();
        let solution = *self;
        Ok(Box::new(move |t: f64, _grid: &GridSpec| {
            let (a, da) = solution.amplitude(t);
            shapes
                .iter()
                .zip(p_shape.iter())
                .map(|(&(g, g1, g2), &p)| {
                    let u = a * g;
                    da * g + flux.f_prime(u) * a * g1 - gamma * a * p - a * g2
                })
                .collect()
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmsError {
    pub num_points: usize,
    pub dt: f64,
    /// Largest `|u - u*|_2` over all steps.
    pub max_l2_error: f64,
}

/// Runs the forced problem with fixed `dt` and returns the worst L2 error.
pub fn mms_run(
    config: &SolverConfig,
    flux: &FluxModel,
    solution: ManufacturedSolution,
    grid: &GridSpec,
    dt: f64,
) -> Result<MmsError> {
    let cfg = SolverConfig {
        dt: DtPolicy::Fixed(dt),
        ..config.clone()
    };
    cfg.validate()?;
    let u0 = solution.exact(grid, 0.0);
    let source = solution.source(grid, cfg.gamma, cfg.delta, flux)?;
    let mut sim = Simulation::new(&u0, &cfg, flux)?.with_source(source);
    let steps = (cfg.t_end / dt).round().max(1.0) as usize;
    let h = cfg.t_end / steps as f64;
    let mut worst = 0.0_f64;
    for i in 1..=steps {
        sim.step(h)?;
        let t = i as f64 * h;
        let err = l2_norm(&sim.u().sub(&solution.exact(grid, t))?);
        worst = worst.max(err);
    }
    Ok(MmsError {
        num_points: grid.len(),
        dt: h,
        max_l2_error: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MmsStudy {
    pub solution: ManufacturedSolution,
    /// Errors versus `N` at the smallest `dt`.
    pub spatial: Vec<MmsError>,
    /// Errors versus `dt` at the largest `N`.
    pub temporal: Vec<MmsError>,
    /// Observed orders between consecutive `dt` values.
    pub temporal_orders: Vec<f64>,
}

impl MmsStudy {
    /// `e(N_0) / e(N_1)` for the first two grids.
    pub fn spatial_reduction(&self) -> Option<f64> {
        match self.spatial.as_slice() {
            [a, b, ..] => Some(a.max_l2_error / b.max_l2_error),
            _ => None,
        }
    }
}

pub fn mms_study(
    config: &SolverConfig,
    flux: &FluxModel,
    solution: ManufacturedSolution,
    half_length: f64,
    n_list: &[usize],
    dt_list: &[f64],
) -> Result<MmsStudy> {
    use rayon::prelude::*;
    let dt_min = dt_list.iter().copied().fold(f64::INFINITY, f64::min);
    let n_max = n_list.iter().copied().max().unwrap_or(64);
    let spatial = n_list
        .par_iter()
        .map(|&n| mms_run(config, flux, solution, &make_grid(half_length, n)?, dt_min))
        .collect::<Result<Vec<_>>>()?;
    let fine = make_grid(half_length, n_max)?;
    let temporal = dt_list
        .par_iter()
        .map(|&dt| mms_run(config, flux, solution, &fine, dt))
        .collect::<Result<Vec<_>>>()?;
    let temporal_orders = temporal
        .windows(2)
        .map(|w| observed_order(w[0].max_l2_error, w[1].max_l2_error, w[0].dt / w[1].dt))
        .collect();
    Ok(MmsStudy {
        solution,
        spatial,
        temporal,
        temporal_orders,
    })
}
