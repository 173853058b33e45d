//! Fourth-order exponential time differencing Runge-Kutta (Cox-Matthews)
//! in wavenumber space.
//!
//! Per mode the system reads `u_hat' = L(k) u_hat + N(u, t)` where
//! `L(k) = -k^2 + gamma / (delta k^2 + i k)` carries diffusion and the
//! nonlocal term, and `N = -i k f(u)_hat` (+ an optional source) is
//! evaluated pseudospectrally. The zero mode has `L = 0` and `N = 0`, so
//! the mean is carried over unchanged bit for bit.

use num_complex::Complex64;

use crate::error::{OhError, Result};
use crate::flux::FluxModel;
use crate::grid::{Field, GridSpec};
use crate::nonlocal::p_symbol;

use super::config::SolverConfig;
use super::SimState;

/// Below this `|z|` the phi functions are summed from their Taylor series.
const SERIES_RADIUS: f64 = 1.0;
const SERIES_TERMS: usize = 30;

/// `phi_0..phi_3` at `z`, where `phi_0 = e^z`,
/// `phi_{m+1}(z) = (phi_m(z) - 1/m!) / z`.
pub fn phi_functions(z: Complex64) -> [Complex64; 4] {
    let e = z.exp();
    if z.norm() < SERIES_RADIUS {
        // phi_m(z) = sum_n z^n / (n + m)!
        let mut out = [Complex64::new(0.0, 0.0); 4];
        out[0] = e;
        for (m, slot) in out.iter_mut().enumerate().skip(1) {
            let mut term = Complex64::new(1.0 / factorial(m), 0.0);
            let mut sum = term;
            for n in 1..SERIES_TERMS {
                term = term * z / (n + m) as f64;
                sum += term;
            }
            *slot = sum;
        }
        out
    } else {
        let one = Complex64::new(1.0, 0.0);
        let p1 = (e - one) / z;
        let p2 = (p1 - one) / z;
        let p3 = (p2 - 0.5) / z;
        [e, p1, p2, p3]
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Growth rate `-k^2 + gamma / (delta k^2 + i k)` of a single mode; `0` at `k = 0`.
pub fn linear_symbol(k: f64, gamma: f64, delta: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(-k * k, 0.0) + gamma / Complex64::new(delta * k * k, k)
}

#[derive(Debug, Clone)]
struct StepCoefficients {
    dt_bits: u64,
    exp_full: Vec<Complex64>,
    exp_half: Vec<Complex64>,
    /// `(h/2) phi_1(L h/2)`
    half_phi1: Vec<Complex64>,
    /// `h (phi_1 - 3 phi_2 + 4 phi_3)`
    f1: Vec<Complex64>,
    /// `h (phi_2 - 2 phi_3)`
    f2: Vec<Complex64>,
    /// `h (-phi_2 + 4 phi_3)`
    f3: Vec<Complex64>,
}

impl StepCoefficients {
    fn new(lin: &[Complex64], dt: f64) -> Self {
        let n = lin.len();
        let mut c = Self {
            dt_bits: dt.to_bits(),
            exp_full: Vec::with_capacity(n),
            exp_half: Vec::with_capacity(n),
            half_phi1: Vec::with_capacity(n),
            f1: Vec::with_capacity(n),
            f2: Vec::with_capacity(n),
            f3: Vec::with_capacity(n),
        };
        for &l in lin {
            let [e, p1, p2, p3] = phi_functions(l * dt);
            let [eh, ph1, _, _] = phi_functions(l * (0.5 * dt));
            c.exp_full.push(e);
            c.exp_half.push(eh);
            c.half_phi1.push(ph1 * (0.5 * dt));
            c.f1.push((p1 - p2 * 3.0 + p3 * 4.0) * dt);
            c.f2.push((p2 - p3 * 2.0) * dt);
            c.f3.push((-p2 + p3 * 4.0) * dt);
        }
        c
    }
}

/// Real-space source term `S(t, x)` added to the right-hand side.
pub type Source = Box<dyn Fn(f64, &GridSpec) -> Vec<f64> + Send + Sync>;

/// A running simulation: spectral state plus cached stepping coefficients.
pub struct Simulation {
    grid: GridSpec,
    gamma: f64,
    delta: f64,
    dealias: bool,
    blowup_threshold: f64,
    flux: FluxModel,
    u_hat: Vec<Complex64>,
    linear: Vec<Complex64>,
    coefficients: Option<StepCoefficients>,
    source: Option<Source>,
    t: f64,
    step_index: usize,
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("grid", &self.grid)
            .field("gamma", &self.gamma)
            .field("delta", &self.delta)
            .field("t", &self.t)
            .field("step_index", &self.step_index)
            .finish()
    }
}

impl Simulation {
    /// Starts from `u0` at `t = 0`. `u0` must be zero-mean and below the
    /// blow-up threshold.
    pub fn new(u0: &Field, config: &SolverConfig, flux: &FluxModel) -> Result<Self> {
        Self::resume(u0, 0.0, 0, config, flux)
    }

    pub fn resume(
        u: &Field,
        t: f64,
        step_index: usize,
        config: &SolverConfig,
        flux: &FluxModel,
    ) -> Result<Self> {
        config.validate()?;
        // surfaces NonZeroMean before any stepping
        crate::nonlocal::solve_p(u, config.delta)?;
        let grid = u.grid().clone();
        let linear = (0..grid.len())
            .map(|slot| {
                let k = grid.wavenumbers()[slot];
                Complex64::new(-k * k, 0.0) + p_symbol(&grid, slot, config.delta) * config.gamma
            })
            .collect();
        let sim = Self {
            u_hat: u.spectrum(),
            grid,
            gamma: config.gamma,
            delta: config.delta,
            dealias: config.dealias,
            blowup_threshold: config.blowup_threshold,
            flux: flux.clone(),
            linear,
            coefficients: None,
            source: None,
            t,
            step_index,
        };
        sim.check_blowup(u.values())?;
        Ok(sim)
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn flux(&self) -> &FluxModel {
        &self.flux
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.u_hat
    }

    pub fn u(&self) -> Field {
        Field::from_spectrum(&self.grid, &self.u_hat).expect("spectrum length matches grid")
    }

    /// `P` computed from the current spectrum.
    pub fn p(&self) -> Field {
        let coeffs: Vec<Complex64> = self
            .u_hat
            .iter()
            .enumerate()
            .map(|(slot, c)| c * p_symbol(&self.grid, slot, self.delta))
            .collect();
        Field::from_spectrum(&self.grid, &coeffs).expect("spectrum length matches grid")
    }

    pub fn state(&self) -> SimState {
        SimState {
            t: self.t,
            u: self.u(),
            p: self.p(),
            step_index: self.step_index,
        }
    }

    fn check_blowup(&self, values: &[f64]) -> Result<()> {
        let mut worst = 0.0_f64;
        for v in values {
            if !v.is_finite() {
                worst = f64::INFINITY;
                break;
            }
            worst = worst.max(v.abs());
        }
        if worst > self.blowup_threshold || worst.is_nan() {
            return Err(OhError::BlowUp {
                t: self.t,
                step: self.step_index,
                value: worst,
            });
        }
        Ok(())
    }

    fn nonlinear(&self, u_hat: &[Complex64], t: f64) -> Vec<Complex64> {
        let u = self.grid.inverse(u_hat);
        let mut flux_hat: Vec<Complex64> = u
            .iter()
            .map(|&v| Complex64::new(self.flux.f(v), 0.0))
            .collect();
        self.grid.forward_complex(&mut flux_hat);
        if self.dealias {
            self.grid.dealias(&mut flux_hat);
        }
        for (slot, c) in flux_hat.iter_mut().enumerate() {
            *c *= -self.grid.derivative_symbol(slot, 1);
        }
        if let Some(source) = &self.source {
            let s = source(t, &self.grid);
            for (c, s_hat) in flux_hat.iter_mut().zip(self.grid.forward(&s)) {
                *c += s_hat;
            }
        }
        flux_hat
    }

    /// Advances one step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(OhError::InvalidConfig(format!("dt must be > 0, got {dt}")));
        }
        let stale = self
            .coefficients
            .as_ref()
            .is_none_or(|c| c.dt_bits != dt.to_bits());
        if stale {
            self.coefficients = Some(StepCoefficients::new(&self.linear, dt));
        }
        let c = self.coefficients.as_ref().expect("coefficients set above");
        let t = self.t;
        let v = &self.u_hat;
        let n = v.len();

        let nv = self.nonlinear(v, t);
        let a: Vec<Complex64> = (0..n)
            .map(|i| c.exp_half[i] * v[i] + c.half_phi1[i] * nv[i])
            .collect();
        let na = self.nonlinear(&a, t + 0.5 * dt);
        let b: Vec<Complex64> = (0..n)
            .map(|i| c.exp_half[i] * v[i] + c.half_phi1[i] * na[i])
            .collect();
        let nb = self.nonlinear(&b, t + 0.5 * dt);
        let cc: Vec<Complex64> = (0..n)
            .map(|i| c.exp_half[i] * a[i] + c.half_phi1[i] * (nb[i] * 2.0 - nv[i]))
            .collect();
        let nc = self.nonlinear(&cc, t + dt);
        let next: Vec<Complex64> = (0..n)
            .map(|i| {
                c.exp_full[i] * v[i]
                    + c.f1[i] * nv[i]
                    + c.f2[i] * (na[i] + nb[i]) * 2.0
                    + c.f3[i] * nc[i]
            })
            .collect();

        self.u_hat = next;
        self.t = t + dt;
        self.step_index += 1;
        let u = self.grid.inverse(&self.u_hat);
        self.check_blowup(&u)
    }

    /// Overrides the current time; used to snap onto `t_end` exactly.
    pub(crate) fn set_time(&mut self, t: f64) {
        self.t = t;
    }
}
