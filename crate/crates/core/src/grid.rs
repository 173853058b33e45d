//! Periodic grid on `[-L, L)` with FFT-based differentiation, quadrature
//! and two-thirds dealiasing.
//!
//! Transform convention: the forward transform is unnormalized and the
//! inverse carries the `1/N` factor, so for a real field `u`
//!
//! ```text
//! dx * sum_i u_i^2 = (2L / N^2) * sum_j |u_hat_j|^2
//! ```

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{OhError, Result};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform periodic discretization of `[-L, L)` with `N` points.
#[derive(Clone)]
pub struct GridSpec {
    half_length: f64,
    num_points: usize,
    dx: f64,
    wavenumbers: Arc<[f64]>,
    plans: Arc<Plans>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("half_length", &self.half_length)
            .field("num_points", &self.num_points)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.half_length.to_bits() == other.half_length.to_bits()
            && self.num_points == other.num_points
    }
}

/// Builds a grid; `N` must be even and at least 8, `L` positive and finite.
pub fn make_grid(half_length: f64, num_points: usize) -> Result<GridSpec> {
    GridSpec::new(half_length, num_points)
}

impl GridSpec {
    pub fn new(half_length: f64, num_points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(OhError::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if num_points < 8 || !num_points.is_multiple_of(2) {
            return Err(OhError::InvalidGrid(format!(
                "number of points must be even and >= 8, got {num_points}"
            )));
        }
        let n = num_points;
        let scale = std::f64::consts::PI / half_length;
        let wavenumbers: Arc<[f64]> = (0..n)
            .map(|i| Self::index_of(i, n) as f64 * scale)
            .collect();
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            half_length,
            num_points: n,
            dx: 2.0 * half_length / n as f64,
            wavenumbers,
            plans: Arc::new(plans),
        })
    }

    /// Signed mode index for storage slot `i`: `0, 1, .., N/2, -(N/2-1), .., -1`.
    fn index_of(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.num_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Length of the periodic domain, `2L`.
    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.x(i)).collect()
    }

    /// Wavenumbers `k_j = pi j / L` in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn mode_index(&self, slot: usize) -> i64 {
        Self::index_of(slot, self.num_points)
    }

    pub fn nyquist_slot(&self) -> usize {
        self.num_points / 2
    }

    pub fn k_max(&self) -> f64 {
        self.wavenumbers[self.nyquist_slot()]
    }

    /// True when slot `i` lies above two thirds of the Nyquist index.
    pub fn is_aliased_slot(&self, slot: usize) -> bool {
        3 * self.mode_index(slot).unsigned_abs() as usize > self.num_points
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.plans.forward.process(&mut buf);
        buf
    }

    pub fn forward_complex(&self, buf: &mut [Complex64]) {
        self.plans.forward.process(buf);
    }

    /// Inverse transform (with the `1/N` factor), keeping the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.plans.inverse.process(&mut buf);
        let scale = 1.0 / self.num_points as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Spectral multiplier `(ik)^order` for storage slot `i`. Odd orders
    /// vanish on the Nyquist slot.
    pub fn derivative_symbol(&self, slot: usize, order: u32) -> Complex64 {
        if order % 2 == 1 && slot == self.nyquist_slot() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[slot]).powu(order)
    }

    /// Two-thirds rule: zero every mode with `|j| > (2/3)(N/2)`.
    pub fn dealias(&self, coeffs: &mut [Complex64]) {
        for (slot, c) in coeffs.iter_mut().enumerate() {
            if self.is_aliased_slot(slot) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_points {
            return Err(OhError::LengthMismatch {
                expected: self.num_points,
                got: values.len(),
            });
        }
        Ok(())
    }
}

/// Free-function form of [`GridSpec::dealias`].
pub fn dealias(grid: &GridSpec, mut coeffs: Vec<Complex64>) -> Vec<Complex64> {
    grid.dealias(&mut coeffs);
    coeffs
}

/// A real scalar function sampled on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: &GridSpec, values: Vec<f64>) -> Result<Self> {
        grid.check_len(&values)?;
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.clone(),
            values: (0..grid.len()).map(|i| f(grid.x(i))).collect(),
        }
    }

    /// Builds a field from spectral coefficients in storage order.
    pub fn from_spectrum(grid: &GridSpec, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(OhError::LengthMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            values: grid.inverse(coeffs),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    /// Index of the first non-finite sample, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `a * self + b * other`.
    pub fn axpby(&self, a: f64, other: &Field, b: f64) -> Result<Field> {
        self.same_grid(other)?;
        Ok(Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.axpby(1.0, other, -1.0)
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(OhError::GridMismatch);
        }
        Ok(())
    }
}

/// Spectral derivative of order 1..=4.
pub fn derivative(field: &Field, order: u32) -> Result<Field> {
    if !(1..=4).contains(&order) {
        return Err(OhError::InvalidOrder(order));
    }
    let grid = field.grid();
    let mut coeffs = field.spectrum();
    for (slot, c) in coeffs.iter_mut().enumerate() {
        *c *= grid.derivative_symbol(slot, order);
    }
    Field::from_spectrum(grid, &coeffs)
}

/// Spatial average `(1/2L) * dx * sum u_i`.
pub fn mean(field: &Field) -> f64 {
    let grid = field.grid();
    grid.dx() * field.values().iter().sum::<f64>() / grid.period()
}

pub fn l2_norm_sq(field: &Field) -> f64 {
    field.grid().dx() * field.values().iter().map(|v| v * v).sum::<f64>()
}

pub fn l2_norm(field: &Field) -> f64 {
    l2_norm_sq(field).sqrt()
}

pub fn linf_norm(field: &Field) -> f64 {
    field.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn inner_product(a: &Field, b: &Field) -> Result<f64> {
    a.same_grid(b)?;
    Ok(a.grid().dx() * a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum::<f64>())
}

/// `L2` norm squared evaluated in wavenumber space.
pub fn spectral_energy(field: &Field) -> f64 {
    let grid = field.grid();
    let n = grid.len() as f64;
    field.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.period() / (n * n)
}

/// Fraction of the spectral energy carried by modes beyond two thirds of
/// the Nyquist index. Zero for the zero field.
pub fn tail_fraction(field: &Field) -> f64 {
    let grid = field.grid();
    let coeffs = field.spectrum();
    let mut total = 0.0;
    let mut tail = 0.0;
    for (slot, c) in coeffs.iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if grid.is_aliased_slot(slot) {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}
