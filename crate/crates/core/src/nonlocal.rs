//! The nonlocal term `P`: solves `-delta P_xx + P_x = u` (or `P_x = u` when
//! `delta = 0`) by exact division in wavenumber space, and exposes the
//! identities that tie `P` to `u` as residuals.
//!
//! Mode conventions: the zero mode of `P` is set to zero, so `P` has zero
//! mean. The Nyquist mode of `P` is also zeroed, treating the inverse of the
//! first-order operator like an odd-order derivative. Both identities below
//! are exact for fields without Nyquist content.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{OhError, Result};
use crate::grid::{derivative, inner_product, l2_norm, l2_norm_sq, linf_norm, mean, Field, GridSpec};

/// Relative tolerance on `|mean(u)|` accepted by [`solve_p`].
pub const ZERO_MEAN_TOLERANCE: f64 = 1e-10;

const TINY: f64 = 1e-300;

/// Multiplier `1 / (delta k^2 + i k)` taking `u_hat` to `P_hat` on `slot`.
pub fn p_symbol(grid: &GridSpec, slot: usize, delta: f64) -> Complex64 {
    if slot == 0 || slot == grid.nyquist_slot() {
        return Complex64::new(0.0, 0.0);
    }
    let k = grid.wavenumbers()[slot];
    Complex64::new(delta * k * k, k).inv()
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(OhError::InvalidConfig(format!(
            "delta must be finite and >= 0, got {delta}"
        )));
    }
    Ok(())
}

fn check_zero_mean(u: &Field) -> Result<()> {
    let m = mean(u);
    let tolerance = ZERO_MEAN_TOLERANCE * (linf_norm(u) + 1.0);
    if m.abs() > tolerance || !m.is_finite() {
        return Err(OhError::NonZeroMean { mean: m, tolerance });
    }
    Ok(())
}

/// Solves for the zero-mean `P` with `-delta P_xx + P_x = u`.
pub fn solve_p(u: &Field, delta: f64) -> Result<Field> {
    check_delta(delta)?;
    check_zero_mean(u)?;
    let grid = u.grid();
    let mut coeffs = u.spectrum();
    for (slot, c) in coeffs.iter_mut().enumerate() {
        *c *= p_symbol(grid, slot, delta);
    }
    Field::from_spectrum(grid, &coeffs)
}

/// Relative defect of `delta^2 |P_xx|^2 + |P_x|^2 = |u|^2`.
pub fn check_elliptic_identity(u: &Field, p: &Field, delta: f64) -> Result<f64> {
    u.same_grid(p)?;
    let px = derivative(p, 1)?;
    let pxx = derivative(p, 2)?;
    let u2 = l2_norm_sq(u);
    let lhs = delta * delta * l2_norm_sq(&pxx) + l2_norm_sq(&px);
    Ok((lhs - u2).abs() / u2.max(TINY))
}

/// `integral u P dx`, which equals `delta |P_x|^2`.
pub fn coupling_product(u: &Field, p: &Field, _delta: f64) -> Result<f64> {
    inner_product(u, p)
}

/// Relative defect of `integral u P = delta |P_x|^2`, scaled by `|u|^2`.
pub fn coupling_residual(u: &Field, p: &Field, delta: f64) -> Result<f64> {
    let product = coupling_product(u, p, delta)?;
    let px = derivative(p, 1)?;
    Ok((product - delta * l2_norm_sq(&px)).abs() / l2_norm_sq(u).max(TINY))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundVerdict {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative when violated.
    pub margin: f64,
}

/// Checks `sqrt(delta) |P_x|_inf <= |u|_2` with relative slack `1e-8`.
pub fn sup_gradient_bound_check(u: &Field, p: &Field, delta: f64) -> Result<BoundVerdict> {
    u.same_grid(p)?;
    let px = derivative(p, 1)?;
    let lhs = delta.sqrt() * linf_norm(&px);
    let rhs = l2_norm(u);
    Ok(BoundVerdict {
        holds: lhs <= rhs * (1.0 + 1e-8),
        lhs,
        rhs,
        margin: rhs - lhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EllipticSolveReport {
    pub identity_residual: f64,
    pub coupling_residual: f64,
    pub p_mean: f64,
}

pub fn elliptic_report(u: &Field, p: &Field, delta: f64) -> Result<EllipticSolveReport> {
    Ok(EllipticSolveReport {
        identity_residual: check_elliptic_identity(u, p, delta)?,
        coupling_residual: coupling_residual(u, p, delta)?,
        p_mean: mean(p),
    })
}

/// Second-order finite-difference solve used to cross-check [`solve_p`].
///
/// `delta > 0`: centered three-point stencil, gauge `P_0 = 0`, which leaves
/// a tridiagonal system for `P_1..P_{N-1}` (the dropped row is implied by
/// the zero mean of `u`). `delta = 0`: cumulative trapezoid rule. Either
/// way the result is shifted to zero mean.
pub fn solve_p_banded(u: &Field, delta: f64) -> Result<Field> {
    check_delta(delta)?;
    check_zero_mean(u)?;
    let grid = u.grid();
    let n = grid.len();
    let h = grid.dx();
    let rhs = u.values();
    let mut p = vec![0.0; n];
    if delta == 0.0 {
        for i in 1..n {
            p[i] = p[i - 1] + 0.5 * h * (rhs[i - 1] + rhs[i]);
        }
    } else {
        let lower = -delta / (h * h) - 0.5 / h;
        let diag = 2.0 * delta / (h * h);
        let upper = -delta / (h * h) + 0.5 / h;
        // Thomas sweep over unknowns 1..n-1
        let m = n - 1;
        let mut c_prime = vec![0.0; m];
        let mut d_prime = vec![0.0; m];
        for r in 0..m {
            let a = if r == 0 { 0.0 } else { lower };
            let denom = diag - a * if r == 0 { 0.0 } else { c_prime[r - 1] };
            c_prime[r] = if r + 1 < m { upper / denom } else { 0.0 };
            let prev = if r == 0 { 0.0 } else { d_prime[r - 1] };
            d_prime[r] = (rhs[r + 1] - a * prev) / denom;
        }
        for r in (0..m).rev() {
            let next = if r + 1 < m { p[r + 2] } else { 0.0 };
            p[r + 1] = d_prime[r] - c_prime[r] * next;
        }
    }
    let shift = p.iter().sum::<f64>() / n as f64;
    p.iter_mut().for_each(|v| *v -= shift);
    Field::new(grid, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::rng::SplitMix64;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn max_diff(a: &Field, f: impl Fn(f64) -> f64) -> f64 {
        a.values()
            .iter()
            .enumerate()
            .map(|(i, v)| (v - f(a.grid().x(i))).abs())
            .fold(0.0, f64::max)
    }

    /// Zero-mean, Nyquist-free random field from its Fourier modes.
    fn random_field(grid: &GridSpec, seed: u64, modes: usize) -> Field {
        let mut rng = SplitMix64::new(seed);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
        let n = grid.len();
        for j in 1..=modes.min(n / 2 - 1) {
            let c = Complex64::new(rng.next_symmetric(), rng.next_symmetric()) * n as f64 / 2.0;
            coeffs[j] = c;
            coeffs[n - j] = c.conj();
        }
        Field::from_spectrum(grid, &coeffs).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let g = make_grid(PI, 32).unwrap();
        let p = solve_p(&Field::zeros(&g), 0.3).unwrap();
        assert_eq!(linf_norm(&p), 0.0);
        assert_eq!(check_elliptic_identity(&Field::zeros(&g), &p, 0.3).unwrap(), 0.0);
        assert_eq!(coupling_product(&Field::zeros(&g), &p, 0.3).unwrap(), 0.0);
        let v = sup_gradient_bound_check(&Field::zeros(&g), &p, 0.3).unwrap();
        assert!(v.holds);
        assert_eq!(v.margin, 0.0);
    }

    #[test]
    fn closed_form_sine() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        let p1 = solve_p(&u, 1.0).unwrap();
        assert!(max_diff(&p1, |x| (x.sin() - x.cos()) / 2.0) <= 1e-12);
        let p0 = solve_p(&u, 0.0).unwrap();
        assert!(max_diff(&p0, |x| -x.cos()) <= 1e-12);
    }

    #[test]
    fn closed_form_cos3_half_delta() {
        // 1/(4.5 + 3i) = (4.5 - 3i)/29.25
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, |x| (3.0 * x).cos());
        let p = solve_p(&u, 0.5).unwrap();
        let err = max_diff(&p, |x| (4.5 * (3.0 * x).cos() + 3.0 * (3.0 * x).sin()) / 29.25);
        assert!(err <= 1e-13, "{err}");
    }

    #[test]
    fn identities_for_sine_delta_one() {
        let g = make_grid(PI, 64).unwrap();
        let u = Field::from_fn(&g, f64::sin);
        let p = solve_p(&u, 1.0).unwrap();
        let px = derivative(&p, 1).unwrap();
        let pxx = derivative(&p, 2).unwrap();
        assert!((l2_norm_sq(&px) - PI / 2.0).abs() < 1e-13);
        assert!((l2_norm_sq(&pxx) - PI / 2.0).abs() < 1e-13);
        assert!(check_elliptic_identity(&u, &p, 1.0).unwrap() <= 1e-12);
        assert!((coupling_product(&u, &p, 1.0).unwrap() - PI / 2.0).abs() < 1e-13);

        let v = sup_gradient_bound_check(&u, &p, 1.0).unwrap();
        assert!(v.holds);
        assert!((v.lhs - 0.5_f64.sqrt()).abs() < 1e-3);
        assert!((v.rhs - PI.sqrt()).abs() < 1e-13);

        let p0 = solve_p(&u, 0.0).unwrap();
        assert!(coupling_product(&u, &p0, 0.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn rejects_nonzero_mean_and_bad_delta() {
        let g = make_grid(PI, 32).unwrap();
        let u = Field::from_fn(&g, |x| 1.0 + x.sin());
        assert!(matches!(solve_p(&u, 0.1), Err(OhError::NonZeroMean { .. })));
        let s = Field::from_fn(&g, f64::sin);
        assert!(solve_p(&s, -0.1).is_err());
        assert!(solve_p(&s, f64::NAN).is_err());
    }

    #[test]
    fn banded_backend_agrees_to_second_order() {
        let g = make_grid(PI, 256).unwrap();
        let u = random_field(&g, 11, 4);
        for delta in [0.0, 0.1, 0.5] {
            let spectral = solve_p(&u, delta).unwrap();
            let banded = solve_p_banded(&u, delta).unwrap();
            let err = linf_norm(&spectral.sub(&banded).unwrap()) / linf_norm(&spectral);
            assert!(err < 5e-3, "delta {delta}: {err}");
        }
        // halving dx cuts the defect about four times
        let g2 = make_grid(PI, 512).unwrap();
        let u2 = Field::from_fn(&g2, |x| x.sin() + 0.5 * (3.0 * x).cos());
        let u1 = Field::from_fn(&g, |x| x.sin() + 0.5 * (3.0 * x).cos());
        let e1 = linf_norm(&solve_p(&u1, 0.2).unwrap().sub(&solve_p_banded(&u1, 0.2).unwrap()).unwrap());
        let e2 = linf_norm(&solve_p(&u2, 0.2).unwrap().sub(&solve_p_banded(&u2, 0.2).unwrap()).unwrap());
        let ratio = e1 / e2;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn p_has_zero_mean() {
        let g = make_grid(10.0, 128).unwrap();
        let u = random_field(&g, 3, 40);
        for delta in [0.0, 0.01, 0.5] {
            assert!(mean(&solve_p(&u, delta).unwrap()).abs() <= 1e-13);
        }
    }

    #[test]
    fn first_order_in_delta() {
        let g = make_grid(PI, 64).unwrap();
        let u = random_field(&g, 5, 6);
        let p0 = solve_p(&u, 0.0).unwrap();
        let e = |d: f64| l2_norm(&solve_p(&u, d).unwrap().sub(&p0).unwrap());
        let order = (e(0.02) / e(0.01)).log2();
        assert!((order - 1.0).abs() < 0.05, "{order}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn identities_exact_for_random_fields(seed in any::<u64>(), delta in 0.0f64..0.999) {
            let g = make_grid(PI, 64).unwrap();
            let u = random_field(&g, seed, 31);
            let p = solve_p(&u, delta).unwrap();
            prop_assert!(check_elliptic_identity(&u, &p, delta).unwrap() <= 1e-10);
            prop_assert!(coupling_residual(&u, &p, delta).unwrap() <= 1e-10);
            let product = coupling_product(&u, &p, delta).unwrap();
            prop_assert!(product <= l2_norm_sq(&u) * (1.0 + 1e-10));
            prop_assert!(mean(&p).abs() <= 1e-13);
            if delta > 0.0 {
                prop_assert!(sup_gradient_bound_check(&u, &p, delta).unwrap().holds);
            }
        }

        #[test]
        fn solve_is_linear(s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0, delta in 0.0f64..0.99) {
            let g = make_grid(PI, 32).unwrap();
            let u1 = random_field(&g, s1, 10);
            let u2 = random_field(&g, s2, 10);
            let combo = solve_p(&u1.axpby(a, &u2, b).unwrap(), delta).unwrap();
            let separate = solve_p(&u1, delta).unwrap().axpby(a, &solve_p(&u2, delta).unwrap(), b).unwrap();
            let scale = 1.0 + linf_norm(&combo);
            prop_assert!(linf_norm(&combo.sub(&separate).unwrap()) <= 1e-12 * scale);
        }
    }
}
