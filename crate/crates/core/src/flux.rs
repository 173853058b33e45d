//! The flux `f` together with its first two derivatives and the
//! subquadratic constant `C0` in `|f'(u)| <= C0 |u|`.

use serde::{Deserialize, Serialize};

use crate::error::{OhError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum FluxKind {
    /// `u^2 / 2`
    Burgers,
    /// `u^3 / 3`
    Cubic,
    /// `sum_i c_i u^i`, coefficients in ascending powers.
    Custom { coefficients: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxModel {
    pub kind: FluxKind,
    pub c0: f64,
    pub validity_range: (f64, f64),
}

pub fn burgers_flux() -> FluxModel {
    FluxModel {
        kind: FluxKind::Burgers,
        c0: 1.0,
        validity_range: (f64::NEG_INFINITY, f64::INFINITY),
    }
}

/// `f(u) = u^3/3`; on `[-a, a]` the subquadratic constant is `a`.
pub fn cubic_flux(range: (f64, f64)) -> FluxModel {
    FluxModel {
        kind: FluxKind::Cubic,
        c0: range.0.abs().max(range.1.abs()),
        validity_range: range,
    }
}

/// Polynomial flux validated on `range`; fails when the subquadratic
/// bound cannot hold.
pub fn custom_flux(coefficients: Vec<f64>, range: (f64, f64)) -> Result<FluxModel> {
    if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
        return Err(OhError::InvalidFlux(
            "polynomial coefficients must be a non-empty list of finite numbers".into(),
        ));
    }
    let mut model = FluxModel {
        kind: FluxKind::Custom { coefficients },
        c0: 0.0,
        validity_range: range,
    };
    model.c0 = validate_subquadratic(&model, range, 10_001)?;
    Ok(model)
}

fn poly(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

impl FluxModel {
    pub fn f(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 0.5 * u * u,
            FluxKind::Cubic => u * u * u / 3.0,
            FluxKind::Custom { coefficients } => poly(coefficients, u),
        }
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => u,
            FluxKind::Cubic => u * u,
            FluxKind::Custom { coefficients } => {
                let d: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| i as f64 * c)
                    .collect();
                poly(&d, u)
            }
        }
    }

    pub fn f_second(&self, u: f64) -> f64 {
        match &self.kind {
            FluxKind::Burgers => 1.0,
            FluxKind::Cubic => 2.0 * u,
            FluxKind::Custom { coefficients } => {
                let d: Vec<f64> = coefficients
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(i, c)| (i * (i - 1)) as f64 * c)
                    .collect();
                poly(&d, u)
            }
        }
    }

    /// Supremum of `|f''|` over `[lo, hi]`, sampled densely with both ends.
    pub fn sup_abs_f_second(&self, lo: f64, hi: f64) -> f64 {
        if let FluxKind::Burgers = self.kind {
            return 1.0;
        }
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let n = 2048;
        (0..=n)
            .map(|i| self.f_second(lo + (hi - lo) * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FluxKind::Burgers => "burgers",
            FluxKind::Cubic => "cubic",
            FluxKind::Custom { .. } => "custom",
        }
    }
}

fn uniform_samples(range: (f64, f64), samples: usize) -> impl Iterator<Item = f64> {
    let (lo, hi) = range;
    let step = (hi - lo) / (samples - 1) as f64;
    (0..samples).map(move |i| {
        // snap the sample nearest the origin so symmetric ranges hit 0 exactly
        let u = lo + step * i as f64;
        if u.abs() < 1e-9 * step.abs() {
            0.0
        } else {
            u
        }
    })
}

/// Estimates `C0 = sup |f'(u)|/|u|` over sampled `u != 0` in `range`.
///
/// Before sampling, the ratio is probed at `|u| = 1e-6` and `|u| = 1e-9`
/// on both sides; a ratio that keeps growing toward the origin means `f'(0) != 0` (or a
/// sub-linear `f'`) and yields [`OhError::DivergesAtZero`].
pub fn validate_subquadratic(flux: &FluxModel, range: (f64, f64), samples: usize) -> Result<f64> {
    let (lo, hi) = range;
    if samples < 100 {
        return Err(OhError::InvalidFlux(format!(
            "need at least 100 samples, got {samples}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && lo <= 0.0 && 0.0 <= hi && lo < hi) {
        return Err(OhError::InvalidFlux(format!(
            "range [{lo}, {hi}] must be finite and contain 0"
        )));
    }
    for sign in [1.0, -1.0] {
        let ratio = |eps: f64| flux.f_prime(sign * eps).abs() / eps;
        let near = ratio(1e-9);
        let far = ratio(1e-6);
        if !near.is_finite() || near > 10.0 * far.max(1e-300) && near > 1e-6 {
            return Err(OhError::DivergesAtZero);
        }
    }
    let mut sup = 0.0_f64;
    for u in uniform_samples(range, samples) {
        if u == 0.0 {
            continue;
        }
        let r = flux.f_prime(u).abs() / u.abs();
        if !r.is_finite() {
            return Err(OhError::DivergesAtZero);
        }
        sup = sup.max(r);
    }
    Ok(sup)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearityProbe {
    /// Fraction of samples where `|f''|` falls below the threshold.
    pub fraction: f64,
    pub flagged: Vec<f64>,
    pub threshold: f64,
}

/// Samples `f''` uniformly on `range` and reports where it (nearly)
/// vanishes. A sampled check cannot certify measure zero; treat the
/// result as a warning only.
pub fn genuine_nonlinearity_probe(
    flux: &FluxModel,
    range: (f64, f64),
    samples: usize,
) -> NonlinearityProbe {
    let threshold = 1e-12;
    let samples = samples.max(2);
    let flagged: Vec<f64> = uniform_samples(range, samples)
        .filter(|&u| flux.f_second(u).abs() < threshold)
        .collect();
    NonlinearityProbe {
        fraction: flagged.len() as f64 / samples as f64,
        flagged,
        threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn burgers_values() {
        let b = burgers_flux();
        assert_eq!(b.f(2.0), 2.0);
        assert_eq!(b.f_prime(-3.0), -3.0);
        assert_eq!(b.f_prime(-3.0).abs(), b.c0 * 3.0);
        assert_eq!(b.f_second(7.0), 1.0);
        assert_eq!(b.f_prime(0.0), 0.0);
    }

    #[test]
    fn subquadratic_constants() {
        let c0 = validate_subquadratic(&burgers_flux(), (-2.0, 2.0), 1001).unwrap();
        assert!((c0 - 1.0).abs() < 1e-15);
        let cubic = cubic_flux((-2.0, 2.0));
        let c0 = validate_subquadratic(&cubic, (-2.0, 2.0), 1001).unwrap();
        assert!((c0 - 2.0).abs() < 1e-12);
        assert_eq!(cubic.c0, 2.0);
    }

    #[test]
    fn transport_flux_diverges() {
        let linear = FluxModel {
            kind: FluxKind::Custom {
                coefficients: vec![0.0, 1.0],
            },
            c0: 0.0,
            validity_range: (-1.0, 1.0),
        };
        assert_eq!(
            validate_subquadratic(&linear, (-2.0, 2.0), 1000),
            Err(OhError::DivergesAtZero)
        );
        assert_eq!(
            custom_flux(vec![0.0, 1.0], (-2.0, 2.0)),
            Err(OhError::DivergesAtZero)
        );
    }

    #[test]
    fn validation_preconditions() {
        let b = burgers_flux();
        assert!(validate_subquadratic(&b, (-2.0, 2.0), 50).is_err());
        assert!(validate_subquadratic(&b, (0.5, 2.0), 500).is_err());
    }

    #[test]
    fn custom_polynomial_matches_burgers_plus_cubic() {
        // f = u^2/2 + u^3/3
        let m = custom_flux(vec![0.0, 0.0, 0.5, 1.0 / 3.0], (-1.0, 1.0)).unwrap();
        assert!((m.f(2.0) - (2.0 + 8.0 / 3.0)).abs() < 1e-14);
        assert!((m.f_prime(2.0) - 6.0).abs() < 1e-14);
        assert!((m.f_second(2.0) - 5.0).abs() < 1e-14);
        // sup_{|u|<=1} |1 + u| = 2
        assert!((m.c0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nonlinearity_probe() {
        let p = genuine_nonlinearity_probe(&burgers_flux(), (-2.0, 2.0), 1001);
        assert_eq!(p.fraction, 0.0);
        let p = genuine_nonlinearity_probe(&cubic_flux((-2.0, 2.0)), (-2.0, 2.0), 1001);
        assert_eq!(p.flagged, vec![0.0]);
        let linear = FluxModel {
            kind: FluxKind::Custom {
                coefficients: vec![0.0, 1.0],
            },
            c0: 0.0,
            validity_range: (-2.0, 2.0),
        };
        let p = genuine_nonlinearity_probe(&linear, (-2.0, 2.0), 1001);
        assert_eq!(p.fraction, 1.0);
    }

    #[test]
    fn sup_f_second() {
        assert_eq!(burgers_flux().sup_abs_f_second(-5.0, 5.0), 1.0);
        let c = cubic_flux((-3.0, 3.0));
        assert!((c.sup_abs_f_second(-1.5, 0.5) - 3.0).abs() < 1e-12);
    }

    fn fluxes() -> Vec<FluxModel> {
        vec![
            burgers_flux(),
            cubic_flux((-2.0, 2.0)),
            custom_flux(vec![0.3, 0.0, 0.5, -0.2, 0.05], (-3.0, 3.0)).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn subquadratic_bound_holds(u in -2.0f64..2.0) {
            for m in fluxes() {
                let slack = 1e-12 * (1.0 + u.abs());
                prop_assert!(m.f_prime(u).abs() <= m.c0 * u.abs() + slack, "{} at {}", m.name(), u);
            }
        }

        #[test]
        fn derivatives_match_finite_differences(u in -2.0f64..2.0) {
            let h = 1e-5;
            for m in fluxes() {
                let fd1 = (m.f(u + h) - m.f(u - h)) / (2.0 * h);
                let fd2 = (m.f_prime(u + h) - m.f_prime(u - h)) / (2.0 * h);
                let scale1 = m.f_prime(u).abs().max(1.0);
                let scale2 = m.f_second(u).abs().max(1.0);
                prop_assert!((fd1 - m.f_prime(u)).abs() <= 1e-6 * scale1);
                prop_assert!((fd2 - m.f_second(u)).abs() <= 1e-6 * scale2);
            }
        }
    }

    #[test]
    fn subquadratic_bound_dense_random() {
        // 10^5 points of the validity range, split-mix driven
        let mut rng = crate::rng::SplitMix64::new(7);
        for m in fluxes() {
            let (lo, hi) = if m.validity_range.0.is_finite() {
                m.validity_range
            } else {
                (-10.0, 10.0)
            };
            for _ in 0..100_000 {
                let u = lo + (hi - lo) * rng.next_f64();
                assert!(m.f_prime(u).abs() <= m.c0 * u.abs() * (1.0 + 1e-12) + 1e-15);
            }
        }
    }
}
