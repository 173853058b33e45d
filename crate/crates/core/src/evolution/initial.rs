//! Initial profiles. Every profile is made zero-mean before use and its
//! nonlocal partner `P0` is the zero-mean antiderivative.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{OhError, Result};
use crate::grid::{l2_norm, linf_norm, Field, GridSpec};
use crate::nonlocal::solve_p;
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Profile {
    /// `a sin(m pi x / L)`
    Sine { amplitude: f64, mode: u32 },
    /// `a sin(m pi x / L) exp(-((x - c)/w)^2)`
    SinePacket {
        amplitude: f64,
        mode: u32,
        width: f64,
        center: f64,
    },
    /// `a exp(-((x - c)/w)^2)`
    Gaussian {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// `a ((x - c)/w) exp(-((x - c)/w)^2)`
    GaussianDerivative {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// `a exp(1 - 1/(1 - r^2))` for `r = |x - c|/radius < 1`, zero outside.
    Bump {
        amplitude: f64,
        center: f64,
        radius: f64,
    },
    /// `a * sum_{j=1..modes} (A_j cos(k_j x) + B_j sin(k_j x)) / sqrt(modes)`
    /// with `A_j, B_j` drawn uniformly from `[-1, 1)` by SplitMix64
    /// in the order `A_1, B_1, A_2, B_2, ...`.
    Random { amplitude: f64, modes: u32, seed: u64 },
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Sine { .. } => "sine",
            Profile::SinePacket { .. } => "sine_packet",
            Profile::Gaussian { .. } => "gaussian",
            Profile::GaussianDerivative { .. } => "gaussian_derivative",
            Profile::Bump { .. } => "bump",
            Profile::Random { .. } => "random",
        }
    }

    /// Samples the raw profile (before mean removal).
    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        let pi_over_l = std::f64::consts::PI / grid.half_length();
        let field = match *self {
            Profile::Sine { amplitude, mode } => {
                Field::from_fn(grid, |x| amplitude * (mode as f64 * pi_over_l * x).sin())
            }
            Profile::SinePacket {
                amplitude,
                mode,
                width,
                center,
            } => {
                check_width(width)?;
                Field::from_fn(grid, |x| {
                    let s = (x - center) / width;
                    amplitude * (mode as f64 * pi_over_l * x).sin() * (-s * s).exp()
                })
            }
            Profile::Gaussian {
                amplitude,
                width,
                center,
            } => {
                check_width(width)?;
                Field::from_fn(grid, |x| {
                    let s = (x - center) / width;
                    amplitude * (-s * s).exp()
                })
            }
            Profile::GaussianDerivative {
                amplitude,
                width,
                center,
            } => {
                check_width(width)?;
                Field::from_fn(grid, |x| {
                    let s = (x - center) / width;
                    amplitude * s * (-s * s).exp()
                })
            }
            Profile::Bump {
                amplitude,
                center,
                radius,
            } => {
                check_width(radius)?;
                Field::from_fn(grid, |x| {
                    let r = (x - center) / radius;
                    if r.abs() < 1.0 {
                        amplitude * (1.0 - 1.0 / (1.0 - r * r)).exp()
                    } else {
                        0.0
                    }
                })
            }
            Profile::Random {
                amplitude,
                modes,
                seed,
            } => random_band_limited(grid, amplitude, modes, seed)?,
        };
        if let Some(i) = field.first_non_finite() {
            return Err(OhError::InvalidProfile(format!(
                "{} produced a non-finite sample at x = {}",
                self.name(),
                grid.x(i)
            )));
        }
        Ok(field)
    }
}

fn check_width(w: f64) -> Result<()> {
    if !(w.is_finite() && w > 0.0) {
        return Err(OhError::InvalidProfile(format!(
            "width/radius must be positive, got {w}"
        )));
    }
    Ok(())
}

fn random_band_limited(grid: &GridSpec, amplitude: f64, modes: u32, seed: u64) -> Result<Field> {
    let n = grid.len();
    let modes = modes as usize;
    if modes == 0 || modes >= n / 2 {
        return Err(OhError::InvalidProfile(format!(
            "random profile needs 1 <= modes < N/2 = {}, got {modes}",
            n / 2
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let scale = amplitude / (modes as f64).sqrt();
    for j in 1..=modes {
        let a = rng.next_symmetric();
        let b = rng.next_symmetric();
        // a cos + b sin = Re((a - i b) e^{ikx})
        let c = Complex64::new(a, -b) * (scale * n as f64 / 2.0);
        coeffs[j] = c;
        coeffs[n - j] = c.conj();
    }
    // storage is anchored at x_0 = -L; shift phases so the sum is in x
    for (slot, c) in coeffs.iter_mut().enumerate() {
        let k = grid.wavenumbers()[slot];
        *c *= Complex64::from_polar(1.0, -k * grid.half_length());
    }
    Field::from_spectrum(grid, &coeffs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub u0: Field,
    pub p0: Field,
    pub u0_l2: f64,
    pub u0_linf: f64,
    pub p0_l2: f64,
}

/// Removes the mean in place (no-op for profiles that are exactly odd).
pub fn remove_mean(field: &Field) -> Field {
    let m = field.values().iter().sum::<f64>() / field.values().len() as f64;
    field.map(|v| v - m)
}

/// Samples `profile`, subtracts its mean and pairs it with `P0 = solve_p(u0, 0)`.
pub fn prepare_initial_data(profile: &Profile, grid: &GridSpec) -> Result<InitialData> {
    let raw = profile.sample(grid)?;
    let u0 = match profile {
        Profile::Sine { .. } => raw,
        _ => remove_mean(&raw),
    };
    let p0 = solve_p(&u0, 0.0)?;
    Ok(InitialData {
        u0_l2: l2_norm(&u0),
        u0_linf: linf_norm(&u0),
        p0_l2: l2_norm(&p0),
        u0,
        p0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, mean};
    use std::f64::consts::PI;

    #[test]
    fn sine_is_unchanged() {
        let g = make_grid(PI, 64).unwrap();
        let prof = Profile::Sine {
            amplitude: 1.5,
            mode: 2,
        };
        let raw = prof.sample(&g).unwrap();
        let data = prepare_initial_data(&prof, &g).unwrap();
        assert_eq!(data.u0, raw);
    }

    #[test]
    fn gaussian_mean_removed() {
        let g = make_grid(10.0, 256).unwrap();
        let data = prepare_initial_data(
            &Profile::Gaussian {
                amplitude: 1.0,
                width: 1.0,
                center: 0.0,
            },
            &g,
        )
        .unwrap();
        assert!(mean(&data.u0).abs() <= 1e-15);
    }

    #[test]
    fn sine_antiderivative() {
        let g = make_grid(PI, 64).unwrap();
        let data = prepare_initial_data(
            &Profile::Sine {
                amplitude: 1.0,
                mode: 1,
            },
            &g,
        )
        .unwrap();
        for (i, p) in data.p0.values().iter().enumerate() {
            assert!((p + g.x(i).cos()).abs() < 1e-13);
        }
        assert!((data.p0_l2 * data.p0_l2 - PI).abs() < 1e-12);
        assert!((data.u0_l2 * data.u0_l2 - PI).abs() < 1e-12);
    }

    #[test]
    fn random_profile_is_seeded_and_band_limited() {
        let g = make_grid(PI, 64).unwrap();
        let prof = Profile::Random {
            amplitude: 1.0,
            modes: 5,
            seed: 99,
        };
        let a = prof.sample(&g).unwrap();
        let b = prof.sample(&g).unwrap();
        assert_eq!(a, b);
        // first draw pair gives the j = 1 cosine/sine weights
        let mut rng = SplitMix64::new(99);
        let (a1, b1) = (rng.next_symmetric(), rng.next_symmetric());
        let expected_at = |x: f64| {
            let mut r = SplitMix64::new(99);
            (1..=5)
                .map(|j| {
                    let (aj, bj) = (r.next_symmetric(), r.next_symmetric());
                    aj * (j as f64 * x).cos() + bj * (j as f64 * x).sin()
                })
                .sum::<f64>()
                / 5f64.sqrt()
        };
        assert!(a1.abs() <= 1.0 && b1.abs() <= 1.0);
        for i in 0..64 {
            assert!((a.values()[i] - expected_at(g.x(i))).abs() < 1e-13);
        }
        assert!(crate::grid::tail_fraction(&a) < 1e-28);
    }

    #[test]
    fn bad_parameters_rejected() {
        let g = make_grid(PI, 32).unwrap();
        let bad = [
            Profile::Gaussian {
                amplitude: 1.0,
                width: 0.0,
                center: 0.0,
            },
            Profile::Random {
                amplitude: 1.0,
                modes: 16,
                seed: 1,
            },
            Profile::Sine {
                amplitude: f64::INFINITY,
                mode: 1,
            },
        ];
        for p in bad {
            assert!(prepare_initial_data(&p, &g).is_err(), "{p:?}");
        }
    }

    #[test]
    fn bump_has_compact_support() {
        let g = make_grid(5.0, 128).unwrap();
        let prof = Profile::Bump {
            amplitude: 2.0,
            center: 0.0,
            radius: 1.0,
        };
        let raw = prof.sample(&g).unwrap();
        assert_eq!(raw.values()[0], 0.0);
        assert!((raw.values()[64] - 2.0).abs() < 1e-15);
        let data = prepare_initial_data(&prof, &g).unwrap();
        assert!(mean(&data.u0).abs() < 1e-15);
    }
}
