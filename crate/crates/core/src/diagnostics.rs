//! Per-run monitoring of the a priori estimates.
//!
//! A [`DiagnosticsRecorder`] samples norms of `u` and `P` at every recorded
//! state; the check functions turn the finished [`DiagnosticsReport`] into
//! verdicts. Every check is a pure function of the report, so verdicts can
//! be recomputed from a stored report.
//!
//! Bounds whose constants are non-constructive are checked against measured
//! majorants (e.g. the run's own `sup |P|_inf`) or only reported.

use serde::{Deserialize, Serialize};

use crate::evolution::SimState;
use crate::grid::{derivative, l2_norm, l2_norm_sq, linf_norm, mean, tail_fraction};
use crate::nonlocal::{check_elliptic_identity, coupling_residual};

/// Relative slack on `|u(t)|^2 <= e^{2 gamma t} |u0|^2`.
pub const ENERGY_TOLERANCE: f64 = 1e-6;
/// Relative slack on the dissipation-augmented energy bound.
pub const DISSIPATION_TOLERANCE: f64 = 1e-5;
/// Relative slack on the `P_x` bounds.
pub const P_BOUND_TOLERANCE: f64 = 1e-8;
/// Absolute slack on the `L^inf` comparison bound.
pub const LINF_TOLERANCE: f64 = 1e-6;
/// `|mean(u)| <= MEAN_TOLERANCE * (|u0|_inf + 1)`.
pub const MEAN_TOLERANCE: f64 = 1e-12;
pub const IDENTITY_TOLERANCE: f64 = 1e-10;
/// Largest spectral energy fraction allowed beyond two thirds of Nyquist.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Time series recorded during a run, in CSV column order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub gamma: f64,
    pub delta: f64,
    pub times: Vec<f64>,
    pub u_l2_sq: Vec<f64>,
    pub ux_l2_sq: Vec<f64>,
    pub uxx_l2_sq: Vec<f64>,
    pub u_linf: Vec<f64>,
    pub p_l2: Vec<f64>,
    pub p_linf: Vec<f64>,
    pub px_l2: Vec<f64>,
    pub mean_u: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub identity_residual: Vec<f64>,
    pub coupling_residual: Vec<f64>,
    pub uxxx_l2_sq: Vec<f64>,
    pub ux_linf: Vec<f64>,
    pub px_linf: Vec<f64>,
    pub tail_fraction: Vec<f64>,
    /// Running time integrals, accumulated mode by mode with the
    /// exponential rule of [`log_mean`] (see [`DiagnosticsRecorder`]).
    #[serde(default)]
    pub int_ux_l2_sq: Vec<f64>,
    #[serde(default)]
    pub int_uxx_l2_sq: Vec<f64>,
    #[serde(default)]
    pub int_uxxx_l2_sq: Vec<f64>,
    /// `int_0^t e^{-2 gamma s} |u_x(s)|^2 ds`
    #[serde(default)]
    pub dissipation_integral: Vec<f64>,
}

/// Column names in CSV order.
pub const CSV_COLUMNS: [&str; 20] = [
    "t",
    "u_l2_sq",
    "ux_l2_sq",
    "uxx_l2_sq",
    "u_linf",
    "p_l2",
    "p_linf",
    "px_l2",
    "mean_u",
    "mean_p",
    "identity_residual",
    "coupling_residual",
    "uxxx_l2_sq",
    "ux_linf",
    "px_linf",
    "tail_fraction",
    "int_ux_l2_sq",
    "int_uxx_l2_sq",
    "int_uxxx_l2_sq",
    "dissipation_integral",
];

impl DiagnosticsReport {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Row `i` in [`CSV_COLUMNS`] order.
    pub fn row(&self, i: usize) -> [f64; 20] {
        [
            self.times[i],
            self.u_l2_sq[i],
            self.ux_l2_sq[i],
            self.uxx_l2_sq[i],
            self.u_linf[i],
            self.p_l2[i],
            self.p_linf[i],
            self.px_l2[i],
            self.mean_u[i],
            self.mean_p[i],
            self.identity_residual[i],
            self.coupling_residual[i],
            self.uxxx_l2_sq[i],
            self.ux_linf[i],
            self.px_linf[i],
            self.tail_fraction[i],
            self.int_ux_l2_sq[i],
            self.int_uxx_l2_sq[i],
            self.int_uxxx_l2_sq[i],
            self.dissipation_integral[i],
        ]
    }

    pub fn u0_l2(&self) -> f64 {
        self.u_l2_sq.first().copied().unwrap_or(0.0).sqrt()
    }

    pub fn u0_linf(&self) -> f64 {
        self.u_linf.first().copied().unwrap_or(0.0)
    }

    /// `sup_t |P(t)|_inf` over the recorded window.
    pub fn sup_p_linf(&self) -> f64 {
        self.p_linf.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_p_l2(&self) -> f64 {
        self.p_l2.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_ux_linf(&self) -> f64 {
        self.ux_linf.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_px_linf(&self) -> f64 {
        self.px_linf.iter().copied().fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        (0..self.len()).all(|i| self.row(i).iter().all(|v| v.is_finite()))
    }
}

/// Cumulative trapezoid integral of `values` over `times`.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for i in 0..values.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        out.push(acc);
    }
    out
}

pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    cumulative_trapezoid(times, values).last().copied().unwrap_or(0.0)
}

/// Logarithmic mean `(b - a) / ln(b / a)`: the average over a unit interval
/// of the exponential through `a` and `b`. Falls back to the arithmetic mean
/// when either value is not positive; never exceeds it.
pub fn log_mean(a: f64, b: f64) -> f64 {
    if !(a > 0.0 && b > 0.0) {
        return 0.5 * (a + b);
    }
    let ratio = b / a;
    if (ratio - 1.0).abs() < 1e-6 {
        // series of ratio/ln(ratio) about 1 keeps full precision
        let x = ratio - 1.0;
        return a * (1.0 + x / 2.0 - x * x / 12.0);
    }
    (b - a) / ratio.ln()
}

/// Accumulates a [`DiagnosticsReport`] from recorded states.
///
/// Time integrals are accumulated per Fourier mode: between two samples
/// each `|u_k(s)|^2` (times `e^{-2 gamma s}` for the dissipation integral)
/// is interpolated by an exponential, which is exact for the linear part of
/// the dynamics. Summing the modes first and applying the trapezoid rule
/// overestimates the integrals badly when high modes decay over a fraction
/// of one step.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecorder {
    report: DiagnosticsReport,
    previous: Option<(f64, Vec<f64>)>,
    integrals: [f64; 4],
}

/// `dx/N |u_k|^2` per slot, so that `sum_k k^{2m} e_k = |d^m u|^2`.
fn modal_energy(state: &SimState) -> Vec<f64> {
    let grid = state.u.grid();
    let scale = grid.dx() / grid.len() as f64;
    state.u.spectrum().iter().map(|c| scale * c.norm_sqr()).collect()
}

impl DiagnosticsRecorder {
    pub fn new(gamma: f64, delta: f64) -> Self {
        Self {
            report: DiagnosticsReport {
                gamma,
                delta,
                ..DiagnosticsReport::default()
            },
            previous: None,
            integrals: [0.0; 4],
        }
    }

    fn accumulate(&mut self, t: f64, energy: &[f64], grid: &crate::grid::GridSpec) {
        let Some((t0, prev)) = &self.previous else {
            return;
        };
        let h = t - t0;
        let gamma = self.report.gamma;
        let (w0, w1) = ((-2.0 * gamma * t0).exp(), (-2.0 * gamma * t).exp());
        let nyquist = grid.nyquist_slot();
        let mut sums = [0.0; 4];
        for (slot, (&a, &b)) in prev.iter().zip(energy).enumerate() {
            let k2 = grid.wavenumbers()[slot].powi(2);
            let plain = log_mean(a, b);
            let odd = if slot == nyquist { 0.0 } else { 1.0 };
            sums[0] += odd * k2 * plain;
            sums[1] += k2 * k2 * plain;
            sums[2] += odd * k2 * k2 * k2 * plain;
            sums[3] += odd * k2 * log_mean(w0 * a, w1 * b);
        }
        for (acc, s) in self.integrals.iter_mut().zip(sums) {
            *acc += h * s;
        }
    }

    pub fn record(&mut self, state: &SimState) {
        let energy = modal_energy(state);
        self.accumulate(state.t, &energy, state.u.grid());
        self.previous = Some((state.t, energy));
        let [i1, i2, i3, dissipation] = self.integrals;
        self.report.int_ux_l2_sq.push(i1);
        self.report.int_uxx_l2_sq.push(i2);
        self.report.int_uxxx_l2_sq.push(i3);
        self.report.dissipation_integral.push(dissipation);
        let r = &mut self.report;
        let delta = r.delta;
        let u = &state.u;
        let p = &state.p;
        let d = |order| derivative(u, order).expect("valid order");
        let ux = d(1);
        let px = derivative(p, 1).expect("valid order");
        r.times.push(state.t);
        r.u_l2_sq.push(l2_norm_sq(u));
        r.ux_l2_sq.push(l2_norm_sq(&ux));
        r.uxx_l2_sq.push(l2_norm_sq(&d(2)));
        r.u_linf.push(linf_norm(u));
        r.p_l2.push(l2_norm(p));
        r.p_linf.push(linf_norm(p));
        r.px_l2.push(l2_norm(&px));
        r.mean_u.push(mean(u));
        r.mean_p.push(mean(p));
        r.identity_residual
            .push(check_elliptic_identity(u, p, delta).expect("same grid"));
        r.coupling_residual
            .push(coupling_residual(u, p, delta).expect("same grid"));
        r.uxxx_l2_sq.push(l2_norm_sq(&d(3)));
        r.ux_linf.push(linf_norm(&ux));
        r.px_linf.push(linf_norm(&px));
        r.tail_fraction.push(tail_fraction(u));
    }

    pub fn finish(self) -> DiagnosticsReport {
        self.report
    }
}

/// Outcome of one monitored bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    /// Smallest `bound - value` over recorded times (negative on failure).
    pub worst_margin: f64,
    pub time_of_worst: f64,
    /// Earliest recorded time at which the bound failed.
    pub first_failure: Option<f64>,
}

impl Verdict {
    /// Builds a verdict from `(t, value, bound)` triples; passes when `value <= bound` everywhere.
    fn from_samples(name: &str, samples: impl Iterator<Item = (f64, f64, f64)>) -> Self {
        let mut worst_margin = f64::INFINITY;
        let mut time_of_worst = 0.0;
        let mut first_failure = None;
        let mut passed = true;
        for (t, value, bound) in samples {
            let margin = bound - value;
            let ok = value <= bound && value.is_finite();
            if !ok {
                passed = false;
                first_failure.get_or_insert(t);
            }
            if margin < worst_margin || margin.is_nan() {
                worst_margin = margin;
                time_of_worst = t;
            }
        }
        if worst_margin == f64::INFINITY {
            worst_margin = 0.0;
        }
        Self {
            name: name.to_string(),
            passed,
            worst_margin,
            time_of_worst,
            first_failure,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanVerdict {
    pub verdict: Verdict,
    pub worst_abs_mean: f64,
}

/// `|mean(u(t))| <= 1e-12 (|u0|_inf + 1)` at every recorded time.
pub fn mean_conservation_check(report: &DiagnosticsReport) -> MeanVerdict {
    let bound = MEAN_TOLERANCE * (report.u0_linf() + 1.0);
    let verdict = Verdict::from_samples(
        "mean_conservation",
        report
            .times
            .iter()
            .zip(&report.mean_u)
            .map(|(&t, &m)| (t, m.abs(), bound)),
    );
    MeanVerdict {
        verdict,
        worst_abs_mean: report.mean_u.iter().fold(0.0, |a, m| a.max(m.abs())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyVerdict {
    pub plain: Verdict,
    pub dissipation: Verdict,
}

impl EnergyVerdict {
    pub fn passed(&self) -> bool {
        self.plain.passed && self.dissipation.passed
    }
}

/// Gronwall bounds:
/// `|u(t)|^2 <= e^{2 gamma t} |u0|^2` and
/// `|u(t)|^2 + 2 e^{2 gamma t} int_0^t e^{-2 gamma s} |u_x(s)|^2 ds <= e^{2 gamma t} |u0|^2`,
/// the time integral taken from the recorder's modal accumulation (by
/// trapezoid over the samples for reports without that column).
pub fn energy_bound_check(report: &DiagnosticsReport, gamma: f64) -> EnergyVerdict {
    let e0 = report.u_l2_sq.first().copied().unwrap_or(0.0);
    let weighted: Vec<f64> = report
        .times
        .iter()
        .zip(&report.ux_l2_sq)
        .map(|(&s, &g)| (-2.0 * gamma * s).exp() * g)
        .collect();
    let integral = if report.dissipation_integral.len() == report.len() {
        report.dissipation_integral.clone()
    } else {
        cumulative_trapezoid(&report.times, &weighted)
    };
    let plain = Verdict::from_samples(
        "energy_bound",
        report.times.iter().zip(&report.u_l2_sq).map(|(&t, &e)| {
            (t, e, (2.0 * gamma * t).exp() * e0 * (1.0 + ENERGY_TOLERANCE))
        }),
    );
    let dissipation = Verdict::from_samples(
        "energy_dissipation_bound",
        report
            .times
            .iter()
            .zip(&report.u_l2_sq)
            .zip(&integral)
            .map(|((&t, &e), &i)| {
                let growth = (2.0 * gamma * t).exp();
                (t, e + 2.0 * growth * i, growth * e0 * (1.0 + DISSIPATION_TOLERANCE))
            }),
    );
    EnergyVerdict { plain, dissipation }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PBoundsVerdict {
    /// `|P_x(t)|_2 <= e^{gamma t} |u0|_2`
    pub gradient_l2: Verdict,
    /// `sqrt(delta) |P_x(t)|_inf <= e^{gamma t} |u0|_2`
    pub gradient_sup: Verdict,
    pub measured_sup_p_linf: f64,
    pub measured_sup_p_l2: f64,
}

impl PBoundsVerdict {
    pub fn passed(&self) -> bool {
        self.gradient_l2.passed && self.gradient_sup.passed
    }
}

pub fn p_bounds_check(report: &DiagnosticsReport, gamma: f64, u0_l2: f64) -> PBoundsVerdict {
    let bound = |t: f64| (gamma * t).exp() * u0_l2 * (1.0 + P_BOUND_TOLERANCE);
    let sqrt_delta = report.delta.sqrt();
    PBoundsVerdict {
        gradient_l2: Verdict::from_samples(
            "p_gradient_l2",
            report
                .times
                .iter()
                .zip(&report.px_l2)
                .map(|(&t, &v)| (t, v, bound(t))),
        ),
        gradient_sup: Verdict::from_samples(
            "p_gradient_sup",
            report
                .times
                .iter()
                .zip(&report.px_linf)
                .map(|(&t, &v)| (t, sqrt_delta * v, bound(t))),
        ),
        measured_sup_p_linf: report.sup_p_linf(),
        measured_sup_p_l2: report.sup_p_l2(),
    }
}

/// `|u(t)|_inf <= |u0|_inf + gamma (sup |P|_inf) t + 1e-6`, using the run's
/// own measured `sup |P|_inf`.
pub fn linf_bound_check(report: &DiagnosticsReport, gamma: f64, u0_linf: f64) -> Verdict {
    let c = report.sup_p_linf();
    Verdict::from_samples(
        "linf_comparison",
        report
            .times
            .iter()
            .zip(&report.u_linf)
            .map(|(&t, &v)| (t, v, u0_linf + gamma * c * t + LINF_TOLERANCE)),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularitySummary {
    pub sup_ux_l2_sq: f64,
    pub int_uxx_l2_sq: f64,
    pub sup_uxx_l2_sq: f64,
    pub int_uxxx_l2_sq: f64,
    pub max_tail_fraction: f64,
    pub verdict: Verdict,
}

/// Final value of a recorded running integral, or the trapezoid rule over
/// `samples` for reports without that column.
fn running_integral(report: &DiagnosticsReport, running: &[f64], samples: &[f64]) -> f64 {
    if running.len() == report.len() {
        running.last().copied().unwrap_or(0.0)
    } else {
        trapezoid(&report.times, samples)
    }
}

/// Reports the higher-order energy quantities; asserts only finiteness and
/// a spectral tail fraction of at most [`TAIL_TOLERANCE`].
pub fn regularity_monitor(report: &DiagnosticsReport) -> RegularitySummary {
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let finite = report.all_finite();
    let mut verdict = Verdict::from_samples(
        "regularity_tail",
        report
            .times
            .iter()
            .zip(&report.tail_fraction)
            .map(|(&t, &f)| (t, f, TAIL_TOLERANCE)),
    );
    if !finite {
        verdict.passed = false;
    }
    RegularitySummary {
        sup_ux_l2_sq: sup(&report.ux_l2_sq),
        int_uxx_l2_sq: running_integral(report, &report.int_uxx_l2_sq, &report.uxx_l2_sq),
        sup_uxx_l2_sq: sup(&report.uxx_l2_sq),
        int_uxxx_l2_sq: running_integral(report, &report.int_uxxx_l2_sq, &report.uxxx_l2_sq),
        max_tail_fraction: sup(&report.tail_fraction),
        verdict,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub max_identity_residual: f64,
    pub max_coupling_residual: f64,
    pub verdict: Verdict,
}

/// Worst elliptic-identity and coupling residuals along the trajectory.
pub fn identity_residual_series(report: &DiagnosticsReport) -> IdentitySummary {
    let worst: Vec<f64> = report
        .identity_residual
        .iter()
        .zip(&report.coupling_residual)
        .map(|(a, b)| a.max(*b))
        .collect();
    IdentitySummary {
        max_identity_residual: report.identity_residual.iter().copied().fold(0.0, f64::max),
        max_coupling_residual: report.coupling_residual.iter().copied().fold(0.0, f64::max),
        verdict: Verdict::from_samples(
            "identity_residuals",
            report
                .times
                .iter()
                .zip(worst)
                .map(|(&t, r)| (t, r, IDENTITY_TOLERANCE)),
        ),
    }
}

/// All verdicts for a finished run, plus the measured constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mean: MeanVerdict,
    pub energy: EnergyVerdict,
    pub p_bounds: PBoundsVerdict,
    pub linf: Verdict,
    pub regularity: RegularitySummary,
    pub identities: IdentitySummary,
    pub sup_p_linf: f64,
    pub sup_ux_linf: f64,
}

impl RunSummary {
    pub fn evaluate(report: &DiagnosticsReport) -> Self {
        let gamma = report.gamma;
        Self {
            mean: mean_conservation_check(report),
            energy: energy_bound_check(report, gamma),
            p_bounds: p_bounds_check(report, gamma, report.u0_l2()),
            linf: linf_bound_check(report, gamma, report.u0_linf()),
            regularity: regularity_monitor(report),
            identities: identity_residual_series(report),
            sup_p_linf: report.sup_p_linf(),
            sup_ux_linf: report.sup_ux_linf(),
        }
    }

    pub fn verdicts(&self) -> Vec<&Verdict> {
        vec![
            &self.mean.verdict,
            &self.energy.plain,
            &self.energy.dissipation,
            &self.p_bounds.gradient_l2,
            &self.p_bounds.gradient_sup,
            &self.linf,
            &self.regularity.verdict,
            &self.identities.verdict,
        ]
    }

    pub fn passed(&self) -> bool {
        self.verdicts().iter().all(|v| v.passed)
    }
}
