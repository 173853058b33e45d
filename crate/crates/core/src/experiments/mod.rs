//! Experiment drivers: configuration files, twin-run stability, delta
//! sweeps, refinement and manufactured-solution studies, output writers and
//! the built-in verification suite.

pub mod config;
pub mod mms;
pub mod output;
pub mod refine;
pub mod stability;
pub mod sweep;
pub mod verify;

pub use config::{ConfigError, ExperimentConfig};
pub use mms::{mms_study, ManufacturedSolution, MmsStudy};
pub use refine::{refinement_study, RefinementStudy};
pub use stability::{stability_experiment, StabilityReport};
pub use sweep::{delta_sweep, SweepTable};

/// `ln(e_coarse / e_fine) / ln(ratio)` where `ratio` is the refinement factor.
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> f64 {
    (e_coarse / e_fine).ln() / ratio.ln()
}

#[cfg(test)]
mod tests {
    use super::observed_order;

    #[test]
    fn order_of_exact_power_law() {
        let e = |h: f64| 3.0 * h.powi(4);
        assert!((observed_order(e(0.1), e(0.05), 2.0) - 4.0).abs() < 1e-12);
        assert!((observed_order(e(0.3), e(0.1), 3.0) - 4.0).abs() < 1e-12);
    }
}
