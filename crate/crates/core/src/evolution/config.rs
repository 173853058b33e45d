use serde::{Deserialize, Serialize};

use crate::error::{OhError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtPolicy {
    Fixed(f64),
    /// Recompute the step from [`super::cfl_dt`] before every step.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Rotation coefficient multiplying `P`.
    pub gamma: f64,
    /// Elliptic regularization; `0` integrates the limit problem `P_x = u`.
    pub delta: f64,
    pub dt: DtPolicy,
    pub t_end: f64,
    pub cfl_safety: f64,
    pub dealias: bool,
    /// Cap on `|u|_inf`; exceeding it aborts the run.
    pub blowup_threshold: f64,
    pub record_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            delta: 0.1,
            dt: DtPolicy::Auto,
            t_end: 2.0,
            cfl_safety: 0.5,
            dealias: true,
            blowup_threshold: 1e6,
            record_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(OhError::InvalidConfig(msg));
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad(format!("gamma must be > 0, got {}", self.gamma));
        }
        if !(self.delta.is_finite() && (0.0..1.0).contains(&self.delta)) {
            return bad(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if self.blowup_threshold.is_nan() || self.blowup_threshold <= 0.0 {
            return bad(format!(
                "blowup_threshold must be > 0, got {}",
                self.blowup_threshold
            ));
        }
        if self.record_every == 0 {
            return bad("record_every must be >= 1".into());
        }
        if let DtPolicy::Fixed(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return bad(format!("dt must be > 0, got {dt}"));
            }
        }
        Ok(())
    }
}
