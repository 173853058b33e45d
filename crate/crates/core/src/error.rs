use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OhError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field has {got} samples, grid expects {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("derivative order {0} not supported (expected 1..=4)")]
    InvalidOrder(u32),

    #[error("field contains non-finite sample at index {0}")]
    NonFinite(usize),

    #[error("nonlocal solve requires zero-mean data: |mean| = {mean:e} exceeds {tolerance:e}")]
    NonZeroMean { mean: f64, tolerance: f64 },

    #[error("flux ratio |f'(u)|/|u| grows without bound as u -> 0")]
    DivergesAtZero,

    #[error("invalid flux: {0}")]
    InvalidFlux(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid initial profile: {0}")]
    InvalidProfile(String),

    #[error("blow-up at t = {t} (step {step}): |u| reached {value:e}")]
    BlowUp { t: f64, step: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, OhError>;
