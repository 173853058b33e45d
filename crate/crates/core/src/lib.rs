//! Pseudospectral solver for the dissipative Ostrovsky-Hunter equation
//!
//! ```text
//! u_t + f(u)_x = gamma P + u_xx,   P_x = u
//! ```
//!
//! and its parabolic-elliptic regularization `-delta P_xx + P_x = u`, on a
//! periodic surrogate `[-L, L)` of the real line. Runs are monitored against
//! the energy, `L^inf` and nonlocal-term estimates the model satisfies.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod flux;
pub mod grid;
pub mod nonlocal;
pub mod rng;

pub use diagnostics::{DiagnosticsReport, RunSummary, Verdict};
pub use error::{OhError, Result};
pub use evolution::{run, step, DtPolicy, SimState, Simulation, SolverConfig};
pub use flux::{burgers_flux, cubic_flux, custom_flux, FluxKind, FluxModel};
pub use grid::{make_grid, Field, GridSpec};
pub use nonlocal::solve_p;
