//! Flat `key = value` experiment configuration.
//!
//! One setting per line with dotted keys, `#` starts a comment, blank lines
//! are ignored. Lists are comma separated. Example:
//!
//! ```text
//! grid.L = 3.141592653589793
//! grid.N = 256
//! solver.gamma = 0.5
//! solver.delta = 0.2, 0.1, 0.05, 0.025
//! solver.dt = auto
//! flux.name = burgers
//! profile.name = sine
//! profile.amplitude = 1
//! ```

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::error::OhError;
use crate::evolution::{DtPolicy, Profile, SolverConfig};
use crate::flux::{burgers_flux, cubic_flux, custom_flux, FluxModel};
use crate::grid::{make_grid, GridSpec};

use super::mms::ManufacturedSolution;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxSpec {
    pub name: String,
    pub coefficients: Vec<f64>,
    pub range: (f64, f64),
}

impl FluxSpec {
    pub fn build(&self) -> Result<FluxModel, OhError> {
        match self.name.as_str() {
            "burgers" => Ok(burgers_flux()),
            "cubic" => Ok(cubic_flux(self.range)),
            "custom" => custom_flux(self.coefficients.clone(), self.range),
            other => Err(OhError::InvalidFlux(format!("unknown flux '{other}'"))),
        }
    }
}

/// Shape parameters shared by the `profile.*` and `perturbation.*` groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSpec {
    pub name: String,
    pub amplitude: f64,
    pub mode: u32,
    pub width: f64,
    pub center: f64,
    pub radius: f64,
    pub modes: u32,
}

impl ProfileSpec {
    fn new(name: &str, amplitude: f64, mode: u32) -> Self {
        Self {
            name: name.into(),
            amplitude,
            mode,
            width: 1.0,
            center: 0.0,
            radius: 1.0,
            modes: 8,
        }
    }

    pub fn build(&self, seed: u64) -> Result<Profile, OhError> {
        let p = match self.name.as_str() {
            "sine" => Profile::Sine {
                amplitude: self.amplitude,
                mode: self.mode,
            },
            "sine_packet" => Profile::SinePacket {
                amplitude: self.amplitude,
                mode: self.mode,
                width: self.width,
                center: self.center,
            },
            "gaussian" => Profile::Gaussian {
                amplitude: self.amplitude,
                width: self.width,
                center: self.center,
            },
            "gaussian_derivative" => Profile::GaussianDerivative {
                amplitude: self.amplitude,
                width: self.width,
                center: self.center,
            },
            "bump" => Profile::Bump {
                amplitude: self.amplitude,
                center: self.center,
                radius: self.radius,
            },
            "random" => Profile::Random {
                amplitude: self.amplitude,
                modes: self.modes,
                seed,
            },
            other => return Err(OhError::InvalidProfile(format!("unknown profile '{other}'"))),
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub half_length: f64,
    pub num_points: usize,
    pub solver: SolverConfig,
    /// Sweep list; `solver.delta` is its first entry.
    pub deltas: Vec<f64>,
    pub flux: FluxSpec,
    pub profile: ProfileSpec,
    pub perturbation: ProfileSpec,
    pub output_dir: Option<PathBuf>,
    /// Number of evenly spaced snapshots written by `run` (besides t = 0 and t_end).
    pub snapshots: usize,
    pub seed: u64,
    pub refine_n: Vec<usize>,
    pub refine_dt: Vec<f64>,
    pub mms: ManufacturedSolution,
    pub mms_n: Vec<usize>,
    pub mms_dt: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            half_length: std::f64::consts::PI,
            num_points: 256,
            solver: SolverConfig {
                gamma: 0.5,
                delta: 0.1,
                ..SolverConfig::default()
            },
            deltas: vec![0.1],
            flux: FluxSpec {
                name: "burgers".into(),
                coefficients: Vec::new(),
                range: (-2.0, 2.0),
            },
            profile: ProfileSpec::new("sine", 1.0, 1),
            perturbation: ProfileSpec::new("sine", 1e-3, 2),
            output_dir: None,
            snapshots: 0,
            seed: 0,
            refine_n: vec![32, 64, 128],
            refine_dt: vec![0.04, 0.02, 0.01, 0.005],
            mms: ManufacturedSolution::DecayingSine { mode: 1 },
            mms_n: vec![64, 128],
            mms_dt: vec![0.1, 0.05, 0.025, 0.0125],
        }
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<GridSpec, OhError> {
        make_grid(self.half_length, self.num_points)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        parse_config(&text)
    }

    /// Cross-field checks run after parsing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |e: OhError| ConfigError::Invalid(e.to_string());
        self.grid().map_err(invalid)?;
        self.solver.validate().map_err(invalid)?;
        for &d in &self.deltas {
            SolverConfig {
                delta: d,
                ..self.solver.clone()
            }
            .validate()
            .map_err(invalid)?;
        }
        self.flux.build().map_err(invalid)?;
        self.profile.build(self.seed).map_err(invalid)?;
        self.perturbation.build(self.seed.wrapping_add(1)).map_err(invalid)?;
        Ok(())
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| format!("expected a number, got '{}'", v.trim()))
}

fn parse_usize(v: &str) -> Result<usize, String> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| format!("expected a non-negative integer, got '{}'", v.trim()))
}

fn parse_list<T>(v: &str, item: fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    let out: Vec<T> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(item)
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("expected a non-empty list".into());
    }
    Ok(out)
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.trim() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => Err(format!("expected true/false, got '{other}'")),
    }
}

fn parse_range(v: &str) -> Result<(f64, f64), String> {
    let r = parse_list(v, parse_f64)?;
    if r.len() != 2 {
        return Err(format!("expected 'lo, hi', got {} values", r.len()));
    }
    Ok((r[0], r[1]))
}

fn apply_profile_key(p: &mut ProfileSpec, field: &str, v: &str) -> Result<(), String> {
    match field {
        "name" => p.name = v.trim().to_string(),
        "amplitude" => p.amplitude = parse_f64(v)?,
        "mode" => p.mode = parse_usize(v)? as u32,
        "width" => p.width = parse_f64(v)?,
        "center" => p.center = parse_f64(v)?,
        "radius" => p.radius = parse_f64(v)?,
        "modes" => p.modes = parse_usize(v)? as u32,
        _ => return Err(format!("unknown key '{field}'")),
    }
    Ok(())
}

/// Parses the key-value text; unknown keys and malformed values are
/// reported with their line number.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut delta_set = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |message: String| ConfigError::Syntax { line, message };
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let apply = |cfg: &mut ExperimentConfig| -> Result<(), String> {
            match key {
                "grid.L" => cfg.half_length = parse_f64(value)?,
                "grid.N" => cfg.num_points = parse_usize(value)?,
                "solver.gamma" => cfg.solver.gamma = parse_f64(value)?,
                "solver.delta" => cfg.deltas = parse_list(value, parse_f64)?,
                "solver.dt" => {
                    cfg.solver.dt = if value.trim() == "auto" {
                        DtPolicy::Auto
                    } else {
                        DtPolicy::Fixed(parse_f64(value)?)
                    }
                }
                "solver.t_end" => cfg.solver.t_end = parse_f64(value)?,
                "solver.cfl_safety" => cfg.solver.cfl_safety = parse_f64(value)?,
                "solver.dealias" => cfg.solver.dealias = parse_bool(value)?,
                "solver.blowup_threshold" => cfg.solver.blowup_threshold = parse_f64(value)?,
                "solver.record_every" => cfg.solver.record_every = parse_usize(value)?,
                "flux.name" => cfg.flux.name = value.trim().to_string(),
                "flux.coefficients" => cfg.flux.coefficients = parse_list(value, parse_f64)?,
                "flux.range" => cfg.flux.range = parse_range(value)?,
                "output.dir" => cfg.output_dir = Some(PathBuf::from(value.trim())),
                "output.snapshots" => cfg.snapshots = parse_usize(value)?,
                "seed" => {
                    cfg.seed = value
                        .trim()
                        .parse::<u64>()
                        .map_err(|_| format!("expected a 64-bit seed, got '{}'", value.trim()))?
                }
                "refine.N" => cfg.refine_n = parse_list(value, parse_usize)?,
                "refine.dt" => cfg.refine_dt = parse_list(value, parse_f64)?,
                "mms.solution" => cfg.mms = ManufacturedSolution::from_name(value.trim(), &cfg.mms)?,
                "mms.mode" => cfg.mms = cfg.mms.with_mode(parse_usize(value)? as u32),
                "mms.width" => cfg.mms = cfg.mms.with_width(parse_f64(value)?),
                "mms.N" => cfg.mms_n = parse_list(value, parse_usize)?,
                "mms.dt" => cfg.mms_dt = parse_list(value, parse_f64)?,
                k => {
                    if let Some(field) = k.strip_prefix("profile.") {
                        apply_profile_key(&mut cfg.profile, field, value)?
                    } else if let Some(field) = k.strip_prefix("perturbation.") {
                        apply_profile_key(&mut cfg.perturbation, field, value)?
                    } else {
                        return Err(format!("unknown key '{k}'"));
                    }
                }
            }
            Ok(())
        };
        apply(&mut cfg).map_err(syntax)?;
        if key == "solver.delta" {
            delta_set = true;
        }
    }
    if delta_set {
        cfg.solver.delta = cfg.deltas[0];
    } else {
        cfg.deltas = vec![cfg.solver.delta];
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_example() {
        let text = "\
# standard run
grid.L = 10
grid.N = 128
solver.gamma = 0.25   # rotation
solver.delta = 0.2, 0.1
solver.dt = 0.005
solver.t_end = 1.5
solver.dealias = false
solver.record_every = 4
flux.name = cubic
flux.range = -3, 3
profile.name = gaussian_derivative
profile.width = 2
perturbation.amplitude = 0.01
seed = 12345678901234
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.half_length, 10.0);
        assert_eq!(cfg.num_points, 128);
        assert_eq!(cfg.solver.gamma, 0.25);
        assert_eq!(cfg.deltas, vec![0.2, 0.1]);
        assert_eq!(cfg.solver.delta, 0.2);
        assert_eq!(cfg.solver.dt, DtPolicy::Fixed(0.005));
        assert!(!cfg.solver.dealias);
        assert_eq!(cfg.solver.record_every, 4);
        assert_eq!(cfg.flux.range, (-3.0, 3.0));
        assert_eq!(cfg.profile.name, "gaussian_derivative");
        assert_eq!(cfg.profile.width, 2.0);
        assert_eq!(cfg.perturbation.amplitude, 0.01);
        assert_eq!(cfg.seed, 12_345_678_901_234);
    }

    #[test]
    fn empty_config_is_default() {
        let cfg = parse_config("\n# nothing\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
    }

    #[test]
    fn line_diagnostics() {
        let err = parse_config("grid.N = 64\nsolver.gamma = abc\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("line 2"));

        let err = parse_config("grid.N 64\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));

        let err = parse_config("\n\nbogus.key = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 3") && err.to_string().contains("bogus.key"));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(parse_config("grid.N = 63"), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse_config("solver.delta = 1.5"), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse_config("flux.name = nope"), Err(ConfigError::Invalid(_))));
        assert!(matches!(parse_config("profile.name = nope"), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn missing_file_names_path() {
        let err = ExperimentConfig::load(Path::new("/definitely/not/here.cfg")).unwrap_err();
        assert!(err.to_string().contains("/definitely/not/here.cfg"));
    }
}
