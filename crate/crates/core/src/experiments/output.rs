//! File writers. Every number is written with 17 significant digits so
//! the text round-trips to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{DiagnosticsReport, CSV_COLUMNS};
use crate::evolution::SimState;

/// `{:.16e}` formatting: one leading digit plus sixteen decimals.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn diagnostics_csv(report: &DiagnosticsReport) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for i in 0..report.len() {
        let row = report.row(i);
        let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn snapshot_csv(state: &SimState) -> String {
    let mut out = String::from("x,u,P\n");
    let grid = state.u.grid();
    for (i, (u, p)) in state.u.values().iter().zip(state.p.values()).enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            format_number(grid.x(i)),
            format_number(*u),
            format_number(*p)
        );
    }
    out
}

/// `snapshot_<t>.csv` with `t` printed to six decimals.
pub fn snapshot_name(t: f64) -> String {
    format!("snapshot_{t:.6}.csv")
}

pub fn write_diagnostics(dir: &Path, report: &DiagnosticsReport) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("diagnostics.csv");
    fs::write(&path, diagnostics_csv(report))?;
    Ok(path)
}

pub fn write_snapshot(dir: &Path, state: &SimState) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(snapshot_name(state.t));
    fs::write(&path, snapshot_csv(state))?;
    Ok(path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}
