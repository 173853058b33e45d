//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Criteria 1-9 run the built-in scenarios of `ohsim::experiments::verify`
//! (tolerances are the constants pinned there and in `ohsim::diagnostics`).
//! Criterion 10 also runs the `verify` subcommand of the built binary.

use std::process::{Command, ExitCode};

use ohsim::experiments::verify::{self, CriterionResult};

fn verify_subcommand() -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ohsim"))
        .arg("verify")
        .env_remove("OHSIM_OUT")
        .output();
    match out {
        Ok(o) => {
            let table = String::from_utf8_lossy(&o.stdout);
            let rows = table.lines().filter(|l| l.contains("PASS")).count();
            (
                o.status.success() && rows == 10,
                format!("`ohsim verify` exit {:?}, {rows}/10 rows PASS", o.status.code()),
            )
        }
        Err(e) => (false, format!("cannot launch binary: {e}")),
    }
}

fn main() -> ExitCode {
    let mut results: Vec<CriterionResult> = vec![
        verify::elliptic_identity(),
        verify::coupling_identity(),
        verify::closed_form_p(),
        verify::mean_conservation(),
        verify::energy_bounds(),
        verify::linf_bound(),
        verify::stability(),
        verify::delta_convergence(),
        verify::manufactured_solutions(),
        verify::zero_data(),
    ];
    let (cli_ok, cli_detail) = verify_subcommand();
    let last = results.last_mut().expect("ten criteria");
    last.passed &= cli_ok;
    last.detail = format!("{}; {cli_detail}", last.detail);

    let mut all = true;
    for r in &results {
        all &= r.passed;
        println!(
            "criterion {:>2} {:<20} {}  {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
