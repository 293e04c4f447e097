//! Job runner behind the `kdf` binary.
//!
//! A job is one JSON document naming a command; the result is one canonical
//! JSON report, plus an optional `x,y,value,status` CSV for point-wise commands.

pub mod canonical;
mod check;
pub mod job;
pub mod run;

pub use check::{run_checks, CheckResult, NAMES as CHECK_NAMES};
pub use job::{parse_job, CliError, JobSpec, Settings};
pub use run::{error_report, run, Outcome, Row};

use std::fmt::Write;

use canonical::format_g17;

/// CSV with header `x,y,value,status`; failed points leave `value` empty.
pub fn csv(rows: &[Row]) -> String {
    let mut out = String::from("x,y,value,status\n");
    for r in rows {
        let value = r.value.map(format_g17).unwrap_or_default();
        writeln!(out, "{},{},{},{}", format_g17(r.x), format_g17(r.y), value, r.status).expect("string write");
    }
    out
}
