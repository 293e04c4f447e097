use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kdf_cli::canonical;
use kdf_cli::{csv, error_report, parse_job, run, CliError, Settings};

/// Evaluate Kampé de Fériet series, verify their PDE systems and solve the
/// associated Cauchy problem. Reads a JSON job from stdin unless --job is given.
#[derive(Debug, Parser)]
#[command(name = "kdf", version)]
struct Args {
    /// Job document; stdin when absent.
    #[arg(long)]
    job: Option<PathBuf>,
    /// Also write point results as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Relative tolerance of the series summation.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on the diagonal index r + s.
    #[arg(long)]
    max_diagonal: Option<usize>,
    /// Gauss-Jacobi nodes for Cauchy quadrature.
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn read_input(path: Option<&PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
            Ok(s)
        }
    }
}

fn fail(command: Option<kdf_cli::job::Command>, e: &CliError) -> ExitCode {
    print!("{}", canonical::to_string(&error_report(command, e)));
    eprintln!("kdf: {e}");
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let settings = Settings {
        tol: args.tol,
        max_diagonal: args.max_diagonal,
        nodes: args.nodes,
        seed: args.seed,
    };
    let job = match read_input(args.job.as_ref()).and_then(|text| parse_job(&text)) {
        Ok(job) => job,
        Err(e) => return fail(None, &e),
    };
    let outcome = match run(&job, &settings) {
        Ok(o) => o,
        Err(e) => return fail(Some(job.command), &e),
    };
    if let Some(path) = &args.csv {
        let Some(rows) = &outcome.rows else {
            let e = CliError::schema("--csv", format!("{} produces no point results", job.command.name()));
            return fail(Some(job.command), &e);
        };
        if let Err(e) = std::fs::write(path, csv(rows)) {
            return fail(Some(job.command), &CliError::Io(format!("{}: {e}", path.display())));
        }
    }
    print!("{}", canonical::to_string(&outcome.report));
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
