//! `cfl <command> <file> [options]`: run one analysis on a system file.
//!
//! Exit codes: 0 decided, 2 undecided, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Parser)]
#[command(name = "cfl", version, about = "Derived flags, Goursat bundles, symmetry quotients and cascade linearization")]
struct Args {
    /// One of: flags, goursat, esfl, symmetry, quotient, subconnection,
    /// reduce, necessity, sufficiency, euler, reconstruct.
    command: String,
    /// System file.
    file: PathBuf,
    /// Chain frozen by the reduction.
    #[arg(long, value_name = "N")]
    drop: Option<usize>,
    /// Name of the function the dropped chain is frozen to.
    #[arg(long, value_name = "NAME")]
    with: Option<String>,
    /// Chain retained (sufficiency) or analysed (euler).
    #[arg(long, value_name = "N")]
    chain: Option<usize>,
    /// Seed of the probe-point generator.
    #[arg(long, value_name = "S", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to PATH instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Probe points per zero test.
    #[arg(long, global = true, default_value_t = 5)]
    probes: usize,
    /// Relative tolerance of numeric zero tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cfl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<u8, cfl::CliError> {
    let start = Instant::now();
    let cmd: cfl::Command = args.command.parse()?;
    let file = cfl::load(&args.file)?;
    let opts = cfl::Options {
        drop: args.drop,
        with: args.with.clone(),
        chain: args.chain,
        seed: args.seed,
        probes: args.probes,
        tol: args.tol,
    };
    let report = cfl::run(cmd, &file, &opts)?;
    let text = match args.format {
        Format::Text => report.to_text(Some(start.elapsed())),
        Format::Machine => report.to_machine(),
    };
    match &args.out {
        Some(p) => std::fs::write(p, text).map_err(|e| cfl::CliError::Io {
            path: p.display().to_string(),
            msg: e.to_string(),
        })?,
        None => print!("{text}"),
    }
    Ok(if report.decided() { 0 } else { 2 })
}
