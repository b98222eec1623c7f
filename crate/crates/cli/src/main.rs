mod diagnose;
mod fit;
mod manifest;
mod region;
mod simulate;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Local-mixture frailty estimation for right-censored survival data.
#[derive(Debug, Parser)]
#[command(name = "lmfrail", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a dataset with the local-mixture method, the gamma-frailty EM, or both.
    Fit(fit::Args),
    /// Run the replicate study comparing both methods on simulated data.
    Simulate(simulate::Args),
    /// Variance/mean ratio and skewness of binned event counts.
    Diagnose(diagnose::Args),
    /// Query the admissible λ region.
    Region(region::Args),
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    NotConverged,
}

pub fn default_out_dir() -> PathBuf {
    PathBuf::from("lmfrail-out")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Fit(args) => fit::run(args),
        Command::Simulate(args) => simulate::run(args),
        Command::Diagnose(args) => diagnose::run(args),
        Command::Region(args) => region::run(args),
    };
    match result {
        Ok(Status::Converged) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
