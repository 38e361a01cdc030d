use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use modlab::run::{run, Failure};
use modlab::{plots, threads_from_env};
use modlab_core::duality::{run_oracle_suite, ORACLE_TOLERANCE};

/// Discrete modulus duality experiments.
///
/// Exit codes: 0 success, 1 runtime failure or selftest mismatch,
/// 2 validation error, 3 solver non-convergence.
#[derive(Parser)]
#[command(name = "modlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON configuration.
    Run { config: PathBuf },
    /// Compare the solver with exhaustive enumeration on small fixtures.
    Selftest,
    /// Collect results.json files under a directory into plot tables.
    EmitPlots { dir: PathBuf },
}

fn selftest() -> Result<(), Failure> {
    let rows = run_oracle_suite()?;
    println!("{:<24} {:>4} {:>6} {:>14} {:>14} {:>10}", "fixture", "p", "cells", "solver", "brute force", "rel diff");
    for r in &rows {
        println!(
            "{:<24} {:>4} {:>6} {:>14.9} {:>14.9} {:>10.2e} {}",
            r.name,
            r.p,
            r.cells,
            r.solver,
            r.brute_force,
            r.rel_diff,
            if r.passed { "ok" } else { "MISMATCH" }
        );
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} comparisons agree within {ORACLE_TOLERANCE:e}", rows.len());
        Ok(())
    } else {
        Err(Failure::SelftestMismatch(failed.join(", ")))
    }
}

fn main_inner(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Run { config } => {
            let dir = run(&config)?;
            println!("results written to {}", dir.display());
        }
        Command::Selftest => selftest()?,
        Command::EmitPlots { dir } => {
            for path in plots::emit_plots(&dir)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("modlab: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
