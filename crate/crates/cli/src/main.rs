use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mixbound_cli::{commands, plot, sink, CliError, THREADS_ENV};

#[derive(Parser)]
#[command(name = "mixbound", version, about = "Passive-scalar mixing runs with mix-norm bound checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, stream diagnostics and check the requested bounds.
    Simulate { config: PathBuf },
    /// Estimate the Jacobian and Riesz BMO constants over a random ensemble.
    EstimateConstants { config: PathBuf },
    /// Render recorded diagnostics as an SVG chart.
    Plot { records: PathBuf, out: PathBuf },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config } => {
            let outcome = commands::simulate(&config)?;
            let r = &outcome.report;
            for c in &r.checks {
                println!(
                    "{:<15} lambda_fit = {:<24} holds = {}",
                    c.kind.name(),
                    c.lambda_fit,
                    c.holds
                );
            }
            if r.under_resolved {
                eprintln!(
                    "warning: run is under-resolved (max tail fraction {:.3e})",
                    r.max_resolved_fraction
                );
            }
            println!("report written to {}", outcome.report_path.display());
            Ok(outcome.exit_code())
        }
        Command::EstimateConstants { config } => {
            let report = commands::estimate_constants(&config)?;
            for row in &report.resolutions {
                println!(
                    "n = {:<4} jacobian max = {:?}  riesz max = {:?}",
                    row.n, row.jacobian_bmo.max_ratio, row.riesz_bmo.max_ratio
                );
            }
            Ok(0)
        }
        Command::Plot { records, out } => {
            let recs = sink::read_ndjson(&records)?;
            let svg = plot::render(&plot::panels(&recs)?);
            fs::write(&out, svg).map_err(|e| CliError::Io { path: out, source: e })?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
