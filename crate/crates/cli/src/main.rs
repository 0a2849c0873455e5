mod config;
mod error;
mod run;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use laplace_rf::quadrature::exactness_suite;

use crate::config::RunConfig;
use crate::error::CliError;

/// Thread count for the worker pool.
const THREADS_VAR: &str = "LAPLACE_RF_THREADS";

#[derive(Parser)]
#[command(name = "laplace-rf", version, about = "Rational-function solver for 2D Laplace problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON config.
    Run { config: PathBuf },
    /// List the gallery of geometries, data and complete problems.
    Gallery {
        #[arg(long)]
        list: bool,
    },
    /// Check the rational Gauss-Chebyshev rules against adaptive quadrature.
    QuadCheck {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1.05)]
        rho_min: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Pass threshold on the worst relative error.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    // Fails only if the pool already exists, which leaves it usable.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn report_error(e: &CliError, dir: Option<&Path>) -> ExitCode {
    let record = serde_json::to_string(&e.record()).unwrap_or_else(|_| format!("{{\"error\":\"{e}\"}}"));
    eprintln!("{record}");
    if let Some(dir) = dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{record}\n"));
        }
    }
    ExitCode::from(e.exit_code() as u8)
}

fn run_command(path: &Path) -> ExitCode {
    let cfg = match RunConfig::load(path) {
        Ok(c) => c,
        Err(e) => return report_error(&e, None),
    };
    match run::run(&cfg, path) {
        Ok(report) => {
            println!("{}", report.display());
            ExitCode::SUCCESS
        }
        Err(e) => report_error(&e, Some(&cfg.outputs.dir)),
    }
}

fn quad_check(trials: usize, rho_min: f64, seed: u64, tol: f64) -> ExitCode {
    let r = match exactness_suite(trials, rho_min, seed) {
        Ok(r) => r,
        Err(e) => return report_error(&CliError::Solve(e), None),
    };
    let pass = r.worst <= tol && r.closed_form_error <= 1e-13;
    let summary = serde_json::json!({
        "trials": trials,
        "rho_min": rho_min,
        "seed": seed,
        "worst_relative_error": r.worst,
        "closed_form_error": r.closed_form_error,
        "max_nodes": r.cases.iter().map(|c| c.nodes).max(),
        "pass": pass,
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return report_error(&e, None);
    }
    match cli.command {
        Command::Run { config } => run_command(&config),
        Command::Gallery { list } => {
            if !list {
                eprintln!("nothing to do; try `laplace-rf gallery --list`");
                return ExitCode::from(2);
            }
            let mut out = std::io::stdout().lock();
            for (name, about) in laplace_rf::gallery::list() {
                // A closed pipe (e.g. `| head`) is not an error.
                if writeln!(out, "{name:<26} {about}").is_err() {
                    break;
                }
            }
            ExitCode::SUCCESS
        }
        Command::QuadCheck { trials, rho_min, seed, tol } => quad_check(trials, rho_min, seed, tol),
    }
}
