//! Command-line driver: simulate / verify / sweep.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use beamlab::analysis;
use beamlab::config::RunConfig;
use beamlab::error::Error;
use beamlab::output;
use beamlab::pipeline;
use beamlab::verify;

#[derive(Parser)]
#[command(
    name = "beamlab",
    version,
    about = "Simulate the damped beam equation with time-variable coefficients, \
             evaluate its scaled energy functionals, and measure Gaussian-profile decay"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation described by a config file and write result tables.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the out_dir configured in the file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run even outside the effective-damping region (marks the run
        /// exploratory).
        #[arg(long)]
        force: bool,
        /// Worker threads (used by sweep; accepted here for symmetry).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a named verification suite: identities, hardy, convergence, all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run the pipeline over a grid of (alpha, beta) points.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// alpha range as start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// beta range as start:stop:count
        #[arg(long, allow_hyphen_values = true)]
        beta: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_)
        | Error::InvalidInput(_)
        | Error::InvalidModel(_)
        | Error::InvalidCoefficient(_)
        | Error::OutOfRegion { .. } => 2,
        Error::BlowUpDetected { .. } => 3,
        _ => 4,
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "range must be start:stop:count, got {text:?}"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad range start {:?}", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad range stop {:?}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad range count {:?}", parts[2])))?;
    if count == 0 {
        return Err(Error::InvalidInput("range count must be >= 1".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn run() -> Result<u8, Error> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            out,
            force,
            workers: _,
        } => {
            let mut config = RunConfig::from_path(&config)?;
            if let Some(dir) = out {
                config.output.out_dir = dir;
            }
            let artifacts = pipeline::run_pipeline(&config, force)?;
            let out_dir = config.output.out_dir.clone();
            output::write_run(&artifacts, &out_dir)?;
            let summary = &artifacts.summary;
            println!(
                "status={} region={} m_star={:.6e} slope={} r2={}",
                summary.status,
                summary.region,
                summary.m_star,
                summary
                    .fit_shift
                    .as_ref()
                    .map(|f| format!("{:.4}", f.slope))
                    .unwrap_or_else(|| "n/a".into()),
                summary
                    .fit_shift
                    .as_ref()
                    .map(|f| format!("{:.4}", f.r_squared))
                    .unwrap_or_else(|| "n/a".into()),
            );
            println!("results written to {}", out_dir.display());
            Ok(0)
        }
        Command::Verify { suite, seed } => {
            let report = verify::verify_suite(&suite, seed)?;
            for check in &report.checks {
                println!(
                    "[{}] {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
            }
            if report.all_passed() {
                println!("verify {suite}: all {} checks passed", report.checks.len());
                Ok(0)
            } else {
                let failed: Vec<&str> = report
                    .checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.as_str())
                    .collect();
                eprintln!("verify {suite}: failed checks: {}", failed.join(", "));
                Ok(1)
            }
        }
        Command::Sweep {
            config,
            alpha,
            beta,
            out,
            workers,
        } => {
            let mut config = RunConfig::from_path(&config)?;
            if let Some(dir) = out {
                config.output.out_dir = dir;
            }
            let alphas = parse_range(&alpha)?;
            let betas = parse_range(&beta)?;
            let workers = workers.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get().min(4))
                    .unwrap_or(1)
            });
            let points = analysis::sweep(&alphas, &betas, &config, workers)?;
            let failed = points.iter().filter(|p| p.status == "failed").count();
            output::write_sweep(&points, &config.output.out_dir)?;
            println!(
                "swept {} points ({} failed); map written to {}",
                points.len(),
                failed,
                config.output.out_dir.display()
            );
            if failed == points.len() {
                eprintln!("all sweep points failed");
                return Ok(4);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
