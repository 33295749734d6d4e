//! `rangewalk`: experiment runner.
//!
//! Exit codes: 0 success, 1 invariant violation or failed computation,
//! 2 configuration error, 3 I/O error.

mod config;
mod output;
mod run;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{ConfigError, Experiment, ExperimentConfig, Flags};
use run::RunError;

#[derive(Parser)]
#[command(
    name = "rangewalk",
    version,
    about = "Random walk on the range of a random walk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Block constants tau, delta, rho, nu, eta and kappa1, kappa2 (d >= 5)
    Constants(Flags),
    /// Exact return-probability series with spectral-dimension fits
    Heatkernel(Flags),
    /// Mean squared displacement and graph distance with walk-dimension fits
    Displacement(Flags),
    /// Exact expected exit times from graph balls
    ExitTimes(Flags),
    /// Ball volumes and ball-complement resistances
    Volume(Flags),
    /// Kolmogorov-Smirnov tests against the scaling limits (d >= 5)
    ScalingTest(Flags),
    /// Growth of one-sided cut-times
    Cuttimes(Flags),
    /// Window coverage and cut-time growth (d = 4)
    D4Diagnostics(Flags),
}

impl Command {
    fn split(self) -> (Experiment, Flags) {
        match self {
            Command::Constants(f) => (Experiment::Constants, f),
            Command::Heatkernel(f) => (Experiment::Heatkernel, f),
            Command::Displacement(f) => (Experiment::Displacement, f),
            Command::ExitTimes(f) => (Experiment::ExitTimes, f),
            Command::Volume(f) => (Experiment::Volume, f),
            Command::ScalingTest(f) => (Experiment::ScalingTest, f),
            Command::Cuttimes(f) => (Experiment::Cuttimes, f),
            Command::D4Diagnostics(f) => (Experiment::D4Diagnostics, f),
        }
    }
}

const EXIT_INVARIANT: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, flags) = cli.command.split();
    let cfg = match ExperimentConfig::resolve(experiment, &flags) {
        Ok(c) => c,
        Err(ConfigError::Invalid(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(ConfigError::Io(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_IO);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let start = Instant::now();
    let result = pool.install(|| run::run(&cfg));
    let elapsed = start.elapsed().as_secs_f64();
    let mut rec = match result {
        Ok(r) => r,
        Err(RunError::Io(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
        Err(RunError::Compute(rangewalk::Error::Io(m))) => {
            eprintln!("error: {m}");
            return ExitCode::from(EXIT_IO);
        }
        Err(RunError::Compute(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVARIANT);
        }
    };
    if cfg.timing {
        rec.wall_clock_seconds = Some(elapsed);
    }
    let name = format!("{}.json", cfg.experiment.name());
    if let Err(e) = rec.write(&cfg.out, &name) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_IO);
    }
    eprintln!(
        "{}: done in {elapsed:.1} s, output in {}",
        cfg.experiment.name(),
        cfg.out.display()
    );
    if !rec.invariant_violations.is_empty() {
        for v in &rec.invariant_violations {
            eprintln!("invariant violated: {v}");
        }
        return ExitCode::from(EXIT_INVARIANT);
    }
    ExitCode::SUCCESS
}
