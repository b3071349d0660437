use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lorden_cli::{parse_scenario, run, CliError, Command, ErrorKind, Overrides, RunOptions};
use lorden_core::Execution;

/// Renewal-process bounds and simulation from scenario files.
///
/// Values given as flags override the scenario file, which overrides
/// built-in defaults. Exit status is 0 when every verdict passes, 1 when a
/// verdict fails and 2 on error (with a JSON error record on stderr).
#[derive(Debug, Parser)]
#[command(name = "lorden", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Check the intensity assumptions.
    Check(Args),
    /// Moments and bounds, without simulation.
    Bound(Args),
    /// Monte Carlo estimates of the backward and forward times.
    Simulate(Args),
    /// Bounds against simulated estimates.
    Verify(Args),
    /// Tail-bound curves against empirical tails.
    Tail(Args),
    /// Renewal function of the envelope.
    Renewal(Args),
}

#[derive(Debug, clap::Args)]
struct Args {
    /// Scenario file.
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Grid step.
    #[arg(long)]
    step: Option<f64>,
    /// Grid horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Evaluate the bound even when an assumption fails.
    #[arg(long)]
    allow_failed_assumptions: bool,
}

fn execution(threads: Option<usize>) -> Result<Execution, CliError> {
    match threads {
        Some(0) => Err(CliError::new(
            ErrorKind::Usage,
            "--threads must be at least 1",
        )),
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::new(ErrorKind::Usage, e.to_string()))?;
            Ok(Execution::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Check(a) => (Command::Check, a),
        Sub::Bound(a) => (Command::Bound, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Tail(a) => (Command::Tail, a),
        Sub::Renewal(a) => (Command::Renewal, a),
    };
    let result = execution(args.threads).and_then(|execution| {
        let file = parse_scenario(&args.scenario)?;
        let opts = RunOptions {
            overrides: Overrides {
                seed: args.seed,
                reps: args.reps,
                step: args.step,
                horizon: args.horizon,
                out: args.out,
            },
            execution,
            allow_failed_assumptions: args.allow_failed_assumptions,
        };
        run(command, file, &opts)
    });
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
