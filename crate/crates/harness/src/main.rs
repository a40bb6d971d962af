use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use shrinkcov::config::{ExperimentConfig, ExperimentKind};
use shrinkcov::csv_io::{emit_csv, write_csv};
use shrinkcov::methods::method_table;
use shrinkcov::selfcheck::run_selfcheck;
use shrinkcov::{run_experiment, HarnessError};

#[derive(Parser)]
#[command(
    name = "shrinkcov",
    version,
    about = "Shrinkage covariance estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the number of repetitions.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV destination; overrides the config and defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the selectors available for each experiment.
    ListMethods,
    /// Run the built-in property suites.
    Selfcheck,
}

fn run(
    config: PathBuf,
    reps: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let mut cfg = ExperimentConfig::from_file(&config)?;
    if let Some(r) = reps {
        cfg.repetitions = r;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if out.is_some() {
        cfg.output = out;
    }
    cfg.validate()?;
    let rows = run_experiment(&cfg)?;
    match &cfg.output {
        Some(path) => emit_csv(&rows, path),
        None => write_csv(&rows, std::io::stdout().lock()),
    }
}

fn list_methods() {
    for kind in ExperimentKind::ALL {
        println!("{}", kind.name());
        for m in method_table(kind) {
            println!("  {:<22}{}", m.name, m.description);
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            config,
            reps,
            seed,
            out,
        } => match run(config, reps, seed, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::ListMethods => {
            list_methods();
            ExitCode::SUCCESS
        }
        Command::Selfcheck => {
            let outcomes = run_selfcheck();
            for o in &outcomes {
                println!("{}", o.line());
            }
            if outcomes.iter().all(|o| o.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}
