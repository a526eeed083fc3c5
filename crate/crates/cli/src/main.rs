//! `blowup`: run, sweep, check and report radial blow-up experiments.

mod commands;
mod config;
mod exit;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "blowup", version, about = "Radial Euler / Euler-Poisson blow-up laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write series.csv and summary.json.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        force: bool,
    },
    /// Run every eps in eps_list and fit T_num against eps.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        force: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Seeded random trials of the weighted Hardy inequality.
    CheckInequalities {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        trials: usize,
    },
    /// Print a sweep record store as a table.
    Report { store: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::CONFIG } else { exit::OK });
        }
    };
    let outcome = match &cli.command {
        Command::Run { config, output, force } => commands::cmd_run(config, output, *force),
        Command::Sweep {
            config,
            output,
            force,
            jobs,
        } => commands::cmd_sweep(config, output, *force, *jobs),
        Command::CheckInequalities { seed, trials } => commands::cmd_check_inequalities(*seed, *trials),
        Command::Report { store } => commands::cmd_report(store),
    };
    match outcome {
        Ok(text) => {
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(exit::OK)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
