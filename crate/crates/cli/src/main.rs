use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nsys_cli::commands::{self, CommandError};
use nsys_cli::config;

#[derive(Parser)]
#[command(name = "nsys", version, about = "Steady-state pump-probe spectra of a four-level atom")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute L2/L3 transmission over the (delta10, aom) grid.
    Scan(RunArgs),
    /// Compute the L3 contrast curve and report the threshold detuning.
    Contrast(RunArgs),
    /// Print the density matrix and probe correction at the `steady` point.
    Steady(ConfigArg),
    /// Run the invariant and oracle suite.
    Validate(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, env = "NSYS_WORKERS", default_value_t = 1)]
    workers: usize,
}

fn run(cli: Cli) -> Result<String, CommandError> {
    match cli.command {
        Command::Scan(a) => commands::scan(&config::load(&a.config)?, &a.out, a.workers),
        Command::Contrast(a) => commands::contrast(&config::load(&a.config)?, &a.out, a.workers),
        Command::Steady(a) => commands::steady(&config::load(&a.config)?),
        Command::Validate(a) => commands::validate(&config::load(&a.config)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
