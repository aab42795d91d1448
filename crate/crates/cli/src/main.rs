use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sktlab_cli::commands::{cmd_check, cmd_run, cmd_sweep, cmd_verify, GlobalOpts};

/// Numerical laboratory for SKT-type cross-diffusion reaction systems:
/// structural condition checking, positivity-aware finite-volume simulation
/// and entropy/mass/norm monitoring.
#[derive(Parser)]
#[command(name = "sktlab", version, about)]
struct Cli {
    /// Override the configured output directory.
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    /// Override the configured RNG seed (random initial data, sample boxes).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress output; artifacts are still written.
    #[arg(long, global = true, default_value_t = false)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the theorem hypotheses for a model and write a report
    /// (exit 0: some theorem applies, 2: none, 1: error).
    Check { config: PathBuf },
    /// Simulate a configured experiment and write snapshots, monitor CSV and
    /// a summary (exit 0: completed, 3: blow-up, 4: solver failure, 1: error).
    Run { config: PathBuf },
    /// Run a parameter sweep; one subdirectory per grid point plus an
    /// aggregate CSV (exit 0: every point produced a row).
    Sweep { spec: PathBuf },
    /// Run the built-in verification suites (exit 0 iff all pass).
    Verify,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = GlobalOpts { output_dir: cli.output_dir, seed: cli.seed, quiet: cli.quiet };
    let outcome = match &cli.command {
        Command::Check { config } => cmd_check(config, &opts),
        Command::Run { config } => cmd_run(config, &opts),
        Command::Sweep { spec } => cmd_sweep(spec, &opts),
        Command::Verify => cmd_verify(&opts),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
