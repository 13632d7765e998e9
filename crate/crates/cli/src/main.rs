use std::path::PathBuf;

use clap::{Parser, Subcommand};
use tentomo_cli::config::Suite;
use tentomo_cli::{run_command, validate_command, RunOptions};

/// Identity suites and experiments for tensor tomography.
#[derive(Parser)]
#[command(name = "tentomo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and write `<out>/<suite>.json` and `<out>/<suite>.csv`.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's `scenario`.
        #[arg(long, value_parser = parse_suite)]
        suite: Option<Suite>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to `OUTPUT_DIR`, then the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::from_name(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{s}`; expected one of {}", names.join(", "))
    })
}

fn main() {
    let code = match Cli::parse().command {
        Command::Run { config, suite, seed, out } => {
            let opts = RunOptions { suite, seed, out, output_dir_env: std::env::var_os("OUTPUT_DIR").map(PathBuf::from) };
            run_command(&config, &opts)
        }
        Command::Validate { config } => validate_command(&config),
    };
    std::process::exit(code);
}
