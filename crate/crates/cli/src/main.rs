use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use wpe_cli::config::{default_config_text, parse_config_for, Command};
use wpe_cli::execute;

/// Simulate and classify a wave-particle entity in a sinusoidal potential.
#[derive(Parser)]
#[command(
    name = "wpe",
    version,
    after_help = "Environment:\n  WPE_WORKERS  default worker count (otherwise the available parallelism)"
)]
struct Cli {
    /// Command to run.
    #[arg(value_enum, required_unless_present = "print_defaults")]
    command: Option<Command>,
    /// TOML run configuration.
    #[arg(long, value_name = "PATH", required_unless_present = "print_defaults")]
    config: Option<PathBuf>,
    /// Output file; overrides `output` in the config.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Worker threads for sweeps; overrides `workers` and the environment.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Print a complete annotated default config for COMMAND and exit.
    #[arg(long, value_enum, value_name = "COMMAND", conflicts_with_all = ["command", "config", "output", "workers"])]
    print_defaults: Option<Command>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(c) = cli.print_defaults {
        print!("{}", default_config_text(c));
        return ExitCode::SUCCESS;
    }
    let (command, path) = (cli.command.expect("required"), cli.config.expect("required"));
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match parse_config_for(&text, Some(command)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.output {
        cfg.output_path = out;
    }
    if let Some(n) = cli.workers {
        cfg.workers = n as usize;
    }
    match execute(&cfg) {
        Ok(outcome) => {
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            println!("{}", outcome.summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
