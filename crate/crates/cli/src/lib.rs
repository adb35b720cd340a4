//! Config parsing, experiment orchestration and CSV/JSON output for the
//! `wpe` command-line tool.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, parse_config_for, Command, RunConfig};
pub use run::{execute, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] wpe_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
