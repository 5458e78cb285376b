//! The `pragmask` command-line front end.
//!
//! Every subcommand reads newline-delimited JSON records, applies one
//! pipeline stage, and writes newline-delimited output, with a single JSON
//! summary footer on stderr. Per-record stages preserve input order for any
//! `--workers` count, and all randomness is keyed by `(seed, record id)`,
//! so reruns are byte-identical.
//!
//! Exit codes: `0` success, `1` malformed record under `--strict`,
//! `2` unreadable input / I/O, `3` invalid configuration, `4` vocabulary
//! load failure.

pub mod config;
mod commands;
pub mod engine;
pub mod formats;

pub use commands::{Cli, Command};
pub use formats::Footer;

use engine::EngineError;

pub const EXIT_STRICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_VOCAB: i32 = 4;

/// Top-level failure, mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable input or any other I/O failure.
    Input(String),
    /// Invalid flag, config key, or value.
    Config(String),
    /// Subword or label vocabulary could not be loaded.
    Vocab(String),
    /// A malformed record under `--strict`.
    Strict { line: u64, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Strict { .. } => EXIT_STRICT,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Vocab(_) => EXIT_VOCAB,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Io(err) => CliError::Input(err.to_string()),
            EngineError::Strict { line, message } => CliError::Strict { line, message },
        }
    }
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

/// Parse argv, run, report. Returns the process exit code.
pub fn run() -> i32 {
    use clap::Parser;
    let cli = Cli::parse();
    match commands::execute(cli) {
        Ok(footer) => {
            eprintln!("{}", serde_json::to_string(&footer).expect("footer serializes"));
            0
        }
        Err(err) => {
            match &err {
                CliError::Strict { line, message } => {
                    let e = serde_json::json!({ "error": message, "line": line });
                    eprintln!("{e}");
                }
                CliError::Input(m) | CliError::Config(m) | CliError::Vocab(m) => {
                    eprintln!("pragmask: {m}");
                }
            }
            err.exit_code()
        }
    }
}
