//! Subcommand implementations behind the `polarity` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_evaluate, cmd_event, cmd_predict, cmd_score, cmd_series, cmd_summarize, cmd_train, Outcome};
pub use config::{RunConfig, TrainSettings};
pub use error::CliError;
