//! Configuration loading, experiment commands and CSV output for `risctl`.

// negated comparisons are used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod grid;

pub use config::{defaults_text, load_config, parse_config, ConfigError, Settings};
pub use error::{CliError, CliResult};
