//! Command-line front end for `cmspace`: point generation, normalization,
//! chart conversion, flows and the verification suites.
//!
//! All subcommands print JSON on stdout and a short summary on stderr. Exit
//! codes: 0 success, 1 a check failed, 2 malformed input, 3 a numerical
//! routine failed (the operation is named on stderr).

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

pub use checks::{all_checks, run_checks, select, Check, CheckParams, SUITES};
pub use commands::{CliError, Output};
pub use config::{parse_complex, NRange, RunConfig};
pub use report::{Measurement, Record, Report, Status, Summary, SCHEMA_VERSION};
