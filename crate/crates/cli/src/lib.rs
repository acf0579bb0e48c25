//! Command-line front end: chain spec files, CSV reports and subcommands.

pub mod commands;
pub mod error;
pub mod report;
pub mod spec_file;

pub use commands::{run, Cli, Outcome};
pub use error::{CliError, EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION};
pub use report::{rows_from_csv, rows_to_csv, ReportRow, CSV_HEADER};
pub use spec_file::{parse_chain_spec, ChainSpecFile};
