use thiserror::Error;

/// Exit status for a run whose bounds all hold.
pub const EXIT_OK: i32 = 0;
/// Exit status when an empirical value exceeds its bound.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status for usage, configuration and input errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error(transparent)]
    Chain(#[from] mixbound::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}
