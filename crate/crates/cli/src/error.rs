use std::fmt;

/// Process exit statuses.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PIPELINE: i32 = 3;
pub const EXIT_FILTER: i32 = 4;

/// A failure that maps onto one of the documented exit statuses.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        Self { code: EXIT_INPUT, message: msg.into() }
    }

    pub fn pipeline(msg: impl Into<String>) -> Self {
        Self { code: EXIT_PIPELINE, message: msg.into() }
    }

    pub fn filter(msg: impl Into<String>) -> Self {
        Self { code: EXIT_FILTER, message: msg.into() }
    }

    /// Classifies an error raised while building a filter bank. Invalid
    /// parameters are input errors; screening and numerical failures are
    /// construction failures.
    pub fn from_bank(err: edbsw_core::Error) -> Self {
        match err {
            edbsw_core::Error::Parameter(_) | edbsw_core::Error::UnknownWavelet(_) => Self::input(err.to_string()),
            other => Self::filter(other.to_string()),
        }
    }

    /// Wraps a detector error, naming the failing stage when known.
    pub fn from_pipeline(err: edbsw_core::Error) -> Self {
        match err.stage() {
            Some(stage) => Self::pipeline(format!("pipeline failed in stage `{stage}`: {err}")),
            None => Self::pipeline(format!("pipeline failed: {err}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;
