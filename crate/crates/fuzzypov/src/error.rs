use std::fmt;

use fuzzypov_core::Error;

use crate::csvio::LoadError;

/// Failure of a command. User errors exit with 2, internal ones with 1.
#[derive(Debug)]
pub enum CliError {
    /// Bad input, config or parameters; one line per problem.
    User(Vec<String>),
    Internal(String),
}

impl CliError {
    pub fn user(msg: impl Into<String>) -> Self {
        CliError::User(vec![msg.into()])
    }

    pub fn internal(msg: impl Into<String>) -> Self {
        CliError::Internal(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    pub fn lines(&self) -> Vec<String> {
        match self {
            CliError::User(lines) => lines.clone(),
            CliError::Internal(msg) => vec![format!("internal error: {msg}")],
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.lines().join("\n"))
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NoConvergence | Error::LengthMismatch { .. } | Error::EmptySequence => CliError::Internal(e.to_string()),
            other => CliError::User(vec![other.to_string()]),
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::User(e.diagnostics())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
