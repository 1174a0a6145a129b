use std::fmt;

use qmeas::Error;

/// Process exit status, a stable contract of the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Config = 2,
    Completeness = 3,
    Runtime = 4,
    NotRealizable = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Config,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Runtime,
            message: message.into(),
        }
    }

    /// Prefixes the message with the option or input it concerns.
    pub fn context(mut self, what: &str) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Incomplete { .. } => ExitKind::Completeness,
            Error::NotRealizable { .. } => ExitKind::NotRealizable,
            Error::InvalidDimension(_)
            | Error::Shape(_)
            | Error::InvalidMeasurement(_)
            | Error::Domain { .. }
            | Error::UnknownFamily(_)
            | Error::OutcomeOutOfRange { .. }
            | Error::InsufficientData(_)
            | Error::InvalidParameter(_) => ExitKind::Config,
            Error::ImpossibleOutcome { .. }
            | Error::InfeasibleTriple { .. }
            | Error::EmptyData
            | Error::UnderDetermined(_) => ExitKind::Runtime,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
