use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: need at least 2")]
    InvalidDimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("completeness violated: max deviation {deviation:e} exceeds tolerance {tol:e}")]
    Incomplete { deviation: f64, tol: f64 },

    #[error("outcome {outcome} has zero probability for this input")]
    ImpossibleOutcome { outcome: usize },

    #[error("outcome index {outcome} out of range for {count} operators")]
    OutcomeOutOfRange { outcome: usize, count: usize },

    #[error("triple is not realizable: global-bound radicand {radicand:e} is negative")]
    InfeasibleTriple { radicand: f64 },

    #[error("family {family}: p = {p} outside domain [{lo}, {hi}]")]
    Domain { family: u8, p: f64, lo: f64, hi: f64 },

    #[error("unknown measurement family {0}: expected 0..=4")]
    UnknownFamily(u8),

    #[error("operator {operator} is not realizable with waveplates: {reason}")]
    NotRealizable { operator: usize, reason: String },

    #[error("no counts recorded for this state")]
    EmptyData,

    #[error("under-determined tomography: {0}")]
    UnderDetermined(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
