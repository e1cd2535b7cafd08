use crate::C64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, SpectreError>;

#[derive(Debug, Error)]
pub enum SpectreError {
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    MalformedJson { line: usize, column: usize, message: String },

    #[error("eigensolver failure: {0}")]
    OracleFailure(String),

    #[error("unsupported operator: {0}")]
    Unsupported(String),

    #[error("(L + p²I) is singular or nearly so at p = {p} (condition ≈ {condition:.3e})")]
    PoleProximity { p: C64, condition: f64 },

    #[error("requested accuracy unattainable: {0}")]
    AccuracyUnattainable(String),

    #[error("Laplace integral diverges: Re p = {re_p} but growth rate is {growth}")]
    Divergence { re_p: f64, growth: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("limiting amplitude undefined at k = {k}: within exclusion radius of k_j = {k_j}")]
    AmplitudeUndefined { k: f64, k_j: f64 },

    #[error("theorem inapplicable: {0}")]
    TheoremInapplicable(String),

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("numerical overflow: {0}")]
    Overflow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SpectreError {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        SpectreError::Config { path: path.into(), message: message.into() }
    }

    /// Process exit code used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            SpectreError::Config { .. }
            | SpectreError::Usage(_)
            | SpectreError::MalformedJson { .. }
            | SpectreError::Io(_)
            | SpectreError::Csv(_) => 1,
            _ => 2,
        }
    }
}
