use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {what} (expected {expected}, got {actual})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("basis size overflows for n_s = {dims}, p = {degree}")]
    BasisOverflow { dims: usize, degree: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("least squares requires m >= n (m = {rows}, n = {cols})")]
    Underdetermined { rows: usize, cols: usize },

    #[error("matrix is rank deficient (numerical rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("{base} is not prime")]
    NotPrime { base: u64 },

    #[error("missing {0}")]
    Missing(&'static str),

    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),

    #[error("solver failed at lambda = {lambda:e}: {source}")]
    AtLambda {
        lambda: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("sample source exhausted: needed {needed}, got {available}")]
    Exhausted { needed: usize, available: usize },

    #[error("{path}: line {line}: {message}")]
    Data {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_lambda(self, lambda: f64) -> Self {
        Error::AtLambda {
            lambda,
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad numerics rather than bad input.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::AtLambda { source, .. } => source.is_solver_failure(),
            Error::NonFinite(_)
            | Error::Underdetermined { .. }
            | Error::RankDeficient { .. }
            | Error::Factorization(_)
            | Error::ZeroDenominator(_) => true,
            _ => false,
        }
    }
}
