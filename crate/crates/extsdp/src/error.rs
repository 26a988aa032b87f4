use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subsystem index {index} out of range for {len} subsystems")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid subsystem permutation {0:?}")]
    InvalidPermutation(Vec<usize>),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("malformed SDP: {0}")]
    Model(String),
    #[error("no value assigned to variable `{0}`")]
    MissingAssignment(String),
    #[error("equality constraints are inconsistent (residual {0:e})")]
    InconsistentEqualities(f64),
    #[error("KKT factorization failed at iteration {0}")]
    Factorization(usize),
    #[error("missing optimizer data: {0}")]
    MissingData(String),
    #[error("SDPA parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
