use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("matrix is not positive semidefinite (pivot or eigenvalue {value:e} below tolerance)")]
    NotPositiveSemidefinite { value: f64 },

    #[error("increment {block} of the block boomerang matrix is not positive semidefinite")]
    IndefiniteIncrement { block: usize },

    #[error("increment {block} of the block boomerang matrix is singular")]
    SingularIncrement { block: usize },

    #[error("nearest Kronecker factor is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    IndefiniteKroneckerFactor { min_eigenvalue: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveSemidefinite { .. }
                | Error::IndefiniteIncrement { .. }
                | Error::SingularIncrement { .. }
                | Error::IndefiniteKroneckerFactor { .. }
                | Error::Numerical(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
