use thiserror::Error;

use crate::matrix::Field;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("entries ({i},{j}) and ({j},{i}) are not conjugate (gap {gap:e})")]
    NotSymmetric { i: usize, j: usize, gap: f64 },

    #[error("diagonal entry {i} has nonzero imaginary part {im:e}")]
    ComplexDiagonal { i: usize, im: f64 },

    #[error("expected a {expected} matrix, got {found}")]
    FieldMismatch { expected: Field, found: Field },

    #[error("size {n} exceeds the limit {max} for {what}")]
    TooLarge { what: &'static str, n: usize, max: usize },

    #[error("{0}")]
    Domain(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
