use thiserror::Error;

/// Errors raised by the urn library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A replacement matrix that cannot describe a balanced, growing urn.
    #[error("invalid replacement matrix: {0}")]
    InvalidMatrix(String),

    /// An argument outside the domain of the operation (e.g. a sample larger than the urn).
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation is not defined for this urn or regime.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// `T0 + m(a_{m-1} - a_m) <= 0`, so the compensating product `g_n` is undefined.
    #[error(
        "restart required: T0 + m(a_(m-1) - a_m) = {value} <= 0; restart the urn at a later \
         step (larger T0) so that every factor T_j + m(a_(m-1) - a_m) is positive"
    )]
    RestartRequired { value: i64 },

    /// The urn is not tenable under the requested sampling model.
    #[error("urn is not tenable: {0}")]
    NotTenable(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("pole of the zeta function at s = 1")]
    Pole,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
