use std::fmt;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operand lengths disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A matrix or vector entry is NaN or infinite.
    NonFinite { what: &'static str },
    /// A diagonal entry is too close to zero to divide by.
    SmallDiagonal { row: usize, value: f64 },
    /// Gaussian elimination met a zero pivot.
    Singular { column: usize },
    /// A solver or benchmark configuration violates its constraints.
    InvalidConfig(String),
    /// A problem-spec or plan file could not be parsed.
    Parse { line: usize, message: String },
    /// Output could not be written.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite { what } => write!(f, "{what} contains a non-finite entry"),
            Error::SmallDiagonal { row, value } => {
                write!(f, "diagonal entry a[{row}][{row}] = {value:e} is too close to zero")
            }
            Error::Singular { column } => {
                write!(f, "matrix is numerically singular (zero pivot in column {column})")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
