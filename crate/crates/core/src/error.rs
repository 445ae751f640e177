use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the estimation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A matrix or vector dimension was zero or inconsistent with its data.
    InvalidDimension { expected: usize, got: usize },
    /// Two operands disagree on dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// An index exceeded the ambient dimension.
    IndexOutOfRange { index: usize, bound: usize },
    /// Non-finite input or a numerical routine failed to converge.
    Numeric(&'static str),
    /// Argument outside the mathematical domain of the function.
    Domain(&'static str),
    /// Argument violates a documented precondition.
    InvalidArgument(&'static str),
    /// The index set does not realize every distance; carries the missing ones.
    NotARuler { missing: Vec<usize> },
    /// Covariance has an eigenvalue below the PSD tolerance.
    NotPsd { min_eigenvalue: f64 },
    /// An estimator was applied to data it is not defined for.
    Misuse(&'static str),
    /// Relative error requested against a zero reference.
    DivideByZero,
    /// An aggregate was requested over no data.
    EmptyInput,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDimension { expected, got } => {
                write!(f, "invalid dimension: expected {expected}, got {got}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::IndexOutOfRange { index, bound } => {
                write!(f, "index {index} out of range for dimension {bound}")
            }
            Error::Numeric(msg) => write!(f, "numeric failure: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NotARuler { missing } => {
                write!(f, "not a ruler: {} distance(s) unrealized", missing.len())?;
                if let Some(first) = missing.first() {
                    write!(f, " (smallest {first})")?;
                }
                Ok(())
            }
            Error::NotPsd { min_eigenvalue } => {
                write!(
                    f,
                    "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
                )
            }
            Error::Misuse(msg) => write!(f, "estimator misuse: {msg}"),
            Error::DivideByZero => write!(f, "reference matrix has zero norm"),
            Error::EmptyInput => write!(f, "empty input"),
        }
    }
}

impl core::error::Error for Error {}
