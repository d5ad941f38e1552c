use alloc::string::String;
use core::fmt;

/// Errors raised by the ADR core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied argument is out of range.
    InvalidArgument(String),
    /// Matrix or vector shapes disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// A non-finite value was found at (row, column).
    NonFinite { row: usize, col: usize },
    /// A matrix expected to be symmetric is not.
    NotSymmetric,
    /// A Cholesky pivot was not positive.
    NotPositiveDefinite,
    /// A basis matrix is (numerically) singular.
    SingularMatrix,
    /// The sample set is empty.
    EmptyInput,
    /// A class has too few samples for the requested operation.
    ClassTooSmall { class: usize, count: usize, required: usize },
    /// Only one class is present where at least two are needed.
    SingleClass,
    /// A partition is not a disjoint cover of its index set.
    InvalidPartition(String),
    /// `k` exceeds the number of distinct points.
    TooFewDistinctPoints { k: usize, distinct: usize },
    /// No labeled supersample shares a feature with any target and the
    /// empty-intersection fallback is disabled.
    NoOverlap,
    /// A source domain with two classes could not be drawn.
    DomainSplitFailed,
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite { row, col } => {
                write!(f, "non-finite value at row {row}, column {col}")
            }
            Error::NotSymmetric => f.write_str("matrix is not symmetric"),
            Error::NotPositiveDefinite => f.write_str("matrix is not positive definite"),
            Error::SingularMatrix => f.write_str("matrix is singular"),
            Error::EmptyInput => f.write_str("empty input"),
            Error::ClassTooSmall { class, count, required } => {
                write!(f, "class {class} has {count} samples, at least {required} required")
            }
            Error::SingleClass => f.write_str("at least two classes are required"),
            Error::InvalidPartition(msg) => write!(f, "invalid partition: {msg}"),
            Error::TooFewDistinctPoints { k, distinct } => {
                write!(f, "k = {k} exceeds the {distinct} distinct points")
            }
            Error::NoOverlap => f.write_str("no feature overlap between labeled and target supersamples"),
            Error::DomainSplitFailed => f.write_str("could not draw a source domain containing two classes"),
        }
    }
}

impl core::error::Error for Error {}
