//! Error type shared by all modules.

use std::fmt;

/// Errors surfaced by the numerical kernels and solvers.
///
/// Index payloads are 0-based column/row indices; step payloads (`Breakdown`,
/// `SingularInterpolation`) are 1-based iteration counts, i.e. `Breakdown(2)`
/// means the second basis vector could not be built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A factorization met a (numerically) rank deficient matrix: the named
    /// 0-based column produced an R diagonal below `1e-14 * ||A||_F`.
    RankDeficient(usize),
    /// Triangular solve hit an exactly zero diagonal at the given 0-based row.
    SingularTriangular(usize),
    /// An iterative kernel exhausted its iteration cap.
    NoConvergence,
    /// `expm` input norm is too large for the result to be representable.
    Overflow,
    /// A sparse triplet referenced a row or column outside the matrix.
    IndexOutOfRange { index: usize, n: usize },
    /// Operand shapes do not line up.
    DimensionMismatch { expected: usize, got: usize },
    /// Graph preprocessing removed every node.
    EmptyGraph,
    /// Krylov recurrence produced a numerically zero vector at the given
    /// 1-based step (an invariant subspace was hit).
    Breakdown(usize),
    /// DEIM interpolation system of the given size is singular to 1e-14.
    SingularInterpolation(usize),
    /// Oversampling was asked for more rows than the matrix has.
    Exhausted { requested: usize, available: usize },
    /// A text input could not be parsed; the payload is the 1-based line.
    ParseError { line: usize, reason: String },
    /// Caller violated a documented precondition.
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::RankDeficient(col) => {
                write!(f, "rank deficient: R diagonal underflow at column {col}")
            }
            Error::SingularTriangular(row) => {
                write!(f, "singular triangular solve: zero diagonal at row {row}")
            }
            Error::NoConvergence => write!(f, "iteration cap exceeded without convergence"),
            Error::Overflow => write!(f, "matrix exponential overflows the floating point range"),
            Error::IndexOutOfRange { index, n } => {
                write!(f, "index {index} out of range for dimension {n}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::EmptyGraph => write!(f, "graph is empty after removing zero in-degree nodes"),
            Error::Breakdown(step) => write!(f, "Krylov breakdown at step {step}"),
            Error::SingularInterpolation(step) => {
                write!(f, "singular interpolation system at step {step}")
            }
            Error::Exhausted { requested, available } => {
                write!(f, "selection exhausted: requested {requested} rows of {available}")
            }
            Error::ParseError { line, reason } => write!(f, "parse error at line {line}: {reason}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
