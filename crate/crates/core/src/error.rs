use thiserror::Error;

/// Errors raised by the numerical kernel and the geometric operations built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: |P - P*| = {deviation:e} exceeds tolerance {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("eigenvalue {eigenvalue} lies outside the domain of `{function}`")]
    SpectrumOutOfDomain { function: String, eigenvalue: f64 },

    #[error("point {modulus} is not inside the open unit disc")]
    OutsideDisc { modulus: f64 },

    #[error("resolvent is numerically singular (condition number {condition:e})")]
    SingularResolvent { condition: f64 },

    #[error("operator norm {norm} is too close to one")]
    NormTooCloseToOne { norm: f64 },

    #[error("normal form of composite automorphism failed: {reason}")]
    NormalFormFailure { reason: String },

    #[error("matrix is not unitary: |U*U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("sequence lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("configuration has diameter {diameter:e}, too small to separate points")]
    DegenerateConfiguration { diameter: f64 },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("line {line}: {source}")]
    AtLine { line: usize, source: Box<Error> },

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {source}")]
    InFile { path: String, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape_mismatch(expected: (usize, usize), found: (usize, usize)) -> Self {
        Error::DimensionMismatch {
            expected: format!("{}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        }
    }

    /// The underlying error with line and file context removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtLine { source, .. } | Error::InFile { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for failures caused by the numerics (as opposed to malformed input).
    pub fn is_numerical(&self) -> bool {
        if let Error::AtLine { source, .. } | Error::InFile { source, .. } = self {
            return source.is_numerical();
        }
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::SpectrumOutOfDomain { .. }
                | Error::SingularResolvent { .. }
                | Error::NormTooCloseToOne { .. }
                | Error::NormalFormFailure { .. }
                | Error::DegenerateConfiguration { .. }
        )
    }
}
