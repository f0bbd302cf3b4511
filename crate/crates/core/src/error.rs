//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::ccm::IterationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A config document failed validation at `path`.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("schema error at {path}: {reason}")]
pub struct SchemaError {
    pub path: String,
    pub reason: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invariant `{name}` violated (defect {magnitude:.3e})")]
    InvariantViolation { name: String, magnitude: f64 },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("composite dimension {dim} exceeds the cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("nested-commutator series did not terminate after {terms} terms (last norm {last_norm:.3e})")]
    NonTerminatingSeries { terms: usize, last_norm: f64 },

    #[error("ket equations did not converge (last residual {residual:.3e} after {} steps)", trace.len())]
    NoConvergence {
        residual: f64,
        trace: Vec<IterationRecord>,
    },

    #[error("singular Jacobian (rcond {rcond:.3e}); degenerate reference or truncation pathology")]
    SingularJacobian { rcond: f64 },

    #[error("singular bra system (rcond {rcond:.3e}); degenerate ground state suspected")]
    SingularSystem { rcond: f64 },

    #[error("truncation selects no configuration")]
    EmptyTruncation,

    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),

    #[error("map is singular or ill-conditioned (condition number {condition:.3e})")]
    SingularMap { condition: f64 },

    #[error("operator is not quasi-Hermitian under the given metric (defect {defect:.3e})")]
    NotQuasiHermitian { defect: f64 },

    #[error("metric is not positive definite (eigenvalue ratio {ratio:.3e})")]
    IndefiniteMetric { ratio: f64 },

    #[error("operator is defective or too close to an exceptional point ({0})")]
    DefectiveMatrix(String),

    #[error("spectrum is not real (max |Im E| = {max_imag:.3e})")]
    ComplexSpectrum { max_imag: f64 },

    #[error("eigen-system is incomplete: {0}")]
    IncompleteSystem(String),

    #[error("input operator is not Hermitian (defect {defect:.3e})")]
    NotHermitianInput { defect: f64 },

    #[error("ground state is degenerate or nearly so (gap {gap:.3e})")]
    DegenerateGroundState { gap: f64 },

    #[error("reference state is orthogonal to the exact ground state (overlap {overlap:.3e})")]
    OrthogonalReference { overlap: f64 },

    #[error("eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error(transparent)]
    Schema(#[from] SchemaError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable short tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::DimensionOverflow { .. } => "DimensionOverflow",
            Error::BasisMismatch(_) => "BasisMismatch",
            Error::NonTerminatingSeries { .. } => "NonTerminatingSeries",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularJacobian { .. } => "SingularJacobian",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::EmptyTruncation => "EmptyTruncation",
            Error::InvalidTruncation(_) => "InvalidTruncation",
            Error::SingularMap { .. } => "SingularMap",
            Error::NotQuasiHermitian { .. } => "NotQuasiHermitian",
            Error::IndefiniteMetric { .. } => "IndefiniteMetric",
            Error::DefectiveMatrix(_) => "DefectiveMatrix",
            Error::ComplexSpectrum { .. } => "ComplexSpectrum",
            Error::IncompleteSystem(_) => "IncompleteSystem",
            Error::NotHermitianInput { .. } => "NotHermitianInput",
            Error::DegenerateGroundState { .. } => "DegenerateGroundState",
            Error::OrthogonalReference { .. } => "OrthogonalReference",
            Error::ConvergenceFailure(_) => "ConvergenceFailure",
            Error::Schema(_) => "SchemaError",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
