use thiserror::Error;

use crate::operator::DensityDiagnostic;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max |A - A†| = {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("Hermitian eigensolver did not converge within {max_iterations} iterations")]
    NoConvergence { max_iterations: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator must be square with dimension >= 1, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator contains non-finite entries")]
    NonFinite,

    #[error("invalid density matrix: {0}")]
    InvalidState(DensityDiagnostic),

    #[error("invalid propagation interval: {0}")]
    InvalidConfig(String),

    #[error("step size {dt} exceeds the propagation interval length {span}")]
    StepSizeError { dt: f64, span: f64 },

    #[error("propagated state lost positivity at t = {time}: min eigenvalue {min_eigenvalue:e}")]
    PositivityDrift { time: f64, min_eigenvalue: f64 },

    #[error("map is not trace preserving: final populations sum to {total}")]
    MapNotTracePreserving { total: f64 },

    #[error("joint probability ({initial}, {final_level}) = {value:e} is negative")]
    NegativeProbability {
        initial: usize,
        final_level: usize,
        value: f64,
    },

    #[error("joint distribution sums to {total}, not 1")]
    NormalizationViolation { total: f64 },

    #[error("reference distribution vanishes at ({initial}, {final_level}) where the other has mass {mass:e}")]
    SupportMismatch {
        initial: usize,
        final_level: usize,
        mass: f64,
    },

    #[error("initial state is not thermal state plus coherences: block-diagonal residual {residual:e}")]
    DecompositionMismatch { residual: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("empty state sample")]
    EmptySample,

    #[error("numerical invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::PositivityDrift { .. }
                | Error::MapNotTracePreserving { .. }
                | Error::NegativeProbability { .. }
                | Error::NormalizationViolation { .. }
                | Error::InvariantViolation(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
