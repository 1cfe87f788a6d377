//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors raised by matrix kernels, state constructors and estimators.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("input matrix is not Hermitian (max |A - A^dag| = {max_asymmetry:.3e})")]
    NonHermitianInput { max_asymmetry: f64 },

    #[error("matrix has a negative eigenvalue beyond tolerance (min = {min_eigenvalue:.3e})")]
    NegativeSpectrum { min_eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("parameter vector has length {got}, ansatz expects {expected}")]
    ParamLengthMismatch { expected: usize, got: usize },

    #[error("target purity {requested} outside [{min}, 1]")]
    PurityOutOfRange { requested: f64, min: f64 },

    #[error("invalid spectrum: {0}")]
    SpectrumInvalid(String),

    #[error("truncation order m = {m} outside [1, {dim}]")]
    MOutOfRange { m: usize, dim: usize },

    #[error("T-matrix is not PSD (min eigenvalue = {min_eigenvalue:.3e})")]
    NonPsdTMatrix { min_eigenvalue: f64 },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),

    #[error("delta must be nonzero")]
    ZeroDelta,

    #[error("diagonal Hamiltonian has degenerate low spectrum near energy {energy}")]
    DegenerateLowSpectrum { energy: f64 },

    #[error("parameter index {param_index} does not address a rotation slot")]
    NonRotationSlot { param_index: usize },

    #[error("objective evaluation failed in restart {restart}: {source}")]
    ObjectiveEvaluationFailure {
        restart: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
