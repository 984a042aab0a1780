use std::path::PathBuf;

use restrict_core::error::{ExponentError, FitError, GridError, LorentzError, MeasureError, PhaseError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Lorentz(#[from] LorentzError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("{what}: need {required}, have {actual}")]
    Resolution { what: String, required: f64, actual: f64 },
    #[error("{expected} values expected, got {got}")]
    Length { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("input must be supported in the inner half of the box")]
    Support,
    #[error("input has zero norm")]
    ZeroInput,
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub type Result<T> = std::result::Result<T, LabError>;
