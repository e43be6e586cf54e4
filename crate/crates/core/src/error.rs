use std::path::PathBuf;

use crate::diagnostics::TimeSeriesRecord;
use crate::groundstate::GroundStateResult;
use crate::spectral::ComplexField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// State handed back when an evolution is stopped by the blow-up monitor.
#[derive(Debug, Clone)]
pub struct BlowUp {
    pub t: f64,
    pub linf: f64,
    /// Checkpoint records gathered before the blow-up was detected.
    pub records: Vec<TimeSeriesRecord>,
    /// Last state seen by the monitor (may contain non-finite entries).
    pub last: ComplexField,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("linear solver stalled after {iterations} iterations: {reason}")]
    SolverStalled { iterations: usize, reason: String },

    #[error("gradient flow did not converge in {} iterations (step {:.3e})", .best.iterations, .best.residual)]
    NotConverged { best: Box<GroundStateResult> },

    #[error("blow-up detected at t = {} (L-infinity {:.6e})", .0.t, .0.linf)]
    BlowUpDetected(Box<BlowUp>),

    #[error("standing-wave rescaling needs a positive multiplier, got {0}")]
    NonpositiveMultiplier(f64),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
