use thiserror::Error;

/// Errors produced across the toolkit.
///
/// Variants fall into two families: validation failures (bad input,
/// inconsistent configuration) and numerical failures (ill-conditioning,
/// divergence, degenerate geometry). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structural(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("ill-conditioned problem: {0}")]
    Conditioning(String),
    #[error("topology error: {0}")]
    Topology(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("kinematic singularity: {0}")]
    Singularity(String),
    #[error("simulation diverged at t = {time:.4} s: {reason}")]
    Divergence { time: f64, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Conditioning(_)
                | Error::Topology(_)
                | Error::Degenerate(_)
                | Error::Singularity(_)
                | Error::Divergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
