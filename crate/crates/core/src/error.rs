use thiserror::Error;

use crate::design::DesignOutcome;

/// Errors produced anywhere in the design, placement and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unstable queue at stage {stage}: arrival rate {arrival_rate} >= service rate {service_rate}")]
    Instability {
        stage: usize,
        arrival_rate: f64,
        service_rate: f64,
    },

    #[error("invalid input: {0}")]
    Domain(String),

    /// The reliability target cannot be met. `best` is the strongest structure
    /// the search reached before giving up.
    #[error("design for '{}' is infeasible: {reason}", best.service_name)]
    Infeasible {
        reason: String,
        best: Box<DesignOutcome>,
    },

    #[error("request {request} needs {demand} vCPUs but the largest node offers {max_capacity}")]
    Unplaceable {
        request: String,
        demand: u32,
        max_capacity: u32,
    },

    #[error("substrate capacity exhausted: {0}")]
    CapacityExhausted(String),

    #[error("structure has {components} components; exhaustive evaluation is limited to {limit}")]
    Size { components: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("scenario validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
