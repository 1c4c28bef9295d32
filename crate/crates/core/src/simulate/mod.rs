//! Independent oracles for the analytical models.
//!
//! [`des_tandem`] simulates the queues behind the response-time formulas;
//! [`exact_structure_reliability`] and [`mc_structure_reliability`] evaluate
//! explicit redundancy diagrams without any closed form.

mod des;
mod oracle;

use serde::{Deserialize, Serialize};

pub use des::{des_tandem, DesConfig, Routing};
pub use oracle::{exact_structure_reliability, mc_structure_reliability, EXHAUSTIVE_LIMIT};

/// A point estimate with a symmetric 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    /// Standard error of `mean`.
    pub std_error: f64,
    /// Observations behind the estimate (post-warmup jobs or trials).
    pub samples: u64,
}

impl SimEstimate {
    pub fn contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.half_width_95
    }

    pub fn relative_error(&self, reference: f64) -> f64 {
        ((self.mean - reference) / reference).abs()
    }
}
