//! Reliability-guaranteed service function chain design and placement.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`design`] splits each chain into parallel subchains as far as the delay
//!    budget allows, then adds the fewest backups that reach the reliability
//!    target. Delay comes from [`queueing`], reliability from [`reliability`].
//! 2. [`placement`] packs the designed chains onto substrate nodes, either
//!    exactly (branch and bound) or with deferred-acceptance matching.
//! 3. [`simulate`] re-derives every analytical number independently: a
//!    discrete-event simulator for delays and exhaustive or Monte-Carlo
//!    evaluation of explicit [`structure`] diagrams for reliabilities.
//!
//! [`scenario`] and [`report`] wire these together for the `sfcrel` binary.

pub mod design;
pub mod error;
pub mod placement;
pub mod queueing;
pub mod reliability;
pub mod report;
pub mod scenario;
pub mod simulate;
pub mod structure;

pub use error::{Error, Result};
