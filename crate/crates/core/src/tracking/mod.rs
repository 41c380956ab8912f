//! Slice-to-slice association by descriptor voting and tracing of pedestrian
//! numbers through the stack.
//!
//! Every descriptor of a source object votes for the candidate in a later
//! slice whose value is closest to its own. The candidate with the most
//! votes is the match, provided its share of the eligible votes reaches the
//! voting threshold and no other pedestrian has claimed it. Candidates too
//! far away for the elapsed time lose all their descriptors before voting.

mod ntxy;
mod trace;
mod vote;

use thiserror::Error;

pub use ntxy::{read_ntxy, write_ntxy, NtxyRecord, NTXY_HEADER};
pub use trace::{trace_database, trace_stack, TraceOutput};
pub use vote::{cast_votes, select_match, VoteTally};

/// Default number of consecutive empty slices bridged by the tracer.
pub const DEFAULT_MAX_GAP: u32 = 3;
pub const DEFAULT_VOTING_THRESHOLD: f64 = 50.0;

#[derive(Debug, Error)]
pub enum TrackingError {
    #[error("invalid tracking parameters: {0}")]
    InvalidParams(String),
    #[error("descriptor database out of order at row {row}: {reason}")]
    Ordering { row: usize, reason: String },
    #[error("NTXY database: {0}")]
    Ntxy(String),
}

/// Matching thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoteParams {
    /// Minimum voting percentage, 0..=100.
    pub voting_threshold: f64,
    /// Largest plausible displacement per slice, in image pixels.
    pub speed_threshold: f64,
    /// Number of consecutive slices an object may go undetected and still
    /// be re-acquired; the search runs over slices `T+1 ..= T+max_gap+1`.
    pub max_gap: u32,
}

impl VoteParams {
    /// Parameters with the default voting threshold and gap limit.
    pub fn with_speed_threshold(speed_threshold: f64) -> Self {
        Self {
            voting_threshold: DEFAULT_VOTING_THRESHOLD,
            speed_threshold,
            max_gap: DEFAULT_MAX_GAP,
        }
    }

    pub fn validate(&self) -> Result<(), TrackingError> {
        if !(0.0..=100.0).contains(&self.voting_threshold) {
            return Err(TrackingError::InvalidParams(format!(
                "voting_threshold {} outside 0..=100",
                self.voting_threshold
            )));
        }
        if !(self.speed_threshold.is_finite() && self.speed_threshold > 0.0) {
            return Err(TrackingError::InvalidParams(format!(
                "speed_threshold must be positive, got {}",
                self.speed_threshold
            )));
        }
        if self.max_gap < 1 {
            return Err(TrackingError::InvalidParams("max_gap must be at least 1".into()));
        }
        Ok(())
    }

    /// Slice offsets searched for a match.
    pub fn search_offsets(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.max_gap + 1
    }
}
