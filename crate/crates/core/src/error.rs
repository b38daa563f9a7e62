use thiserror::Error;

use crate::model::IntervalId;

/// Errors raised by the schedulers, indexes and workload tooling.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("interval {id} has start {start} not strictly before finish {finish}")]
    InvalidInterval { id: IntervalId, start: i64, finish: i64 },

    #[error("endpoint {tick} is already used by a live interval")]
    DuplicateEndpoint { tick: i64 },

    #[error("interval {0} is already live")]
    DuplicateId(IntervalId),

    #[error("unknown interval {0}")]
    UnknownInterval(IntervalId),

    #[error("inserting interval {0} would break monotonicity (containment)")]
    MonotonicityViolation(IntervalId),

    #[error("interval set is not monotonic")]
    NonMonotonicInput,

    #[error("node {0} is not in the path set")]
    UnknownNode(IntervalId),

    #[error("cannot join: {lower} does not precede {upper}")]
    OrderViolation { lower: IntervalId, upper: IntervalId },

    #[error("parent resolver returned {parent} for {child}, which does not follow it")]
    ResolverInconsistency { child: IntervalId, parent: IntervalId },

    #[error("invalid workload spec: {0}")]
    InvalidSpec(String),

    #[error("input is not a forest: {0}")]
    NotAForest(String),

    #[error("event {index} is invalid: {reason}")]
    SequenceInvalid { index: usize, reason: String },

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
