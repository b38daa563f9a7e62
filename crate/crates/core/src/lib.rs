//! Dynamic interval scheduling.
//!
//! Maintains the greedy maximum set of pairwise compatible intervals while
//! intervals are inserted and removed, and answers "is this interval in the
//! set" queries. Three schedulers share the [`Scheduler`] trait:
//!
//! - [`NaiveScheduler`] walks the greedy chain on every query;
//! - [`CfScheduler`] keeps the compatibility forest in solid paths and works
//!   on any interval set;
//! - [`LtScheduler`] keeps explicit linearised-tree edges and needs a
//!   containment-free set.

pub mod bench;
pub mod cf;
pub mod error;
pub mod index;
pub mod lt;
pub mod model;
pub mod oracle;
pub mod overlap;
pub mod paths;
pub mod scheduler;
pub mod workload;

pub use cf::CfScheduler;
pub use error::{Error, Result};
pub use index::OrderedIndex;
pub use lt::{EdgeKind, LtScheduler};
pub use model::{Interval, IntervalId, Mode, OpEvent, OpKind};
pub use oracle::NaiveScheduler;
pub use overlap::IntervalOverlapIndex;
pub use paths::{ExposeStats, PathSet};
pub use scheduler::Scheduler;
pub use workload::WorkloadSpec;
