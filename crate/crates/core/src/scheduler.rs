use crate::error::Result;
use crate::model::{Interval, IntervalId, OpEvent};
use crate::paths::ExposeStats;

/// The interface shared by every dynamic scheduler.
///
/// Queries may restructure internal self-adjusting trees, hence `&mut self`.
pub trait Scheduler {
    fn name(&self) -> &'static str;

    fn insert(&mut self, interval: Interval) -> Result<()>;

    fn remove(&mut self, id: IntervalId) -> Result<Interval>;

    /// Whether `id` belongs to the greedy optimal set of the live intervals.
    fn query(&mut self, id: IntervalId) -> Result<bool>;

    /// The greedy optimal set in finish order.
    fn optimal_set(&mut self) -> Vec<Interval>;

    fn stats(&self) -> ExposeStats;

    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Live intervals in finish order.
    fn live(&self) -> Vec<Interval>;

    /// Applies one event; returns the query answer for `Query` events.
    fn apply(&mut self, event: &OpEvent) -> Result<Option<bool>> {
        match event {
            OpEvent::Insert(iv) => self.insert(*iv).map(|_| None),
            OpEvent::Remove(id) => self.remove(*id).map(|_| None),
            OpEvent::Query(id) => self.query(*id).map(Some),
        }
    }
}
