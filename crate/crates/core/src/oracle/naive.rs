use crate::error::{Error, Result};
use crate::index::OrderedIndex;
use crate::model::{Interval, IntervalId, Mode};
use crate::paths::ExposeStats;
use crate::scheduler::Scheduler;

/// Baseline scheduler: an ordered index and nothing else. Each query
/// rebuilds the whole greedy set from the least interval with
/// right-compatible jumps.
#[derive(Debug, Clone)]
pub struct NaiveScheduler {
    index: OrderedIndex,
}

impl NaiveScheduler {
    pub fn new(mode: Mode) -> Self {
        NaiveScheduler {
            index: OrderedIndex::new(mode),
        }
    }

    pub fn index(&self) -> &OrderedIndex {
        &self.index
    }
}

impl Scheduler for NaiveScheduler {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn insert(&mut self, interval: Interval) -> Result<()> {
        self.index.insert(interval)
    }

    fn remove(&mut self, id: IntervalId) -> Result<Interval> {
        self.index.remove(id)
    }

    fn query(&mut self, id: IntervalId) -> Result<bool> {
        if !self.index.contains(id) {
            return Err(Error::UnknownInterval(id));
        }
        Ok(self.optimal_set().iter().any(|iv| iv.id == id))
    }

    fn optimal_set(&mut self) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut cur = self.index.minimum();
        while let Some(c) = cur {
            out.push(c);
            cur = self.index.right_compatible(&c);
        }
        out
    }

    fn stats(&self) -> ExposeStats {
        ExposeStats::default()
    }

    fn len(&self) -> usize {
        self.index.len()
    }

    fn live(&self) -> Vec<Interval> {
        self.index.iter_ordered()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::fixtures::*;

    #[test]
    fn eight_set_queries() {
        let mut s = NaiveScheduler::new(Mode::Monotonic);
        for iv in eight_set() {
            s.insert(iv).unwrap();
        }
        let ids: Vec<u64> = s.optimal_set().iter().map(|x| x.id.0).collect();
        assert_eq!(ids, vec![A, E, H]);
        assert!(s.query(IntervalId(E)).unwrap());
        assert!(!s.query(IntervalId(F)).unwrap());
        s.remove(IntervalId(E)).unwrap();
        let ids: Vec<u64> = s.optimal_set().iter().map(|x| x.id.0).collect();
        assert_eq!(ids, vec![A, F, H]);
        assert_eq!(s.query(IntervalId(E)), Err(Error::UnknownInterval(IntervalId(E))));
    }
}
