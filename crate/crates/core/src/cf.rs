//! Scheduler over the compatibility forest, where every interval points at
//! its right compatible interval. Forest edges are never stored: solid paths
//! live in a [`PathSet`] and dashed edges are recomputed from the index.
//!
//! Kept invariants: every solid edge `(u, v)` has `rc(u) = v`, and the solid
//! path through the least interval runs all the way to its root, so it is
//! exactly the greedy optimal set.

use crate::error::{Error, Result};
use crate::index::OrderedIndex;
use crate::model::{Interval, IntervalId, Mode};
use crate::oracle::{greedy_optimal, rc_table};
use crate::overlap::IntervalOverlapIndex;
use crate::paths::{ExposeStats, PathSet};
use crate::scheduler::Scheduler;

#[derive(Debug, Clone)]
pub struct CfScheduler {
    mode: Mode,
    index: OrderedIndex,
    paths: PathSet,
    overlap: Option<IntervalOverlapIndex>,
    recheck_queries: bool,
}

impl CfScheduler {
    pub fn new(mode: Mode) -> Self {
        CfScheduler {
            mode,
            index: OrderedIndex::new(mode),
            paths: PathSet::new(),
            overlap: match mode {
                Mode::Monotonic => None,
                Mode::General => Some(IntervalOverlapIndex::new()),
            },
            recheck_queries: false,
        }
    }

    /// Re-expose before every query and fail if that changes anything.
    pub fn with_query_recheck(mut self, on: bool) -> Self {
        self.recheck_queries = on;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn index(&self) -> &OrderedIndex {
        &self.index
    }

    pub fn reset_stats(&mut self) {
        self.paths.reset_stats();
    }

    /// The node directly above `id` on its solid path.
    pub fn solid_parent(&mut self, id: IntervalId) -> Result<Option<IntervalId>> {
        self.require(id)?;
        self.paths.path_successor(id)
    }

    /// All solid paths, bottom to top.
    pub fn solid_paths(&self) -> Vec<Vec<IntervalId>> {
        self.paths.paths()
    }

    fn require(&self, id: IntervalId) -> Result<Interval> {
        self.index.find(id).ok_or(Error::UnknownInterval(id))
    }

    fn expose_min(&mut self) -> Result<ExposeStats> {
        let Some(m) = self.index.minimum() else {
            return Ok(ExposeStats::default());
        };
        let index = &self.index;
        self.paths.expose(m.id, |j| {
            let iv = index.find(j)?;
            index.right_compatible(&iv).map(|r| r.id)
        })
    }

    /// Dissolves the solid edge into `target` if its lower end finishes
    /// before `i` starts, since `i` has just become that node's rc.
    fn release(&mut self, target: IntervalId, i: &Interval) -> Result<Option<IntervalId>> {
        let Some(j) = self.paths.path_predecessor(target)? else {
            return Ok(None);
        };
        let jv = self.require(j)?;
        if jv.finish < i.start {
            self.paths.split_above(target)?;
            return Ok(Some(j));
        }
        Ok(None)
    }

    /// Checks every structural invariant against the brute-force oracles.
    pub fn audit(&self) -> Result<(), String> {
        self.index.audit()?;
        self.paths.audit()?;
        if let Some(o) = &self.overlap {
            o.audit()?;
            if o.len() != self.index.len() {
                return Err("overlap index out of sync".into());
            }
        }
        if self.paths.len() != self.index.len() {
            return Err(format!("{} path nodes for {} live", self.paths.len(), self.index.len()));
        }
        let live = self.index.iter_ordered();
        let rc = rc_table(&live);
        for path in self.paths.paths() {
            for w in path.windows(2) {
                if rc.get(&w[0]).copied().flatten() != Some(w[1]) {
                    return Err(format!("solid edge ({}, {}) is not a forest edge", w[0], w[1]));
                }
            }
        }
        let want: Vec<IntervalId> = greedy_optimal(&live).iter().map(|iv| iv.id).collect();
        let got = match self.index.minimum() {
            Some(m) => self.paths.path_of(m.id).map_err(|e| e.to_string())?,
            None => Vec::new(),
        };
        if got != want {
            return Err(format!("path of the minimum {got:?} differs from greedy {want:?}"));
        }
        Ok(())
    }
}

impl Scheduler for CfScheduler {
    fn name(&self) -> &'static str {
        "cf"
    }

    fn insert(&mut self, i: Interval) -> Result<()> {
        self.index.check_insert(&i)?;
        self.index.insert(i)?;
        if let Some(o) = self.overlap.as_mut() {
            o.insert(i)?;
        }
        self.paths.add(i.id, i.finish)?;
        match self.mode {
            Mode::Monotonic => {
                // Only the node below next(i) can have held a solid edge that
                // i now intercepts.
                if let Some(r) = self.index.next(i.id)? {
                    if let Some(j) = self.release(r.id, &i)? {
                        self.paths.join(j, i.id)?;
                    }
                }
            }
            Mode::General => {
                if let Some(r) = self.index.next_noncovering(&i) {
                    self.release(r.id, &i)?;
                }
                let coverers = self.overlap.as_ref().map(|o| o.covers_all(&i)).unwrap_or_default();
                for c in coverers {
                    self.release(c.id, &i)?;
                }
            }
        }
        self.expose_min()?;
        Ok(())
    }

    fn remove(&mut self, id: IntervalId) -> Result<Interval> {
        self.require(id)?;
        self.paths.remove(id)?;
        let iv = self.index.remove(id)?;
        if let Some(o) = self.overlap.as_mut() {
            o.remove(id)?;
        }
        self.expose_min()?;
        Ok(iv)
    }

    fn query(&mut self, id: IntervalId) -> Result<bool> {
        self.require(id)?;
        let m = self.index.minimum().expect("a live id implies a minimum");
        if self.recheck_queries {
            let d = self.expose_min()?;
            assert_eq!(d.dashed_traversed, 0, "query found the greedy path incomplete");
        }
        self.paths.same_path(m.id, id)
    }

    fn optimal_set(&mut self) -> Vec<Interval> {
        let Some(m) = self.index.minimum() else {
            return Vec::new();
        };
        self.paths
            .path_of(m.id)
            .expect("minimum is a path node")
            .into_iter()
            .map(|id| self.index.find(id).expect("path nodes are live"))
            .collect()
    }

    fn stats(&self) -> ExposeStats {
        self.paths.stats()
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
    use crate::oracle::naive_query;

    fn ids(v: &[Interval]) -> Vec<u64> {
        v.iter().map(|x| x.id.0).collect()
    }

    fn iv(id: u64, s: i64, f: i64) -> Interval {
        Interval::new(id, s, f).unwrap()
    }

    #[test]
    fn eight_set_greedy_path() {
        let mut cf = CfScheduler::new(Mode::Monotonic).with_query_recheck(true);
        assert!(cf.optimal_set().is_empty());
        for x in eight_set() {
            cf.insert(x).unwrap();
            cf.audit().unwrap();
        }
        assert_eq!(ids(&cf.optimal_set()), vec![A, E, H]);
        assert!(cf.query(IntervalId(E)).unwrap());
        assert!(!cf.query(IntervalId(F)).unwrap());
        cf.remove(IntervalId(E)).unwrap();
        cf.audit().unwrap();
        assert_eq!(ids(&cf.optimal_set()), vec![A, F, H]);
        assert_eq!(cf.query(IntervalId(E)), Err(Error::UnknownInterval(IntervalId(E))));
    }

    #[test]
    fn single_interval_lifecycle() {
        let mut cf = CfScheduler::new(Mode::Monotonic);
        cf.insert(iv(1, 0, 10)).unwrap();
        assert_eq!(cf.stats().dashed_traversed, 0);
        assert!(cf.query(IntervalId(1)).unwrap());
        cf.remove(IntervalId(1)).unwrap();
        assert!(cf.is_empty());
        assert!(cf.query(IntervalId(1)).is_err());
    }

    #[test]
    fn rejects_containment_in_monotonic_mode() {
        let mut cf = CfScheduler::new(Mode::Monotonic);
        cf.insert(iv(1, 0, 10)).unwrap();
        assert_eq!(cf.insert(iv(2, 2, 8)), Err(Error::MonotonicityViolation(IntervalId(2))));
        assert_eq!(cf.insert(iv(3, 10, 12)), Err(Error::DuplicateEndpoint { tick: 10 }));
        assert_eq!(cf.len(), 1);
        cf.audit().unwrap();
    }

    #[test]
    fn covering_insertion_breaks_covering_edges() {
        // a b c d e, then i nested inside c and d
        let base = [iv(0, 0, 30), iv(1, 10, 50), iv(2, 40, 80), iv(3, 60, 90), iv(4, 95, 115)];
        let mut cf = CfScheduler::new(Mode::General);
        for x in base {
            cf.insert(x).unwrap();
        }
        // make (a,c) and (b,d) solid
        cf.paths
            .expose(IntervalId(1), |j| {
                let x = cf.index.find(j)?;
                cf.index.right_compatible(&x).map(|r| r.id)
            })
            .unwrap();
        assert_eq!(cf.solid_parent(IntervalId(0)).unwrap(), Some(IntervalId(2)));
        assert_eq!(cf.solid_parent(IntervalId(1)).unwrap(), Some(IntervalId(3)));

        cf.insert(iv(9, 66, 76)).unwrap();
        cf.audit().unwrap();
        assert_ne!(cf.solid_parent(IntervalId(1)).unwrap(), Some(IntervalId(3)));
        assert_ne!(cf.solid_parent(IntervalId(0)).unwrap(), Some(IntervalId(2)));
        let live = cf.live();
        for x in &live {
            assert_eq!(cf.query(x.id).unwrap(), naive_query(&live, x.id).unwrap());
        }
        assert_eq!(ids(&cf.optimal_set()), ids(&greedy_optimal(&live)));
    }
}
