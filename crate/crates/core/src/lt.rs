//! Scheduler over the linearised tree of a monotonic set.
//!
//! Intervals sharing the same rc form a class, contiguous in finish order.
//! Each class is chained by `Sim` edges to the next member, and the class
//! maximum has a `Comp` edge to the shared rc. All intervals without an rc
//! form one class whose maximum has no edge. Edges are stored explicitly, so
//! `expose` never searches the index.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::index::OrderedIndex;
use crate::model::{Interval, IntervalId, Mode};
use crate::oracle::{lt_oracle, LtSnapshot};
use crate::paths::{ExposeStats, PathSet};
use crate::scheduler::Scheduler;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Sim,
    Comp,
}

/// Structural edits made by the last update. Edges into a removed interval
/// count as cuts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounts {
    pub cuts: u32,
    pub links: u32,
    pub removal: bool,
}

#[derive(Debug, Clone)]
pub struct LtScheduler {
    index: OrderedIndex,
    parent: HashMap<IntervalId, (IntervalId, EdgeKind)>,
    paths: PathSet,
    last_update: LinkCounts,
}

impl Default for LtScheduler {
    fn default() -> Self {
        Self::new()
    }
}

impl LtScheduler {
    pub fn new() -> Self {
        LtScheduler {
            index: OrderedIndex::new(Mode::Monotonic),
            parent: HashMap::new(),
            paths: PathSet::new(),
            last_update: LinkCounts::default(),
        }
    }

    pub fn reset_stats(&mut self) {
        self.paths.reset_stats();
    }

    pub fn last_update(&self) -> LinkCounts {
        self.last_update
    }

    pub fn parent_of(&self, id: IntervalId) -> Result<Option<(IntervalId, EdgeKind)>> {
        self.require(id)?;
        Ok(self.parent.get(&id).copied())
    }

    /// Stored edges keyed by child.
    pub fn edges(&self) -> BTreeMap<IntervalId, (IntervalId, EdgeKind)> {
        self.parent.iter().map(|(&c, &p)| (c, p)).collect()
    }

    fn require(&self, id: IntervalId) -> Result<Interval> {
        self.index.find(id).ok_or(Error::UnknownInterval(id))
    }

    fn rc_id(&self, iv: &Interval) -> Option<IntervalId> {
        self.index.right_compatible(iv).map(|r| r.id)
    }

    /// The edge `iv` should have in the current live set.
    fn parent_rule(&self, iv: &Interval) -> Result<Option<(IntervalId, EdgeKind)>> {
        let rc = self.index.right_compatible(iv);
        if let Some(x) = rc {
            if self.index.left_compatible(&x).map(|l| l.id) == Some(iv.id) {
                return Ok(Some((x.id, EdgeKind::Comp)));
            }
        }
        if let Some(n) = self.index.next(iv.id)? {
            if self.rc_id(&n) == rc.map(|r| r.id) {
                return Ok(Some((n.id, EdgeKind::Sim)));
            }
        }
        Ok(None)
    }

    fn link(&mut self, child: IntervalId, to: (IntervalId, EdgeKind)) {
        let old = self.parent.insert(child, to);
        debug_assert!(old.is_none(), "link over an existing edge");
        self.last_update.links += 1;
    }

    fn cut(&mut self, child: IntervalId) -> Result<Option<(IntervalId, EdgeKind)>> {
        let old = self.parent.remove(&child);
        if old.is_some() {
            self.last_update.cuts += 1;
            // A solid edge out of child can only be its stored edge.
            self.paths.detach_successor(child)?;
        }
        Ok(old)
    }

    fn expose_min(&mut self) -> Result<Option<IntervalId>> {
        let Some(m) = self.index.minimum() else {
            return Ok(None);
        };
        let parent = &self.parent;
        self.paths.expose(m.id, |j| parent.get(&j).map(|&(p, _)| p))?;
        Ok(Some(m.id))
    }

    pub fn snapshot(&self) -> LtSnapshot {
        let mut snap = LtSnapshot {
            nodes: self.index.iter_ordered().iter().map(|iv| iv.id).collect(),
            ..Default::default()
        };
        for (&c, &(p, kind)) in &self.parent {
            match kind {
                EdgeKind::Sim => snap.sim_edges.insert((c, p)),
                EdgeKind::Comp => snap.comp_edges.insert((c, p)),
            };
        }
        snap
    }

    /// Stored edges against the oracle, solid edges against stored edges,
    /// in-degree, and the per-update edit budget.
    pub fn audit(&self) -> Result<(), String> {
        self.index.audit()?;
        self.paths.audit()?;
        if self.paths.len() != self.index.len() {
            return Err(format!("{} path nodes for {} live", self.paths.len(), self.index.len()));
        }
        let live = self.index.iter_ordered();
        let want = lt_oracle(&live).map_err(|e| e.to_string())?;
        let got = self.snapshot();
        if got != want {
            return Err(format!(
                "stored edges differ from the linearised tree: sim {:?} vs {:?}, comp {:?} vs {:?}",
                got.sim_edges, want.sim_edges, got.comp_edges, want.comp_edges
            ));
        }
        let mut indegree: HashMap<IntervalId, usize> = HashMap::new();
        for &(p, _) in self.parent.values() {
            *indegree.entry(p).or_default() += 1;
        }
        if let Some((p, d)) = indegree.iter().find(|&(_, &d)| d > 2) {
            return Err(format!("{p} has {d} children"));
        }
        for path in self.paths.paths() {
            for w in path.windows(2) {
                if self.parent.get(&w[0]).map(|&(p, _)| p) != Some(w[1]) {
                    return Err(format!("solid edge ({}, {}) is not stored", w[0], w[1]));
                }
            }
        }
        // An insert re-parents at most two nodes onto i; a removal drops i's
        // three incident edges and re-links at most its two children.
        let LinkCounts { cuts, links, removal } = self.last_update;
        let (max_cuts, max_links) = if removal { (3, 2) } else { (2, 3) };
        if cuts > max_cuts || links > max_links {
            return Err(format!("update made {cuts} cuts and {links} links"));
        }
        Ok(())
    }

    /// Checks that the update of `id` only re-parented `id` itself and at
    /// most two other nodes, each of which was or became a child of `id` or
    /// inherited `id`'s old edge.
    pub fn audit_locality(&self, before: &BTreeMap<IntervalId, (IntervalId, EdgeKind)>, id: IntervalId) -> Result<(), String> {
        let after = self.edges();
        let mut moved = Vec::new();
        for c in before.keys().chain(after.keys()) {
            if *c == id || moved.contains(c) {
                continue;
            }
            let (b, a) = (before.get(c), after.get(c));
            if b == a {
                continue;
            }
            let touches = b.is_some_and(|&(p, _)| p == id) || a.is_some_and(|&(p, _)| p == id);
            let inherits = a.is_some() && a == before.get(&id);
            if !touches && !inherits {
                return Err(format!("edge of {c} changed without involving {id}"));
            }
            moved.push(*c);
        }
        if moved.len() > 2 {
            return Err(format!("update of {id} re-parented {moved:?}"));
        }
        Ok(())
    }
}

impl Scheduler for LtScheduler {
    fn name(&self) -> &'static str {
        "lt"
    }

    fn insert(&mut self, i: Interval) -> Result<()> {
        self.index.insert(i)?;
        self.paths.add(i.id, i.finish)?;
        self.last_update = LinkCounts::default();

        if let Some(edge) = self.parent_rule(&i)? {
            self.link(i.id, edge);
        }
        let rc_i = self.rc_id(&i);
        if let Some(j) = self.index.previous(i.id)? {
            if self.rc_id(&j) == rc_i {
                self.cut(j.id)?;
                self.link(j.id, (i.id, EdgeKind::Sim));
            }
        }
        if let Some(j) = self.index.left_compatible(&i) {
            if self.rc_id(&j) == Some(i.id) {
                self.cut(j.id)?;
                self.link(j.id, (i.id, EdgeKind::Comp));
            }
        }
        Ok(())
    }

    fn remove(&mut self, id: IntervalId) -> Result<Interval> {
        let i = self.require(id)?;
        self.last_update = LinkCounts {
            removal: true,
            ..Default::default()
        };
        let old = self.cut(id)?;

        let sim_child = match self.index.previous(id)? {
            Some(p) if self.parent.get(&p.id) == Some(&(id, EdgeKind::Sim)) => Some(p.id),
            _ => None,
        };
        let comp_child = match self.index.left_compatible(&i) {
            Some(q) if self.parent.get(&q.id) == Some(&(id, EdgeKind::Comp)) => Some(q.id),
            _ => None,
        };
        if let Some(p) = sim_child {
            self.cut(p)?;
        }
        if let Some(q) = comp_child {
            self.cut(q)?;
        }
        self.paths.remove(id)?;
        self.index.remove(id)?;

        // The Sim child takes over i's place in its class.
        if let (Some(p), Some(edge)) = (sim_child, old) {
            self.link(p, edge);
        }
        // The Comp child's rc moves past i, so recompute from scratch.
        if let Some(q) = comp_child {
            let qv = self.require(q)?;
            if let Some(edge) = self.parent_rule(&qv)? {
                self.link(q, edge);
            }
        }
        Ok(i)
    }

    fn query(&mut self, id: IntervalId) -> Result<bool> {
        let i = self.require(id)?;
        let m = self.expose_min()?.expect("a live id implies a minimum");
        if m == id {
            return Ok(true);
        }
        if !self.paths.same_path(m, id)? {
            return Ok(false);
        }
        match self.paths.path_predecessor(id)? {
            None => Ok(true),
            Some(j) => Ok(self.require(j)?.compatible(&i)),
        }
    }

    fn optimal_set(&mut self) -> Vec<Interval> {
        let Some(m) = self.expose_min().expect("stored edges point at live nodes") else {
            return Vec::new();
        };
        let path = self.paths.path_of(m).expect("minimum is a path node");
        let mut out = Vec::new();
        let mut prev: Option<Interval> = None;
        for id in path {
            let cur = self.index.find(id).expect("path nodes are live");
            if prev.is_none_or(|p| p.compatible(&cur)) {
                out.push(cur);
            }
            prev = Some(cur);
        }
        out
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
