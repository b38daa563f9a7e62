//! Vertex-disjoint solid paths, each held in a splay tree keyed by finish.
//!
//! The path set never stores dashed edges. `expose` asks a caller-supplied
//! resolver for the parent of the current path's top node and splices.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::IntervalId;

const NIL: usize = usize::MAX;

/// Work counters for path maintenance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExposeStats {
    /// Dashed edges crossed by `expose`.
    pub dashed_traversed: u64,
    /// Splay rotations.
    pub restructure_steps: u64,
}

impl ExposeStats {
    pub fn since(&self, earlier: &ExposeStats) -> ExposeStats {
        ExposeStats {
            dashed_traversed: self.dashed_traversed - earlier.dashed_traversed,
            restructure_steps: self.restructure_steps - earlier.restructure_steps,
        }
    }
}

impl std::ops::Add for ExposeStats {
    type Output = ExposeStats;

    fn add(self, rhs: ExposeStats) -> ExposeStats {
        ExposeStats {
            dashed_traversed: self.dashed_traversed + rhs.dashed_traversed,
            restructure_steps: self.restructure_steps + rhs.restructure_steps,
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: IntervalId,
    key: i64,
    left: usize,
    right: usize,
    parent: usize,
}

#[derive(Debug, Clone, Default)]
pub struct PathSet {
    nodes: Vec<Node>,
    free: Vec<usize>,
    slot: HashMap<IntervalId, usize>,
    stats: ExposeStats,
}

impl PathSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot.is_empty()
    }

    pub fn contains(&self, id: IntervalId) -> bool {
        self.slot.contains_key(&id)
    }

    pub fn stats(&self) -> ExposeStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = ExposeStats::default();
    }

    fn node(&self, id: IntervalId) -> Result<usize> {
        self.slot.get(&id).copied().ok_or(Error::UnknownNode(id))
    }

    /// Adds `id` as a singleton path ordered by `key`.
    pub fn add(&mut self, id: IntervalId, key: i64) -> Result<()> {
        if self.slot.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        let n = Node {
            id,
            key,
            left: NIL,
            right: NIL,
            parent: NIL,
        };
        let x = match self.free.pop() {
            Some(x) => {
                self.nodes[x] = n;
                x
            }
            None => {
                self.nodes.push(n);
                self.nodes.len() - 1
            }
        };
        self.slot.insert(id, x);
        Ok(())
    }

    /// Removes `id`, leaving the parts of its path below and above it as two
    /// separate paths.
    pub fn remove(&mut self, id: IntervalId) -> Result<()> {
        let x = self.node(id)?;
        self.splay(x);
        for c in [self.nodes[x].left, self.nodes[x].right] {
            if c != NIL {
                self.nodes[c].parent = NIL;
            }
        }
        self.slot.remove(&id);
        self.free.push(x);
        Ok(())
    }

    fn rotate(&mut self, x: usize) {
        let p = self.nodes[x].parent;
        let g = self.nodes[p].parent;
        if self.nodes[p].left == x {
            let b = self.nodes[x].right;
            self.nodes[p].left = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].right = p;
        } else {
            let b = self.nodes[x].left;
            self.nodes[p].right = b;
            if b != NIL {
                self.nodes[b].parent = p;
            }
            self.nodes[x].left = p;
        }
        self.nodes[p].parent = x;
        self.nodes[x].parent = g;
        if g != NIL {
            if self.nodes[g].left == p {
                self.nodes[g].left = x;
            } else {
                self.nodes[g].right = x;
            }
        }
        self.stats.restructure_steps += 1;
    }

    fn splay(&mut self, x: usize) {
        loop {
            let p = self.nodes[x].parent;
            if p == NIL {
                return;
            }
            let g = self.nodes[p].parent;
            if g != NIL {
                let zig_zig = (self.nodes[g].left == p) == (self.nodes[p].left == x);
                if zig_zig {
                    self.rotate(p);
                } else {
                    self.rotate(x);
                }
            }
            self.rotate(x);
        }
    }

    fn leftmost(&self, mut x: usize) -> usize {
        while self.nodes[x].left != NIL {
            x = self.nodes[x].left;
        }
        x
    }

    fn rightmost(&self, mut x: usize) -> usize {
        while self.nodes[x].right != NIL {
            x = self.nodes[x].right;
        }
        x
    }

    fn tree_root(&self, mut x: usize) -> usize {
        while self.nodes[x].parent != NIL {
            x = self.nodes[x].parent;
        }
        x
    }

    /// Splays the path minimum of `x`'s tree to its root.
    fn splay_min(&mut self, x: usize) -> usize {
        self.splay(x);
        let m = self.leftmost(x);
        self.splay(m);
        m
    }

    fn splay_max(&mut self, x: usize) -> usize {
        self.splay(x);
        let m = self.rightmost(x);
        self.splay(m);
        m
    }

    pub fn path_min(&mut self, id: IntervalId) -> Result<IntervalId> {
        let x = self.node(id)?;
        let m = self.splay_min(x);
        Ok(self.nodes[m].id)
    }

    pub fn path_max(&mut self, id: IntervalId) -> Result<IntervalId> {
        let x = self.node(id)?;
        let m = self.splay_max(x);
        Ok(self.nodes[m].id)
    }

    pub fn same_path(&mut self, a: IntervalId, b: IntervalId) -> Result<bool> {
        let x = self.node(a)?;
        let y = self.node(b)?;
        if x == y {
            return Ok(true);
        }
        self.splay(x);
        self.splay(y);
        // x was a root before y's splay, so it now sits at most two levels down.
        Ok(self.tree_root(x) == y)
    }

    /// The node below `id` on its solid path.
    pub fn path_predecessor(&mut self, id: IntervalId) -> Result<Option<IntervalId>> {
        let x = self.node(id)?;
        self.splay(x);
        let l = self.nodes[x].left;
        if l == NIL {
            return Ok(None);
        }
        let p = self.rightmost(l);
        self.splay(p);
        Ok(Some(self.nodes[p].id))
    }

    /// The node above `id` on its solid path.
    pub fn path_successor(&mut self, id: IntervalId) -> Result<Option<IntervalId>> {
        let x = self.node(id)?;
        self.splay(x);
        let r = self.nodes[x].right;
        if r == NIL {
            return Ok(None);
        }
        let s = self.leftmost(r);
        self.splay(s);
        Ok(Some(self.nodes[s].id))
    }

    /// `Some(target)` when `target` lies on the path containing `path_of`.
    pub fn path_find(&mut self, path_of: IntervalId, target: IntervalId) -> Result<Option<IntervalId>> {
        Ok(self.same_path(path_of, target)?.then_some(target))
    }

    /// Dissolves the solid edge entering `id` from below.
    pub fn split_above(&mut self, id: IntervalId) -> Result<()> {
        let x = self.node(id)?;
        self.splay(x);
        let l = self.nodes[x].left;
        if l != NIL {
            self.nodes[l].parent = NIL;
            self.nodes[x].left = NIL;
        }
        Ok(())
    }

    /// Dissolves the solid edge leaving `id` upward.
    pub fn detach_successor(&mut self, id: IntervalId) -> Result<()> {
        let x = self.node(id)?;
        self.splay(x);
        let r = self.nodes[x].right;
        if r != NIL {
            self.nodes[r].parent = NIL;
            self.nodes[x].right = NIL;
        }
        Ok(())
    }

    /// Concatenates the path of `lower_of` below the path of `upper_of`.
    pub fn join(&mut self, lower_of: IntervalId, upper_of: IntervalId) -> Result<()> {
        let a = self.node(lower_of)?;
        let b = self.node(upper_of)?;
        let a_max = self.splay_max(a);
        let b_min = self.splay_min(b);
        // b_min is now a root; if a_max was in the same tree it is no longer one.
        let distinct = self.nodes[a_max].parent == NIL && a_max != b_min;
        if !distinct || self.nodes[a_max].key >= self.nodes[b_min].key {
            return Err(Error::OrderViolation {
                lower: self.nodes[a_max].id,
                upper: self.nodes[b_min].id,
            });
        }
        self.nodes[a_max].right = b_min;
        self.nodes[b_min].parent = a_max;
        Ok(())
    }

    /// Makes the whole resolver path from `id` upward one solid path.
    /// Returns the work done by this call.
    pub fn expose<F>(&mut self, id: IntervalId, mut parent_of: F) -> Result<ExposeStats>
    where
        F: FnMut(IntervalId) -> Option<IntervalId>,
    {
        let before = self.stats;
        let x = self.node(id)?;
        let mut top = self.splay_max(x);
        loop {
            let j = self.nodes[top].id;
            let Some(p) = parent_of(j) else { break };
            let pn = self.node(p)?;
            if self.nodes[pn].key <= self.nodes[top].key {
                return Err(Error::ResolverInconsistency { child: j, parent: p });
            }
            self.split_above(p)?;
            self.join(j, p)?;
            self.stats.dashed_traversed += 1;
            top = self.splay_max(pn);
        }
        Ok(self.stats.since(&before))
    }

    fn in_order_from(&self, root: usize) -> Vec<IntervalId> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut cur = root;
        while cur != NIL || !stack.is_empty() {
            while cur != NIL {
                stack.push(cur);
                cur = self.nodes[cur].left;
            }
            let n = stack.pop().expect("stack nonempty");
            out.push(self.nodes[n].id);
            cur = self.nodes[n].right;
        }
        out
    }

    /// The path containing `id`, bottom to top, without restructuring.
    pub fn path_of(&self, id: IntervalId) -> Result<Vec<IntervalId>> {
        let x = self.node(id)?;
        Ok(self.in_order_from(self.tree_root(x)))
    }

    /// Every path, bottom to top, ordered by bottom key.
    pub fn paths(&self) -> Vec<Vec<IntervalId>> {
        let mut roots: Vec<usize> = self
            .slot
            .values()
            .copied()
            .filter(|&x| self.nodes[x].parent == NIL)
            .collect();
        roots.sort_by_key(|&r| self.nodes[self.leftmost(r)].key);
        roots.into_iter().map(|r| self.in_order_from(r)).collect()
    }

    /// Checks parent links, key order inside every path, and that every
    /// node is reachable from exactly one root.
    pub fn audit(&self) -> Result<(), String> {
        let mut seen = 0usize;
        for (&id, &x) in &self.slot {
            if self.nodes[x].id != id {
                return Err(format!("slot of {id} points at another node"));
            }
            for c in [self.nodes[x].left, self.nodes[x].right] {
                if c != NIL && self.nodes[c].parent != x {
                    return Err(format!("child of {id} has a stale parent link"));
                }
            }
            if self.nodes[x].parent == NIL {
                let order = self.in_order_from(x);
                seen += order.len();
                let keys: Vec<i64> = order.iter().map(|i| self.nodes[self.slot[i]].key).collect();
                if keys.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(format!("path rooted at {id} is not in key order"));
                }
            }
        }
        if seen != self.slot.len() {
            return Err(format!("{} nodes reachable from roots, {} live", seen, self.slot.len()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn id(x: u64) -> IntervalId {
        IntervalId(x)
    }

    fn ids(v: &[u64]) -> Vec<IntervalId> {
        v.iter().map(|&x| id(x)).collect()
    }

    // eight-set finishes (scaled): a30 b40 c60 d72 e80 f90 g110 h120
    const FIN: [i64; 8] = [30, 40, 60, 72, 80, 90, 110, 120];
    const RC: [Option<u64>; 8] = [Some(4), Some(4), Some(6), Some(7), Some(7), Some(7), None, None];

    fn eight_set_paths() -> PathSet {
        let mut ps = PathSet::new();
        for (k, f) in FIN.iter().enumerate() {
            ps.add(id(k as u64), *f).unwrap();
        }
        ps
    }

    fn rc(j: IntervalId) -> Option<IntervalId> {
        RC[j.0 as usize].map(id)
    }

    #[test]
    fn expose_builds_greedy_path() {
        let mut ps = eight_set_paths();
        let d = ps.expose(id(0), rc).unwrap();
        assert_eq!(d.dashed_traversed, 2);
        assert_eq!(ps.path_of(id(0)).unwrap(), ids(&[0, 4, 7]));
        assert_eq!(ps.path_max(id(0)).unwrap(), id(7));
        assert_eq!(ps.path_min(id(7)).unwrap(), id(0));
        assert!(ps.same_path(id(4), id(0)).unwrap());
        assert!(!ps.same_path(id(5), id(0)).unwrap());

        let d = ps.expose(id(2), rc).unwrap();
        assert_eq!(d.dashed_traversed, 1);
        assert_eq!(ps.path_of(id(2)).unwrap(), ids(&[2, 6]));

        assert_eq!(ps.expose(id(7), rc).unwrap().dashed_traversed, 0);
        // exposing f steals h from a's path
        ps.expose(id(5), rc).unwrap();
        assert_eq!(ps.path_of(id(5)).unwrap(), ids(&[5, 7]));
        assert_eq!(ps.path_of(id(0)).unwrap(), ids(&[0, 4]));
        ps.audit().unwrap();
    }

    #[test]
    fn split_and_join() {
        let mut ps = eight_set_paths();
        ps.expose(id(0), rc).unwrap();
        assert_eq!(ps.path_predecessor(id(1)).unwrap(), None);
        assert_eq!(ps.path_predecessor(id(7)).unwrap(), Some(id(4)));
        assert_eq!(ps.path_successor(id(0)).unwrap(), Some(id(4)));
        ps.split_above(id(7)).unwrap();
        assert_eq!(ps.path_of(id(0)).unwrap(), ids(&[0, 4]));
        assert_eq!(ps.path_of(id(7)).unwrap(), ids(&[7]));
        ps.split_above(id(0)).unwrap();
        assert_eq!(ps.path_of(id(0)).unwrap(), ids(&[0, 4]));
        ps.join(id(0), id(7)).unwrap();
        assert_eq!(ps.path_of(id(4)).unwrap(), ids(&[0, 4, 7]));
        assert_eq!(ps.path_find(id(0), id(4)).unwrap(), Some(id(4)));
        assert_eq!(ps.path_find(id(0), id(3)).unwrap(), None);
        assert!(matches!(ps.join(id(0), id(4)), Err(Error::OrderViolation { .. })));
        assert!(matches!(ps.join(id(7), id(3)), Err(Error::OrderViolation { .. })));
        assert_eq!(ps.join(id(0), id(99)), Err(Error::UnknownNode(id(99))));
        ps.detach_successor(id(4)).unwrap();
        assert_eq!(ps.path_of(id(0)).unwrap(), ids(&[0, 4]));
        ps.audit().unwrap();
    }

    #[test]
    fn remove_splits_three_ways() {
        let mut ps = eight_set_paths();
        ps.expose(id(0), rc).unwrap();
        ps.remove(id(4)).unwrap();
        assert_eq!(ps.path_of(id(0)).unwrap(), ids(&[0]));
        assert_eq!(ps.path_of(id(7)).unwrap(), ids(&[7]));
        assert_eq!(ps.path_min(id(4)), Err(Error::UnknownNode(id(4))));
        assert_eq!(ps.len(), 7);
        ps.audit().unwrap();
    }

    #[test]
    fn resolver_must_point_upward() {
        let mut ps = eight_set_paths();
        let err = ps.expose(id(4), |_| Some(id(0))).unwrap_err();
        assert_eq!(err, Error::ResolverInconsistency { child: id(4), parent: id(0) });
    }

    #[derive(Debug, Clone)]
    enum Op {
        Split(usize),
        Join(usize, usize),
        Pred(usize),
        Same(usize, usize),
        Remove(usize),
        Detach(usize),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            (0..40usize).prop_map(Op::Split),
            (0..40usize, 0..40usize).prop_map(|(a, b)| Op::Join(a, b)),
            (0..40usize).prop_map(Op::Pred),
            (0..40usize, 0..40usize).prop_map(|(a, b)| Op::Same(a, b)),
            (0..40usize).prop_map(Op::Remove),
            (0..40usize).prop_map(Op::Detach),
        ]
    }

    proptest! {
        // A list-of-lists model: each inner Vec is one path in key order.
        #[test]
        fn matches_list_model(ops in prop::collection::vec(op(), 1..300)) {
            let mut ps = PathSet::new();
            let mut model: Vec<Vec<u64>> = Vec::new();
            for k in 0..40u64 {
                ps.add(id(k), k as i64 * 10).unwrap();
                model.push(vec![k]);
            }
            let find = |model: &Vec<Vec<u64>>, x: u64| -> Option<(usize, usize)> {
                model.iter().enumerate().find_map(|(p, v)| v.iter().position(|&y| y == x).map(|q| (p, q)))
            };
            for o in ops {
                match o {
                    Op::Split(x) => {
                        let x = x as u64;
                        match find(&model, x) {
                            Some((p, q)) => {
                                ps.split_above(id(x)).unwrap();
                                let upper = model[p].split_off(q);
                                model.push(upper);
                                model.retain(|v| !v.is_empty());
                            }
                            None => prop_assert!(ps.split_above(id(x)).is_err()),
                        }
                    }
                    Op::Join(a, b) => {
                        let (a, b) = (a as u64, b as u64);
                        match (find(&model, a), find(&model, b)) {
                            (Some((pa, _)), Some((pb, _))) => {
                                let ok = pa != pb && model[pa].last() < model[pb].first();
                                let r = ps.join(id(a), id(b));
                                prop_assert_eq!(r.is_ok(), ok);
                                if ok {
                                    let upper = std::mem::take(&mut model[pb]);
                                    model[pa].extend(upper);
                                    model.retain(|v| !v.is_empty());
                                }
                            }
                            _ => prop_assert!(ps.join(id(a), id(b)).is_err()),
                        }
                    }
                    Op::Pred(x) => {
                        let x = x as u64;
                        if let Some((p, q)) = find(&model, x) {
                            let want = q.checked_sub(1).map(|q| id(model[p][q]));
                            prop_assert_eq!(ps.path_predecessor(id(x)).unwrap(), want);
                            prop_assert_eq!(ps.path_min(id(x)).unwrap(), id(model[p][0]));
                            prop_assert_eq!(ps.path_max(id(x)).unwrap(), id(*model[p].last().unwrap()));
                        }
                    }
                    Op::Same(a, b) => {
                        let (a, b) = (a as u64, b as u64);
                        if let (Some((pa, _)), Some((pb, _))) = (find(&model, a), find(&model, b)) {
                            prop_assert_eq!(ps.same_path(id(a), id(b)).unwrap(), pa == pb);
                        }
                    }
                    Op::Remove(x) => {
                        let x = x as u64;
                        if let Some((p, q)) = find(&model, x) {
                            ps.remove(id(x)).unwrap();
                            let mut upper = model[p].split_off(q);
                            upper.remove(0);
                            model.push(upper);
                            model.retain(|v| !v.is_empty());
                        }
                    }
                    Op::Detach(x) => {
                        let x = x as u64;
                        if let Some((p, q)) = find(&model, x) {
                            ps.detach_successor(id(x)).unwrap();
                            let upper = model[p].split_off(q + 1);
                            model.push(upper);
                            model.retain(|v| !v.is_empty());
                        }
                    }
                }
                ps.audit().map_err(TestCaseError::fail)?;
                let mut got = ps.paths();
                let mut want: Vec<Vec<IntervalId>> = model.iter().map(|v| ids(v)).collect();
                got.sort();
                want.sort();
                prop_assert_eq!(got, want);
            }
        }
    }
}
