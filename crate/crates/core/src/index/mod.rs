//! The ordered index over live intervals.
//!
//! `by_start` is always present and carries the subtree min-finish pointer
//! used by the right-compatible search. In general mode a second tree keyed
//! by finish provides the finish order; in monotonic mode the two orders
//! coincide and `by_start` serves both.

mod rbtree;

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::model::{Interval, IntervalId, Mode};

use rbtree::{KeyBy, RbTree, NIL};

#[derive(Debug, Clone)]
pub struct OrderedIndex {
    mode: Mode,
    by_start: RbTree,
    by_finish: Option<RbTree>,
    endpoints: HashSet<i64>,
}

impl OrderedIndex {
    pub fn new(mode: Mode) -> Self {
        OrderedIndex {
            mode,
            by_start: RbTree::new(KeyBy::Start),
            by_finish: match mode {
                Mode::Monotonic => None,
                Mode::General => Some(RbTree::new(KeyBy::Finish)),
            },
            endpoints: HashSet::new(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.by_start.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The tree whose in-order is the finish order.
    fn ordered(&self) -> &RbTree {
        self.by_finish.as_ref().unwrap_or(&self.by_start)
    }

    pub fn contains(&self, id: IntervalId) -> bool {
        self.by_start.node_of(id).is_some()
    }

    pub fn find(&self, id: IntervalId) -> Option<Interval> {
        self.by_start.get(id).copied()
    }

    /// Checks that `iv` could be inserted, without inserting it.
    pub fn check_insert(&self, iv: &Interval) -> Result<()> {
        if iv.start >= iv.finish {
            return Err(Error::InvalidInterval {
                id: iv.id,
                start: iv.start,
                finish: iv.finish,
            });
        }
        if self.contains(iv.id) {
            return Err(Error::DuplicateId(iv.id));
        }
        for tick in [iv.start, iv.finish] {
            if self.endpoints.contains(&tick) {
                return Err(Error::DuplicateEndpoint { tick });
            }
        }
        if self.mode == Mode::Monotonic && self.monotonicity_violation(iv) {
            return Err(Error::MonotonicityViolation(iv.id));
        }
        Ok(())
    }

    pub fn insert(&mut self, iv: Interval) -> Result<()> {
        self.check_insert(&iv)?;
        self.endpoints.insert(iv.start);
        self.endpoints.insert(iv.finish);
        self.by_start.insert(iv);
        if let Some(t) = self.by_finish.as_mut() {
            t.insert(iv);
        }
        Ok(())
    }

    pub fn remove(&mut self, id: IntervalId) -> Result<Interval> {
        let iv = self.by_start.remove(id).ok_or(Error::UnknownInterval(id))?;
        if let Some(t) = self.by_finish.as_mut() {
            t.remove(id);
        }
        self.endpoints.remove(&iv.start);
        self.endpoints.remove(&iv.finish);
        Ok(iv)
    }

    pub fn minimum(&self) -> Option<Interval> {
        let t = self.ordered();
        match t.first() {
            NIL => None,
            n => Some(*t.iv(n)),
        }
    }

    pub fn maximum(&self) -> Option<Interval> {
        let t = self.ordered();
        match t.last() {
            NIL => None,
            n => Some(*t.iv(n)),
        }
    }

    /// The interval following `id` in finish order.
    pub fn next(&self, id: IntervalId) -> Result<Option<Interval>> {
        let t = self.ordered();
        let n = t.node_of(id).ok_or(Error::UnknownInterval(id))?;
        Ok(match t.succ(n) {
            NIL => None,
            s => Some(*t.iv(s)),
        })
    }

    /// The interval preceding `id` in finish order.
    pub fn previous(&self, id: IntervalId) -> Result<Option<Interval>> {
        let t = self.ordered();
        let n = t.node_of(id).ok_or(Error::UnknownInterval(id))?;
        Ok(match t.pred(n) {
            NIL => None,
            p => Some(*t.iv(p)),
        })
    }

    /// Live intervals in finish order.
    pub fn iter_ordered(&self) -> Vec<Interval> {
        self.ordered().in_order()
    }

    /// `rc(i)`: the earliest-finishing live interval that starts after `i`
    /// finishes. `i` need not be live.
    pub fn right_compatible(&self, i: &Interval) -> Option<Interval> {
        let t = &self.by_start;
        let mut best: Option<Interval> = None;
        let mut j = t.root();
        match self.mode {
            Mode::Monotonic => {
                while j != NIL {
                    if t.iv(j).start <= i.finish {
                        j = t.right(j);
                    } else {
                        best = Some(*t.iv(j));
                        j = t.left(j);
                    }
                }
            }
            Mode::General => {
                // Stepping left skips j and its right subtree; everything
                // there starts after i finishes, so remember the least finish.
                while j != NIL {
                    if t.iv(j).start <= i.finish {
                        j = t.right(j);
                    } else {
                        let here = t.iv(j);
                        let right_min = t.min_fin(t.right(j));
                        for cand in [Some(here), right_min].into_iter().flatten() {
                            if best.is_none_or(|b| cand.finish < b.finish) {
                                best = Some(*cand);
                            }
                        }
                        j = t.left(j);
                    }
                }
            }
        }
        best
    }

    /// `lc(i)`: the latest-finishing live interval that finishes before `i`
    /// starts.
    pub fn left_compatible(&self, i: &Interval) -> Option<Interval> {
        // Descends the finish-ordered tree; in monotonic mode that is
        // `by_start`, where finishing before i starts is the same test.
        let t = self.ordered();
        let mut best = None;
        let mut j = t.root();
        while j != NIL {
            if t.iv(j).finish >= i.start {
                j = t.left(j);
            } else {
                best = Some(*t.iv(j));
                j = t.right(j);
            }
        }
        best
    }

    /// The earliest-finishing live interval after `i` that does not cover it,
    /// i.e. the least finish among intervals with `finish > i.finish` and
    /// `start > i.start`.
    pub fn next_noncovering(&self, i: &Interval) -> Option<Interval> {
        match self.mode {
            Mode::Monotonic => {
                // No containment: the first start after i's start.
                let t = &self.by_start;
                let mut best = None;
                let mut j = t.root();
                while j != NIL {
                    if t.iv(j).start <= i.start {
                        j = t.right(j);
                    } else {
                        best = Some(*t.iv(j));
                        j = t.left(j);
                    }
                }
                best
            }
            Mode::General => {
                let t = self.by_finish.as_ref().expect("general mode keeps by_finish");
                first_with_start_after(t, i.finish, i.start).map(|n| *t.iv(n))
            }
        }
    }

    /// True iff inserting `i` into the (monotonic) live set would create a
    /// containment pair. Only the start-order neighbours need checking.
    pub fn monotonicity_violation(&self, i: &Interval) -> bool {
        let t = &self.by_start;
        let mut succ = NIL;
        let mut pred = NIL;
        let mut j = t.root();
        while j != NIL {
            if t.iv(j).start > i.start {
                succ = j;
                j = t.left(j);
            } else {
                pred = j;
                j = t.right(j);
            }
        }
        (succ != NIL && t.iv(succ).finish < i.finish) || (pred != NIL && t.iv(pred).finish > i.finish)
    }

    /// Structural audit of both trees: red-black shape, key order,
    /// augmentation values, and the height bound. Returns the max height.
    pub fn audit(&self) -> Result<usize, String> {
        let h = self.by_start.audit()?;
        let n = self.len() as f64;
        let bound = 2.0 * (n + 1.0).log2();
        if h as f64 > bound + 1e-9 {
            return Err(format!("height {h} exceeds {bound:.2}"));
        }
        let mut height = h;
        if let Some(t) = &self.by_finish {
            let hf = t.audit()?;
            if hf as f64 > bound + 1e-9 {
                return Err(format!("finish-tree height {hf} exceeds {bound:.2}"));
            }
            height = height.max(hf);
            let mut a = self.by_start.in_order();
            let mut b = t.in_order();
            a.sort_by_key(|iv| iv.id);
            b.sort_by_key(|iv| iv.id);
            if a != b {
                return Err("start and finish trees hold different intervals".into());
            }
        }
        if self.mode == Mode::Monotonic {
            let v = self.by_start.in_order();
            if v.windows(2).any(|w| w[0].finish >= w[1].finish) {
                return Err("start order disagrees with finish order".into());
            }
        }
        if self.endpoints.len() != 2 * self.len() {
            return Err("endpoint set out of sync".into());
        }
        Ok(height)
    }
}

/// Leftmost node with key > `key_floor` and start > `start_floor`, in a tree
/// keyed by finish and augmented with subtree max-start.
fn first_with_start_after(t: &RbTree, key_floor: i64, start_floor: i64) -> Option<usize> {
    // Canonical pieces of the key range (key_floor, inf): on the search path,
    // each node whose key is in range contributes itself and its right
    // subtree. Deeper pieces come earlier in key order.
    let mut pieces: Vec<usize> = Vec::new();
    let mut j = t.root();
    while j != NIL {
        if t.key(j) > key_floor {
            pieces.push(j);
            j = t.left(j);
        } else {
            j = t.right(j);
        }
    }
    for &node in pieces.iter().rev() {
        if t.iv(node).start > start_floor {
            return Some(node);
        }
        let r = t.right(node);
        if t.max_start(r) > start_floor {
            let mut x = r;
            loop {
                let l = t.left(x);
                if t.max_start(l) > start_floor {
                    x = l;
                } else if t.iv(x).start > start_floor {
                    return Some(x);
                } else {
                    x = t.right(x);
                }
            }
        }
    }
    None
}
