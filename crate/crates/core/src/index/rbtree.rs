//! Arena red-black tree over intervals with subtree augmentation.
//!
//! Every node carries the node of least finish and the greatest start in its
//! subtree. Index 0 is the black sentinel; its parent field is scratch space
//! during deletion, as in the textbook algorithm.

use std::collections::HashMap;

use crate::model::{Interval, IntervalId};

pub(crate) const NIL: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum KeyBy {
    Start,
    Finish,
}

#[derive(Debug, Clone)]
struct Node {
    iv: Interval,
    left: usize,
    right: usize,
    parent: usize,
    red: bool,
    min_fin: usize,
    max_start: i64,
}

#[derive(Debug, Clone)]
pub(crate) struct RbTree {
    key_by: KeyBy,
    nodes: Vec<Node>,
    free: Vec<usize>,
    root: usize,
    ids: HashMap<IntervalId, usize>,
}

impl RbTree {
    pub fn new(key_by: KeyBy) -> Self {
        let sentinel = Node {
            iv: Interval {
                id: IntervalId(u64::MAX),
                start: 0,
                finish: 0,
            },
            left: NIL,
            right: NIL,
            parent: NIL,
            red: false,
            min_fin: NIL,
            max_start: i64::MIN,
        };
        RbTree {
            key_by,
            nodes: vec![sentinel],
            free: Vec::new(),
            root: NIL,
            ids: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn left(&self, n: usize) -> usize {
        self.nodes[n].left
    }

    pub fn right(&self, n: usize) -> usize {
        self.nodes[n].right
    }

    pub fn iv(&self, n: usize) -> &Interval {
        debug_assert_ne!(n, NIL);
        &self.nodes[n].iv
    }

    pub fn key(&self, n: usize) -> i64 {
        key_of(self.key_by, &self.nodes[n].iv)
    }

    /// Interval of least finish in the subtree of `n`.
    pub fn min_fin(&self, n: usize) -> Option<&Interval> {
        match self.nodes[n].min_fin {
            NIL => None,
            m => Some(&self.nodes[m].iv),
        }
    }

    pub fn max_start(&self, n: usize) -> i64 {
        self.nodes[n].max_start
    }

    pub fn node_of(&self, id: IntervalId) -> Option<usize> {
        self.ids.get(&id).copied()
    }

    pub fn get(&self, id: IntervalId) -> Option<&Interval> {
        self.node_of(id).map(|n| &self.nodes[n].iv)
    }

    pub fn first(&self) -> usize {
        self.leftmost(self.root)
    }

    pub fn last(&self) -> usize {
        let mut n = self.root;
        if n == NIL {
            return NIL;
        }
        while self.nodes[n].right != NIL {
            n = self.nodes[n].right;
        }
        n
    }

    fn leftmost(&self, mut n: usize) -> usize {
        if n == NIL {
            return NIL;
        }
        while self.nodes[n].left != NIL {
            n = self.nodes[n].left;
        }
        n
    }

    pub fn succ(&self, n: usize) -> usize {
        if self.nodes[n].right != NIL {
            return self.leftmost(self.nodes[n].right);
        }
        let mut x = n;
        let mut p = self.nodes[x].parent;
        while p != NIL && self.nodes[p].right == x {
            x = p;
            p = self.nodes[p].parent;
        }
        p
    }

    pub fn pred(&self, n: usize) -> usize {
        if self.nodes[n].left != NIL {
            let mut x = self.nodes[n].left;
            while self.nodes[x].right != NIL {
                x = self.nodes[x].right;
            }
            return x;
        }
        let mut x = n;
        let mut p = self.nodes[x].parent;
        while p != NIL && self.nodes[p].left == x {
            x = p;
            p = self.nodes[p].parent;
        }
        p
    }

    pub fn in_order(&self) -> Vec<Interval> {
        let mut out = Vec::with_capacity(self.len());
        let mut n = self.first();
        while n != NIL {
            out.push(self.nodes[n].iv);
            n = self.succ(n);
        }
        out
    }

    fn refresh(&mut self, n: usize) {
        let (l, r) = (self.nodes[n].left, self.nodes[n].right);
        let mut best = n;
        for cand in [self.nodes[l].min_fin, self.nodes[r].min_fin] {
            if cand != NIL && self.nodes[cand].iv.finish < self.nodes[best].iv.finish {
                best = cand;
            }
        }
        let max_start = self.nodes[n]
            .iv
            .start
            .max(self.nodes[l].max_start)
            .max(self.nodes[r].max_start);
        let node = &mut self.nodes[n];
        node.min_fin = best;
        node.max_start = max_start;
    }

    fn refresh_to_root(&mut self, mut n: usize) {
        while n != NIL {
            self.refresh(n);
            n = self.nodes[n].parent;
        }
    }

    fn rotate_left(&mut self, x: usize) {
        let y = self.nodes[x].right;
        let yl = self.nodes[y].left;
        self.nodes[x].right = yl;
        if yl != NIL {
            self.nodes[yl].parent = x;
        }
        let xp = self.nodes[x].parent;
        self.nodes[y].parent = xp;
        if xp == NIL {
            self.root = y;
        } else if self.nodes[xp].left == x {
            self.nodes[xp].left = y;
        } else {
            self.nodes[xp].right = y;
        }
        self.nodes[y].left = x;
        self.nodes[x].parent = y;
        self.refresh(x);
        self.refresh(y);
    }

    fn rotate_right(&mut self, x: usize) {
        let y = self.nodes[x].left;
        let yr = self.nodes[y].right;
        self.nodes[x].left = yr;
        if yr != NIL {
            self.nodes[yr].parent = x;
        }
        let xp = self.nodes[x].parent;
        self.nodes[y].parent = xp;
        if xp == NIL {
            self.root = y;
        } else if self.nodes[xp].right == x {
            self.nodes[xp].right = y;
        } else {
            self.nodes[xp].left = y;
        }
        self.nodes[y].right = x;
        self.nodes[x].parent = y;
        self.refresh(x);
        self.refresh(y);
    }

    fn alloc(&mut self, iv: Interval) -> usize {
        let node = Node {
            iv,
            left: NIL,
            right: NIL,
            parent: NIL,
            red: true,
            min_fin: NIL,
            max_start: iv.start,
        };
        let n = match self.free.pop() {
            Some(slot) => {
                self.nodes[slot] = node;
                slot
            }
            None => {
                self.nodes.push(node);
                self.nodes.len() - 1
            }
        };
        self.nodes[n].min_fin = n;
        n
    }

    /// Inserts `iv`; the caller guarantees its key and id are not present.
    pub fn insert(&mut self, iv: Interval) -> usize {
        let key = key_of(self.key_by, &iv);
        let z = self.alloc(iv);
        self.ids.insert(iv.id, z);
        let mut parent = NIL;
        let mut x = self.root;
        while x != NIL {
            parent = x;
            debug_assert_ne!(self.key(x), key);
            x = if key < self.key(x) {
                self.nodes[x].left
            } else {
                self.nodes[x].right
            };
        }
        self.nodes[z].parent = parent;
        if parent == NIL {
            self.root = z;
        } else if key < self.key(parent) {
            self.nodes[parent].left = z;
        } else {
            self.nodes[parent].right = z;
        }
        self.refresh_to_root(parent);
        self.insert_fixup(z);
        z
    }

    fn insert_fixup(&mut self, mut z: usize) {
        while self.nodes[self.nodes[z].parent].red {
            let p = self.nodes[z].parent;
            let g = self.nodes[p].parent;
            if p == self.nodes[g].left {
                let u = self.nodes[g].right;
                if self.nodes[u].red {
                    self.nodes[p].red = false;
                    self.nodes[u].red = false;
                    self.nodes[g].red = true;
                    z = g;
                } else {
                    if z == self.nodes[p].right {
                        z = p;
                        self.rotate_left(z);
                    }
                    let p = self.nodes[z].parent;
                    let g = self.nodes[p].parent;
                    self.nodes[p].red = false;
                    self.nodes[g].red = true;
                    self.rotate_right(g);
                }
            } else {
                let u = self.nodes[g].left;
                if self.nodes[u].red {
                    self.nodes[p].red = false;
                    self.nodes[u].red = false;
                    self.nodes[g].red = true;
                    z = g;
                } else {
                    if z == self.nodes[p].left {
                        z = p;
                        self.rotate_right(z);
                    }
                    let p = self.nodes[z].parent;
                    let g = self.nodes[p].parent;
                    self.nodes[p].red = false;
                    self.nodes[g].red = true;
                    self.rotate_left(g);
                }
            }
        }
        let root = self.root;
        self.nodes[root].red = false;
    }

    fn transplant(&mut self, u: usize, v: usize) {
        let up = self.nodes[u].parent;
        if up == NIL {
            self.root = v;
        } else if self.nodes[up].left == u {
            self.nodes[up].left = v;
        } else {
            self.nodes[up].right = v;
        }
        self.nodes[v].parent = up;
    }

    pub fn remove(&mut self, id: IntervalId) -> Option<Interval> {
        let z = self.ids.remove(&id)?;
        let removed = self.nodes[z].iv;
        let mut y_red = self.nodes[z].red;
        let x;
        if self.nodes[z].left == NIL {
            x = self.nodes[z].right;
            self.transplant(z, x);
        } else if self.nodes[z].right == NIL {
            x = self.nodes[z].left;
            self.transplant(z, x);
        } else {
            let y = self.leftmost(self.nodes[z].right);
            y_red = self.nodes[y].red;
            x = self.nodes[y].right;
            if self.nodes[y].parent == z {
                self.nodes[x].parent = y;
            } else {
                self.transplant(y, x);
                let zr = self.nodes[z].right;
                self.nodes[y].right = zr;
                self.nodes[zr].parent = y;
            }
            self.transplant(z, y);
            let zl = self.nodes[z].left;
            self.nodes[y].left = zl;
            self.nodes[zl].parent = y;
            self.nodes[y].red = self.nodes[z].red;
        }
        self.refresh_to_root(self.nodes[x].parent);
        if !y_red {
            self.delete_fixup(x);
        }
        self.nodes[NIL].parent = NIL;
        self.nodes[NIL].left = NIL;
        self.nodes[NIL].right = NIL;
        self.free.push(z);
        Some(removed)
    }

    fn delete_fixup(&mut self, mut x: usize) {
        while x != self.root && !self.nodes[x].red {
            let p = self.nodes[x].parent;
            if x == self.nodes[p].left {
                let mut w = self.nodes[p].right;
                if self.nodes[w].red {
                    self.nodes[w].red = false;
                    self.nodes[p].red = true;
                    self.rotate_left(p);
                    w = self.nodes[self.nodes[x].parent].right;
                }
                let (wl, wr) = (self.nodes[w].left, self.nodes[w].right);
                if !self.nodes[wl].red && !self.nodes[wr].red {
                    self.nodes[w].red = true;
                    x = self.nodes[x].parent;
                } else {
                    if !self.nodes[wr].red {
                        self.nodes[wl].red = false;
                        self.nodes[w].red = true;
                        self.rotate_right(w);
                        w = self.nodes[self.nodes[x].parent].right;
                    }
                    let p = self.nodes[x].parent;
                    self.nodes[w].red = self.nodes[p].red;
                    self.nodes[p].red = false;
                    let wr = self.nodes[w].right;
                    self.nodes[wr].red = false;
                    self.rotate_left(p);
                    x = self.root;
                }
            } else {
                let mut w = self.nodes[p].left;
                if self.nodes[w].red {
                    self.nodes[w].red = false;
                    self.nodes[p].red = true;
                    self.rotate_right(p);
                    w = self.nodes[self.nodes[x].parent].left;
                }
                let (wl, wr) = (self.nodes[w].left, self.nodes[w].right);
                if !self.nodes[wl].red && !self.nodes[wr].red {
                    self.nodes[w].red = true;
                    x = self.nodes[x].parent;
                } else {
                    if !self.nodes[wl].red {
                        self.nodes[wr].red = false;
                        self.nodes[w].red = true;
                        self.rotate_left(w);
                        w = self.nodes[self.nodes[x].parent].left;
                    }
                    let p = self.nodes[x].parent;
                    self.nodes[w].red = self.nodes[p].red;
                    self.nodes[p].red = false;
                    let wl = self.nodes[w].left;
                    self.nodes[wl].red = false;
                    self.rotate_right(p);
                    x = self.root;
                }
            }
        }
        self.nodes[x].red = false;
    }

    /// Full structural check. Returns the height on success.
    pub fn audit(&self) -> Result<usize, String> {
        if self.nodes[self.root].red {
            return Err("red root".into());
        }
        if self.root != NIL && self.nodes[self.root].parent != NIL {
            return Err("root has a parent".into());
        }
        let mut count = 0;
        let (_, height) = self.audit_node(self.root, i64::MIN, i64::MAX, &mut count)?;
        if count != self.len() {
            return Err(format!("{count} reachable nodes, {} ids", self.len()));
        }
        for (id, &n) in &self.ids {
            if self.nodes[n].iv.id != *id {
                return Err(format!("id map points {id} at the wrong node"));
            }
        }
        Ok(height)
    }

    /// Returns (black height, height).
    fn audit_node(
        &self,
        n: usize,
        lo: i64,
        hi: i64,
        count: &mut usize,
    ) -> Result<(usize, usize), String> {
        if n == NIL {
            return Ok((1, 0));
        }
        *count += 1;
        let node = &self.nodes[n];
        let k = self.key(n);
        if k <= lo || k >= hi {
            return Err(format!("key {k} out of order"));
        }
        for c in [node.left, node.right] {
            if c != NIL && self.nodes[c].parent != n {
                return Err(format!("broken parent link below {}", node.iv.id));
            }
            if node.red && self.nodes[c].red {
                return Err(format!("red node {} has a red child", node.iv.id));
            }
        }
        let (bl, hl) = self.audit_node(node.left, lo, k, count)?;
        let (br, hr) = self.audit_node(node.right, k, hi, count)?;
        if bl != br {
            return Err(format!("black height mismatch at {}", node.iv.id));
        }
        // brute-force subtree minimum of finish and maximum of start
        let mut stack = vec![n];
        let mut min_f = i64::MAX;
        let mut max_s = i64::MIN;
        while let Some(m) = stack.pop() {
            if m == NIL {
                continue;
            }
            min_f = min_f.min(self.nodes[m].iv.finish);
            max_s = max_s.max(self.nodes[m].iv.start);
            stack.push(self.nodes[m].left);
            stack.push(self.nodes[m].right);
        }
        if self.nodes[node.min_fin].iv.finish != min_f || node.min_fin == NIL {
            return Err(format!("stale min-finish pointer at {}", node.iv.id));
        }
        if node.max_start != max_s {
            return Err(format!("stale max-start at {}", node.iv.id));
        }
        Ok((bl + usize::from(!node.red), 1 + hl.max(hr)))
    }
}

pub(crate) fn key_of(by: KeyBy, iv: &Interval) -> i64 {
    match by {
        KeyBy::Start => iv.start,
        KeyBy::Finish => iv.finish,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    proptest! {
        #[test]
        fn matches_btreemap_model(ops in prop::collection::vec((any::<bool>(), 0i64..300), 1..400)) {
            let mut tree = RbTree::new(KeyBy::Start);
            let mut model: BTreeMap<i64, Interval> = BTreeMap::new();
            for (k, (ins, s)) in ops.into_iter().enumerate() {
                if ins {
                    if model.contains_key(&s) {
                        continue;
                    }
                    let iv = Interval::new(k as u64, s, s + 1 + (k as i64 * 7919) % 500).unwrap();
                    tree.insert(iv);
                    model.insert(s, iv);
                } else if let Some((&key, &iv)) = model.range(s..).next() {
                    model.remove(&key);
                    prop_assert_eq!(tree.remove(iv.id), Some(iv));
                }
                let h = tree.audit().map_err(TestCaseError::fail)?;
                let n = model.len() as f64;
                prop_assert!(h as f64 <= 2.0 * (n + 1.0).log2() + 1e-9);
                prop_assert_eq!(tree.in_order(), model.values().copied().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn succ_and_pred_walk_the_order() {
        let mut tree = RbTree::new(KeyBy::Finish);
        for k in 0..50u64 {
            let f = ((k * 37) % 50) as i64 * 10 + 5;
            tree.insert(Interval::new(k, f - 3, f).unwrap());
        }
        let mut n = tree.first();
        let mut seen = Vec::new();
        while n != NIL {
            seen.push(tree.key(n));
            n = tree.succ(n);
        }
        assert_eq!(seen, (0..50).map(|k| k * 10 + 5).collect::<Vec<_>>());
        let mut n = tree.last();
        seen.clear();
        while n != NIL {
            seen.push(tree.key(n));
            n = tree.pred(n);
        }
        assert_eq!(seen.len(), 50);
        assert!(seen.windows(2).all(|w| w[0] > w[1]));
    }
}
