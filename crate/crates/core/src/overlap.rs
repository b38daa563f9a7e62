//! Leaf-oriented red-black interval tree answering "who properly contains i".
//!
//! Leaves hold live endpoints. An internal node's split point is the largest
//! leaf in its left subtree, so rotations never change split points. Each
//! interval is filed at the lowest common ancestor of its two endpoint
//! leaves, i.e. the highest node with `start <= split < finish`, in two
//! ordered sets: by start ascending and by finish descending.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{covers, Interval, IntervalId};

const NIL: usize = usize::MAX;

#[derive(Debug, Clone)]
struct Node {
    /// Endpoint for a leaf, split point for an internal node.
    key: i64,
    leaf: bool,
    red: bool,
    left: usize,
    right: usize,
    parent: usize,
    by_start: BTreeSet<(i64, IntervalId)>,
    by_finish: BTreeSet<(Reverse<i64>, IntervalId)>,
}

impl Node {
    fn new(key: i64, leaf: bool, red: bool) -> Self {
        Node {
            key,
            leaf,
            red,
            left: NIL,
            right: NIL,
            parent: NIL,
            by_start: BTreeSet::new(),
            by_finish: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct IntervalOverlapIndex {
    nodes: Vec<Node>,
    free: Vec<usize>,
    root: usize,
    leaves: HashMap<i64, usize>,
    live: HashMap<IntervalId, Interval>,
}

impl IntervalOverlapIndex {
    pub fn new() -> Self {
        IntervalOverlapIndex {
            root: NIL,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    fn alloc(&mut self, n: Node) -> usize {
        match self.free.pop() {
            Some(x) => {
                self.nodes[x] = n;
                x
            }
            None => {
                self.nodes.push(n);
                self.nodes.len() - 1
            }
        }
    }

    fn is_red(&self, x: usize) -> bool {
        x != NIL && self.nodes[x].red
    }

    fn replace_child(&mut self, parent: usize, old: usize, new: usize) {
        if parent == NIL {
            self.root = new;
        } else if self.nodes[parent].left == old {
            self.nodes[parent].left = new;
        } else {
            self.nodes[parent].right = new;
        }
        if new != NIL {
            self.nodes[new].parent = parent;
        }
    }

    /// Refiles `moved` from node `from` to node `to`.
    fn migrate(&mut self, from: usize, to: usize, moved: Vec<IntervalId>) {
        for id in moved {
            let iv = self.live[&id];
            self.nodes[from].by_start.remove(&(iv.start, id));
            self.nodes[from].by_finish.remove(&(Reverse(iv.finish), id));
            self.nodes[to].by_start.insert((iv.start, id));
            self.nodes[to].by_finish.insert((Reverse(iv.finish), id));
        }
    }

    fn rotate_left(&mut self, x: usize) {
        let y = self.nodes[x].right;
        let b = self.nodes[y].left;
        let p = self.nodes[x].parent;
        self.nodes[x].right = b;
        self.nodes[b].parent = x;
        self.replace_child(p, x, y);
        self.nodes[y].left = x;
        self.nodes[x].parent = y;
        // y now spans x's old range: intervals of I(x) reaching past split(y)
        // straddle y's split and are homed there.
        let split_y = self.nodes[y].key;
        let moved: Vec<IntervalId> = self.nodes[x]
            .by_finish
            .range(..(Reverse(split_y), IntervalId(0)))
            .map(|&(_, id)| id)
            .collect();
        self.migrate(x, y, moved);
    }

    fn rotate_right(&mut self, x: usize) {
        let y = self.nodes[x].left;
        let b = self.nodes[y].right;
        let p = self.nodes[x].parent;
        self.nodes[x].left = b;
        self.nodes[b].parent = x;
        self.replace_child(p, x, y);
        self.nodes[y].right = x;
        self.nodes[x].parent = y;
        let split_y = self.nodes[y].key;
        let moved: Vec<IntervalId> = self.nodes[x]
            .by_start
            .range(..=(split_y, IntervalId(u64::MAX)))
            .map(|&(_, id)| id)
            .collect();
        self.migrate(x, y, moved);
    }

    fn insert_leaf(&mut self, k: i64) {
        if self.root == NIL {
            let l = self.alloc(Node::new(k, true, false));
            self.root = l;
            self.leaves.insert(k, l);
            return;
        }
        let mut v = self.root;
        while !self.nodes[v].leaf {
            v = if k <= self.nodes[v].key {
                self.nodes[v].left
            } else {
                self.nodes[v].right
            };
        }
        let old = self.nodes[v].key;
        let new_leaf = self.alloc(Node::new(k, true, false));
        self.leaves.insert(k, new_leaf);
        let (lo, hi) = if k < old { (new_leaf, v) } else { (v, new_leaf) };
        let parent = self.nodes[v].parent;
        let n = self.alloc(Node::new(old.min(k), false, true));
        self.replace_child(parent, v, n);
        self.nodes[n].left = lo;
        self.nodes[n].right = hi;
        self.nodes[lo].parent = n;
        self.nodes[hi].parent = n;
        self.insert_fixup(n);
    }

    fn insert_fixup(&mut self, mut z: usize) {
        while self.is_red(self.nodes[z].parent) {
            let p = self.nodes[z].parent;
            let g = self.nodes[p].parent;
            if self.nodes[g].left == p {
                let u = self.nodes[g].right;
                if self.is_red(u) {
                    self.nodes[p].red = false;
                    self.nodes[u].red = false;
                    self.nodes[g].red = true;
                    z = g;
                } else {
                    if self.nodes[p].right == z {
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
                if self.is_red(u) {
                    self.nodes[p].red = false;
                    self.nodes[u].red = false;
                    self.nodes[g].red = true;
                    z = g;
                } else {
                    if self.nodes[p].left == z {
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
        let r = self.root;
        self.nodes[r].red = false;
    }

    fn delete_leaf(&mut self, k: i64) {
        let l = self.leaves.remove(&k).expect("endpoint leaf exists");
        let p = self.nodes[l].parent;
        if p == NIL {
            self.root = NIL;
            self.free.push(l);
            return;
        }
        debug_assert!(self.nodes[p].by_start.is_empty(), "parent of a deleted leaf must be empty");
        let s = if self.nodes[p].left == l {
            self.nodes[p].right
        } else {
            self.nodes[p].left
        };
        let g = self.nodes[p].parent;
        let p_black = !self.nodes[p].red;
        self.replace_child(g, p, s);
        self.free.push(l);
        self.free.push(p);

        // At most one ancestor used k as its split point.
        let mut a = g;
        let mut child = s;
        while a != NIL {
            if self.nodes[a].left == child && self.nodes[a].key == k {
                let mut m = self.nodes[a].left;
                while !self.nodes[m].leaf {
                    m = self.nodes[m].right;
                }
                self.nodes[a].key = self.nodes[m].key;
                break;
            }
            child = a;
            a = self.nodes[a].parent;
        }

        if p_black {
            if self.nodes[s].red {
                self.nodes[s].red = false;
            } else {
                self.delete_fixup(s);
            }
        }
    }

    fn delete_fixup(&mut self, mut x: usize) {
        while x != self.root && !self.nodes[x].red {
            let p = self.nodes[x].parent;
            if self.nodes[p].left == x {
                let mut w = self.nodes[p].right;
                if self.nodes[w].red {
                    self.nodes[w].red = false;
                    self.nodes[p].red = true;
                    self.rotate_left(p);
                    w = self.nodes[p].right;
                }
                let (wl, wr) = (self.nodes[w].left, self.nodes[w].right);
                if !self.is_red(wl) && !self.is_red(wr) {
                    self.nodes[w].red = true;
                    x = p;
                } else {
                    if !self.is_red(wr) {
                        self.nodes[wl].red = false;
                        self.nodes[w].red = true;
                        self.rotate_right(w);
                        w = self.nodes[p].right;
                    }
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
                    w = self.nodes[p].left;
                }
                let (wl, wr) = (self.nodes[w].left, self.nodes[w].right);
                if !self.is_red(wl) && !self.is_red(wr) {
                    self.nodes[w].red = true;
                    x = p;
                } else {
                    if !self.is_red(wl) {
                        self.nodes[wr].red = false;
                        self.nodes[w].red = true;
                        self.rotate_left(w);
                        w = self.nodes[p].left;
                    }
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

    /// The node where `iv` is (or would be) filed.
    fn home(&self, iv: &Interval) -> usize {
        let mut v = self.root;
        while v != NIL && !self.nodes[v].leaf {
            let split = self.nodes[v].key;
            if iv.finish <= split {
                v = self.nodes[v].left;
            } else if iv.start > split {
                v = self.nodes[v].right;
            } else {
                return v;
            }
        }
        NIL
    }

    pub fn insert(&mut self, iv: Interval) -> Result<()> {
        if self.live.contains_key(&iv.id) {
            return Err(Error::DuplicateId(iv.id));
        }
        for tick in [iv.start, iv.finish] {
            if self.leaves.contains_key(&tick) {
                return Err(Error::DuplicateEndpoint { tick });
            }
        }
        self.insert_leaf(iv.start);
        self.insert_leaf(iv.finish);
        self.live.insert(iv.id, iv);
        let h = self.home(&iv);
        self.nodes[h].by_start.insert((iv.start, iv.id));
        self.nodes[h].by_finish.insert((Reverse(iv.finish), iv.id));
        Ok(())
    }

    pub fn remove(&mut self, id: IntervalId) -> Result<Interval> {
        let iv = *self.live.get(&id).ok_or(Error::UnknownInterval(id))?;
        let h = self.home(&iv);
        self.nodes[h].by_start.remove(&(iv.start, id));
        self.nodes[h].by_finish.remove(&(Reverse(iv.finish), id));
        self.live.remove(&id);
        self.delete_leaf(iv.start);
        self.delete_leaf(iv.finish);
        Ok(iv)
    }

    /// Every live interval that properly contains `i`. `i` need not be live.
    pub fn covers_all(&self, i: &Interval) -> Vec<Interval> {
        let mut out = Vec::new();
        let mut v = self.root;
        while v != NIL && !self.nodes[v].leaf {
            let node = &self.nodes[v];
            let split = node.key;
            if split < i.start {
                // Everything here starts before i; covering means finishing after it.
                for &(Reverse(f), id) in &node.by_finish {
                    if f <= i.finish {
                        break;
                    }
                    out.push(self.live[&id]);
                }
                v = node.right;
            } else if split >= i.finish {
                // Everything here finishes after i.
                for &(s, id) in &node.by_start {
                    if s >= i.start {
                        break;
                    }
                    out.push(self.live[&id]);
                }
                v = node.left;
            } else {
                // split inside i: coverers must be filed here, and nowhere below.
                for &(s, id) in &node.by_start {
                    if s >= i.start {
                        break;
                    }
                    let j = self.live[&id];
                    if j.finish > i.finish {
                        out.push(j);
                    }
                }
                break;
            }
        }
        debug_assert!(out.iter().all(|j| covers(j, i)));
        out
    }

    /// Full structural audit. Returns the tree height.
    pub fn audit(&self) -> Result<usize, String> {
        if self.root == NIL {
            if !self.live.is_empty() || !self.leaves.is_empty() {
                return Err("empty tree with live intervals".into());
            }
            return Ok(0);
        }
        if self.nodes[self.root].red {
            return Err("red root".into());
        }
        if self.nodes[self.root].parent != NIL {
            return Err("root has a parent".into());
        }
        let mut leaf_keys = Vec::new();
        let mut filed = 0usize;
        let (_, height) = self.audit_node(self.root, &mut leaf_keys, &mut filed)?;
        if leaf_keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err("leaves out of order".into());
        }
        if leaf_keys.len() != 2 * self.live.len() || self.leaves.len() != leaf_keys.len() {
            return Err(format!(
                "{} leaves for {} live intervals",
                leaf_keys.len(),
                self.live.len()
            ));
        }
        for iv in self.live.values() {
            if !self.leaves.contains_key(&iv.start) || !self.leaves.contains_key(&iv.finish) {
                return Err(format!("missing endpoint leaf for {iv}"));
            }
        }
        if filed != self.live.len() {
            return Err(format!("{filed} filed entries for {} live intervals", self.live.len()));
        }
        Ok(height)
    }

    /// Returns (black height, height) of the subtree.
    fn audit_node(&self, v: usize, leaf_keys: &mut Vec<i64>, filed: &mut usize) -> Result<(usize, usize), String> {
        let n = &self.nodes[v];
        if n.leaf {
            if n.red {
                return Err(format!("red leaf {}", n.key));
            }
            if n.left != NIL || n.right != NIL {
                return Err(format!("leaf {} has children", n.key));
            }
            if self.leaves.get(&n.key) != Some(&v) {
                return Err(format!("leaf {} not registered", n.key));
            }
            leaf_keys.push(n.key);
            return Ok((1, 0));
        }
        if n.left == NIL || n.right == NIL {
            return Err(format!("internal node {} lacks a child", n.key));
        }
        for c in [n.left, n.right] {
            if self.nodes[c].parent != v {
                return Err(format!("stale parent link under {}", n.key));
            }
            if n.red && self.nodes[c].red {
                return Err(format!("red node {} has a red child", n.key));
            }
        }
        let before = leaf_keys.len();
        let (bl, hl) = self.audit_node(n.left, leaf_keys, filed)?;
        let left_max = *leaf_keys[before..].last().expect("left subtree has a leaf");
        if left_max != n.key {
            return Err(format!("split {} is not the left maximum {left_max}", n.key));
        }
        let (br, hr) = self.audit_node(n.right, leaf_keys, filed)?;
        if bl != br {
            return Err(format!("black heights differ under {}", n.key));
        }
        if n.by_start.len() != n.by_finish.len() {
            return Err(format!("start and finish sets differ in size at {}", n.key));
        }
        for &(s, id) in &n.by_start {
            let iv = self.live.get(&id).ok_or_else(|| format!("dead interval {id} filed"))?;
            if iv.start != s || !n.by_finish.contains(&(Reverse(iv.finish), id)) {
                return Err(format!("{iv} filed inconsistently at {}", n.key));
            }
            if self.home(iv) != v {
                return Err(format!("{iv} filed at {} but belongs elsewhere", n.key));
            }
        }
        *filed += n.by_start.len();
        Ok((bl + usize::from(!n.red), 1 + hl.max(hr)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::covers_oracle;
    use proptest::prelude::*;

    fn iv(id: u64, s: i64, f: i64) -> Interval {
        Interval::new(id, s, f).unwrap()
    }

    fn covering() -> Vec<Interval> {
        vec![iv(0, 0, 30), iv(1, 10, 50), iv(2, 40, 80), iv(3, 60, 90), iv(4, 95, 115)]
    }

    fn sorted(mut v: Vec<Interval>) -> Vec<Interval> {
        v.sort_by_key(|x| x.id);
        v
    }

    #[test]
    fn covering_coverers() {
        let mut t = IntervalOverlapIndex::new();
        assert!(t.covers_all(&iv(9, 66, 76)).is_empty());
        for x in covering() {
            t.insert(x).unwrap();
            t.audit().unwrap();
        }
        let got = sorted(t.covers_all(&iv(9, 66, 76)));
        assert_eq!(got.iter().map(|x| x.id.0).collect::<Vec<_>>(), vec![2, 3]);
        t.insert(iv(9, 66, 76)).unwrap();
        t.audit().unwrap();
        assert_eq!(sorted(t.covers_all(&iv(9, 66, 76))).len(), 2);
        assert_eq!(t.insert(iv(10, 66, 70)), Err(Error::DuplicateEndpoint { tick: 66 }));
    }

    #[test]
    fn remove_last_interval_empties_tree() {
        let mut t = IntervalOverlapIndex::new();
        t.insert(iv(1, 5, 9)).unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.remove(IntervalId(1)), Ok(iv(1, 5, 9)));
        assert_eq!(t.leaf_count(), 0);
        assert!(t.is_empty());
        t.audit().unwrap();
        assert_eq!(t.remove(IntervalId(1)), Err(Error::UnknownInterval(IntervalId(1))));
    }

    #[test]
    fn random_churn_keeps_every_interval_filed_once() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut t = IntervalOverlapIndex::new();
        let mut live: Vec<Interval> = Vec::new();
        for k in 0..2000u64 {
            if live.is_empty() || rng.gen_bool(0.55) {
                let s = rng.gen_range(0..200_000i64) * 2;
                let f = s + rng.gen_range(1..20_000i64) * 2 + 1;
                let x = iv(k, s, f);
                if t.insert(x).is_ok() {
                    live.push(x);
                }
            } else {
                let x = live.swap_remove(rng.gen_range(0..live.len()));
                t.remove(x.id).unwrap();
            }
            let h = t.audit().unwrap();
            let bound = 2.0 * ((t.leaf_count() + 1) as f64).log2();
            assert!(h as f64 <= bound + 1e-9, "height {h} over {bound}");
            if k % 20 == 0 {
                let probe = iv(u64::MAX, rng.gen_range(0..400_000), 400_001);
                assert_eq!(sorted(t.covers_all(&probe)), covers_oracle(&live, &probe));
            }
        }
    }

    fn intervals(max: usize) -> impl Strategy<Value = Vec<Interval>> {
        prop::collection::vec((0..500i64, 1..200i64), 0..max).prop_map(|raw| {
            let mut used = std::collections::HashSet::new();
            let mut out = Vec::new();
            for (k, (s, len)) in raw.into_iter().enumerate() {
                let (s, f) = (s * 3, s * 3 + len * 3 + 1);
                if !used.contains(&s) && !used.contains(&f) {
                    used.insert(s);
                    used.insert(f);
                    out.push(iv(k as u64, s, f));
                }
            }
            out
        })
    }

    proptest! {
        #[test]
        fn covers_all_matches_scan(set in intervals(60), ps in prop::collection::vec((0..1600i64, 1..700i64), 1..20)) {
            let mut t = IntervalOverlapIndex::new();
            for x in &set {
                t.insert(*x).unwrap();
            }
            t.audit().map_err(TestCaseError::fail)?;
            for (s, len) in ps {
                let probe = iv(9999, s, s + len);
                prop_assert_eq!(sorted(t.covers_all(&probe)), covers_oracle(&set, &probe));
            }
            for x in &set {
                prop_assert_eq!(sorted(t.covers_all(x)), covers_oracle(&set, x));
            }
        }

        #[test]
        fn start_scan_stops_at_first_miss(set in intervals(60), s in 0..1600i64, len in 1..700i64) {
            // Within one node, scanning by start, the first non-coverer ends the run
            // whenever the node's split lies at or beyond the probe's finish.
            let mut t = IntervalOverlapIndex::new();
            for x in &set {
                t.insert(*x).unwrap();
            }
            let probe = iv(9999, s, s + len);
            for n in t.nodes.iter().filter(|n| !n.leaf && n.key >= probe.finish) {
                let mut missed = false;
                for &(_, id) in &n.by_start {
                    let c = covers(&t.live[&id], &probe);
                    prop_assert!(!(missed && c));
                    missed |= !c;
                }
            }
        }
    }
}
