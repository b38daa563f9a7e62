//! Workload generation: random shuffled mixes and the adversarial
//! perfect-binary-tree sequence, plus the forest-to-intervals layout.

use std::collections::{HashMap, HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cf::CfScheduler;
use crate::error::{Error, Result};
use crate::model::{Interval, IntervalId, Mode, OpEvent};
use crate::oracle::ForestSnapshot;
use crate::scheduler::Scheduler;

/// Width of the tick grid random intervals are drawn from.
pub const GRID: i64 = 1 << 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    /// Number of inserts.
    pub n: usize,
    /// Removes as a fraction of `n`.
    pub remove_ratio: f64,
    /// Queries as a fraction of `n`.
    pub query_ratio: f64,
    /// Upper bound on the fraction of intervals that can be scheduled together.
    pub sparsity: f64,
    pub seed: u64,
    pub mode: Mode,
}

impl WorkloadSpec {
    pub fn new(n: usize, remove_ratio: f64, query_ratio: f64, sparsity: f64, seed: u64, mode: Mode) -> Self {
        WorkloadSpec {
            n,
            remove_ratio,
            query_ratio,
            sparsity,
            seed,
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.remove_ratio) {
            return Err(Error::InvalidSpec(format!("remove ratio {} outside [0, 1]", self.remove_ratio)));
        }
        if !(self.query_ratio >= 0.0 && self.query_ratio.is_finite()) {
            return Err(Error::InvalidSpec(format!("query ratio {} is negative", self.query_ratio)));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::InvalidSpec(format!("sparsity {} outside (0, 1]", self.sparsity)));
        }
        Ok(())
    }

    pub fn removes(&self) -> usize {
        (self.remove_ratio * self.n as f64).floor() as usize
    }

    pub fn queries(&self) -> usize {
        (self.query_ratio * self.n as f64).floor() as usize
    }

    /// Common interval length for this spec.
    pub fn base_length(&self) -> i64 {
        if self.n == 0 {
            return 1;
        }
        let l = (GRID as f64 / (self.sparsity * self.n as f64)).round() as i64;
        l.clamp(1, GRID / 2)
    }
}

/// A shuffled mix of `n` inserts, `floor(rn)` removes and `floor(qn)`
/// queries. Removes and queries always target a live id; inserts always use
/// fresh ids and endpoints never used before in the sequence.
pub fn generate_random(spec: &WorkloadSpec) -> Result<Vec<OpEvent>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base = spec.base_length();
    let mut used: HashSet<i64> = HashSet::with_capacity(2 * spec.n);
    let mut live: Vec<IntervalId> = Vec::new();
    let (mut ins, mut rem, mut qry) = (spec.n, spec.removes(), spec.queries());
    let mut next_id = 0u64;
    let mut events = Vec::with_capacity(ins + rem + qry);

    while ins + rem + qry > 0 {
        let can_remove = rem > 0 && !live.is_empty() && !(live.len() == 1 && ins == 0 && qry > 0);
        let can_query = qry > 0 && !live.is_empty();
        let w_rem = if can_remove { rem } else { 0 };
        let w_qry = if can_query { qry } else { 0 };
        let total = ins + w_rem + w_qry;
        debug_assert!(total > 0, "generator stalled");
        let pick = rng.gen_range(0..total);
        if pick < ins {
            let len = match spec.mode {
                Mode::Monotonic => base,
                Mode::General => {
                    if rng.gen_bool(0.5) {
                        base
                    } else {
                        (4 * base).min(GRID / 2)
                    }
                }
            };
            let (s, f) = loop {
                let s = rng.gen_range(0..GRID - len);
                let f = s + len;
                if !used.contains(&s) && !used.contains(&f) {
                    break (s, f);
                }
            };
            used.insert(s);
            used.insert(f);
            let iv = Interval::new(next_id, s, f)?;
            next_id += 1;
            live.push(iv.id);
            events.push(OpEvent::Insert(iv));
            ins -= 1;
        } else if pick < ins + w_rem {
            let k = rng.gen_range(0..live.len());
            events.push(OpEvent::Remove(live.swap_remove(k)));
            rem -= 1;
        } else {
            let k = rng.gen_range(0..live.len());
            events.push(OpEvent::Query(live[k]));
            qry -= 1;
        }
    }
    Ok(events)
}

/// Lays out a monotonic interval set whose compatibility forest is exactly
/// `forest`, with the same ids.
///
/// Nodes are placed in reverse breadth-first order, so every parent sits
/// after its children and the parents of consecutive nodes never move
/// backwards. Node at position `p` starts at `K*p`; its finish lands just
/// below its parent's start, offset by `p` to keep finishes increasing.
pub fn forest_to_intervals(forest: &ForestSnapshot) -> Result<Vec<Interval>> {
    for (c, p) in &forest.parent {
        if !forest.nodes.contains(c) || !forest.nodes.contains(p) {
            return Err(Error::NotAForest(format!("edge ({c}, {p}) leaves the node set")));
        }
    }
    let children = forest.children();
    let mut order: Vec<IntervalId> = Vec::with_capacity(forest.nodes.len());
    let mut queue: VecDeque<IntervalId> = forest.roots().into_iter().collect();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        if let Some(cs) = children.get(&v) {
            queue.extend(cs.iter().copied());
        }
    }
    if order.len() != forest.nodes.len() {
        return Err(Error::NotAForest("parent map contains a cycle".into()));
    }
    order.reverse();
    let n = order.len() as i64;
    let pos: HashMap<IntervalId, i64> = order.iter().enumerate().map(|(p, &id)| (id, p as i64)).collect();
    let k = 2 * n + 2;
    order
        .iter()
        .enumerate()
        .map(|(p, id)| {
            let p = p as i64;
            let parent_pos = forest.parent.get(id).map_or(n, |q| pos[q]);
            Interval::new(id.0, k * p, k * (parent_pos - 1) + 1 + p)
        })
        .collect()
}

/// Parent map of the perfect binary tree of height `h` in heap numbering.
pub fn perfect_binary_forest(h: u32) -> ForestSnapshot {
    let n = (1u64 << (h + 1)) - 1;
    ForestSnapshot {
        nodes: (0..n).map(IntervalId).collect(),
        parent: (1..n).map(|i| (IntervalId(i), IntervalId((i - 1) / 2))).collect(),
    }
}

/// `k` events: `n = 2^(h+1) - 1` inserts building a perfect binary
/// compatibility tree, then insert/remove pairs. Each paired insert becomes
/// the new least interval and hangs below a leaf whose whole root path is
/// dashed at that moment, so exposing it crosses `h + 1` dashed edges.
pub fn generate_adversarial(h: u32, k: usize) -> Result<Vec<OpEvent>> {
    if h > 24 {
        return Err(Error::InvalidSpec(format!("height {h} is too large")));
    }
    let n = (1usize << (h + 1)) - 1;
    if k < n {
        return Err(Error::InvalidSpec(format!("k = {k} is below the tree size {n}")));
    }
    let forest = perfect_binary_forest(h);
    let mut build = forest_to_intervals(&forest)?;
    build.sort_by_key(|iv| iv.finish);
    let min_start = build.first().map_or(0, |iv| iv.start);

    let mut cf = CfScheduler::new(Mode::Monotonic);
    let mut events = Vec::with_capacity(k);
    for iv in &build {
        cf.insert(*iv)?;
        events.push(OpEvent::Insert(*iv));
    }
    let by_id: HashMap<IntervalId, Interval> = build.iter().map(|iv| (iv.id, *iv)).collect();
    let mut next_id = n as u64;
    while events.len() < k {
        // Walk down from the root through children whose edge is dashed.
        let mut v = 0u64;
        while 2 * v + 1 < n as u64 {
            let left = IntervalId(2 * v + 1);
            let solid = cf.solid_parent(left)? == Some(IntervalId(v));
            v = if solid { 2 * v + 2 } else { 2 * v + 1 };
        }
        let x = by_id[&IntervalId(v)];
        let is = Interval::new(next_id, min_start - 2, x.start - 1)?;
        next_id += 1;
        cf.insert(is)?;
        events.push(OpEvent::Insert(is));
        if events.len() < k {
            cf.remove(is.id)?;
            events.push(OpEvent::Remove(is.id));
        }
    }
    Ok(events)
}
