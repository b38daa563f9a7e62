//! Brute-force reference implementations used as ground truth.
//!
//! Nothing here is tuned for speed beyond what the test sweeps need; the
//! literal-definition scans (`rc_oracle`, `lc_oracle`) are quadratic when
//! applied to a whole set, so bulk audits go through [`rc_table`], a
//! sort-and-sweep that shares no code with the search trees.

mod naive;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use naive::NaiveScheduler;

use crate::error::{Error, Result};
use crate::model::{compatible, covers, Interval, IntervalId};

/// Parent map of the compatibility forest: every interval points at its
/// right compatible interval.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ForestSnapshot {
    pub nodes: BTreeSet<IntervalId>,
    pub parent: BTreeMap<IntervalId, IntervalId>,
}

impl ForestSnapshot {
    pub fn roots(&self) -> Vec<IntervalId> {
        self.nodes
            .iter()
            .filter(|n| !self.parent.contains_key(n))
            .copied()
            .collect()
    }

    pub fn children(&self) -> BTreeMap<IntervalId, Vec<IntervalId>> {
        let mut out: BTreeMap<IntervalId, Vec<IntervalId>> = BTreeMap::new();
        for (&c, &p) in &self.parent {
            out.entry(p).or_default().push(c);
        }
        out
    }

    /// Number of edges on the path from `id` to its root.
    pub fn depth(&self, id: IntervalId) -> usize {
        let mut d = 0;
        let mut cur = id;
        while let Some(&p) = self.parent.get(&cur) {
            d += 1;
            cur = p;
        }
        d
    }
}

/// Edge sets of the linearised tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LtSnapshot {
    pub nodes: BTreeSet<IntervalId>,
    /// `(i, next(i))` for consecutive members of one equivalence class.
    pub sim_edges: BTreeSet<(IntervalId, IntervalId)>,
    /// `(max of class, rc(max))`.
    pub comp_edges: BTreeSet<(IntervalId, IntervalId)>,
}

fn by_finish(set: &[Interval]) -> Vec<Interval> {
    let mut v = set.to_vec();
    v.sort_by_key(|iv| iv.finish);
    v
}

/// The greedy optimal set: repeatedly take the earliest-finishing interval
/// compatible with the last one taken.
pub fn greedy_optimal(set: &[Interval]) -> Vec<Interval> {
    let mut out: Vec<Interval> = Vec::new();
    for iv in by_finish(set) {
        match out.last() {
            Some(last) if !compatible(last, &iv) => {}
            _ => out.push(iv),
        }
    }
    out
}

/// Literal scan: the earliest-finishing interval after `i` that is compatible with it.
pub fn rc_oracle(set: &[Interval], i: &Interval) -> Option<Interval> {
    set.iter()
        .filter(|j| i.finish < j.finish && compatible(i, j))
        .min_by_key(|j| j.finish)
        .copied()
}

/// Literal scan: the latest-finishing interval before `i` that is compatible with it.
pub fn lc_oracle(set: &[Interval], i: &Interval) -> Option<Interval> {
    set.iter()
        .filter(|j| j.finish < i.finish && compatible(i, j))
        .max_by_key(|j| j.finish)
        .copied()
}

/// `rc` for every member of `set` in O(n log n): sort by start, take suffix
/// minima of finish, and binary-search the first start past each finish.
pub fn rc_table(set: &[Interval]) -> HashMap<IntervalId, Option<IntervalId>> {
    let mut by_start = set.to_vec();
    by_start.sort_by_key(|iv| iv.start);
    let mut suffix_min: Vec<Option<Interval>> = vec![None; by_start.len() + 1];
    for k in (0..by_start.len()).rev() {
        let cand = by_start[k];
        suffix_min[k] = match suffix_min[k + 1] {
            Some(best) if best.finish < cand.finish => Some(best),
            _ => Some(cand),
        };
    }
    set.iter()
        .map(|iv| {
            let first = by_start.partition_point(|j| j.start <= iv.finish);
            (iv.id, suffix_min[first].map(|j| j.id))
        })
        .collect()
}

pub fn forest_oracle(set: &[Interval]) -> ForestSnapshot {
    let rc = rc_table(set);
    ForestSnapshot {
        nodes: set.iter().map(|iv| iv.id).collect(),
        parent: rc
            .into_iter()
            .filter_map(|(c, p)| p.map(|p| (c, p)))
            .collect(),
    }
}

pub fn is_monotonic(set: &[Interval]) -> bool {
    let mut v = set.to_vec();
    v.sort_by_key(|iv| iv.start);
    v.windows(2).all(|w| w[0].finish < w[1].finish)
}

/// The linearised tree of a monotonic set. Intervals without a right
/// compatible interval form a single class.
pub fn lt_oracle(set: &[Interval]) -> Result<LtSnapshot> {
    if !is_monotonic(set) {
        return Err(Error::NonMonotonicInput);
    }
    let rc = rc_table(set);
    let ordered = by_finish(set);
    let mut snap = LtSnapshot {
        nodes: set.iter().map(|iv| iv.id).collect(),
        ..Default::default()
    };
    for w in ordered.windows(2) {
        if rc[&w[0].id] == rc[&w[1].id] {
            snap.sim_edges.insert((w[0].id, w[1].id));
        }
    }
    let mut class_max: HashMap<Option<IntervalId>, Interval> = HashMap::new();
    for iv in &ordered {
        class_max.insert(rc[&iv.id], *iv);
    }
    for (target, max) in class_max {
        if let Some(t) = target {
            snap.comp_edges.insert((max.id, t));
        }
    }
    Ok(snap)
}

/// Membership of `id` in the greedy optimal set, recomputed from scratch.
pub fn naive_query(set: &[Interval], id: IntervalId) -> Result<bool> {
    if !set.iter().any(|iv| iv.id == id) {
        return Err(Error::UnknownInterval(id));
    }
    Ok(greedy_optimal(set).iter().any(|iv| iv.id == id))
}

/// A minimum piercing set: the finishing times of the greedy optimal set.
pub fn piercing_set(set: &[Interval]) -> Vec<i64> {
    greedy_optimal(set).iter().map(|iv| iv.finish).collect()
}

/// Size of a maximum compatible subset by unit-weight interval-scheduling DP.
/// Independent of the greedy rule.
pub fn max_compatible_size(set: &[Interval]) -> usize {
    let sorted = by_finish(set);
    let mut best = vec![0usize; sorted.len() + 1];
    for k in 0..sorted.len() {
        // number of intervals finishing strictly before this one starts
        let p = sorted.partition_point(|j| j.finish < sorted[k].start);
        best[k + 1] = best[k].max(1 + best[p]);
    }
    best[sorted.len()]
}

/// All live intervals properly containing `probe`.
pub fn covers_oracle(set: &[Interval], probe: &Interval) -> Vec<Interval> {
    let mut out: Vec<Interval> = set.iter().filter(|j| covers(j, probe)).copied().collect();
    out.sort_by_key(|iv| iv.id);
    out
}

/// The earliest-finishing interval after `i` that does not cover it.
pub fn next_noncovering_oracle(set: &[Interval], i: &Interval) -> Option<Interval> {
    by_finish(set)
        .into_iter()
        .find(|r| i.finish < r.finish && !covers(r, i))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    fn ids(v: &[Interval]) -> Vec<u64> {
        v.iter().map(|iv| iv.id.0).collect()
    }

    fn id(n: u64) -> IntervalId {
        IntervalId(n)
    }

    #[test]
    fn greedy_on_eight_set() {
        assert_eq!(ids(&greedy_optimal(&eight_set())), vec![A, E, H]);
        assert!(greedy_optimal(&[]).is_empty());
    }

    #[test]
    fn rc_and_lc_on_eight_set() {
        let set = eight_set();
        assert_eq!(rc_oracle(&set, &set[C as usize]).map(|i| i.id), Some(id(G)));
        assert_eq!(lc_oracle(&set, &set[E as usize]).map(|i| i.id), Some(id(B)));
        assert_eq!(rc_oracle(&set, &set[H as usize]), None);
        assert_eq!(lc_oracle(&set, &set[A as usize]), None);
        let single = [Interval::new(1, 0, 5).unwrap()];
        assert_eq!(rc_oracle(&single, &single[0]), None);
    }

    #[test]
    fn forest_on_eight_set() {
        let forest = forest_oracle(&eight_set());
        let expected: BTreeMap<_, _> = [(A, E), (B, E), (C, G), (D, H), (E, H), (F, H)]
            .iter()
            .map(|&(c, p)| (id(c), id(p)))
            .collect();
        assert_eq!(forest.parent, expected);
        assert_eq!(forest.roots(), vec![id(G), id(H)]);
        assert_eq!(forest_oracle(&[]), ForestSnapshot::default());
    }

    #[test]
    fn linearised_tree_on_eight_set() {
        let lt = lt_oracle(&eight_set()).unwrap();
        let pairs = |v: &[(u64, u64)]| -> BTreeSet<_> {
            v.iter().map(|&(a, b)| (id(a), id(b))).collect()
        };
        assert_eq!(lt.sim_edges, pairs(&[(A, B), (D, E), (E, F), (G, H)]));
        assert_eq!(lt.comp_edges, pairs(&[(B, E), (C, G), (F, H)]));
        assert_eq!(lt_oracle(&[]).unwrap(), LtSnapshot::default());
    }

    #[test]
    fn lt_oracle_rejects_containment() {
        let set = [Interval::new(0, 0, 100).unwrap(), Interval::new(1, 10, 20).unwrap()];
        assert_eq!(lt_oracle(&set), Err(Error::NonMonotonicInput));
    }

    #[test]
    fn rc_on_general_example() {
        // skipped-subtree set, ticks = 10 x the drawn coordinates
        let set: Vec<Interval> = [
            (0, 10, 30),
            (1, 20, 45),
            (2, 40, 105),
            (3, 50, 82),
            (4, 60, 95),
            (5, 65, 100),
            (6, 85, 170),
            (7, 110, 140),
            (8, 115, 160),
            (9, 135, 150),
            (10, 145, 180),
        ]
        .iter()
        .map(|&(i, s, f)| Interval::new(i, s, f).unwrap())
        .collect();
        assert_eq!(rc_oracle(&set, &set[0]).map(|i| i.id), Some(id(3)));
    }

    #[test]
    fn naive_query_on_eight_set() {
        let set = eight_set();
        assert_eq!(naive_query(&set, id(E)), Ok(true));
        assert_eq!(naive_query(&set, id(B)), Ok(false));
        assert_eq!(naive_query(&set, id(99)), Err(Error::UnknownInterval(id(99))));
    }

    #[test]
    fn piercing_examples() {
        assert_eq!(piercing_set(&eight_set()), vec![30, 80, 120]);
        assert!(piercing_set(&[]).is_empty());
        assert_eq!(piercing_set(&[Interval::new(0, 1, 2).unwrap()]), vec![2]);
    }

    /// Exhaustive subset enumeration; the DP is checked against it.
    fn brute_force_max(set: &[Interval]) -> usize {
        let n = set.len();
        let mut best = 0;
        for mask in 0u32..(1 << n) {
            let chosen: Vec<&Interval> = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| &set[b]).collect();
            let ok = chosen
                .iter()
                .enumerate()
                .all(|(x, a)| chosen[x + 1..].iter().all(|b| compatible(a, b)));
            if ok {
                best = best.max(chosen.len());
            }
        }
        best
    }

    fn arb_set(max_len: usize) -> impl Strategy<Value = Vec<Interval>> {
        prop::collection::vec((0i64..400, 1i64..120), 0..max_len).prop_map(|raw| {
            let mut used = std::collections::HashSet::new();
            let mut out = Vec::new();
            for (k, (s, len)) in raw.into_iter().enumerate() {
                let (s, f) = (s * 2, (s + len) * 2 + 1);
                if used.insert(s) && used.insert(f) {
                    out.push(Interval::new(k as u64, s, f).unwrap());
                }
            }
            out
        })
    }

    proptest! {
        #[test]
        fn dp_matches_subset_enumeration(set in arb_set(12)) {
            prop_assert_eq!(max_compatible_size(&set), brute_force_max(&set));
        }

        #[test]
        fn greedy_is_maximum(set in arb_set(80)) {
            let g = greedy_optimal(&set);
            prop_assert_eq!(g.len(), max_compatible_size(&set));
            for w in g.windows(2) {
                prop_assert!(compatible(&w[0], &w[1]));
            }
        }

        #[test]
        fn rc_table_matches_scan(set in arb_set(60)) {
            let table = rc_table(&set);
            for iv in &set {
                prop_assert_eq!(table[&iv.id], rc_oracle(&set, iv).map(|j| j.id));
            }
        }

        #[test]
        fn forest_parents_are_least_compatible(set in arb_set(60)) {
            let forest = forest_oracle(&set);
            let by_id: HashMap<_, _> = set.iter().map(|iv| (iv.id, *iv)).collect();
            for (c, p) in &forest.parent {
                let (c, p) = (by_id[c], by_id[p]);
                prop_assert!(compatible(&c, &p));
                for j in &set {
                    if c.finish < j.finish && j.finish < p.finish {
                        prop_assert!(!compatible(&c, j));
                    }
                }
            }
        }

        #[test]
        fn piercing_set_stabs_everything(set in arb_set(60)) {
            let points = piercing_set(&set);
            prop_assert_eq!(points.len(), greedy_optimal(&set).len());
            for iv in &set {
                prop_assert!(points.iter().any(|&p| iv.start <= p && p <= iv.finish));
            }
        }

        #[test]
        fn lt_oracle_in_degree_at_most_two(len in 0usize..60, seed in any::<u64>()) {
            // equal lengths give a monotonic set
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut used = std::collections::HashSet::new();
            let mut set = Vec::new();
            for k in 0..len as u64 {
                let s = rng.gen_range(0..10_000i64) * 2;
                if used.insert(s) && used.insert(s + 301) {
                    set.push(Interval::new(k, s, s + 301).unwrap());
                }
            }
            let lt = lt_oracle(&set).unwrap();
            let mut sim_in: HashMap<IntervalId, usize> = HashMap::new();
            let mut comp_in: HashMap<IntervalId, usize> = HashMap::new();
            let mut out: HashMap<IntervalId, usize> = HashMap::new();
            for (a, b) in &lt.sim_edges {
                *sim_in.entry(*b).or_default() += 1;
                *out.entry(*a).or_default() += 1;
            }
            for (a, b) in &lt.comp_edges {
                *comp_in.entry(*b).or_default() += 1;
                *out.entry(*a).or_default() += 1;
            }
            prop_assert!(lt.sim_edges.is_disjoint(&lt.comp_edges));
            prop_assert!(sim_in.values().all(|&c| c <= 1));
            prop_assert!(comp_in.values().all(|&c| c <= 1));
            prop_assert!(out.values().all(|&c| c <= 1));
        }
    }
}
