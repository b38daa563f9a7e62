//! Timing runs and lock-step verification of the schedulers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::cf::CfScheduler;
use crate::error::{Error, Result};
use crate::index::OrderedIndex;
use crate::lt::LtScheduler;
use crate::model::{Interval, IntervalId, Mode, OpEvent, OpKind};
use crate::oracle::{greedy_optimal, NaiveScheduler};
use crate::scheduler::Scheduler;
use crate::workload::WorkloadSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Impl {
    Naive,
    Cf,
    Lt,
}

impl Impl {
    pub const ALL: [Impl; 3] = [Impl::Naive, Impl::Cf, Impl::Lt];

    pub fn name(self) -> &'static str {
        match self {
            Impl::Naive => "naive",
            Impl::Cf => "cf",
            Impl::Lt => "lt",
        }
    }

    pub fn supports(self, mode: Mode) -> bool {
        !(self == Impl::Lt && mode == Mode::General)
    }

    pub fn build(self, mode: Mode) -> Result<Box<dyn Scheduler>> {
        Ok(match self {
            Impl::Naive => Box::new(NaiveScheduler::new(mode)),
            Impl::Cf => Box::new(CfScheduler::new(mode)),
            Impl::Lt if mode == Mode::Monotonic => Box::new(LtScheduler::new()),
            Impl::Lt => return Err(Error::ModeMismatch("lt supports monotonic sets only".into())),
        })
    }
}

impl fmt::Display for Impl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Impl {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Impl::Naive),
            "cf" => Ok(Impl::Cf),
            "lt" => Ok(Impl::Lt),
            other => Err(format!("unknown implementation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunMetrics {
    pub impl_name: String,
    pub total_ns: u64,
    pub mean_insert_ns: f64,
    pub mean_remove_ns: f64,
    pub mean_query_ns: f64,
    pub dashed_traversed: u64,
    pub restructure_steps: u64,
    pub peak_live: usize,
    pub max_overlap_d: usize,
    pub inserts: usize,
    pub removes: usize,
    pub queries: usize,
}

/// Runs `events` against one scheduler, timing each operation.
pub fn run(events: &[OpEvent], which: Impl, mode: Mode) -> Result<RunMetrics> {
    let mut s = which.build(mode)?;
    let mut per_kind: HashMap<OpKind, (u64, usize)> = HashMap::new();
    let mut peak = 0usize;
    let start = Instant::now();
    for (index, ev) in events.iter().enumerate() {
        let t = Instant::now();
        s.apply(ev).map_err(|e| Error::SequenceInvalid {
            index,
            reason: e.to_string(),
        })?;
        let ns = t.elapsed().as_nanos() as u64;
        let slot = per_kind.entry(ev.kind()).or_default();
        slot.0 += ns;
        slot.1 += 1;
        peak = peak.max(s.len());
    }
    let total_ns = start.elapsed().as_nanos() as u64;
    let mean = |k: OpKind| match per_kind.get(&k) {
        Some(&(ns, c)) if c > 0 => ns as f64 / c as f64,
        _ => 0.0,
    };
    let count = |k: OpKind| per_kind.get(&k).map_or(0, |&(_, c)| c);
    let stats = s.stats();
    Ok(RunMetrics {
        impl_name: which.name().to_string(),
        total_ns,
        mean_insert_ns: mean(OpKind::Insert),
        mean_remove_ns: mean(OpKind::Remove),
        mean_query_ns: mean(OpKind::Query),
        dashed_traversed: stats.dashed_traversed,
        restructure_steps: stats.restructure_steps,
        peak_live: peak,
        max_overlap_d: max_overlap_depth(events),
        inserts: count(OpKind::Insert),
        removes: count(OpKind::Remove),
        queries: count(OpKind::Query),
    })
}

/// Per-field median of repeated runs of the same workload.
pub fn median_metrics(runs: &[RunMetrics]) -> Option<RunMetrics> {
    let first = runs.first()?;
    fn med<T: Copy + PartialOrd>(mut v: Vec<T>) -> T {
        v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN timings"));
        v[v.len() / 2]
    }
    Some(RunMetrics {
        total_ns: med(runs.iter().map(|r| r.total_ns).collect()),
        mean_insert_ns: med(runs.iter().map(|r| r.mean_insert_ns).collect()),
        mean_remove_ns: med(runs.iter().map(|r| r.mean_remove_ns).collect()),
        mean_query_ns: med(runs.iter().map(|r| r.mean_query_ns).collect()),
        ..first.clone()
    })
}

/// Largest number of simultaneously live intervals sharing a tick, which for
/// intervals is the largest pairwise-overlapping family.
pub fn max_overlap_depth(events: &[OpEvent]) -> usize {
    let mut ticks: Vec<i64> = events
        .iter()
        .filter_map(|e| match e {
            OpEvent::Insert(iv) => Some([iv.start, iv.finish]),
            _ => None,
        })
        .flatten()
        .collect();
    ticks.sort_unstable();
    ticks.dedup();
    if ticks.is_empty() {
        return 0;
    }
    let mut tree = MaxAddTree::new(ticks.len());
    let mut live: HashMap<IntervalId, (usize, usize)> = HashMap::new();
    let mut best = 0i64;
    for e in events {
        match e {
            OpEvent::Insert(iv) => {
                let a = ticks.binary_search(&iv.start).expect("tick indexed");
                let b = ticks.binary_search(&iv.finish).expect("tick indexed");
                tree.add(a, b, 1);
                live.insert(iv.id, (a, b));
                best = best.max(tree.max());
            }
            OpEvent::Remove(id) => {
                if let Some((a, b)) = live.remove(id) {
                    tree.add(a, b, -1);
                }
            }
            OpEvent::Query(_) => {}
        }
    }
    best as usize
}

/// Segment tree with range add and global max.
struct MaxAddTree {
    n: usize,
    max: Vec<i64>,
    lazy: Vec<i64>,
}

impl MaxAddTree {
    fn new(n: usize) -> Self {
        MaxAddTree {
            n,
            max: vec![0; 4 * n],
            lazy: vec![0; 4 * n],
        }
    }

    fn add(&mut self, l: usize, r: usize, v: i64) {
        self.add_at(1, 0, self.n - 1, l, r, v);
    }

    fn add_at(&mut self, node: usize, lo: usize, hi: usize, l: usize, r: usize, v: i64) {
        if r < lo || hi < l {
            return;
        }
        if l <= lo && hi <= r {
            self.max[node] += v;
            self.lazy[node] += v;
            return;
        }
        let mid = (lo + hi) / 2;
        self.add_at(2 * node, lo, mid, l, r, v);
        self.add_at(2 * node + 1, mid + 1, hi, l, r, v);
        self.max[node] = self.lazy[node] + self.max[2 * node].max(self.max[2 * node + 1]);
    }

    fn max(&self) -> i64 {
        self.max[1]
    }
}

/// Where lock-step verification first went wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub index: usize,
    pub event: OpEvent,
    pub impl_name: String,
    pub detail: String,
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "event {} ({}): {} {}", self.index, self.event, self.impl_name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub events: usize,
    pub impls: Vec<String>,
    pub divergence: Option<Divergence>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.divergence.is_none()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.divergence {
            None => write!(f, "ok: {} events, {} agree", self.events, self.impls.join(", ")),
            Some(d) => write!(f, "divergence at {d}"),
        }
    }
}

/// Replays `events` through an ordered index to reject dangling ids and,
/// in monotonic mode, containment.
pub fn validate_sequence(events: &[OpEvent], mode: Mode) -> Result<()> {
    let mut idx = OrderedIndex::new(mode);
    for (index, ev) in events.iter().enumerate() {
        let bad = |reason: String| Error::SequenceInvalid { index, reason };
        match ev {
            OpEvent::Insert(iv) => match idx.insert(*iv) {
                Ok(()) => {}
                Err(Error::MonotonicityViolation(id)) => {
                    return Err(Error::ModeMismatch(format!(
                        "event {index} inserts {id}, creating containment in a monotonic run"
                    )))
                }
                Err(e) => return Err(bad(e.to_string())),
            },
            OpEvent::Remove(id) => {
                idx.remove(*id).map_err(|e| bad(e.to_string()))?;
            }
            OpEvent::Query(id) => {
                if !idx.contains(*id) {
                    return Err(bad(format!("query of dead interval {id}")));
                }
            }
        }
    }
    Ok(())
}

enum Engine {
    Naive(NaiveScheduler),
    Cf(CfScheduler),
    Lt(LtScheduler),
}

impl Engine {
    fn sched(&mut self) -> &mut dyn Scheduler {
        match self {
            Engine::Naive(s) => s,
            Engine::Cf(s) => s,
            Engine::Lt(s) => s,
        }
    }
}

/// Runs every applicable scheduler in lock-step. After each event, query
/// answers and optimal sets are compared with the greedy set of the live
/// intervals; with `audits`, each scheduler's structural audit runs too.
pub fn verify(events: &[OpEvent], mode: Mode, audits: bool) -> Result<VerifyReport> {
    let impls: Vec<Impl> = Impl::ALL.into_iter().filter(|i| i.supports(mode)).collect();
    verify_with(events, mode, &impls, audits)
}

pub fn verify_with(events: &[OpEvent], mode: Mode, impls: &[Impl], audits: bool) -> Result<VerifyReport> {
    validate_sequence(events, mode)?;
    let mut engines: Vec<Engine> = Vec::new();
    for &i in impls {
        engines.push(match i {
            Impl::Naive => Engine::Naive(NaiveScheduler::new(mode)),
            Impl::Cf => Engine::Cf(CfScheduler::new(mode)),
            Impl::Lt => {
                if mode == Mode::General {
                    return Err(Error::ModeMismatch("lt supports monotonic sets only".into()));
                }
                Engine::Lt(LtScheduler::new())
            }
        });
    }
    let mut report = VerifyReport {
        events: events.len(),
        impls: impls.iter().map(|i| i.name().to_string()).collect(),
        divergence: None,
    };
    let mut live: BTreeMap<IntervalId, Interval> = BTreeMap::new();
    for (index, ev) in events.iter().enumerate() {
        match ev {
            OpEvent::Insert(iv) => {
                live.insert(iv.id, *iv);
            }
            OpEvent::Remove(id) => {
                live.remove(id);
            }
            OpEvent::Query(_) => {}
        }
        let set: Vec<Interval> = live.values().copied().collect();
        let greedy = greedy_optimal(&set);
        let expected_answer = match ev {
            OpEvent::Query(id) => Some(greedy.iter().any(|g| g.id == *id)),
            _ => None,
        };
        for engine in engines.iter_mut() {
            let before = match engine {
                Engine::Lt(lt) if audits => Some(lt.edges()),
                _ => None,
            };
            let s = engine.sched();
            let name = s.name();
            let diverge = |detail: String| Divergence {
                index,
                event: *ev,
                impl_name: name.to_string(),
                detail,
            };
            let answer = match s.apply(ev) {
                Ok(a) => a,
                Err(e) => {
                    report.divergence = Some(diverge(format!("failed: {e}")));
                    return Ok(report);
                }
            };
            if answer != expected_answer {
                report.divergence = Some(diverge(format!("answered {answer:?}, expected {expected_answer:?}")));
                return Ok(report);
            }
            let got = s.optimal_set();
            if got != greedy {
                let ids = |v: &[Interval]| v.iter().map(|x| x.id.0).collect::<Vec<_>>();
                report.divergence = Some(diverge(format!(
                    "optimal set {:?} differs from greedy {:?}",
                    ids(&got),
                    ids(&greedy)
                )));
                return Ok(report);
            }
            if audits {
                let audit = match engine {
                    Engine::Naive(n) => n.index().audit().map(|_| ()),
                    Engine::Cf(cf) => cf.audit(),
                    Engine::Lt(lt) => lt.audit().and_then(|_| match (&before, ev) {
                        (Some(b), OpEvent::Insert(_) | OpEvent::Remove(_)) => lt.audit_locality(b, ev.id()),
                        _ => Ok(()),
                    }),
                };
                if let Err(detail) = audit {
                    report.divergence = Some(Divergence {
                        index,
                        event: *ev,
                        impl_name: name.to_string(),
                        detail: format!("audit failed: {detail}"),
                    });
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// One CSV row of benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    #[serde(rename = "impl")]
    pub impl_name: String,
    pub n: usize,
    pub r: f64,
    pub q: f64,
    pub sparsity: f64,
    pub seed: u64,
    pub total_ns: u64,
    pub mean_insert_ns: f64,
    pub mean_remove_ns: f64,
    pub mean_query_ns: f64,
    pub dashed_traversed: u64,
    pub restructure_steps: u64,
    pub peak_live: usize,
    pub max_overlap_d: usize,
}

impl CsvRow {
    pub fn new(spec: &WorkloadSpec, m: &RunMetrics) -> Self {
        CsvRow {
            impl_name: m.impl_name.clone(),
            n: spec.n,
            r: spec.remove_ratio,
            q: spec.query_ratio,
            sparsity: spec.sparsity,
            seed: spec.seed,
            total_ns: m.total_ns,
            mean_insert_ns: m.mean_insert_ns,
            mean_remove_ns: m.mean_remove_ns,
            mean_query_ns: m.mean_query_ns,
            dashed_traversed: m.dashed_traversed,
            restructure_steps: m.restructure_steps,
            peak_live: m.peak_live,
            max_overlap_d: m.max_overlap_d,
        }
    }
}

pub fn write_csv<W: std::io::Write>(out: W, rows: &[CsvRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
