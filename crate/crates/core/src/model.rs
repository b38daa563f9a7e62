//! Intervals, the finish-time order, and the workload event vocabulary.
//!
//! Timestamps are integer ticks. Two intervals are compatible when one
//! finishes strictly before the other starts; touching intervals overlap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stable identifier of an interval across a whole workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntervalId(pub u64);

impl fmt::Display for IntervalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub id: IntervalId,
    pub start: i64,
    pub finish: i64,
}

impl Interval {
    /// Builds an interval, rejecting `start >= finish`.
    pub fn new(id: u64, start: i64, finish: i64) -> Result<Self> {
        let id = IntervalId(id);
        if start >= finish {
            return Err(Error::InvalidInterval { id, start, finish });
        }
        Ok(Interval { id, start, finish })
    }

    pub fn compatible(&self, other: &Interval) -> bool {
        compatible(self, other)
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        !compatible(self, other)
    }

    pub fn covers(&self, inner: &Interval) -> bool {
        covers(self, inner)
    }

    pub fn precedes(&self, other: &Interval) -> bool {
        precedes(self, other)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}[{}, {}]", self.id, self.start, self.finish)
    }
}

/// True iff one of the two intervals finishes strictly before the other starts.
pub fn compatible(i: &Interval, j: &Interval) -> bool {
    i.finish < j.start || j.finish < i.start
}

/// Strict containment: `outer` starts before and finishes after `inner`.
pub fn covers(outer: &Interval, inner: &Interval) -> bool {
    outer.start < inner.start && inner.finish < outer.finish
}

/// The scheduling order: by finishing time.
pub fn precedes(i: &Interval, j: &Interval) -> bool {
    i.finish < j.finish
}

/// Whether the live set is restricted to containment-free (monotonic) intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Monotonic,
    General,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Monotonic => "mono",
            Mode::General => "general",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mono" | "monotonic" => Ok(Mode::Monotonic),
            "general" => Ok(Mode::General),
            other => Err(format!("unknown mode `{other}` (expected mono or general)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Insert,
    Remove,
    Query,
}

/// One step of a workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpEvent {
    Insert(Interval),
    Remove(IntervalId),
    Query(IntervalId),
}

impl OpEvent {
    pub fn kind(&self) -> OpKind {
        match self {
            OpEvent::Insert(_) => OpKind::Insert,
            OpEvent::Remove(_) => OpKind::Remove,
            OpEvent::Query(_) => OpKind::Query,
        }
    }

    pub fn id(&self) -> IntervalId {
        match self {
            OpEvent::Insert(iv) => iv.id,
            OpEvent::Remove(id) | OpEvent::Query(id) => *id,
        }
    }
}

impl fmt::Display for OpEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpEvent::Insert(iv) => write!(f, "I {} {} {}", iv.id, iv.start, iv.finish),
            OpEvent::Remove(id) => write!(f, "R {id}"),
            OpEvent::Query(id) => write!(f, "Q {id}"),
        }
    }
}

/// Parses the line-oriented trace format (`I id start finish`, `R id`, `Q id`).
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<OpEvent>> {
    let mut events = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let err = |message: String| Error::Parse { line, message };
        let int = |s: &str| -> Result<i64> {
            s.parse::<i64>()
                .map_err(|e| err(format!("bad integer `{s}`: {e}")))
        };
        let id = |s: &str| -> Result<IntervalId> {
            s.parse::<u64>()
                .map(IntervalId)
                .map_err(|e| err(format!("bad id `{s}`: {e}")))
        };
        let event = match fields.as_slice() {
            ["I", i, s, f] => {
                let iv = Interval::new(id(i)?.0, int(s)?, int(f)?)
                    .map_err(|e| err(e.to_string()))?;
                OpEvent::Insert(iv)
            }
            ["R", i] => OpEvent::Remove(id(i)?),
            ["Q", i] => OpEvent::Query(id(i)?),
            _ => return Err(err(format!("unrecognised event `{trimmed}`"))),
        };
        events.push(event);
    }
    Ok(events)
}

pub fn format_trace(events: &[OpEvent]) -> String {
    let mut out = String::with_capacity(events.len() * 16);
    for ev in events {
        out.push_str(&ev.to_string());
        out.push('\n');
    }
    out
}
