//! In-memory event log model: classes, events, traces, logs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The type label of an event. Two events belong to the same class iff their
/// class names are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventClass(String);

impl EventClass {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "event class name must be non-empty");
        EventClass(name)
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventClass {
    fn from(s: &str) -> Self {
        EventClass::new(s)
    }
}

impl From<String> for EventClass {
    fn from(s: String) -> Self {
        EventClass::new(s)
    }
}

/// A set of event classes, ordered by name for deterministic iteration.
pub type ClassSet = BTreeSet<EventClass>;

/// Builds a [`ClassSet`] from anything yielding class names.
pub fn class_set<I, T>(names: I) -> ClassSet
where
    I: IntoIterator<Item = T>,
    T: Into<EventClass>,
{
    names.into_iter().map(Into::into).collect()
}

/// Renders a class set as a stable `a+b+c` signature, used for tie-breaking
/// and log output.
pub fn set_signature(set: &ClassSet) -> String {
    let names: Vec<&str> = set.iter().map(EventClass::name).collect();
    names.join("+")
}

/// A tagged attribute value. Comparisons are only meaningful between values
/// of the same tag; `Ord` falls back to tag rank so values can live in sorted
/// collections.
#[derive(Debug, Clone)]
pub enum AttributeValue {
    Str(String),
    Int(i64),
    Real(f64),
    /// UTC epoch milliseconds, non-negative.
    Timestamp(i64),
}

impl AttributeValue {
    fn tag_rank(&self) -> u8 {
        match self {
            AttributeValue::Str(_) => 0,
            AttributeValue::Int(_) => 1,
            AttributeValue::Real(_) => 2,
            AttributeValue::Timestamp(_) => 3,
        }
    }

    /// Numeric view used by sum/avg aggregations; strings and timestamps are
    /// not numeric.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttributeValue::Int(v) => Some(*v as f64),
            AttributeValue::Real(v) => Some(*v),
            _ => None,
        }
    }
}

impl PartialEq for AttributeValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for AttributeValue {}

impl PartialOrd for AttributeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AttributeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        use AttributeValue::*;
        match (self, other) {
            (Str(a), Str(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Real(a), Real(b)) => a.total_cmp(b),
            (Timestamp(a), Timestamp(b)) => a.cmp(b),
            _ => self.tag_rank().cmp(&other.tag_rank()),
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Str(s) => f.write_str(s),
            AttributeValue::Int(v) => write!(f, "{v}"),
            AttributeValue::Real(v) => write!(f, "{v:?}"),
            AttributeValue::Timestamp(v) => write!(f, "{v}"),
        }
    }
}

/// One recorded event: a class, a timestamp, free attributes, and its
/// position within the owning trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub class: EventClass,
    /// UTC epoch milliseconds.
    pub timestamp: i64,
    pub attrs: BTreeMap<String, AttributeValue>,
    /// 0-based position within the trace, assigned after sorting.
    pub ordinal: usize,
}

impl Event {
    pub fn new(class: impl Into<EventClass>, timestamp: i64) -> Self {
        Event {
            class: class.into(),
            timestamp,
            attrs: BTreeMap::new(),
            ordinal: 0,
        }
    }

    pub fn with_attr(mut self, name: impl Into<String>, value: AttributeValue) -> Self {
        self.attrs.insert(name.into(), value);
        self
    }
}

/// One process execution as an ordered, non-empty event sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    id: String,
    events: Vec<Event>,
    classes: ClassSet,
}

impl Trace {
    /// Builds a trace, sorting events by timestamp (stable, so equal
    /// timestamps keep input order) and assigning consecutive ordinals.
    pub fn new(id: impl Into<String>, mut events: Vec<Event>) -> Result<Self, LogError> {
        let id = id.into();
        if events.is_empty() {
            return Err(LogError::EmptyTrace { trace: id });
        }
        events.sort_by_key(|e| e.timestamp);
        for (i, e) in events.iter_mut().enumerate() {
            e.ordinal = i;
        }
        let classes = events.iter().map(|e| e.class.clone()).collect();
        Ok(Trace {
            id,
            events,
            classes,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// The distinct classes occurring in this trace.
    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The classes as an ordered sequence, handy in tests.
    pub fn class_names(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.class.name()).collect()
    }
}

/// An immutable event log: traces in a deterministic order plus derived
/// class-level views.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    traces: Vec<Trace>,
    classes: ClassSet,
    class_attrs: BTreeMap<EventClass, BTreeMap<String, BTreeSet<AttributeValue>>>,
}

impl EventLog {
    /// Assembles a log from traces, deriving the class set and the observed
    /// class-level attribute values. Trace ids must be unique.
    pub fn from_traces(traces: Vec<Trace>) -> Result<Self, LogError> {
        if traces.iter().all(|t| t.is_empty()) {
            return Err(LogError::EmptyLog);
        }
        let mut ids = BTreeSet::new();
        for t in &traces {
            if !ids.insert(t.id().to_string()) {
                return Err(LogError::DuplicateTraceId {
                    trace: t.id().to_string(),
                });
            }
        }
        let mut classes = ClassSet::new();
        let mut class_attrs: BTreeMap<EventClass, BTreeMap<String, BTreeSet<AttributeValue>>> =
            BTreeMap::new();
        for t in &traces {
            for e in t.events() {
                classes.insert(e.class.clone());
                let per_class = class_attrs.entry(e.class.clone()).or_default();
                for (k, v) in &e.attrs {
                    per_class.entry(k.clone()).or_default().insert(v.clone());
                }
            }
        }
        Ok(EventLog {
            traces,
            classes,
            class_attrs,
        })
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn trace(&self, id: &str) -> Option<&Trace> {
        self.traces.iter().find(|t| t.id() == id)
    }

    /// The set of event classes occurring in the log.
    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    pub fn contains_class(&self, class: &EventClass) -> bool {
        self.classes.contains(class)
    }

    /// All distinct values of `attr` observed on events of `class`; empty if
    /// the attribute never occurs on that class.
    pub fn class_attribute(
        &self,
        class: &EventClass,
        attr: &str,
    ) -> Result<BTreeSet<AttributeValue>, LogError> {
        if !self.classes.contains(class) {
            return Err(LogError::UnknownClass {
                class: class.name().to_string(),
            });
        }
        Ok(self
            .class_attrs
            .get(class)
            .and_then(|m| m.get(attr))
            .cloned()
            .unwrap_or_default())
    }

    /// True if `attr` is observed on at least one event of any class in `set`.
    pub fn attr_known_for(&self, set: &ClassSet, attr: &str) -> bool {
        set.iter().any(|c| {
            self.class_attrs
                .get(c)
                .is_some_and(|m| m.contains_key(attr))
        })
    }

    /// Union of attribute names observed anywhere in the log, sorted.
    pub fn attribute_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in &self.traces {
            for e in t.events() {
                out.extend(e.attrs.keys().cloned());
            }
        }
        out
    }

    /// Length of the longest trace.
    pub fn max_trace_len(&self) -> usize {
        self.traces.iter().map(Trace::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("log contains no events")]
    EmptyLog,
    #[error("trace '{trace}' contains no events")]
    EmptyTrace { trace: String },
    #[error("duplicate trace id '{trace}'")]
    DuplicateTraceId { trace: String },
    #[error("unknown event class '{class}'")]
    UnknownClass { class: String },
}
