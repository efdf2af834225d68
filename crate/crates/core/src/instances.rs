//! Group-instance detection within traces: the projection of a group's
//! classes over a trace, split into instances when behavior recurs.

use std::fmt;

use thiserror::Error;

use crate::log::{set_signature, ClassSet, Event, EventClass, Trace};

/// A non-empty set of event classes considered for abstraction into one
/// high-level activity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Group {
    classes: ClassSet,
}

impl Group {
    pub fn new(classes: ClassSet) -> Result<Self, GroupError> {
        if classes.is_empty() {
            return Err(GroupError::Empty);
        }
        Ok(Group { classes })
    }

    pub fn singleton(class: impl Into<EventClass>) -> Self {
        Group {
            classes: [class.into()].into(),
        }
    }

    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    /// Number of classes; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn contains(&self, class: &EventClass) -> bool {
        self.classes.contains(class)
    }

    pub fn signature(&self) -> String {
        set_signature(&self.classes)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.signature())
    }
}

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("a group must contain at least one event class")]
    Empty,
}

/// When a new instance starts while scanning a group's projection: an
/// incoming event whose class already occurs `max_per_class` times in the
/// current instance opens a new one. The default of 1 splits on every
/// repetition; a declared per-class cardinality bound raises the permission.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRule {
    pub max_per_class: usize,
}

impl Default for SplitRule {
    fn default() -> Self {
        SplitRule { max_per_class: 1 }
    }
}

/// One realization of a group within one trace: an ordered subsequence of the
/// trace's events, all of classes in the group.
#[derive(Debug, Clone)]
pub struct GroupInstance<'a> {
    trace: &'a Trace,
    events: Vec<&'a Event>,
}

impl<'a> GroupInstance<'a> {
    pub fn trace_id(&self) -> &str {
        self.trace.id()
    }

    pub fn trace(&self) -> &'a Trace {
        self.trace
    }

    pub fn events(&self) -> &[&'a Event] {
        &self.events
    }

    /// Number of events; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn first(&self) -> &'a Event {
        self.events[0]
    }

    pub fn last(&self) -> &'a Event {
        self.events[self.events.len() - 1]
    }

    /// First and last ordinal covered by the instance.
    pub fn span(&self) -> (usize, usize) {
        (self.first().ordinal, self.last().ordinal)
    }

    /// Milliseconds between the first and last event.
    pub fn duration_ms(&self) -> i64 {
        self.last().timestamp - self.first().timestamp
    }

    /// Events of the trace lying strictly inside the instance's span that are
    /// not part of the instance itself. Events of sibling instances count.
    pub fn interrupt_count(&self) -> usize {
        let (first, last) = self.span();
        (last - first + 1) - self.events.len()
    }

    /// How many of the group's classes do not appear in this instance.
    pub fn missing_class_count(&self, group: &Group) -> usize {
        let distinct: ClassSet = self.events.iter().map(|e| e.class.clone()).collect();
        group.len() - distinct.len()
    }

    pub fn class_names(&self) -> Vec<&str> {
        self.events.iter().map(|e| e.class.name()).collect()
    }
}

/// All instances of `group` in `trace`: the projection of the group's classes
/// over the trace, split by `rule`. Instances are disjoint, ordered, and
/// their concatenation equals the projection.
pub fn instances<'a>(trace: &'a Trace, group: &Group, rule: SplitRule) -> Vec<GroupInstance<'a>> {
    let max_per_class = rule.max_per_class.max(1);
    let mut out = Vec::new();
    let mut current: Vec<&Event> = Vec::new();
    let mut counts: std::collections::BTreeMap<&EventClass, usize> = Default::default();
    for event in trace.events() {
        if !group.contains(&event.class) {
            continue;
        }
        let seen = counts.get(&event.class).copied().unwrap_or(0);
        if seen + 1 > max_per_class {
            out.push(GroupInstance {
                trace,
                events: std::mem::take(&mut current),
            });
            counts.clear();
        }
        *counts.entry(&event.class).or_insert(0) += 1;
        current.push(event);
    }
    if !current.is_empty() {
        out.push(GroupInstance {
            trace,
            events: current,
        });
    }
    out
}
