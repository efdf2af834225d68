//! Behavioral distance of a group to the log, averaging per-instance
//! cohesion, completeness, and a size term that favors non-unary groups.

use dashmap::DashMap;
use thiserror::Error;

use crate::instances::{instances, Group, SplitRule};
use crate::log::{ClassSet, EventLog};

/// Distance of one group: over all its instances, the mean of
/// `interrupts/|instance| + missing/|group| + 1/|group|`. Lower is better; a
/// singleton group with at least one instance scores exactly 1.
pub fn group_distance(
    group: &Group,
    log: &EventLog,
    rule: SplitRule,
) -> Result<f64, DistanceError> {
    let mut count = 0usize;
    let mut total = 0.0f64;
    let size = group.len() as f64;
    for trace in log.traces() {
        for instance in instances(trace, group, rule) {
            let interrupts = instance.interrupt_count() as f64 / instance.len() as f64;
            let missing = instance.missing_class_count(group) as f64 / size;
            total += interrupts + missing + 1.0 / size;
            count += 1;
        }
    }
    if count == 0 {
        return Err(DistanceError::NoInstances {
            group: group.signature(),
        });
    }
    Ok(total / count as f64)
}

/// Distance of a grouping: the sum of its group distances, accumulated in
/// group-signature order so equal groupings always produce bit-equal sums.
/// An empty grouping is no cover of anything and is rejected.
pub fn grouping_distance(
    groups: &[Group],
    log: &EventLog,
    rule: SplitRule,
) -> Result<f64, DistanceError> {
    if groups.is_empty() {
        return Err(DistanceError::EmptyGrouping);
    }
    let mut sorted: Vec<&Group> = groups.iter().collect();
    sorted.sort();
    let mut total = 0.0;
    for group in sorted {
        total += group_distance(group, log, rule)?;
    }
    Ok(total)
}

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("group {{{group}}} has no instance in the log")]
    NoInstances { group: String },
    #[error("a grouping must contain at least one group")]
    EmptyGrouping,
}

/// Memoizes group distances per log and split rule; safe for concurrent
/// insert-if-absent from candidate-evaluation workers.
pub struct DistanceCache<'a> {
    log: &'a EventLog,
    rule: SplitRule,
    cache: DashMap<ClassSet, Option<f64>>,
}

impl<'a> DistanceCache<'a> {
    pub fn new(log: &'a EventLog, rule: SplitRule) -> Self {
        DistanceCache {
            log,
            rule,
            cache: DashMap::new(),
        }
    }

    pub fn log(&self) -> &'a EventLog {
        self.log
    }

    pub fn rule(&self) -> SplitRule {
        self.rule
    }

    /// Distance of the class set, or `None` when no instance exists.
    pub fn distance(&self, set: &ClassSet) -> Option<f64> {
        if let Some(hit) = self.cache.get(set) {
            return *hit;
        }
        let value = Group::new(set.clone())
            .ok()
            .and_then(|g| group_distance(&g, self.log, self.rule).ok());
        self.cache.insert(set.clone(), value);
        value
    }

    /// Sum of distances in signature order; `None` if any set has no instance.
    pub fn objective(&self, sets: &[ClassSet]) -> Option<f64> {
        let mut sorted: Vec<&ClassSet> = sets.iter().collect();
        sorted.sort();
        let mut total = 0.0;
        for set in sorted {
            total += self.distance(set)?;
        }
        Some(total)
    }
}
