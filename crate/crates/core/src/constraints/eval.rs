//! Satisfaction predicates for groups and groupings, with violation reports
//! that feed infeasibility diagnostics.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{Constraint, ConstraintError, ConstraintKind, ConstraintScope, ConstraintSet};
use crate::instances::{instances, Group, GroupInstance};
use crate::log::{AttributeValue, ClassSet, EventLog};

/// One violated constraint with the evidence gathered while checking.
#[derive(Debug, Clone, Serialize)]
pub struct ViolationDetail {
    /// The constraint rendered in its surface syntax.
    pub constraint: String,
    pub scope: ConstraintScope,
    /// Instances violating the constraint (instance scope only).
    pub violating_instances: usize,
    /// Instances inspected (instance scope only).
    pub total_instances: usize,
    /// Classes of the group under check.
    pub classes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ViolationReport {
    pub details: Vec<ViolationDetail>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.details.is_empty()
    }
}

/// Outcome of checking one group against a constraint set.
#[derive(Debug, Clone)]
pub struct GroupCheck {
    pub holds: bool,
    pub report: ViolationReport,
}

impl GroupCheck {
    fn satisfied() -> Self {
        GroupCheck {
            holds: true,
            report: ViolationReport::default(),
        }
    }
}

fn classes_of(group: &Group) -> Vec<String> {
    group
        .classes()
        .iter()
        .map(|c| c.name().to_string())
        .collect()
}

/// Checks all class-based and instance-based constraints for one group.
/// Class-based constraints are evaluated first; a violation there
/// short-circuits the log pass. An instance aggregate over an attribute that
/// never occurs on any class of the group is reported and treated as a
/// violation rather than an error.
pub fn holds_group(
    group: &Group,
    rs: &ConstraintSet,
    log: &EventLog,
) -> Result<GroupCheck, ConstraintError> {
    for class in group.classes() {
        if !log.contains_class(class) {
            return Err(ConstraintError::UnknownClass {
                class: class.name().to_string(),
            });
        }
    }
    let mut report = ViolationReport::default();
    for c in rs.class_based() {
        if !class_constraint_holds(c, group, log) {
            report.details.push(ViolationDetail {
                constraint: c.to_string(),
                scope: ConstraintScope::ClassBased,
                violating_instances: 0,
                total_instances: 0,
                classes: classes_of(group),
                note: None,
            });
        }
    }
    if !report.is_empty() {
        return Ok(GroupCheck {
            holds: false,
            report,
        });
    }

    let instance_constraints: Vec<&Constraint> = rs.instance_based().collect();
    if instance_constraints.is_empty() {
        return Ok(GroupCheck::satisfied());
    }

    let rule = rs.split_rule();
    let all_instances: Vec<GroupInstance> = log
        .traces()
        .iter()
        .flat_map(|t| instances(t, group, rule))
        .collect();
    for c in instance_constraints {
        if let Some(attr) = c.instance_attr() {
            if !log.attr_known_for(group.classes(), attr) {
                report.details.push(ViolationDetail {
                    constraint: c.to_string(),
                    scope: ConstraintScope::InstanceBased,
                    violating_instances: all_instances.len(),
                    total_instances: all_instances.len(),
                    classes: classes_of(group),
                    note: Some(format!(
                        "attribute '{attr}' absent from every event of the group"
                    )),
                });
                continue;
            }
        }
        let satisfied = all_instances
            .iter()
            .filter(|i| instance_constraint_holds_inner(c, i))
            .count();
        let violating = all_instances.len() - satisfied;
        let holds = match &c.kind {
            ConstraintKind::CoverageFraction { quota, .. } => {
                all_instances.is_empty() || (satisfied as f64) >= quota * all_instances.len() as f64
            }
            _ => violating == 0,
        };
        if !holds {
            report.details.push(ViolationDetail {
                constraint: c.to_string(),
                scope: ConstraintScope::InstanceBased,
                violating_instances: violating,
                total_instances: all_instances.len(),
                classes: classes_of(group),
                note: None,
            });
        }
    }
    Ok(GroupCheck {
        holds: report.is_empty(),
        report,
    })
}

/// Checks grouping-level bounds plus every group of an exact cover.
pub fn holds_grouping(
    groups: &[Group],
    rs: &ConstraintSet,
    log: &EventLog,
) -> Result<GroupCheck, ConstraintError> {
    validate_partition(groups, log)?;
    let mut report = ViolationReport::default();
    for c in rs.grouping() {
        let holds = match c.kind {
            ConstraintKind::GroupCountMax(n) => groups.len() <= n,
            ConstraintKind::GroupCountMin(n) => groups.len() >= n,
            _ => true,
        };
        if !holds {
            report.details.push(ViolationDetail {
                constraint: c.to_string(),
                scope: ConstraintScope::Grouping,
                violating_instances: 0,
                total_instances: 0,
                classes: vec![],
                note: Some(format!("grouping has {} groups", groups.len())),
            });
        }
    }
    for group in groups {
        let check = holds_group(group, rs, log)?;
        report.details.extend(check.report.details);
    }
    Ok(GroupCheck {
        holds: report.is_empty(),
        report,
    })
}

fn validate_partition(groups: &[Group], log: &EventLog) -> Result<(), ConstraintError> {
    let mut seen = ClassSet::new();
    for g in groups {
        for c in g.classes() {
            if !seen.insert(c.clone()) {
                return Err(ConstraintError::NotAPartition {
                    message: format!("class '{c}' covered more than once"),
                });
            }
        }
    }
    if &seen != log.classes() {
        let missing: Vec<String> = log
            .classes()
            .difference(&seen)
            .map(|c| c.name().to_string())
            .collect();
        let extra: Vec<String> = seen
            .difference(log.classes())
            .map(|c| c.name().to_string())
            .collect();
        return Err(ConstraintError::NotAPartition {
            message: format!("missing classes {missing:?}, foreign classes {extra:?}"),
        });
    }
    Ok(())
}

fn class_constraint_holds(c: &Constraint, group: &Group, log: &EventLog) -> bool {
    match &c.kind {
        ConstraintKind::ClassCountMin(n) => group.len() >= *n,
        ConstraintKind::ClassCountMax(n) => group.len() <= *n,
        ConstraintKind::CannotLink(a, b) => !(group.contains(a) && group.contains(b)),
        ConstraintKind::MustLink(a, b) => group.contains(a) == group.contains(b),
        ConstraintKind::ClassAttrDistinctMax { attr, max } => {
            let mut values: BTreeSet<AttributeValue> = BTreeSet::new();
            for class in group.classes() {
                if let Ok(observed) = log.class_attribute(class, attr) {
                    values.extend(observed);
                }
            }
            values.len() <= *max
        }
        _ => true,
    }
}

/// Aggregated attribute values of one instance, skipping events without the
/// attribute (or with a non-numeric value, for sum/avg).
fn numeric_values(instance: &GroupInstance, attr: &str) -> Vec<f64> {
    instance
        .events()
        .iter()
        .filter_map(|e| e.attrs.get(attr).and_then(AttributeValue::as_number))
        .collect()
}

fn distinct_values(instance: &GroupInstance, attr: &str) -> usize {
    instance
        .events()
        .iter()
        .filter_map(|e| e.attrs.get(attr))
        .collect::<BTreeSet<_>>()
        .len()
}

/// Per-instance satisfaction. An instance without any valued event violates
/// minimum-style aggregates and vacuously satisfies maximum-style ones.
pub(crate) fn instance_constraint_holds_inner(c: &Constraint, instance: &GroupInstance) -> bool {
    match &c.kind {
        ConstraintKind::InstanceDistinctMin { attr, min } => {
            distinct_values(instance, attr) >= *min
        }
        ConstraintKind::InstanceDistinctMax { attr, max } => {
            distinct_values(instance, attr) <= *max
        }
        ConstraintKind::InstanceSumMin { attr, min } => {
            let values = numeric_values(instance, attr);
            !values.is_empty() && values.iter().sum::<f64>() >= *min
        }
        ConstraintKind::InstanceSumMax { attr, max } => {
            let values = numeric_values(instance, attr);
            values.is_empty() || values.iter().sum::<f64>() <= *max
        }
        ConstraintKind::InstanceAvgMin { attr, min } => {
            let values = numeric_values(instance, attr);
            !values.is_empty() && values.iter().sum::<f64>() / values.len() as f64 >= *min
        }
        ConstraintKind::InstanceAvgMax { attr, max } => {
            let values = numeric_values(instance, attr);
            values.is_empty() || values.iter().sum::<f64>() / values.len() as f64 <= *max
        }
        ConstraintKind::InstanceDurationMax { seconds } => {
            instance.duration_ms() as f64 <= seconds * 1000.0
        }
        ConstraintKind::InstanceMaxGap { seconds } => instance
            .events()
            .windows(2)
            .map(|w| w[1].timestamp - w[0].timestamp)
            .max()
            .is_none_or(|gap| gap as f64 <= seconds * 1000.0),
        ConstraintKind::InstanceClassCardinalityMax(n) => {
            let mut counts: std::collections::BTreeMap<&str, usize> = Default::default();
            for e in instance.events() {
                *counts.entry(e.class.name()).or_insert(0) += 1;
            }
            counts.values().all(|&count| count <= *n)
        }
        ConstraintKind::CoverageFraction { inner, .. } => {
            instance_constraint_holds_inner(inner, instance)
        }
        _ => true,
    }
}
