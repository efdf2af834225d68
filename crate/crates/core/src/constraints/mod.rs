//! Declarative constraint language over groupings, groups, and group
//! instances: the constraint types, their monotonicity classification, the
//! derived checking mode, and the satisfaction predicates.

mod eval;
mod parse;

pub use eval::{holds_group, holds_grouping, GroupCheck, ViolationDetail, ViolationReport};
pub use parse::{parse_constraints, parse_constraints_file};

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::instances::SplitRule;
use crate::log::{EventClass, EventLog};

/// Where a constraint applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintScope {
    Grouping,
    ClassBased,
    InstanceBased,
}

/// How satisfaction behaves under group enlargement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    /// Once satisfied, stays satisfied for every supergroup.
    Monotonic,
    /// Once violated, stays violated for every supergroup.
    AntiMonotonic,
    NonMonotonic,
    /// Grouping-level constraints; enlargement of a single group is not the
    /// relevant operation.
    NotApplicable,
}

/// Search pruning mode derived from a constraint set, never user-set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckingMode {
    Monotonic,
    AntiMonotonic,
    NonMonotonic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintKind {
    GroupCountMax(usize),
    GroupCountMin(usize),
    ClassCountMin(usize),
    ClassCountMax(usize),
    CannotLink(EventClass, EventClass),
    MustLink(EventClass, EventClass),
    /// At most `max` distinct class-level values of `attr` within a group.
    ClassAttrDistinctMax {
        attr: String,
        max: usize,
    },
    InstanceDistinctMin {
        attr: String,
        min: usize,
    },
    InstanceDistinctMax {
        attr: String,
        max: usize,
    },
    InstanceSumMin {
        attr: String,
        min: f64,
    },
    InstanceSumMax {
        attr: String,
        max: f64,
    },
    InstanceAvgMin {
        attr: String,
        min: f64,
    },
    InstanceAvgMax {
        attr: String,
        max: f64,
    },
    /// Max seconds between consecutive events of an instance.
    InstanceMaxGap {
        seconds: f64,
    },
    /// Max seconds between first and last event of an instance.
    InstanceDurationMax {
        seconds: f64,
    },
    /// At most `n` events per event class within an instance. Also feeds the
    /// instance splitting rule.
    InstanceClassCardinalityMax(usize),
    /// The inner instance constraint must hold for at least `quota` of all
    /// instances of the group across the log.
    CoverageFraction {
        quota: f64,
        inner: Box<Constraint>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
}

impl Constraint {
    pub fn new(kind: ConstraintKind) -> Self {
        Constraint { kind }
    }

    pub fn scope(&self) -> ConstraintScope {
        use ConstraintKind::*;
        match &self.kind {
            GroupCountMax(_) | GroupCountMin(_) => ConstraintScope::Grouping,
            ClassCountMin(_)
            | ClassCountMax(_)
            | CannotLink(..)
            | MustLink(..)
            | ClassAttrDistinctMax { .. } => ConstraintScope::ClassBased,
            _ => ConstraintScope::InstanceBased,
        }
    }

    /// Monotonicity class: minimum-style requirements are monotonic,
    /// must-not-exceed requirements anti-monotonic, aggregates over averages
    /// non-monotonic. Grouping constraints are out of scope for enlargement.
    pub fn monotonicity(&self) -> Monotonicity {
        use ConstraintKind::*;
        match &self.kind {
            GroupCountMax(_) | GroupCountMin(_) => Monotonicity::NotApplicable,
            ClassCountMin(_) | InstanceDistinctMin { .. } | InstanceSumMin { .. } => {
                Monotonicity::Monotonic
            }
            ClassCountMax(_)
            | CannotLink(..)
            | ClassAttrDistinctMax { .. }
            | InstanceDistinctMax { .. }
            | InstanceSumMax { .. }
            | InstanceMaxGap { .. }
            | InstanceDurationMax { .. }
            | InstanceClassCardinalityMax(_) => Monotonicity::AntiMonotonic,
            MustLink(..) | InstanceAvgMax { .. } | InstanceAvgMin { .. } => {
                Monotonicity::NonMonotonic
            }
            CoverageFraction { inner, .. } => match inner.monotonicity() {
                Monotonicity::AntiMonotonic => Monotonicity::AntiMonotonic,
                _ => Monotonicity::NonMonotonic,
            },
        }
    }

    /// The attribute an instance aggregate reads, if any.
    pub fn instance_attr(&self) -> Option<&str> {
        use ConstraintKind::*;
        match &self.kind {
            InstanceDistinctMin { attr, .. }
            | InstanceDistinctMax { attr, .. }
            | InstanceSumMin { attr, .. }
            | InstanceSumMax { attr, .. }
            | InstanceAvgMin { attr, .. }
            | InstanceAvgMax { attr, .. } => Some(attr),
            CoverageFraction { inner, .. } => inner.instance_attr(),
            _ => None,
        }
    }
}

impl fmt::Display for Constraint {
    /// Renders back to the surface grammar, used in reports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConstraintKind::*;
        match &self.kind {
            GroupCountMax(n) => write!(f, "grouping count <= {n}"),
            GroupCountMin(n) => write!(f, "grouping count >= {n}"),
            ClassCountMin(n) => write!(f, "class count >= {n}"),
            ClassCountMax(n) => write!(f, "class count <= {n}"),
            CannotLink(a, b) => write!(f, "class cannot-link {a} {b}"),
            MustLink(a, b) => write!(f, "class must-link {a} {b}"),
            ClassAttrDistinctMax { attr, max } => write!(f, "class distinct({attr}) <= {max}"),
            InstanceDistinctMin { attr, min } => write!(f, "instance distinct({attr}) >= {min}"),
            InstanceDistinctMax { attr, max } => write!(f, "instance distinct({attr}) <= {max}"),
            InstanceSumMin { attr, min } => write!(f, "instance sum({attr}) >= {min}"),
            InstanceSumMax { attr, max } => write!(f, "instance sum({attr}) <= {max}"),
            InstanceAvgMin { attr, min } => write!(f, "instance avg({attr}) >= {min}"),
            InstanceAvgMax { attr, max } => write!(f, "instance avg({attr}) <= {max}"),
            InstanceMaxGap { seconds } => write!(f, "instance maxgap <= {seconds}"),
            InstanceDurationMax { seconds } => write!(f, "instance duration <= {seconds}"),
            InstanceClassCardinalityMax(n) => write!(f, "instance perclass <= {n}"),
            CoverageFraction { quota, inner } => write!(f, "atleast {quota}: {inner}"),
        }
    }
}

/// An ordered set of constraints with scope-based accessors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        ConstraintSet { constraints }
    }

    pub fn empty() -> Self {
        ConstraintSet::default()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn all(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn grouping(&self) -> impl Iterator<Item = &Constraint> {
        self.by_scope(ConstraintScope::Grouping)
    }

    pub fn class_based(&self) -> impl Iterator<Item = &Constraint> {
        self.by_scope(ConstraintScope::ClassBased)
    }

    pub fn instance_based(&self) -> impl Iterator<Item = &Constraint> {
        self.by_scope(ConstraintScope::InstanceBased)
    }

    fn by_scope(&self, scope: ConstraintScope) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(move |c| c.scope() == scope)
    }

    /// Constraints checked per group, i.e. everything except grouping scope.
    pub fn per_group(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.scope() != ConstraintScope::Grouping)
    }

    /// Anti-monotonic if any per-group constraint is anti-monotonic, else
    /// monotonic if all per-group constraints are monotonic (vacuously so for
    /// an empty set), else non-monotonic.
    pub fn checking_mode(&self) -> CheckingMode {
        let mut all_monotonic = true;
        for c in self.per_group() {
            match c.monotonicity() {
                Monotonicity::AntiMonotonic => return CheckingMode::AntiMonotonic,
                Monotonicity::Monotonic => {}
                _ => all_monotonic = false,
            }
        }
        if all_monotonic {
            CheckingMode::Monotonic
        } else {
            CheckingMode::NonMonotonic
        }
    }

    /// How many events of one class an instance may absorb before a new
    /// instance starts. The binding permission is the smallest declared
    /// per-class cardinality bound; without one, repetitions always split.
    pub fn split_rule(&self) -> SplitRule {
        let k = self
            .constraints
            .iter()
            .filter_map(|c| match c.kind {
                ConstraintKind::InstanceClassCardinalityMax(n) => Some(n),
                _ => None,
            })
            .min()
            .unwrap_or(1)
            .max(1);
        SplitRule { max_per_class: k }
    }

    /// Grouping-size bounds `(max, min)` if declared.
    pub fn group_count_bounds(&self) -> (Option<usize>, Option<usize>) {
        let mut max = None;
        let mut min = None;
        for c in &self.constraints {
            match c.kind {
                ConstraintKind::GroupCountMax(n) => {
                    max = Some(max.map_or(n, |m: usize| m.min(n)));
                }
                ConstraintKind::GroupCountMin(n) => {
                    min = Some(min.map_or(n, |m: usize| m.max(n)));
                }
                _ => {}
            }
        }
        (max, min)
    }

    /// Sum constraints over attributes observed with negative values have no
    /// sound monotonicity class, so they are rejected against the concrete
    /// log rather than guessed at.
    pub fn validate_for_log(&self, log: &EventLog) -> Result<(), ConstraintError> {
        for c in &self.constraints {
            let sum_attr = match &c.kind {
                ConstraintKind::InstanceSumMin { attr, .. }
                | ConstraintKind::InstanceSumMax { attr, .. } => Some(attr.as_str()),
                ConstraintKind::CoverageFraction { inner, .. } => match &inner.kind {
                    ConstraintKind::InstanceSumMin { attr, .. }
                    | ConstraintKind::InstanceSumMax { attr, .. } => Some(attr.as_str()),
                    _ => None,
                },
                _ => None,
            };
            if let Some(attr) = sum_attr {
                let negative = log.traces().iter().flat_map(|t| t.events()).any(|e| {
                    e.attrs
                        .get(attr)
                        .and_then(|v| v.as_number())
                        .is_some_and(|v| v < 0.0)
                });
                if negative {
                    return Err(ConstraintError::Semantic {
                        line: None,
                        message: format!(
                            "sum constraint over attribute '{attr}' with observed negative values"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConstraintError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Semantic {
        line: Option<usize>,
        message: String,
    },
    #[error("unknown event class '{class}'")]
    UnknownClass { class: String },
    #[error("grouping is not a partition of the log's classes: {message}")]
    NotAPartition { message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
