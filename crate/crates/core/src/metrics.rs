//! Abstraction quality measures: size reduction, a DFG edge-count proxy for
//! structural complexity, and the silhouette coefficient over positional
//! class distances.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cover::Grouping;
use crate::dfg::Dfg;
use crate::log::{EventClass, EventLog};

#[derive(Debug, Clone, Serialize)]
pub struct QualityReport {
    /// `1 − |G| / |C_L|`.
    pub size_reduction: f64,
    /// `1 − |edges(DFG(abstracted))| / |edges(DFG(original))|`.
    pub dfg_edge_reduction: f64,
    /// Mean silhouette over classes; absent for groupings of fewer than two
    /// groups, where separation is undefined.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub silhouette: Option<f64>,
    pub group_count: usize,
    pub class_count: usize,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("silhouette needs at least two groups")]
    TooFewGroups,
}

pub fn size_reduction(grouping: &Grouping, log: &EventLog) -> f64 {
    1.0 - grouping.len() as f64 / log.classes().len() as f64
}

/// Edge-count reduction between the two logs' DFGs. An abstraction that
/// collapses all traces below length two has no edges left and counts as
/// full reduction.
pub fn dfg_edge_reduction(original: &EventLog, abstracted: &EventLog) -> f64 {
    let before = Dfg::from_log(original).edge_count();
    let after = Dfg::from_log(abstracted).edge_count();
    match (before, after) {
        (0, 0) => 0.0,
        (_, 0) => 1.0,
        (0, _) => 0.0,
        (b, a) => 1.0 - a as f64 / b as f64,
    }
}

/// Positional distance between two classes: per trace containing both, the
/// mean absolute ordinal difference over all cross event pairs, averaged over
/// those traces. Classes never sharing a trace sit at the maximum observed
/// trace length.
pub fn class_distance(log: &EventLog, c1: &EventClass, c2: &EventClass) -> f64 {
    let mut per_trace = Vec::new();
    for trace in log.traces() {
        let p1: Vec<usize> = trace
            .events()
            .iter()
            .filter(|e| &e.class == c1)
            .map(|e| e.ordinal)
            .collect();
        let p2: Vec<usize> = trace
            .events()
            .iter()
            .filter(|e| &e.class == c2)
            .map(|e| e.ordinal)
            .collect();
        if p1.is_empty() || p2.is_empty() {
            continue;
        }
        let mut total = 0.0;
        for a in &p1 {
            for b in &p2 {
                total += (*a as f64 - *b as f64).abs();
            }
        }
        per_trace.push(total / (p1.len() * p2.len()) as f64);
    }
    if per_trace.is_empty() {
        log.max_trace_len() as f64
    } else {
        per_trace.iter().sum::<f64>() / per_trace.len() as f64
    }
}

/// Standard silhouette over the positional class distance: for class `c` in
/// group `g`, `a` is the mean distance to the other classes of `g`, `b` the
/// smallest mean distance to any other group, and `s = (b − a) / max(a, b)`.
/// Classes in singleton groups contribute zero.
pub fn silhouette(grouping: &Grouping, log: &EventLog) -> Result<f64, MetricsError> {
    if grouping.len() < 2 {
        return Err(MetricsError::TooFewGroups);
    }
    let classes: Vec<&EventClass> = log.classes().iter().collect();
    let pairs: Vec<((EventClass, EventClass), f64)> = classes
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, c1)| {
            classes[i + 1..]
                .iter()
                .map(move |c2| (((*c1).clone(), (*c2).clone()), class_distance(log, c1, c2)))
        })
        .collect();
    let mut matrix: BTreeMap<(EventClass, EventClass), f64> = BTreeMap::new();
    for ((c1, c2), d) in pairs {
        matrix.insert((c2.clone(), c1.clone()), d);
        matrix.insert((c1, c2), d);
    }
    let dist = |a: &EventClass, b: &EventClass| matrix[&(a.clone(), b.clone())];

    let mut total = 0.0;
    let mut count = 0usize;
    for group in grouping.groups() {
        for class in group.classes() {
            count += 1;
            if group.len() == 1 {
                continue; // singleton convention: s = 0
            }
            let a = group
                .classes()
                .iter()
                .filter(|other| *other != class)
                .map(|other| dist(class, other))
                .sum::<f64>()
                / (group.len() - 1) as f64;
            let b = grouping
                .groups()
                .iter()
                .filter(|other| other.classes() != group.classes())
                .map(|other| {
                    other.classes().iter().map(|c| dist(class, c)).sum::<f64>() / other.len() as f64
                })
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    Ok(total / count as f64)
}

pub fn quality_report(grouping: &Grouping, log: &EventLog, abstracted: &EventLog) -> QualityReport {
    QualityReport {
        size_reduction: size_reduction(grouping, log),
        dfg_edge_reduction: dfg_edge_reduction(log, abstracted),
        silhouette: silhouette(grouping, log).ok(),
        group_count: grouping.len(),
        class_count: log.classes().len(),
    }
}
