//! Shared fuzz generators and independent oracles for the integration and
//! acceptance suites.
//!
//! The oracles re-derive expected values from first principles (naive scans,
//! powerset enumeration, subset enumeration) and never call into the code
//! paths they check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use logabs_core::{
    class_set, holds_group, occurs, parse_constraints, ClassSet, ConstraintSet, Event, EventClass,
    EventLog, Group, Trace,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const TEAMS: [&str; 3] = ["red", "blue", "green"];

/// A random log over at most `max_classes` classes. Every event carries a
/// class-level `team` and an event-level non-negative `cost`. With
/// `allow_repeats` a trace may contain the same class twice, which exercises
/// instance splitting.
pub fn random_log(rng: &mut ChaCha8Rng, max_classes: usize, allow_repeats: bool) -> EventLog {
    let class_count = rng.gen_range(2..=max_classes.max(2));
    let names: Vec<String> = (0..class_count).map(|i| format!("c{i}")).collect();
    let team_of: Vec<&str> = (0..class_count)
        .map(|_| TEAMS[rng.gen_range(0..3)])
        .collect();
    let trace_count = rng.gen_range(2..=6);
    let mut traces = Vec::new();
    for t in 0..trace_count {
        let events = if allow_repeats {
            let len = rng.gen_range(1..=10);
            (0..len)
                .map(|_| rng.gen_range(0..class_count))
                .collect::<Vec<_>>()
        } else {
            // a shuffled subset of the alphabet: no within-trace repeats
            let mut picks: Vec<usize> = (0..class_count).collect();
            picks.shuffle(rng);
            let len = rng.gen_range(1..=class_count);
            picks.truncate(len);
            picks
        };
        let mut ts = rng.gen_range(0..1_000_i64);
        let built: Vec<Event> = events
            .into_iter()
            .map(|ci| {
                ts += rng.gen_range(1_000..120_000);
                Event::new(names[ci].as_str(), ts)
                    .with_attr("team", logabs_core::AttributeValue::Str(team_of[ci].into()))
                    .with_attr(
                        "cost",
                        logabs_core::AttributeValue::Int(rng.gen_range(0..100)),
                    )
            })
            .collect();
        traces.push(Trace::new(format!("t{t}"), built).expect("non-empty"));
    }
    EventLog::from_traces(traces).expect("valid log")
}

/// Random constraint sets kept coherent with one checking mode, so the
/// search pruning of the exhaustive algorithm stays lossless (its
/// anti-monotonic expansion rule prunes across modes by design). Constraint
/// kinds are restricted to those whose monotonicity class is exact for logs
/// without within-trace repeats.
pub fn random_mode_pure_constraints(rng: &mut ChaCha8Rng, log: &EventLog) -> ConstraintSet {
    let classes: Vec<&EventClass> = log.classes().iter().collect();
    let mut lines: Vec<String> = Vec::new();
    match rng.gen_range(0..4) {
        0 => {} // empty set
        1 => {
            // anti-monotonic mix
            for _ in 0..rng.gen_range(1..=2) {
                lines.push(match rng.gen_range(0..5) {
                    0 => format!("class count <= {}", rng.gen_range(1..=4)),
                    1 => {
                        let a = classes.choose(rng).unwrap();
                        let b = classes.choose(rng).unwrap();
                        format!("class cannot-link {a} {b}")
                    }
                    2 => format!("instance distinct(team) <= {}", rng.gen_range(1..=2)),
                    3 => format!("instance duration <= {}", rng.gen_range(60..=600)),
                    _ => format!("instance sum(cost) <= {}", rng.gen_range(50..=300)),
                });
            }
        }
        2 => lines.push(format!("class count >= {}", rng.gen_range(1..=2))),
        _ => {
            // non-monotonic mode: at least one genuinely non-monotonic rule
            lines.push(match rng.gen_range(0..2) {
                0 => {
                    let a = classes.choose(rng).unwrap();
                    let b = classes.choose(rng).unwrap();
                    format!("class must-link {a} {b}")
                }
                _ => format!("instance avg(cost) <= {}", rng.gen_range(30..=80)),
            });
            if rng.gen_bool(0.5) {
                lines.push(format!(
                    "instance distinct(team) >= {}",
                    rng.gen_range(1..=2)
                ));
            }
        }
    }
    parse_constraints(&lines.join("\n")).expect("generated constraints parse")
}

/// Naive transcription of the distance definition: gather instances by a
/// fresh scan, count interrupts by walking the trace, average the three
/// terms. `None` when the group never occurs.
pub fn oracle_group_distance(
    log: &EventLog,
    classes: &ClassSet,
    max_per_class: usize,
) -> Option<f64> {
    let mut terms: Vec<f64> = Vec::new();
    for trace in log.traces() {
        let projection: Vec<&Event> = trace
            .events()
            .iter()
            .filter(|e| classes.contains(&e.class))
            .collect();
        let mut instances: Vec<Vec<&Event>> = Vec::new();
        let mut current: Vec<&Event> = Vec::new();
        let mut counts: std::collections::HashMap<&EventClass, usize> = Default::default();
        for event in projection {
            if counts.get(&event.class).copied().unwrap_or(0) + 1 > max_per_class {
                instances.push(std::mem::take(&mut current));
                counts.clear();
            }
            *counts.entry(&event.class).or_default() += 1;
            current.push(event);
        }
        if !current.is_empty() {
            instances.push(current);
        }
        for inst in instances {
            let first = inst.first().unwrap().ordinal;
            let last = inst.last().unwrap().ordinal;
            let member: BTreeSet<usize> = inst.iter().map(|e| e.ordinal).collect();
            let interrupts = trace
                .events()
                .iter()
                .filter(|e| e.ordinal > first && e.ordinal < last && !member.contains(&e.ordinal))
                .count();
            let distinct: BTreeSet<&EventClass> = inst.iter().map(|e| &e.class).collect();
            let missing = classes.len() - distinct.len();
            terms.push(
                interrupts as f64 / inst.len() as f64
                    + missing as f64 / classes.len() as f64
                    + 1.0 / classes.len() as f64,
            );
        }
    }
    if terms.is_empty() {
        None
    } else {
        Some(terms.iter().sum::<f64>() / terms.len() as f64)
    }
}

/// The naive candidate oracle: every non-empty subset of the log's classes
/// that co-occurs in some trace and satisfies the constraints.
pub fn powerset_candidates(log: &EventLog, rs: &ConstraintSet) -> BTreeSet<ClassSet> {
    let classes: Vec<&EventClass> = log.classes().iter().collect();
    let n = classes.len();
    assert!(n <= 16, "powerset oracle is for small logs");
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << n) {
        let set: ClassSet = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| classes[i].clone())
            .collect();
        if !occurs(&set, log) {
            continue;
        }
        let group = Group::new(set.clone()).unwrap();
        if holds_group(&group, rs, log).unwrap().holds {
            out.insert(set);
        }
    }
    out
}

/// One enumerated optimum with the documented tie rules applied.
pub struct BruteForceCover {
    pub objective: f64,
    pub group_count: usize,
    pub signature: Vec<String>,
}

/// Enumerates every subset of the candidates, keeps exact covers within the
/// bounds, and applies the tie rules (objective, then fewer groups, then the
/// smallest signature sequence). Objectives are summed in signature order so
/// they are bit-comparable with the solver's.
pub fn brute_force_cover(
    candidates: &[(ClassSet, f64)],
    classes: &ClassSet,
    max_groups: Option<usize>,
    min_groups: Option<usize>,
) -> Option<BruteForceCover> {
    let n = candidates.len();
    assert!(n <= 20, "subset enumeration is for small problems");
    let mut best: Option<BruteForceCover> = None;
    'subsets: for mask in 1u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if let Some(x) = max_groups {
            if chosen.len() > x {
                continue;
            }
        }
        if let Some(y) = min_groups {
            if chosen.len() < y {
                continue;
            }
        }
        let mut covered = ClassSet::new();
        for &i in &chosen {
            for class in &candidates[i].0 {
                if !covered.insert(class.clone()) {
                    continue 'subsets; // overlap
                }
            }
        }
        if &covered != classes {
            continue;
        }
        let mut ordered: Vec<&(ClassSet, f64)> = chosen.iter().map(|&i| &candidates[i]).collect();
        ordered.sort_by(|a, b| a.0.cmp(&b.0));
        let objective: f64 = ordered.iter().map(|(_, d)| d).sum();
        let signature: Vec<String> = ordered
            .iter()
            .map(|(set, _)| logabs_core::set_signature(set))
            .collect();
        let candidate = BruteForceCover {
            objective,
            group_count: chosen.len(),
            signature,
        };
        let better = match &best {
            None => true,
            Some(b) => match candidate.objective.total_cmp(&b.objective) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    candidate.group_count < b.group_count
                        || (candidate.group_count == b.group_count
                            && candidate.signature < b.signature)
                }
            },
        };
        if better {
            best = Some(candidate);
        }
    }
    best
}

/// Random weighted cover problems: subsets over up to `max_classes` classes
/// with positive distances; singleton coverage is often (not always) present.
pub fn random_cover_instance(
    rng: &mut ChaCha8Rng,
    max_classes: usize,
    max_candidates: usize,
) -> (Vec<(ClassSet, f64)>, ClassSet) {
    let class_count = rng.gen_range(2..=max_classes);
    let names: Vec<String> = (0..class_count).map(|i| format!("x{i}")).collect();
    let classes: ClassSet = class_set(names.iter().map(String::as_str));
    let candidate_count = rng.gen_range(class_count..=max_candidates.max(class_count));
    let mut candidates: Vec<(ClassSet, f64)> = Vec::new();
    for _ in 0..candidate_count {
        let size = rng.gen_range(1..=class_count);
        let mut picks: Vec<usize> = (0..class_count).collect();
        picks.shuffle(rng);
        picks.truncate(size);
        let set: ClassSet = picks
            .iter()
            .map(|&i| EventClass::from(names[i].as_str()))
            .collect();
        let distance = rng.gen_range(1..=400) as f64 / 100.0;
        if !candidates.iter().any(|(s, _)| s == &set) {
            candidates.push((set, distance));
        }
    }
    (candidates, classes)
}

/// The four-trace request-handling fixture shared with the library.
pub fn fixture_log() -> EventLog {
    logabs_core::sample::request_handling_log()
}

pub fn fixture_role_constraints() -> ConstraintSet {
    parse_constraints(logabs_core::sample::SINGLE_ROLE_CONSTRAINT).unwrap()
}
