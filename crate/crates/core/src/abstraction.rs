//! Rewriting traces into high-level activity traces from a grouping.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::cover::Grouping;
use crate::instances::{instances, Group, SplitRule};
use crate::log::{AttributeValue, ClassSet, Event, EventLog, Trace};

/// Which events of an activity instance the abstracted trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbstractionStrategy {
    /// Keep the last event per instance.
    CompletionOnly,
    /// Keep first (`_s`) and last (`_c`) events of multi-event instances;
    /// unary instances keep their single event without a suffix.
    StartAndComplete,
}

#[derive(Debug, Error)]
pub enum AbstractError {
    #[error("grouping is not an exact cover of the log's classes: {message}")]
    NotACover { message: String },
    #[error("activity name '{name}' assigned to more than one group")]
    DuplicateActivityName { name: String },
    #[error("log assembly failed: {0}")]
    Log(#[from] crate::log::LogError),
}

/// Default activity names. Singleton groups keep their class name. A
/// multi-class group is named `<prefix>_Activity <i>` when every class shares
/// a single value of `attr` (the prefix), else `G<i>`; numbering is
/// per-prefix, by order of the group's first event in the log.
pub fn default_names(
    grouping: &Grouping,
    log: &EventLog,
    attr: Option<&str>,
) -> BTreeMap<ClassSet, String> {
    let mut first_seen: BTreeMap<ClassSet, (usize, usize)> = BTreeMap::new();
    for group in grouping.groups() {
        let mut best = (usize::MAX, usize::MAX);
        for (ti, trace) in log.traces().iter().enumerate() {
            for event in trace.events() {
                if group.contains(&event.class) {
                    best = best.min((ti, event.ordinal));
                    break;
                }
            }
        }
        first_seen.insert(group.classes().clone(), best);
    }
    let mut ordered: Vec<&Group> = grouping.groups().iter().collect();
    ordered.sort_by_key(|g| (first_seen[g.classes()], g.signature()));

    let mut counters: BTreeMap<String, usize> = BTreeMap::new();
    let mut names = BTreeMap::new();
    for group in ordered {
        if group.len() == 1 {
            let class = group.classes().iter().next().unwrap();
            names.insert(group.classes().clone(), class.name().to_string());
            continue;
        }
        let prefix = attr
            .and_then(|a| shared_value(group, log, a))
            .unwrap_or_else(|| "G".to_string());
        let i = counters.entry(prefix.clone()).or_insert(0);
        *i += 1;
        let name = if prefix == "G" {
            format!("G{i}")
        } else {
            format!("{prefix}_Activity {i}")
        };
        names.insert(group.classes().clone(), name);
    }
    names
}

fn shared_value(group: &Group, log: &EventLog, attr: &str) -> Option<String> {
    let mut values = std::collections::BTreeSet::new();
    for class in group.classes() {
        values.extend(log.class_attribute(class, attr).ok()?);
    }
    if values.len() == 1 {
        Some(values.into_iter().next().unwrap().to_string())
    } else {
        None
    }
}

/// Abstracts every trace: group instances are detected with the same
/// splitting rule used during constraint checking, then rewritten per the
/// strategy. Retained events keep their source timestamps and relative
/// order; each carries the instance's `duration` (ms) and `n_events`.
///
/// When retained events share a timestamp, their order still follows the
/// source trace, which places a completion marker before a start marker
/// whenever the completing instance began first.
pub fn abstract_log(
    log: &EventLog,
    grouping: &Grouping,
    strategy: AbstractionStrategy,
    names: Option<&BTreeMap<ClassSet, String>>,
    rule: SplitRule,
) -> Result<EventLog, AbstractError> {
    validate_cover(grouping, log)?;
    let default;
    let names = match names {
        Some(map) => map,
        None => {
            default = default_names(grouping, log, None);
            &default
        }
    };
    let mut seen = BTreeMap::new();
    for group in grouping.groups() {
        let name = names
            .get(group.classes())
            .cloned()
            .unwrap_or_else(|| group.signature());
        if let Some(other) = seen.insert(name.clone(), group.signature()) {
            if other != group.signature() {
                return Err(AbstractError::DuplicateActivityName { name });
            }
        }
    }

    let traces: Result<Vec<Trace>, AbstractError> = log
        .traces()
        .par_iter()
        .map(|trace| abstract_trace(trace, grouping, strategy, names, rule))
        .collect();
    Ok(EventLog::from_traces(traces?)?)
}

fn validate_cover(grouping: &Grouping, log: &EventLog) -> Result<(), AbstractError> {
    let mut covered = ClassSet::new();
    for group in grouping.groups() {
        for class in group.classes() {
            if !covered.insert(class.clone()) {
                return Err(AbstractError::NotACover {
                    message: format!("class '{class}' covered more than once"),
                });
            }
        }
    }
    if &covered != log.classes() {
        return Err(AbstractError::NotACover {
            message: "covered classes differ from the log's classes".into(),
        });
    }
    Ok(())
}

fn abstract_trace(
    trace: &Trace,
    grouping: &Grouping,
    strategy: AbstractionStrategy,
    names: &BTreeMap<ClassSet, String>,
    rule: SplitRule,
) -> Result<Trace, AbstractError> {
    // (source ordinal, label, timestamp, duration, size)
    let mut retained: Vec<(usize, String, i64, i64, usize)> = Vec::new();
    for group in grouping.groups() {
        let name = names
            .get(group.classes())
            .cloned()
            .unwrap_or_else(|| group.signature());
        for instance in instances(trace, group, rule) {
            let duration = instance.duration_ms();
            let size = instance.len();
            match strategy {
                AbstractionStrategy::CompletionOnly => {
                    let last = instance.last();
                    retained.push((last.ordinal, name.clone(), last.timestamp, duration, size));
                }
                AbstractionStrategy::StartAndComplete => {
                    if size == 1 {
                        let only = instance.last();
                        retained.push((only.ordinal, name.clone(), only.timestamp, duration, size));
                    } else {
                        let first = instance.first();
                        let last = instance.last();
                        retained.push((
                            first.ordinal,
                            format!("{name}_s"),
                            first.timestamp,
                            duration,
                            size,
                        ));
                        retained.push((
                            last.ordinal,
                            format!("{name}_c"),
                            last.timestamp,
                            duration,
                            size,
                        ));
                    }
                }
            }
        }
    }
    retained.sort_by_key(|(ordinal, ..)| *ordinal);
    let events = retained
        .into_iter()
        .map(|(_, label, ts, duration, size)| {
            Event::new(label, ts)
                .with_attr("duration", AttributeValue::Int(duration))
                .with_attr("n_events", AttributeValue::Int(size as i64))
        })
        .collect();
    Ok(Trace::new(trace.id(), events)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::class_set;
    use crate::sample;

    fn reference_grouping() -> Grouping {
        let groups = vec![
            Group::new(class_set(["rcp", "ckc", "ckt"])).unwrap(),
            Group::new(class_set(["acc"])).unwrap(),
            Group::new(class_set(["rej"])).unwrap(),
            Group::new(class_set(["prio", "inf", "arv"])).unwrap(),
        ];
        Grouping::new(groups, 37.0 / 12.0)
    }

    fn reference_names() -> BTreeMap<ClassSet, String> {
        BTreeMap::from([
            (class_set(["rcp", "ckc", "ckt"]), "clrk1".to_string()),
            (class_set(["acc"]), "acc".to_string()),
            (class_set(["rej"]), "rej".to_string()),
            (class_set(["prio", "inf", "arv"]), "clrk2".to_string()),
        ])
    }

    #[test]
    fn completion_only_keeps_last_event_per_instance() {
        let log = sample::request_handling_log();
        let out = abstract_log(
            &log,
            &reference_grouping(),
            AbstractionStrategy::CompletionOnly,
            Some(&reference_names()),
            SplitRule::default(),
        )
        .unwrap();
        assert_eq!(
            out.trace("c1").unwrap().class_names(),
            ["clrk1", "acc", "clrk2"]
        );
        // the restarted case keeps both rounds
        assert_eq!(
            out.trace("c4").unwrap().class_names(),
            ["clrk1", "rej", "clrk1", "acc", "clrk2"]
        );
    }

    #[test]
    fn output_length_equals_instance_count() {
        let log = sample::request_handling_log();
        let grouping = reference_grouping();
        let out = abstract_log(
            &log,
            &grouping,
            AbstractionStrategy::CompletionOnly,
            None,
            SplitRule::default(),
        )
        .unwrap();
        for (orig, abstracted) in log.traces().iter().zip(out.traces()) {
            let count: usize = grouping
                .groups()
                .iter()
                .map(|g| instances(orig, g, SplitRule::default()).len())
                .sum();
            assert_eq!(abstracted.len(), count);
        }
    }

    #[test]
    fn start_and_complete_marks_interleaving() {
        use crate::log::{Event, Trace};
        // a case where prioritization happens before managerial acceptance
        let t5 = Trace::new(
            "c5",
            ["rcp", "ckc", "prio", "acc", "inf", "arv"]
                .iter()
                .enumerate()
                .map(|(i, c)| Event::new(*c, i as i64 * 60_000))
                .collect(),
        )
        .unwrap();
        let mut traces = sample::request_handling_log().traces().to_vec();
        traces.push(t5);
        let log = EventLog::from_traces(traces).unwrap();
        let complete = abstract_log(
            &log,
            &reference_grouping(),
            AbstractionStrategy::CompletionOnly,
            Some(&reference_names()),
            SplitRule::default(),
        )
        .unwrap();
        assert_eq!(
            complete.trace("c5").unwrap().class_names(),
            ["clrk1", "acc", "clrk2"]
        );
        let both = abstract_log(
            &log,
            &reference_grouping(),
            AbstractionStrategy::StartAndComplete,
            Some(&reference_names()),
            SplitRule::default(),
        )
        .unwrap();
        assert_eq!(
            both.trace("c5").unwrap().class_names(),
            ["clrk1_s", "clrk1_c", "clrk2_s", "acc", "clrk2_c"]
        );
    }

    #[test]
    fn start_and_complete_length_counts_multi_instances_twice() {
        let log = sample::request_handling_log();
        let grouping = reference_grouping();
        let out = abstract_log(
            &log,
            &grouping,
            AbstractionStrategy::StartAndComplete,
            None,
            SplitRule::default(),
        )
        .unwrap();
        for (orig, abstracted) in log.traces().iter().zip(out.traces()) {
            let (mut multi, mut unary) = (0usize, 0usize);
            for g in grouping.groups() {
                for inst in instances(orig, g, SplitRule::default()) {
                    if inst.len() > 1 {
                        multi += 1;
                    } else {
                        unary += 1;
                    }
                }
            }
            assert_eq!(abstracted.len(), multi * 2 + unary);
        }
    }

    #[test]
    fn all_singletons_abstraction_is_relabel_only() {
        let log = sample::request_handling_log();
        let groups: Vec<Group> = log
            .classes()
            .iter()
            .map(|c| Group::singleton(c.name()))
            .collect();
        let grouping = Grouping::new(groups, 8.0);
        let out = abstract_log(
            &log,
            &grouping,
            AbstractionStrategy::CompletionOnly,
            None,
            SplitRule::default(),
        )
        .unwrap();
        for (orig, abstracted) in log.traces().iter().zip(out.traces()) {
            assert_eq!(orig.class_names(), abstracted.class_names());
            let orig_ts: Vec<i64> = orig.events().iter().map(|e| e.timestamp).collect();
            let abs_ts: Vec<i64> = abstracted.events().iter().map(|e| e.timestamp).collect();
            assert_eq!(orig_ts, abs_ts);
        }
    }

    #[test]
    fn incomplete_grouping_is_rejected() {
        let log = sample::request_handling_log();
        let grouping = Grouping::new(vec![Group::singleton("rcp")], 1.0);
        assert!(matches!(
            abstract_log(
                &log,
                &grouping,
                AbstractionStrategy::CompletionOnly,
                None,
                SplitRule::default()
            ),
            Err(AbstractError::NotACover { .. })
        ));
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let log = sample::request_handling_log();
        let mut names = reference_names();
        names.insert(class_set(["acc"]), "clrk1".to_string());
        assert!(matches!(
            abstract_log(
                &log,
                &reference_grouping(),
                AbstractionStrategy::CompletionOnly,
                Some(&names),
                SplitRule::default()
            ),
            Err(AbstractError::DuplicateActivityName { .. })
        ));
    }

    #[test]
    fn default_names_use_shared_attribute_prefix() {
        let log = sample::request_handling_log();
        let grouping = reference_grouping();
        let names = default_names(&grouping, &log, Some("role"));
        assert_eq!(names[&class_set(["rcp", "ckc", "ckt"])], "clerk_Activity 1");
        assert_eq!(
            names[&class_set(["prio", "inf", "arv"])],
            "clerk_Activity 2"
        );
        assert_eq!(names[&class_set(["acc"])], "acc");
        // without the attribute, multi-class groups fall back to G<i>
        let plain = default_names(&grouping, &log, None);
        assert_eq!(plain[&class_set(["rcp", "ckc", "ckt"])], "G1");
        assert_eq!(plain[&class_set(["prio", "inf", "arv"])], "G2");
    }

    #[test]
    fn mixed_attribute_group_falls_back_to_generic_name() {
        let log = sample::request_handling_log();
        let groups = vec![
            Group::new(class_set(["ckt", "ckc", "acc", "rej"])).unwrap(),
            Group::new(class_set(["rcp"])).unwrap(),
            Group::new(class_set(["prio", "inf", "arv"])).unwrap(),
        ];
        let grouping = Grouping::new(groups, 0.0);
        let names = default_names(&grouping, &log, Some("role"));
        assert_eq!(names[&class_set(["ckt", "ckc", "acc", "rej"])], "G1");
        assert_eq!(
            names[&class_set(["prio", "inf", "arv"])],
            "clerk_Activity 1"
        );
    }
}
