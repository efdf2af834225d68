//! Candidate-group computation: exhaustive apriori-style enumeration,
//! DFG-guided beam search, and merging of exclusive behavioral alternatives.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::constraints::{
    holds_group, CheckingMode, ConstraintError, ConstraintSet, ViolationReport,
};
use crate::dfg::{Dfg, PrePostIndex};
use crate::distance::DistanceCache;
use crate::instances::Group;
use crate::log::{set_signature, ClassSet, EventClass, EventLog};

/// How a candidate entered the set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exhaustive,
    DfgPath,
    ExclusiveMerge,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub classes: ClassSet,
    /// Behavioral distance; absent only for merged groups that never occur.
    pub distance: Option<f64>,
    pub provenance: Provenance,
    /// False when admitted through monotonic subset pruning without an
    /// explicit constraint check.
    pub checked: bool,
}

/// Aggregated violation evidence per constraint, gathered while searching.
/// Feeds infeasibility diagnostics after an unsolvable cover.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ViolationStats {
    pub per_constraint: BTreeMap<String, ConstraintViolationStat>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConstraintViolationStat {
    /// Classes appearing in groups that violated the constraint.
    pub affected_classes: Vec<String>,
    pub groups_violating: u64,
    pub violating_instances: u64,
    pub total_instances: u64,
}

impl ViolationStats {
    fn absorb(&mut self, report: &ViolationReport) {
        for detail in &report.details {
            let stat = self
                .per_constraint
                .entry(detail.constraint.clone())
                .or_default();
            stat.groups_violating += 1;
            stat.violating_instances += detail.violating_instances as u64;
            stat.total_instances += detail.total_instances as u64;
            for class in &detail.classes {
                if !stat.affected_classes.contains(class) {
                    stat.affected_classes.push(class.clone());
                }
            }
        }
        for stat in self.per_constraint.values_mut() {
            stat.affected_classes.sort();
        }
    }
}

/// The result of step one: deduplicated candidate groups plus bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    by_set: BTreeMap<ClassSet, Candidate>,
    /// True when a timeout cut the search short.
    pub truncated: bool,
    pub violations: ViolationStats,
}

impl CandidateSet {
    pub fn contains(&self, set: &ClassSet) -> bool {
        self.by_set.contains_key(set)
    }

    pub fn get(&self, set: &ClassSet) -> Option<&Candidate> {
        self.by_set.get(set)
    }

    pub fn len(&self) -> usize {
        self.by_set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_set.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Candidate> {
        self.by_set.values()
    }

    pub fn class_sets(&self) -> impl Iterator<Item = &ClassSet> {
        self.by_set.keys()
    }

    /// Classes of the log covered by no candidate.
    pub fn uncovered_classes(&self, log: &EventLog) -> ClassSet {
        let mut covered = ClassSet::new();
        for set in self.by_set.keys() {
            covered.extend(set.iter().cloned());
        }
        log.classes().difference(&covered).cloned().collect()
    }

    fn insert(&mut self, candidate: Candidate) {
        self.by_set
            .entry(candidate.classes.clone())
            .or_insert(candidate);
    }

    /// Serializes one JSONL line per candidate, ordered by class signature.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for candidate in self.by_set.values() {
            let line = serde_json::json!({
                "classes": candidate.classes.iter().map(|c| c.name()).collect::<Vec<_>>(),
                "distance": candidate.distance,
                "provenance": candidate.provenance,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// True iff at least one trace contains an event of every class in the set.
pub fn occurs(set: &ClassSet, log: &EventLog) -> bool {
    !set.is_empty()
        && log
            .traces()
            .iter()
            .any(|trace| set.is_subset(trace.classes()))
}

struct SearchContext<'a> {
    log: &'a EventLog,
    rs: &'a ConstraintSet,
    mode: CheckingMode,
    cache: DistanceCache<'a>,
    deadline: Instant,
    stats: ViolationStats,
    timed_out: bool,
}

impl<'a> SearchContext<'a> {
    fn new(
        log: &'a EventLog,
        rs: &'a ConstraintSet,
        timeout: Duration,
    ) -> Result<Self, ConstraintError> {
        rs.validate_for_log(log)?;
        Ok(SearchContext {
            log,
            rs,
            mode: rs.checking_mode(),
            cache: DistanceCache::new(log, rs.split_rule()),
            deadline: Instant::now() + timeout,
            stats: ViolationStats::default(),
            timed_out: false,
        })
    }

    fn expired(&mut self) -> bool {
        if Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        self.timed_out
    }

    /// Constraint checks within one iteration are independent; evaluate them
    /// in parallel and fold the reports back in input order.
    fn check_batch(&mut self, sets: &[ClassSet]) -> Vec<bool> {
        let results: Vec<(bool, ViolationReport)> = sets
            .par_iter()
            .map(|set| {
                let group = Group::new(set.clone()).expect("search sets are non-empty");
                let check = holds_group(&group, self.rs, self.log)
                    .expect("search sets stay within the log's classes");
                (check.holds, check.report)
            })
            .collect();
        let mut out = Vec::with_capacity(results.len());
        for (holds, report) in results {
            if !holds {
                self.stats.absorb(&report);
            }
            out.push(holds);
        }
        out
    }
}

fn has_admitted_subset(result: &CandidateSet, set: &ClassSet) -> bool {
    result
        .by_set
        .keys()
        .any(|known| known.len() < set.len() && known.is_subset(set))
}

/// Exhaustive candidate computation. Starts from singletons and grows
/// candidates one class at a time, pruning by constraint monotonicity:
/// in monotonic mode a group with an already-admitted subset is admitted
/// without re-checking; in anti-monotonic mode only admitted groups are
/// expanded. Every expansion must co-occur in some trace. On timeout the
/// candidates found so far are returned with `truncated` set.
pub fn exhaustive_candidates(
    log: &EventLog,
    rs: &ConstraintSet,
    timeout: Duration,
) -> Result<CandidateSet, ConstraintError> {
    exhaustive_with_mode(log, rs, rs.checking_mode(), timeout)
}

/// Test hook: run the exhaustive search under a forced checking mode, for
/// verifying that pruning only changes the work done, never the result.
#[doc(hidden)]
pub fn exhaustive_candidates_forced_mode(
    log: &EventLog,
    rs: &ConstraintSet,
    mode: CheckingMode,
    timeout: Duration,
) -> Result<CandidateSet, ConstraintError> {
    exhaustive_with_mode(log, rs, mode, timeout)
}

fn exhaustive_with_mode(
    log: &EventLog,
    rs: &ConstraintSet,
    mode: CheckingMode,
    timeout: Duration,
) -> Result<CandidateSet, ConstraintError> {
    let mut ctx = SearchContext::new(log, rs, timeout)?;
    ctx.mode = mode;
    let mut result = CandidateSet::default();
    let mut seen: std::collections::BTreeSet<ClassSet> = Default::default();
    let mut to_check: Vec<ClassSet> = log
        .classes()
        .iter()
        .map(|c| ClassSet::from([c.clone()]))
        .collect();
    seen.extend(to_check.iter().cloned());

    while !to_check.is_empty() && !ctx.expired() {
        let mut admitted: Vec<ClassSet> = Vec::new();
        if ctx.mode == CheckingMode::Monotonic {
            let (by_subset, needs_check): (Vec<_>, Vec<_>) = to_check
                .iter()
                .cloned()
                .partition(|set| has_admitted_subset(&result, set));
            let checks = ctx.check_batch(&needs_check);
            for set in by_subset {
                result.insert(Candidate {
                    classes: set.clone(),
                    distance: ctx.cache.distance(&set),
                    provenance: Provenance::Exhaustive,
                    checked: false,
                });
                admitted.push(set);
            }
            for (set, holds) in needs_check.into_iter().zip(checks) {
                if holds {
                    result.insert(Candidate {
                        classes: set.clone(),
                        distance: ctx.cache.distance(&set),
                        provenance: Provenance::Exhaustive,
                        checked: true,
                    });
                    admitted.push(set);
                }
            }
        } else {
            let checks = ctx.check_batch(&to_check);
            for (set, holds) in to_check.iter().zip(checks) {
                if holds {
                    result.insert(Candidate {
                        classes: set.clone(),
                        distance: ctx.cache.distance(set),
                        provenance: Provenance::Exhaustive,
                        checked: true,
                    });
                    admitted.push(set.clone());
                }
            }
        }

        let expansion_base: Vec<ClassSet> = if ctx.mode == CheckingMode::AntiMonotonic {
            admitted
        } else {
            std::mem::take(&mut to_check)
        };
        let mut next: Vec<ClassSet> = Vec::new();
        for base in &expansion_base {
            for class in log.classes() {
                if base.contains(class) {
                    continue;
                }
                let mut grown = base.clone();
                grown.insert(class.clone());
                if seen.contains(&grown) {
                    continue;
                }
                seen.insert(grown.clone());
                next.push(grown);
            }
        }
        next.retain(|set| occurs(set, log));
        to_check = next;
    }

    result.truncated = ctx.timed_out;
    result.violations = ctx.stats;
    Ok(result)
}

/// Beam width for the DFG-guided search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Beam {
    Unlimited,
    Width(usize),
}

impl Beam {
    /// The evaluated default adapts to the log: five paths per event class.
    pub fn default_for(log: &EventLog) -> Beam {
        Beam::Width(5 * log.classes().len().max(1))
    }

    fn limit(&self, available: usize) -> usize {
        match self {
            Beam::Unlimited => available,
            Beam::Width(k) => available.min(*k),
        }
    }
}

/// DFG-guided candidate computation. Paths over directly-follows edges are
/// grown by one predecessor of the head or successor of the tail per
/// iteration; each iteration checks the `k` paths whose class sets have the
/// lowest distance (ties broken by class signature). Admission and pruning
/// mirror the exhaustive search. Each class set is scheduled at most once.
pub fn dfg_candidates(
    log: &EventLog,
    rs: &ConstraintSet,
    beam: Beam,
    timeout: Duration,
) -> Result<CandidateSet, ConstraintError> {
    let mut ctx = SearchContext::new(log, rs, timeout)?;
    let dfg = Dfg::from_log(log);
    let mut result = CandidateSet::default();
    let mut scheduled: std::collections::BTreeSet<ClassSet> = Default::default();
    let mut to_check: Vec<Vec<EventClass>> = dfg.nodes().iter().map(|n| vec![n.clone()]).collect();
    scheduled.extend(to_check.iter().map(|p| path_set(p)));

    while !to_check.is_empty() && !ctx.expired() {
        // lowest distance first; the signature tiebreak makes the order total
        let mut keyed: Vec<(f64, String, Vec<EventClass>)> = to_check
            .drain(..)
            .map(|path| {
                let set = path_set(&path);
                let dist = ctx.cache.distance(&set).unwrap_or(f64::INFINITY);
                (dist, set_signature(&set), path)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let take = beam.limit(keyed.len());
        // paths beyond the beam stay queued and compete again next iteration
        let leftover = keyed.split_off(take);
        to_check.extend(leftover.into_iter().map(|(_, _, p)| p));
        let batch: Vec<Vec<EventClass>> = keyed.into_iter().map(|(_, _, p)| p).collect();
        let batch_sets: Vec<ClassSet> = batch.iter().map(|p| path_set(p)).collect();

        let mut to_expand: Vec<Vec<EventClass>> = Vec::new();
        if ctx.mode == CheckingMode::Monotonic {
            let needs_check: Vec<ClassSet> = batch_sets
                .iter()
                .filter(|set| !has_admitted_subset(&result, set))
                .cloned()
                .collect();
            let checks = ctx.check_batch(&needs_check);
            let verdicts: BTreeMap<&ClassSet, bool> =
                needs_check.iter().zip(checks.iter().copied()).collect();
            for (path, set) in batch.into_iter().zip(batch_sets.iter()) {
                let admitted = match verdicts.get(set) {
                    Some(holds) => *holds,
                    None => true, // subset-admitted without a check
                };
                if admitted {
                    result.insert(Candidate {
                        classes: set.clone(),
                        distance: ctx.cache.distance(set),
                        provenance: Provenance::DfgPath,
                        checked: verdicts.contains_key(set),
                    });
                }
                // monotonic mode expands every picked path
                to_expand.push(path);
            }
        } else {
            let checks = ctx.check_batch(&batch_sets);
            for ((path, set), holds) in batch.into_iter().zip(batch_sets.iter()).zip(checks) {
                if holds {
                    result.insert(Candidate {
                        classes: set.clone(),
                        distance: ctx.cache.distance(set),
                        provenance: Provenance::DfgPath,
                        checked: true,
                    });
                    to_expand.push(path);
                } else if ctx.mode != CheckingMode::AntiMonotonic {
                    to_expand.push(path);
                }
            }
        }

        for path in &to_expand {
            let head = &path[0];
            let tail = &path[path.len() - 1];
            for succ in dfg.successors(tail) {
                if path.contains(succ) {
                    continue;
                }
                let mut grown = path.clone();
                grown.push(succ.clone());
                schedule(&mut to_check, &mut scheduled, grown, log);
            }
            for pred in dfg.predecessors(head) {
                if path.contains(pred) {
                    continue;
                }
                let mut grown = Vec::with_capacity(path.len() + 1);
                grown.push(pred.clone());
                grown.extend(path.iter().cloned());
                schedule(&mut to_check, &mut scheduled, grown, log);
            }
        }
    }

    result.truncated = ctx.timed_out;
    result.violations = ctx.stats;
    Ok(result)
}

fn path_set(path: &[EventClass]) -> ClassSet {
    path.iter().cloned().collect()
}

fn schedule(
    to_check: &mut Vec<Vec<EventClass>>,
    scheduled: &mut std::collections::BTreeSet<ClassSet>,
    path: Vec<EventClass>,
    log: &EventLog,
) {
    let set = path_set(&path);
    if scheduled.contains(&set) || !occurs(&set, log) {
        return;
    }
    scheduled.insert(set);
    to_check.push(path);
}

/// Merges exclusive behavioral alternatives: candidate groups with identical
/// DFG pre- and post-sets and no connecting edges are combined, including
/// pre/post-augmented unions when both constituents' augmented forms are
/// already candidates. Merged groups are checked against class-based
/// constraints only and are exempt from the co-occurrence filter.
pub fn merge_exclusive(
    log: &EventLog,
    rs: &ConstraintSet,
    input: &CandidateSet,
) -> Result<CandidateSet, ConstraintError> {
    let dfg = Dfg::from_log(log);
    let cache = DistanceCache::new(log, rs.split_rule());
    let class_only = ConstraintSet::new(rs.class_based().cloned().collect());
    let mut result = input.clone();
    let mut index = PrePostIndex::new(&dfg);
    for set in input.class_sets() {
        index
            .register(set.clone())
            .expect("candidate sets stay within the log's classes");
    }

    let add = |result: &mut CandidateSet, set: ClassSet| {
        if !result.contains(&set) {
            result.insert(Candidate {
                classes: set.clone(),
                distance: cache.distance(&set),
                provenance: Provenance::ExclusiveMerge,
                checked: false,
            });
        }
    };

    let mut seen: std::collections::BTreeSet<ClassSet> = Default::default();
    let snapshot: Vec<ClassSet> = input.class_sets().cloned().collect();
    for start in snapshot {
        if seen.contains(&start) {
            continue;
        }
        let mut equiv: Vec<ClassSet> = index
            .equal_pre_post(&start)
            .expect("registered sets stay within the log's classes");
        equiv.push(start.clone());
        equiv.sort();
        let mut pairs: Vec<(ClassSet, ClassSet)> = Vec::new();
        for gi in &equiv {
            for gj in &equiv {
                if gi != gj {
                    pairs.push((gi.clone(), gj.clone()));
                }
            }
        }
        while let Some((gi, gj)) = pairs.pop() {
            if !gi.is_disjoint(&gj) {
                continue;
            }
            let merged: ClassSet = gi.union(&gj).cloned().collect();
            let exclusive = dfg
                .edge_exclusive(&gi, &gj)
                .expect("pair sets are disjoint and within the log");
            if !exclusive {
                continue;
            }
            let group = Group::new(merged.clone()).expect("merged sets are non-empty");
            if !holds_group(&group, &class_only, log)?.holds {
                continue;
            }
            let is_new = !result.contains(&merged);
            add(&mut result, merged.clone());

            let pre = dfg.pre_set(&gi).expect("within log");
            let post = dfg.post_set(&gi).expect("within log");
            let with = |base: &ClassSet, extra: &ClassSet| -> ClassSet {
                base.union(extra).cloned().collect()
            };
            let both: ClassSet = pre.union(&post).cloned().collect();
            if result.contains(&with(&both, &gi)) && result.contains(&with(&both, &gj)) {
                add(&mut result, with(&both, &merged));
            } else if result.contains(&with(&pre, &gi)) && result.contains(&with(&pre, &gj)) {
                add(&mut result, with(&pre, &merged));
            } else if result.contains(&with(&post, &gi)) && result.contains(&with(&post, &gj)) {
                add(&mut result, with(&post, &merged));
            }

            if is_new {
                for gk in &equiv {
                    if *gk != gi && *gk != gj {
                        pairs.push((merged.clone(), gk.clone()));
                    }
                }
                equiv.push(merged.clone());
                index.register(merged).ok();
            }
        }
        seen.extend(equiv);
    }
    Ok(result)
}
