//! Selecting an optimal grouping from candidates: a minimum-distance exact
//! cover with optional grouping-cardinality bounds, a greedy merge baseline,
//! and diagnostics for infeasible problems.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::candidates::{CandidateSet, ViolationStats};
use crate::constraints::{holds_group, ConstraintError, ConstraintSet};
use crate::distance::DistanceCache;
use crate::instances::Group;
use crate::log::{set_signature, ClassSet, EventLog};

/// Groups selected for one exact cover, kept in signature order, plus the
/// summed distance computed in that canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    groups: Vec<Group>,
    objective: f64,
}

impl Grouping {
    pub fn new(mut groups: Vec<Group>, objective: f64) -> Self {
        groups.sort();
        Grouping { groups, objective }
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// `sig1 | sig2 | ...` of the sorted groups; the grouping-level tiebreak.
    pub fn signature(&self) -> String {
        let parts: Vec<String> = self.groups.iter().map(Group::signature).collect();
        parts.join(" | ")
    }

    pub fn class_sets(&self) -> Vec<ClassSet> {
        self.groups.iter().map(|g| g.classes().clone()).collect()
    }
}

/// Grouping-size bounds taken from grouping constraints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bounds {
    pub max_groups: Option<usize>,
    pub min_groups: Option<usize>,
}

impl Bounds {
    pub fn from_constraints(rs: &ConstraintSet) -> Bounds {
        let (max_groups, min_groups) = rs.group_count_bounds();
        Bounds {
            max_groups,
            min_groups,
        }
    }

    fn admits(&self, count: usize) -> bool {
        self.max_groups.is_none_or(|x| count <= x) && self.min_groups.is_none_or(|y| count >= y)
    }
}

/// A weighted exact-cover instance over the log's classes.
#[derive(Debug, Clone)]
pub struct CoverProblem {
    /// Candidate class sets with their distances, in signature order.
    candidates: Vec<(ClassSet, f64)>,
    classes: ClassSet,
    bounds: Bounds,
}

impl CoverProblem {
    pub fn new(
        mut candidates: Vec<(ClassSet, f64)>,
        classes: ClassSet,
        bounds: Bounds,
    ) -> Result<Self, SolveError> {
        if candidates.is_empty() {
            return Err(SolveError::NoCandidates);
        }
        candidates.sort_by(|a, b| a.0.cmp(&b.0));
        candidates.dedup_by(|a, b| a.0 == b.0);
        Ok(CoverProblem {
            candidates,
            classes,
            bounds,
        })
    }

    pub fn from_candidates(
        cands: &CandidateSet,
        log: &EventLog,
        bounds: Bounds,
    ) -> Result<Self, SolveError> {
        let weighted: Vec<(ClassSet, f64)> = cands
            .iter()
            .filter_map(|c| c.distance.map(|d| (c.classes.clone(), d)))
            .collect();
        CoverProblem::new(weighted, log.classes().clone(), bounds)
    }

    pub fn candidates(&self) -> &[(ClassSet, f64)] {
        &self.candidates
    }

    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Classes no candidate covers; any entry makes the problem infeasible.
    pub fn uncovered_classes(&self) -> ClassSet {
        let mut covered = ClassSet::new();
        for (set, _) in &self.candidates {
            covered.extend(set.iter().cloned());
        }
        self.classes.difference(&covered).cloned().collect()
    }

    /// Canonical objective: distances summed in signature order.
    fn objective_of(&self, selected: &[usize]) -> f64 {
        let mut ordered = selected.to_vec();
        ordered.sort();
        ordered.iter().map(|&i| self.candidates[i].1).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub grouping: Grouping,
    /// False when a time limit stopped the search before optimality was
    /// proven; the grouping is then the best incumbent found.
    pub proven: bool,
}

#[derive(Debug)]
pub enum SolveResult {
    Solved(SolveOutcome),
    Infeasible(InfeasibilityReport),
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("no candidate groups to select from")]
    NoCandidates,
    #[error("time limit expired before any grouping was found")]
    TimeoutWithoutIncumbent,
    #[error("constraint evaluation failed: {0}")]
    Constraint(#[from] ConstraintError),
    #[error("no feasible grouping: {0}")]
    Infeasible(Box<InfeasibilityReport>),
}

/// Possible causes of an unsolvable cover, serialized for users refining
/// their constraints.
#[derive(Debug, Clone, Default, Serialize)]
pub struct InfeasibilityReport {
    /// Classes covered by zero candidate groups.
    pub uncovered_classes: Vec<String>,
    /// Per-constraint evidence gathered during candidate search.
    pub constraint_violations: BTreeMap<String, ConstraintEvidence>,
    /// Conflicts between grouping bounds and achievable cover sizes.
    pub bound_conflicts: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ConstraintEvidence {
    pub affected_classes: Vec<String>,
    pub groups_violating: u64,
    pub violating_instances: u64,
    pub total_instances: u64,
    /// Fraction of inspected instances violating the constraint.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violating_fraction: Option<f64>,
}

impl InfeasibilityReport {
    pub fn is_empty(&self) -> bool {
        self.uncovered_classes.is_empty()
            && self.constraint_violations.is_empty()
            && self.bound_conflicts.is_empty()
    }
}

impl std::fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if !self.uncovered_classes.is_empty() {
            parts.push(format!("uncovered classes {:?}", self.uncovered_classes));
        }
        if !self.constraint_violations.is_empty() {
            let names: Vec<&String> = self.constraint_violations.keys().collect();
            parts.push(format!("violated constraints {names:?}"));
        }
        parts.extend(self.bound_conflicts.iter().cloned());
        if parts.is_empty() {
            parts.push("no cause identified".into());
        }
        f.write_str(&parts.join("; "))
    }
}

/// Search node ordered for a min-heap on the lower bound; the monotonically
/// assigned sequence number keeps heap order independent of float ties.
struct Node {
    lower_bound: f64,
    seq: u64,
    cost: f64,
    selected: Vec<usize>,
    uncovered: ClassSet,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap, we want the smallest bound
        other
            .lower_bound
            .total_cmp(&self.lower_bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Margin added to the incumbent before pruning, so float summation order
/// can never prune an equal-objective grouping that the tie rules prefer.
const PRUNE_MARGIN: f64 = 1e-9;

struct CoreResult {
    incumbent: Option<(f64, Vec<usize>)>,
    proven: bool,
}

/// Best-first branch-and-bound over the candidate/class cover graph.
/// Branches on the lexicographically smallest uncovered class; children are
/// the candidates covering it that fit the current partial selection. The
/// admissible bound charges every uncovered class its cheapest per-class
/// distance share. Ties on the final objective prefer fewer groups, then the
/// smallest grouping signature.
pub fn solve_exact(
    problem: &CoverProblem,
    time_limit: Duration,
) -> Result<SolveResult, SolveError> {
    if !problem.uncovered_classes().is_empty() {
        return Ok(SolveResult::Infeasible(build_report(
            problem,
            &ViolationStats::default(),
        )));
    }
    let result = solve_core(problem, Instant::now() + time_limit);
    match result.incumbent {
        Some((objective, selected)) => {
            let groups: Vec<Group> = selected
                .iter()
                .map(|&i| Group::new(problem.candidates[i].0.clone()).expect("non-empty"))
                .collect();
            Ok(SolveResult::Solved(SolveOutcome {
                grouping: Grouping::new(groups, objective),
                proven: result.proven,
            }))
        }
        None if result.proven => Ok(SolveResult::Infeasible(build_report(
            problem,
            &ViolationStats::default(),
        ))),
        None => Err(SolveError::TimeoutWithoutIncumbent),
    }
}

fn solve_core(problem: &CoverProblem, deadline: Instant) -> CoreResult {
    let n = problem.candidates.len();
    // candidates indexed per class, and the static per-class bound share
    let mut covering: BTreeMap<&crate::log::EventClass, Vec<usize>> = BTreeMap::new();
    for class in &problem.classes {
        covering.insert(class, Vec::new());
    }
    let mut min_share: BTreeMap<&crate::log::EventClass, f64> = BTreeMap::new();
    for i in 0..n {
        let (set, dist) = &problem.candidates[i];
        let share = dist / set.len() as f64;
        for class in set {
            if let Some(list) = covering.get_mut(class) {
                list.push(i);
            }
            min_share
                .entry(class)
                .and_modify(|s| *s = s.min(share))
                .or_insert(share);
        }
    }

    let bound_of = |cost: f64, uncovered: &ClassSet| -> f64 {
        let mut b = cost;
        for class in uncovered {
            b += min_share.get(class).copied().unwrap_or(f64::INFINITY);
        }
        b
    };

    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        lower_bound: bound_of(0.0, &problem.classes),
        seq,
        cost: 0.0,
        selected: Vec::new(),
        uncovered: problem.classes.clone(),
    });

    let mut incumbent: Option<(f64, Vec<usize>)> = None;
    let mut proven = true;
    while let Some(node) = heap.pop() {
        if Instant::now() >= deadline {
            proven = false;
            break;
        }
        if let Some((best, _)) = &incumbent {
            if node.lower_bound > best + PRUNE_MARGIN {
                continue;
            }
        }
        if node.uncovered.is_empty() {
            if problem.bounds.admits(node.selected.len()) {
                consider_incumbent(problem, &mut incumbent, node.selected);
            }
            continue;
        }
        if let Some(x) = problem.bounds.max_groups {
            if node.selected.len() >= x {
                continue; // no slot left for the remaining classes
            }
        }
        let branch_class = node.uncovered.iter().next().expect("non-empty");
        for &i in &covering[branch_class] {
            let (set, dist) = &problem.candidates[i];
            if !set.is_subset(&node.uncovered) {
                continue;
            }
            let uncovered: ClassSet = node.uncovered.difference(set).cloned().collect();
            let cost = node.cost + dist;
            let lower_bound = bound_of(cost, &uncovered);
            if let Some((best, _)) = &incumbent {
                if lower_bound > best + PRUNE_MARGIN {
                    continue;
                }
            }
            let mut selected = node.selected.clone();
            selected.push(i);
            seq += 1;
            heap.push(Node {
                lower_bound,
                seq,
                cost,
                selected,
                uncovered,
            });
        }
    }
    CoreResult { incumbent, proven }
}

fn consider_incumbent(
    problem: &CoverProblem,
    incumbent: &mut Option<(f64, Vec<usize>)>,
    mut selected: Vec<usize>,
) {
    selected.sort();
    let objective = problem.objective_of(&selected);
    let better = match incumbent {
        None => true,
        Some((best_obj, best_sel)) => match objective.total_cmp(best_obj) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => {
                let (count, best_count) = (selected.len(), best_sel.len());
                count < best_count
                    || (count == best_count
                        && signature_of(problem, &selected) < signature_of(problem, best_sel))
            }
        },
    };
    if better {
        *incumbent = Some((objective, selected));
    }
}

/// The grouping-level tiebreak key: the sorted sequence of group signatures,
/// compared lexicographically element by element.
fn signature_of(problem: &CoverProblem, selected: &[usize]) -> Vec<String> {
    selected
        .iter()
        .map(|&i| set_signature(&problem.candidates[i].0))
        .collect()
}

/// Builds the infeasibility report: uncovered classes, constraint evidence
/// from the search, and bound conflicts found by comparing declared bounds
/// with the smallest and largest achievable cover sizes.
pub fn diagnose(problem: &CoverProblem, violations: &ViolationStats) -> InfeasibilityReport {
    build_report(problem, violations)
}

fn build_report(problem: &CoverProblem, violations: &ViolationStats) -> InfeasibilityReport {
    let mut report = InfeasibilityReport {
        uncovered_classes: problem
            .uncovered_classes()
            .iter()
            .map(|c| c.name().to_string())
            .collect(),
        ..Default::default()
    };
    for (constraint, stat) in &violations.per_constraint {
        report.constraint_violations.insert(
            constraint.clone(),
            ConstraintEvidence {
                affected_classes: stat.affected_classes.clone(),
                groups_violating: stat.groups_violating,
                violating_instances: stat.violating_instances,
                total_instances: stat.total_instances,
                violating_fraction: (stat.total_instances > 0)
                    .then(|| stat.violating_instances as f64 / stat.total_instances as f64),
            },
        );
    }
    if report.uncovered_classes.is_empty() {
        let unbounded = CoverProblem {
            candidates: problem.candidates.clone(),
            classes: problem.classes.clone(),
            bounds: Bounds::default(),
        };
        match achievable_count_range(&unbounded) {
            None => report
                .bound_conflicts
                .push("no exact cover exists over the computed candidates".into()),
            Some((min_count, max_count)) => {
                if let Some(x) = problem.bounds.max_groups {
                    if min_count > x {
                        report.bound_conflicts.push(format!(
                            "at most {x} groups requested but every exact cover needs at least {min_count}"
                        ));
                    }
                }
                if let Some(y) = problem.bounds.min_groups {
                    if max_count < y {
                        report.bound_conflicts.push(format!(
                            "at least {y} groups requested but no exact cover has more than {max_count}"
                        ));
                    }
                }
            }
        }
    }
    report
}

/// Smallest and largest selectable-group counts over all exact covers, via
/// two unit-weight solves.
fn achievable_count_range(problem: &CoverProblem) -> Option<(usize, usize)> {
    let reweight = |weight: f64| CoverProblem {
        candidates: problem
            .candidates
            .iter()
            .map(|(set, _)| (set.clone(), weight))
            .collect(),
        classes: problem.classes.clone(),
        bounds: Bounds::default(),
    };
    let deadline = Instant::now() + Duration::from_secs(60);
    let min = solve_core(&reweight(1.0), deadline).incumbent?.1.len();
    let max = solve_core(&reweight(-1.0), deadline).incumbent?.1.len();
    Some((min, max))
}

/// Greedy baseline: start from all singletons and repeatedly merge the
/// violation-free pair whose merge lowers the summed distance the most,
/// stopping when no merge improves it. Merged groups must co-occur in some
/// trace, the same requirement every candidate group satisfies; without it
/// the distance term for group size would reward merging exclusive classes
/// indiscriminately. Grouping-size bounds are not enforceable in this
/// iterative scheme and are ignored.
pub fn solve_greedy(log: &EventLog, rs: &ConstraintSet) -> Result<Grouping, SolveError> {
    rs.validate_for_log(log)?;
    let rule = rs.split_rule();
    let cache = DistanceCache::new(log, rule);
    let mut groups: Vec<ClassSet> = log
        .classes()
        .iter()
        .map(|c| ClassSet::from([c.clone()]))
        .collect();

    let mut stats = ViolationStats::default();
    let mut infeasible = false;
    for set in &groups {
        let group = Group::new(set.clone()).expect("singletons are non-empty");
        let check = holds_group(&group, rs, log)?;
        if !check.holds {
            stats_absorb(&mut stats, &check);
            infeasible = true;
        }
    }
    if infeasible {
        let problem = CoverProblem::new(
            groups.iter().map(|s| (s.clone(), 1.0)).collect(),
            log.classes().clone(),
            Bounds::default(),
        )?;
        return Err(SolveError::Infeasible(Box::new(build_report(
            &problem, &stats,
        ))));
    }

    let mut holds_cache: BTreeMap<ClassSet, bool> = BTreeMap::new();
    loop {
        let mut pairs: Vec<(usize, usize, ClassSet)> = Vec::new();
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                pairs.push((i, j, groups[i].union(&groups[j]).cloned().collect()));
            }
        }
        // fill the admissibility cache for unseen merges in parallel
        let unseen: Vec<ClassSet> = pairs
            .iter()
            .map(|(_, _, merged)| merged.clone())
            .filter(|m| !holds_cache.contains_key(m))
            .collect();
        let checked: Vec<(ClassSet, bool)> = unseen
            .par_iter()
            .map(|merged| {
                let group = Group::new(merged.clone()).expect("non-empty");
                let admissible = crate::candidates::occurs(merged, log)
                    && holds_group(&group, rs, log)
                        .map(|c| c.holds)
                        .unwrap_or(false);
                (merged.clone(), admissible)
            })
            .collect();
        holds_cache.extend(checked);

        let mut best: Option<(f64, String, usize, usize)> = None;
        for (i, j, merged) in &pairs {
            if !holds_cache[merged] {
                continue;
            }
            let (Some(dm), Some(di), Some(dj)) = (
                cache.distance(merged),
                cache.distance(&groups[*i]),
                cache.distance(&groups[*j]),
            ) else {
                continue;
            };
            let delta = dm - di - dj;
            let sig = set_signature(merged);
            let better = match &best {
                None => true,
                Some((bd, bsig, _, _)) => delta < *bd || (delta == *bd && sig < *bsig),
            };
            if better {
                best = Some((delta, sig, *i, *j));
            }
        }
        match best {
            Some((delta, _, i, j)) if delta < 0.0 => {
                let merged: ClassSet = groups[i].union(&groups[j]).cloned().collect();
                groups.remove(j);
                groups.remove(i);
                groups.push(merged);
                groups.sort();
            }
            _ => break,
        }
    }

    let objective = cache
        .objective(&groups)
        .expect("all merged groups have instances");
    let groups = groups
        .into_iter()
        .map(|set| Group::new(set).expect("non-empty"))
        .collect();
    Ok(Grouping::new(groups, objective))
}

fn stats_absorb(stats: &mut ViolationStats, check: &crate::constraints::GroupCheck) {
    // mirror the candidate-search aggregation for greedy's singleton report
    for detail in &check.report.details {
        let stat = stats
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
        stat.affected_classes.sort();
    }
}

/// Convenience: the exact objective of a grouping recomputed from scratch,
/// used when validating solver output.
pub fn recompute_objective(
    grouping: &Grouping,
    log: &EventLog,
    rs: &ConstraintSet,
) -> Result<f64, crate::distance::DistanceError> {
    let groups: Vec<Group> = grouping.groups().to_vec();
    crate::distance::grouping_distance(&groups, log, rs.split_rule())
}
