//! Checks the candidate searches against the naive powerset filter and each
//! other: exhaustive completeness, beam-search soundness, the subset
//! property, and pruning transparency.

mod common;

use std::collections::BTreeSet;
use std::time::Duration;

use logabs_core::{
    dfg_candidates, exhaustive_candidates, holds_group, parse_constraints, Beam, ClassSet,
    ConstraintSet, Group,
};

const LIMIT: Duration = Duration::from_secs(120);

#[test]
fn exhaustive_equals_powerset_filter_on_random_logs() {
    let mut rng = common::rng(0x5eed_0101);
    for round in 0..30 {
        let log = common::random_log(&mut rng, 8, false);
        let rs = common::random_mode_pure_constraints(&mut rng, &log);
        let expected = common::powerset_candidates(&log, &rs);
        let got: BTreeSet<ClassSet> = exhaustive_candidates(&log, &rs, LIMIT)
            .unwrap()
            .class_sets()
            .cloned()
            .collect();
        assert_eq!(
            expected,
            got,
            "round {round}: mode {:?}, constraints {:?}",
            rs.checking_mode(),
            rs.all().iter().map(ToString::to_string).collect::<Vec<_>>()
        );
    }
}

#[test]
fn dfg_candidates_are_sound_and_subset_of_exhaustive() {
    let mut rng = common::rng(0x5eed_0102);
    for round in 0..30 {
        let log = common::random_log(&mut rng, 8, false);
        let rs = common::random_mode_pure_constraints(&mut rng, &log);
        let dfg = dfg_candidates(&log, &rs, Beam::Unlimited, LIMIT).unwrap();
        let exhaustive: BTreeSet<ClassSet> = exhaustive_candidates(&log, &rs, LIMIT)
            .unwrap()
            .class_sets()
            .cloned()
            .collect();
        for candidate in dfg.iter() {
            let group = Group::new(candidate.classes.clone()).unwrap();
            assert!(
                holds_group(&group, &rs, &log).unwrap().holds,
                "round {round}: unsound candidate {group}"
            );
            assert!(
                exhaustive.contains(&candidate.classes),
                "round {round}: {group} not in exhaustive set"
            );
        }
    }
}

/// Anti-monotonic pruning only saves work; forcing the non-monotonic mode on
/// the same purely anti-monotonic constraints yields the same candidates.
#[test]
fn anti_monotonic_pruning_is_transparent() {
    let mut rng = common::rng(0x5eed_0103);
    for _ in 0..10 {
        let log = common::random_log(&mut rng, 7, false);
        let anti = parse_constraints("instance distinct(team) <= 1\nclass count <= 3").unwrap();
        assert_eq!(
            anti.checking_mode(),
            logabs_core::CheckingMode::AntiMonotonic
        );

        let pruned: BTreeSet<ClassSet> = exhaustive_candidates(&log, &anti, LIMIT)
            .unwrap()
            .class_sets()
            .cloned()
            .collect();
        let full: BTreeSet<ClassSet> = logabs_core::candidates::exhaustive_candidates_forced_mode(
            &log,
            &anti,
            logabs_core::CheckingMode::NonMonotonic,
            LIMIT,
        )
        .unwrap()
        .class_sets()
        .cloned()
        .collect();
        assert_eq!(pruned, full);
    }
}

/// Identical inputs produce identical candidate sets, regardless of beam
/// width bookkeeping or thread count.
#[test]
fn candidate_search_is_deterministic() {
    let mut rng = common::rng(0x5eed_0104);
    let log = common::random_log(&mut rng, 8, true);
    let rs = parse_constraints("instance distinct(team) <= 2").unwrap();
    let a = dfg_candidates(&log, &rs, Beam::Width(4), LIMIT).unwrap();
    let b = dfg_candidates(&log, &rs, Beam::Width(4), LIMIT).unwrap();
    assert_eq!(a.to_jsonl(), b.to_jsonl());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let c = pool.install(|| dfg_candidates(&log, &rs, Beam::Width(4), LIMIT).unwrap());
    assert_eq!(a.to_jsonl(), c.to_jsonl());
}

/// The empty constraint set reduces the exhaustive search to the pure
/// co-occurrence filter.
#[test]
fn unconstrained_search_is_co_occurrence_filter() {
    let mut rng = common::rng(0x5eed_0105);
    let log = common::random_log(&mut rng, 6, true);
    let rs = ConstraintSet::empty();
    let expected = common::powerset_candidates(&log, &rs);
    let got: BTreeSet<ClassSet> = exhaustive_candidates(&log, &rs, LIMIT)
        .unwrap()
        .class_sets()
        .cloned()
        .collect();
    assert_eq!(expected, got);
}
