//! Fuzzes the distance implementation against a naive transcription of its
//! definition, and samples the monotonicity soundness claims on the fixture.

mod common;

use logabs_core::{
    class_set, group_distance, holds_group, parse_constraints, ClassSet, Group, Monotonicity,
    SplitRule,
};
use rand::prelude::*;

#[test]
fn fuzzed_distances_match_naive_oracle() {
    let mut rng = common::rng(0x5eed_0001);
    let mut checked = 0;
    while checked < 1000 {
        let log = common::random_log(&mut rng, 8, true);
        let classes: Vec<_> = log.classes().iter().cloned().collect();
        let size = rng.gen_range(1..=classes.len());
        let mut picks = classes.clone();
        picks.shuffle(&mut rng);
        picks.truncate(size);
        let set: ClassSet = picks.into_iter().collect();
        let max_per_class = rng.gen_range(1..=2);
        let rule = SplitRule { max_per_class };
        let expected = common::oracle_group_distance(&log, &set, max_per_class);
        let group = Group::new(set).unwrap();
        match (expected, group_distance(&group, &log, rule)) {
            (Some(want), Ok(got)) => {
                assert!(
                    (want - got).abs() < 1e-9,
                    "distance mismatch for {group}: oracle {want}, impl {got}"
                );
            }
            (None, Err(_)) => {}
            (want, got) => panic!("oracle {want:?} vs impl {got:?} for {group}"),
        }
        checked += 1;
    }
}

#[test]
fn singleton_distance_is_always_one() {
    let mut rng = common::rng(0x5eed_0002);
    for _ in 0..50 {
        let log = common::random_log(&mut rng, 8, true);
        for class in log.classes() {
            let group = Group::singleton(class.name());
            let d = group_distance(&group, &log, SplitRule::default()).unwrap();
            assert_eq!(d, 1.0, "{group}");
        }
    }
}

#[test]
fn distance_never_falls_below_inverse_size() {
    let mut rng = common::rng(0x5eed_0003);
    for _ in 0..200 {
        let log = common::random_log(&mut rng, 6, true);
        let classes: Vec<_> = log.classes().iter().cloned().collect();
        let size = rng.gen_range(1..=classes.len());
        let mut picks = classes;
        picks.shuffle(&mut rng);
        picks.truncate(size);
        let group = Group::new(picks.into_iter().collect()).unwrap();
        if let Ok(d) = group_distance(&group, &log, SplitRule::default()) {
            assert!(d >= 1.0 / group.len() as f64 - 1e-12, "{group}: {d}");
        }
    }
}

/// Randomized subset/superset sampling of the monotonicity classification on
/// the fixture log: a satisfied monotonic constraint stays satisfied in
/// supergroups, a violated anti-monotonic constraint stays violated.
#[test]
fn monotonicity_soundness_sampled_on_fixture() {
    let log = common::fixture_log();
    let classes: Vec<_> = log.classes().iter().cloned().collect();
    let docs = [
        "class count >= 2",
        "class count <= 3",
        "instance distinct(role) <= 1",
        "class cannot-link rcp acc",
        "class distinct(role) <= 1",
    ];
    let mut rng = common::rng(0x5eed_0004);
    for doc in docs {
        let rs = parse_constraints(doc).unwrap();
        let constraint = &rs.all()[0];
        for _ in 0..200 {
            let mut picks = classes.clone();
            picks.shuffle(&mut rng);
            let small_len = rng.gen_range(1..classes.len());
            let small: ClassSet = picks[..small_len].iter().cloned().collect();
            let grow = rng.gen_range(small_len..=classes.len());
            let large: ClassSet = picks[..grow].iter().cloned().collect();
            if small == large {
                continue;
            }
            let small_holds = holds_group(&Group::new(small).unwrap(), &rs, &log)
                .unwrap()
                .holds;
            let large_holds = holds_group(&Group::new(large).unwrap(), &rs, &log)
                .unwrap()
                .holds;
            match constraint.monotonicity() {
                Monotonicity::Monotonic => {
                    assert!(!small_holds || large_holds, "monotonic broke: {doc}");
                }
                Monotonicity::AntiMonotonic => {
                    assert!(small_holds || !large_holds, "anti-monotonic broke: {doc}");
                }
                _ => {}
            }
        }
    }
}

/// Re-evaluating the same group yields identical results and reports.
#[test]
fn holds_group_is_pure() {
    let log = common::fixture_log();
    let rs = common::fixture_role_constraints();
    let group = Group::new(class_set(["ckc", "acc"])).unwrap();
    let first = holds_group(&group, &rs, &log).unwrap();
    let second = holds_group(&group, &rs, &log).unwrap();
    assert_eq!(first.holds, second.holds);
    assert_eq!(
        serde_json::to_string(&first.report).unwrap(),
        serde_json::to_string(&second.report).unwrap()
    );
}
