use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use logabs_bench::rotating_log;
use logabs_core::{
    dfg_candidates, exhaustive_candidates, group_distance, merge_exclusive, parse_constraints,
    solve_exact, Beam, Bounds, CoverProblem, Group, SolveResult, SplitRule,
};

const SEARCH_BUDGET: Duration = Duration::from_secs(60);

fn bench_candidate_engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("candidates");
    group.sample_size(10);
    for classes in [6usize, 8, 10] {
        let log = rotating_log(classes, 20, classes + 4);
        let rs = parse_constraints("class count <= 4").unwrap();
        group.bench_with_input(BenchmarkId::new("exhaustive", classes), &log, |b, log| {
            b.iter(|| exhaustive_candidates(log, &rs, SEARCH_BUDGET).unwrap())
        });
        group.bench_with_input(
            BenchmarkId::new("dfg_unlimited", classes),
            &log,
            |b, log| b.iter(|| dfg_candidates(log, &rs, Beam::Unlimited, SEARCH_BUDGET).unwrap()),
        );
        group.bench_with_input(BenchmarkId::new("dfg_beam", classes), &log, |b, log| {
            b.iter(|| dfg_candidates(log, &rs, Beam::Width(5 * classes), SEARCH_BUDGET).unwrap())
        });
    }
    group.finish();
}

fn bench_exclusive_merge(c: &mut Criterion) {
    let log = rotating_log(8, 20, 12);
    let rs = parse_constraints("class count <= 4").unwrap();
    let cands = dfg_candidates(&log, &rs, Beam::Unlimited, SEARCH_BUDGET).unwrap();
    c.bench_function("merge_exclusive", |b| {
        b.iter(|| merge_exclusive(&log, &rs, &cands).unwrap())
    });
}

fn bench_solver(c: &mut Criterion) {
    let log = rotating_log(10, 20, 14);
    let rs = parse_constraints("class count <= 5").unwrap();
    let cands = exhaustive_candidates(&log, &rs, SEARCH_BUDGET).unwrap();
    let problem = CoverProblem::from_candidates(&cands, &log, Bounds::default()).unwrap();
    c.bench_function("solve_exact", |b| {
        b.iter(|| match solve_exact(&problem, SEARCH_BUDGET).unwrap() {
            SolveResult::Solved(outcome) => outcome.grouping.objective(),
            SolveResult::Infeasible(_) => unreachable!("singletons always cover"),
        })
    });
}

fn bench_distance(c: &mut Criterion) {
    let log = rotating_log(12, 50, 20);
    let classes: Vec<_> = log.classes().iter().take(5).cloned().collect();
    let group = Group::new(classes.into_iter().collect()).unwrap();
    c.bench_function("group_distance", |b| {
        b.iter(|| group_distance(&group, &log, SplitRule::default()).unwrap())
    });
}

criterion_group!(
    benches,
    bench_candidate_engines,
    bench_exclusive_merge,
    bench_solver,
    bench_distance
);
criterion_main!(benches);
