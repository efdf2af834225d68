//! File-format round trips: structural equality after write/load, byte-level
//! idempotence after one normalization pass, and reloadability of abstracted
//! logs.

mod common;

use logabs_core::io::{load_log_from_reader, write_log_to_writer};
use logabs_core::{
    abstract_log, class_set, AbstractionStrategy, AttributeValue, ColumnMap, Event, EventLog,
    Group, Grouping, LogFormat, SplitRule, Trace,
};

fn cols() -> ColumnMap {
    ColumnMap::default()
}

fn roundtrip(log: &EventLog, format: LogFormat) -> EventLog {
    let mut buf = Vec::new();
    write_log_to_writer(log, &mut buf, format).unwrap();
    load_log_from_reader(buf.as_slice(), format, &cols()).unwrap()
}

#[test]
fn fixture_roundtrips_in_both_formats() {
    let log = common::fixture_log();
    for format in [LogFormat::Csv, LogFormat::Jsonl] {
        let reloaded = roundtrip(&log, format);
        assert_eq!(log, reloaded, "{format:?}");
    }
}

#[test]
fn fixture_csv_loads_with_expected_shape() {
    let csv = logabs_core::sample::request_handling_csv();
    let log = load_log_from_reader(csv.as_bytes(), LogFormat::Csv, &cols()).unwrap();
    assert_eq!(log.traces().len(), 4);
    assert_eq!(log.classes().len(), 8);
    assert_eq!(log, common::fixture_log());
}

#[test]
fn unicode_attributes_survive() {
    let t = Trace::new(
        "ü-1",
        vec![
            Event::new("begrüßen", 0)
                .with_attr("note", AttributeValue::Str("héllo wörld — ≤≥".into())),
            Event::new("arrêter", 1).with_attr("λ", AttributeValue::Str("ラムダ".into())),
        ],
    )
    .unwrap();
    let log = EventLog::from_traces(vec![t]).unwrap();
    for format in [LogFormat::Csv, LogFormat::Jsonl] {
        assert_eq!(log, roundtrip(&log, format), "{format:?}");
    }
}

#[test]
fn load_is_deterministic() {
    let csv = logabs_core::sample::request_handling_csv();
    let a = load_log_from_reader(csv.as_bytes(), LogFormat::Csv, &cols()).unwrap();
    let b = load_log_from_reader(csv.as_bytes(), LogFormat::Csv, &cols()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn write_is_byte_idempotent_after_normalization() {
    let mut rng = common::rng(0x5eed_0301);
    for _ in 0..20 {
        let log = common::random_log(&mut rng, 6, true);
        for format in [LogFormat::Csv, LogFormat::Jsonl] {
            let mut first = Vec::new();
            write_log_to_writer(&log, &mut first, format).unwrap();
            let reloaded = load_log_from_reader(first.as_slice(), format, &cols()).unwrap();
            let mut second = Vec::new();
            write_log_to_writer(&reloaded, &mut second, format).unwrap();
            assert_eq!(first, second, "{format:?}");
        }
    }
}

#[test]
fn abstracted_log_reloads_as_event_log() {
    let log = common::fixture_log();
    let grouping = Grouping::new(
        vec![
            Group::new(class_set(["rcp", "ckc", "ckt"])).unwrap(),
            Group::new(class_set(["acc"])).unwrap(),
            Group::new(class_set(["rej"])).unwrap(),
            Group::new(class_set(["prio", "inf", "arv"])).unwrap(),
        ],
        37.0 / 12.0,
    );
    let abstracted = abstract_log(
        &log,
        &grouping,
        AbstractionStrategy::CompletionOnly,
        None,
        SplitRule::default(),
    )
    .unwrap();
    for format in [LogFormat::Csv, LogFormat::Jsonl] {
        let reloaded = roundtrip(&abstracted, format);
        assert_eq!(abstracted, reloaded, "{format:?}");
        assert_eq!(reloaded.traces().len(), 4);
        // duration and event-count attributes survive the trip
        let first = &reloaded.traces()[0].events()[0];
        assert!(first.attrs.contains_key("duration"));
        assert!(first.attrs.contains_key("n_events"));
    }
}

#[test]
fn total_event_count_is_sum_of_trace_lengths() {
    let mut rng = common::rng(0x5eed_0302);
    for _ in 0..20 {
        let log = common::random_log(&mut rng, 8, true);
        let total: usize = log.traces().iter().map(Trace::len).sum();
        assert_eq!(log.event_count(), total);
        for trace in log.traces() {
            for event in trace.events() {
                assert!(log.classes().contains(&event.class));
            }
        }
    }
}
