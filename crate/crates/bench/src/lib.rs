//! Synthetic log generation shared by the benchmarks.

use logabs_core::{Event, EventLog, Trace};

/// A log of `traces` traces over `classes` classes, each trace a rotation of
/// the class alphabet so every class pair eventually directly follows.
pub fn rotating_log(classes: usize, traces: usize, trace_len: usize) -> EventLog {
    let names: Vec<String> = (0..classes).map(|i| format!("c{i:02}")).collect();
    let built = (0..traces)
        .map(|t| {
            let events = (0..trace_len)
                .map(|j| Event::new(names[(t + j) % classes].as_str(), j as i64 * 1000))
                .collect();
            Trace::new(format!("t{t}"), events).expect("non-empty")
        })
        .collect();
    EventLog::from_traces(built).expect("valid")
}
