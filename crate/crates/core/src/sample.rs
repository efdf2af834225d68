//! A small request-handling sample log, used across tests, benchmarks, and
//! the command-line examples.
//!
//! Four cases of a request process: receipt (`rcp`), casual or thorough check
//! (`ckc`/`ckt`), managerial accept/reject (`acc`/`rej`), then prioritization
//! (`prio`), customer notification (`inf`), and archival (`arv`). Clerks
//! perform everything except `acc` and `rej`, which a manager performs. Case
//! `c4` is rejected once and restarts before being accepted.

use crate::log::{AttributeValue, Event, EventLog, Trace};

const CLERK: &str = "clerk";
const MANAGER: &str = "manager";

fn role_of(class: &str) -> &'static str {
    match class {
        "acc" | "rej" => MANAGER,
        _ => CLERK,
    }
}

const BASE_TS: i64 = 1_700_000_000_000;
const STEP_MS: i64 = 60_000;

fn trace(id: &str, offset: i64, classes: &[&str]) -> Trace {
    let events = classes
        .iter()
        .enumerate()
        .map(|(i, class)| {
            Event::new(*class, BASE_TS + offset + i as i64 * STEP_MS)
                .with_attr("role", AttributeValue::Str(role_of(class).into()))
        })
        .collect();
    Trace::new(id, events).expect("sample traces are non-empty")
}

/// The four-case request-handling log with a `role` attribute on every event.
pub fn request_handling_log() -> EventLog {
    let traces = vec![
        trace("c1", 0, &["rcp", "ckc", "acc", "prio", "inf", "arv"]),
        trace(
            "c2",
            3_600_000,
            &["rcp", "ckt", "rej", "prio", "arv", "inf"],
        ),
        trace("c3", 7_200_000, &["rcp", "ckc", "acc", "inf", "arv"]),
        trace(
            "c4",
            10_800_000,
            &[
                "rcp", "ckc", "rej", "rcp", "ckt", "acc", "prio", "arv", "inf",
            ],
        ),
    ];
    EventLog::from_traces(traces).expect("sample log is valid")
}

/// The same log as CSV text, for exercising the file interface.
pub fn request_handling_csv() -> String {
    let mut out = String::from("case,class,time,role\n");
    for trace in request_handling_log().traces() {
        for event in trace.events() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                trace.id(),
                event.class.name(),
                event.timestamp,
                role_of(event.class.name()),
            ));
        }
    }
    out
}

/// The constraint keeping each activity within one employee role.
pub const SINGLE_ROLE_CONSTRAINT: &str = "instance distinct(role) <= 1\n";
