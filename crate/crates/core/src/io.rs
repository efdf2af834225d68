//! Event log file ingestion and serialization (CSV and JSONL).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde_json::Value;

use crate::log::{AttributeValue, Event, EventLog, LogError, Trace};

/// Supported on-disk log formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    Csv,
    Jsonl,
}

impl LogFormat {
    /// Guess from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> LogFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") | Some("json") => LogFormat::Jsonl,
            _ => LogFormat::Csv,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            LogFormat::Csv => "csv",
            LogFormat::Jsonl => "jsonl",
        }
    }
}

/// Maps the required case/class/timestamp fields to column names.
#[derive(Debug, Clone)]
pub struct ColumnMap {
    pub case: String,
    pub class: String,
    pub time: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            case: "case".into(),
            class: "class".into(),
            time: "time".into(),
        }
    }
}

/// Loads an event log from a file. Rows are grouped into traces by the case
/// column; traces keep the input order of their first row.
pub fn load_log(path: &Path, format: LogFormat, columns: &ColumnMap) -> Result<EventLog, LogError> {
    let file = File::open(path)?;
    load_log_from_reader(BufReader::new(file), format, columns)
}

pub fn load_log_from_reader<R: Read>(
    reader: R,
    format: LogFormat,
    columns: &ColumnMap,
) -> Result<EventLog, LogError> {
    match format {
        LogFormat::Csv => load_csv(reader, columns),
        LogFormat::Jsonl => load_jsonl(reader, columns),
    }
}

/// Writes a log so that reloading it yields a structurally equal log.
/// Timestamps are normalized to epoch milliseconds.
pub fn write_log(log: &EventLog, path: &Path, format: LogFormat) -> Result<(), LogError> {
    let file = File::create(path)?;
    write_log_to_writer(log, BufWriter::new(file), format)
}

pub fn write_log_to_writer<W: Write>(
    log: &EventLog,
    writer: W,
    format: LogFormat,
) -> Result<(), LogError> {
    match format {
        LogFormat::Csv => write_csv(log, writer),
        LogFormat::Jsonl => write_jsonl(log, writer),
    }
}

fn parse_error(row: usize, message: impl Into<String>) -> LogError {
    LogError::Parse {
        row,
        message: message.into(),
    }
}

/// Accepts epoch milliseconds or ISO-8601 (offset or naive, naive read as UTC).
fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(ms) = raw.parse::<i64>() {
        return Some(ms);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp_millis());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Some(naive.and_utc().timestamp_millis());
        }
    }
    None
}

/// CSV cells are typed by inference: integer, then finite real, else string.
fn infer_value(raw: &str) -> AttributeValue {
    if let Ok(v) = raw.parse::<i64>() {
        return AttributeValue::Int(v);
    }
    if let Ok(v) = raw.parse::<f64>() {
        if v.is_finite() {
            return AttributeValue::Real(v);
        }
    }
    AttributeValue::Str(raw.to_string())
}

struct RowCollector {
    order: Vec<String>,
    events: BTreeMap<String, Vec<Event>>,
}

impl RowCollector {
    fn new() -> Self {
        RowCollector {
            order: Vec::new(),
            events: BTreeMap::new(),
        }
    }

    fn push(&mut self, case: String, event: Event) {
        if !self.events.contains_key(&case) {
            self.order.push(case.clone());
        }
        self.events.entry(case).or_default().push(event);
    }

    fn into_log(mut self) -> Result<EventLog, LogError> {
        if self.order.is_empty() {
            return Err(LogError::EmptyLog);
        }
        let mut traces = Vec::with_capacity(self.order.len());
        for case in self.order {
            let events = self.events.remove(&case).unwrap();
            traces.push(Trace::new(case, events)?);
        }
        EventLog::from_traces(traces)
    }
}

fn load_csv<R: Read>(reader: R, columns: &ColumnMap) -> Result<EventLog, LogError> {
    let mut csv = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(reader);
    let headers: Vec<String> = csv
        .headers()
        .map_err(|e| parse_error(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let case_idx = find(&columns.case)
        .ok_or_else(|| parse_error(1, format!("missing required column '{}'", columns.case)))?;
    let class_idx = find(&columns.class)
        .ok_or_else(|| parse_error(1, format!("missing required column '{}'", columns.class)))?;
    let time_idx = find(&columns.time)
        .ok_or_else(|| parse_error(1, format!("missing required column '{}'", columns.time)))?;

    let mut collector = RowCollector::new();
    for (i, record) in csv.records().enumerate() {
        let row = i + 2; // header is row 1
        let record = record.map_err(|e| parse_error(row, e.to_string()))?;
        let case = record
            .get(case_idx)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| parse_error(row, "empty case cell"))?
            .to_string();
        let class = record
            .get(class_idx)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| parse_error(row, "empty class cell"))?;
        let raw_time = record
            .get(time_idx)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| parse_error(row, "empty timestamp cell"))?;
        let ts = parse_timestamp(raw_time)
            .ok_or_else(|| parse_error(row, format!("unparseable timestamp '{raw_time}'")))?;
        let mut event = Event::new(class, ts);
        for (j, header) in headers.iter().enumerate() {
            if j == case_idx || j == class_idx || j == time_idx {
                continue;
            }
            if let Some(cell) = record.get(j) {
                if !cell.is_empty() {
                    event.attrs.insert(header.clone(), infer_value(cell));
                }
            }
        }
        collector.push(case, event);
    }
    collector.into_log()
}

fn json_to_attr(value: &Value) -> Option<AttributeValue> {
    match value {
        Value::String(s) => Some(AttributeValue::Str(s.clone())),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Some(AttributeValue::Int(i))
            } else {
                n.as_f64()
                    .filter(|v| v.is_finite())
                    .map(AttributeValue::Real)
            }
        }
        Value::Bool(b) => Some(AttributeValue::Str(b.to_string())),
        _ => None,
    }
}

fn load_jsonl<R: Read>(reader: R, columns: &ColumnMap) -> Result<EventLog, LogError> {
    let mut collector = RowCollector::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let row = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)
            .map_err(|e| parse_error(row, format!("invalid json: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| parse_error(row, "expected a json object"))?;
        let case = obj
            .get(&columns.case)
            .and_then(Value::as_str)
            .ok_or_else(|| parse_error(row, format!("missing required key '{}'", columns.case)))?
            .to_string();
        let class = obj
            .get(&columns.class)
            .and_then(Value::as_str)
            .ok_or_else(|| parse_error(row, format!("missing required key '{}'", columns.class)))?;
        let ts = match obj.get(&columns.time) {
            Some(Value::Number(n)) => n
                .as_i64()
                .or_else(|| n.as_f64().map(|v| v.round() as i64))
                .ok_or_else(|| parse_error(row, "unparseable timestamp"))?,
            Some(Value::String(s)) => parse_timestamp(s)
                .ok_or_else(|| parse_error(row, format!("unparseable timestamp '{s}'")))?,
            _ => {
                return Err(parse_error(
                    row,
                    format!("missing required key '{}'", columns.time),
                ))
            }
        };
        let mut event = Event::new(class, ts);
        for (k, v) in obj {
            if k == &columns.case || k == &columns.class || k == &columns.time {
                continue;
            }
            if let Some(attr) = json_to_attr(v) {
                event.attrs.insert(k.clone(), attr);
            }
        }
        collector.push(case, event);
    }
    collector.into_log()
}

fn write_csv<W: Write>(log: &EventLog, writer: W) -> Result<(), LogError> {
    let attr_names = log.attribute_names();
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["case".to_string(), "class".to_string(), "time".to_string()];
    header.extend(attr_names.iter().cloned());
    csv.write_record(&header).map_err(io_of_csv)?;
    for trace in log.traces() {
        for event in trace.events() {
            let mut record = vec![
                trace.id().to_string(),
                event.class.name().to_string(),
                event.timestamp.to_string(),
            ];
            for name in &attr_names {
                record.push(match event.attrs.get(name) {
                    Some(v) => v.to_string(),
                    None => String::new(),
                });
            }
            csv.write_record(&record).map_err(io_of_csv)?;
        }
    }
    csv.flush()?;
    Ok(())
}

fn io_of_csv(err: csv::Error) -> LogError {
    LogError::Io(std::io::Error::other(err))
}

fn attr_to_json(value: &AttributeValue) -> Value {
    match value {
        AttributeValue::Str(s) => Value::String(s.clone()),
        AttributeValue::Int(v) => Value::Number((*v).into()),
        AttributeValue::Real(v) => serde_json::Number::from_f64(*v)
            .map(Value::Number)
            .unwrap_or(Value::Null),
        AttributeValue::Timestamp(v) => Value::Number((*v).into()),
    }
}

fn write_jsonl<W: Write>(log: &EventLog, mut writer: W) -> Result<(), LogError> {
    for trace in log.traces() {
        for event in trace.events() {
            // BTreeMap keys with a leading fixed triple keeps output stable.
            let mut obj = serde_json::Map::new();
            obj.insert("case".into(), Value::String(trace.id().to_string()));
            obj.insert(
                "class".into(),
                Value::String(event.class.name().to_string()),
            );
            obj.insert("time".into(), Value::Number(event.timestamp.into()));
            for (k, v) in &event.attrs {
                obj.insert(k.clone(), attr_to_json(v));
            }
            serde_json::to_writer(&mut writer, &Value::Object(obj))
                .map_err(|e| LogError::Io(std::io::Error::other(e)))?;
            writer.write_all(b"\n")?;
        }
    }
    Ok(())
}
