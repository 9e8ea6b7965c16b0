//! Event logs: parsing, canonical ordering, temporal splitting and CSV output.
//!
//! A log is a multiset of traces. Each trace holds the events of one case,
//! ordered by start time, then end time, then activity label. Traces
//! themselves are kept in order of their first start (ties by case id), so two
//! logs holding the same events compare equal regardless of input row order.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Timestamp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    pub start: Timestamp,
    pub end: Timestamp,
    pub resource: Option<String>,
}

impl Event {
    pub fn duration(&self) -> i64 {
        self.end - self.start
    }

    fn order_key(&self) -> (Timestamp, Timestamp, &str) {
        (self.start, self.end, self.activity.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    /// Builds a trace and sorts its events into canonical order.
    pub fn new(case_id: impl Into<String>, mut events: Vec<Event>) -> Self {
        events.sort_by(|a, b| a.order_key().cmp(&b.order_key()));
        Trace { case_id: case_id.into(), events }
    }

    pub fn start(&self) -> Timestamp {
        self.events.first().map(|e| e.start).unwrap_or(Timestamp(0))
    }

    /// Latest end timestamp of any event in the case.
    pub fn end(&self) -> Timestamp {
        self.events.iter().map(|e| e.end).max().unwrap_or(Timestamp(0))
    }

    pub fn cycle_time(&self) -> i64 {
        self.end() - self.start()
    }

    pub fn activities(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.activity.as_str())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventLog {
    traces: Vec<Trace>,
    activities: BTreeSet<String>,
    resources: BTreeSet<String>,
}

impl EventLog {
    pub fn from_traces(traces: impl IntoIterator<Item = Trace>) -> Self {
        let mut traces: Vec<Trace> = traces.into_iter().filter(|t| !t.is_empty()).collect();
        traces.sort_by(|a, b| (a.start(), &a.case_id).cmp(&(b.start(), &b.case_id)));
        let mut activities = BTreeSet::new();
        let mut resources = BTreeSet::new();
        for event in traces.iter().flat_map(|t| &t.events) {
            activities.insert(event.activity.clone());
            if let Some(r) = &event.resource {
                resources.insert(r.clone());
            }
        }
        EventLog { traces, activities, resources }
    }

    /// Groups events by case id.
    pub fn from_events(events: impl IntoIterator<Item = Event>) -> Self {
        let mut cases: BTreeMap<String, Vec<Event>> = BTreeMap::new();
        for event in events {
            cases.entry(event.case_id.clone()).or_default().push(event);
        }
        Self::from_traces(cases.into_iter().map(|(id, events)| Trace::new(id, events)))
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn into_traces(self) -> Vec<Trace> {
        self.traces
    }

    pub fn activities(&self) -> &BTreeSet<String> {
        &self.activities
    }

    pub fn resources(&self) -> &BTreeSet<String> {
        &self.resources
    }

    pub fn num_cases(&self) -> usize {
        self.traces.len()
    }

    pub fn num_events(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.traces.iter().flat_map(|t| &t.events)
    }

    /// Earliest start over all events.
    pub fn first_start(&self) -> Option<Timestamp> {
        self.traces.first().map(Trace::start)
    }

    pub fn last_end(&self) -> Option<Timestamp> {
        self.traces.iter().map(Trace::end).max()
    }

    /// Moves every timestamp by `seconds`.
    pub fn shifted(&self, seconds: i64) -> EventLog {
        let traces = self.traces.iter().map(|t| Trace {
            case_id: t.case_id.clone(),
            events: t
                .events
                .iter()
                .map(|e| Event { start: e.start + seconds, end: e.end + seconds, ..e.clone() })
                .collect(),
        });
        EventLog::from_traces(traces)
    }
}

/// Names of the five columns read from a CSV log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub case: String,
    pub activity: String,
    pub start: String,
    pub end: String,
    pub resource: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            case: "case_id".into(),
            activity: "activity".into(),
            start: "start_time".into(),
            end: "end_time".into(),
            resource: "resource".into(),
        }
    }
}

pub fn parse_log<R: Read>(source: R, columns: &ColumnMap) -> Result<EventLog> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let case_ix = find(&columns.case)?;
    let act_ix = find(&columns.activity)?;
    let start_ix = find(&columns.start)?;
    let end_ix = find(&columns.end)?;
    let res_ix = find(&columns.resource)?;

    let mut events = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::row(row, e.to_string()))?;
        let field = |ix: usize| record.get(ix).unwrap_or("");
        let activity = field(act_ix);
        if activity.is_empty() {
            return Err(Error::row(row, "empty activity"));
        }
        let stamp = |ix: usize| {
            Timestamp::parse(field(ix))
                .ok_or_else(|| Error::row(row, format!("unparseable timestamp '{}'", field(ix))))
        };
        let start = stamp(start_ix)?;
        let end = stamp(end_ix)?;
        if end < start {
            return Err(Error::row(row, "end timestamp precedes start timestamp"));
        }
        let resource = field(res_ix);
        events.push(Event {
            case_id: field(case_ix).to_string(),
            activity: activity.to_string(),
            start,
            end,
            resource: (!resource.is_empty()).then(|| resource.to_string()),
        });
    }
    Ok(EventLog::from_events(events))
}

pub fn read_log_file(path: impl AsRef<std::path::Path>, columns: &ColumnMap) -> Result<EventLog> {
    let file = std::fs::File::open(path)?;
    parse_log(std::io::BufReader::new(file), columns)
}

/// Writes `case_id,activity,start_time,end_time,resource` rows, one trace
/// after another in canonical order.
pub fn write_log<W: Write>(log: &EventLog, sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(["case_id", "activity", "start_time", "end_time", "resource"])?;
    for event in log.events() {
        writer.write_record([
            event.case_id.as_str(),
            event.activity.as_str(),
            &event.start.to_string(),
            &event.end.to_string(),
            event.resource.as_deref().unwrap_or(""),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_log_file(log: &EventLog, path: impl AsRef<std::path::Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_log(log, std::io::BufWriter::new(file))
}

#[derive(Clone, Debug)]
pub struct TemporalSplit {
    pub train: EventLog,
    pub test: EventLog,
    pub dropped: Vec<String>,
    pub separation: Timestamp,
}

/// Hold-out split on case start order. Cases that straddle the separation
/// instant belong to neither side.
pub fn temporal_split(log: &EventLog, train_fraction: f64) -> Result<TemporalSplit> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let n = log.num_cases();
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 cases to split, got {n}")));
    }
    // Traces are already sorted by (first start, case id).
    let position = ((train_fraction * n as f64) - 1e-9).ceil() as usize;
    let position = position.clamp(1, n - 1);
    let separation = log.traces()[position].start();

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut dropped = Vec::new();
    for trace in log.traces() {
        if trace.end() < separation {
            train.push(trace.clone());
        } else if trace.start() >= separation {
            test.push(trace.clone());
        } else {
            dropped.push(trace.case_id.clone());
        }
    }
    Ok(TemporalSplit {
        train: EventLog::from_traces(train),
        test: EventLog::from_traces(test),
        dropped,
        separation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "case_id,activity,start_time,end_time,resource\n";

    fn parse(text: &str) -> Result<EventLog> {
        parse_log(text.as_bytes(), &ColumnMap::default())
    }

    #[test]
    fn header_only_is_empty() {
        let log = parse(HEADER).unwrap();
        assert!(log.is_empty());
        assert!(log.activities().is_empty());
    }

    #[test]
    fn events_sorted_by_start() {
        let csv = format!(
            "{HEADER}c1,a,2024-01-01T09:00:00Z,2024-01-01T09:10:00Z,r1\n\
             c1,b,2024-01-01T10:00:00Z,2024-01-01T10:10:00Z,r1\n\
             c1,c,2024-01-01T08:00:00Z,2024-01-01T08:10:00Z,r2\n"
        );
        let log = parse(&csv).unwrap();
        assert_eq!(log.num_cases(), 1);
        let acts: Vec<_> = log.traces()[0].activities().collect();
        assert_eq!(acts, ["c", "a", "b"]);
    }

    #[test]
    fn ties_broken_by_end_then_label() {
        let csv = format!(
            "{HEADER}c1,z,2024-01-01T09:00:00Z,2024-01-01T09:30:00Z,r\n\
             c1,y,2024-01-01T09:00:00Z,2024-01-01T09:10:00Z,r\n\
             c1,x,2024-01-01T09:00:00Z,2024-01-01T09:30:00Z,r\n"
        );
        let log = parse(&csv).unwrap();
        let acts: Vec<_> = log.traces()[0].activities().collect();
        assert_eq!(acts, ["y", "x", "z"]);
    }

    #[test]
    fn missing_end_column() {
        let csv = "case_id,activity,start_time,resource\nc1,a,2024-01-01T09:00:00Z,r\n";
        match parse(csv) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "end_time"),
            other => panic!("expected missing column, got {other:?}"),
        }
    }

    #[test]
    fn bad_timestamp_reports_row() {
        let csv = format!(
            "{HEADER}c1,a,2024-01-01T09:00:00Z,2024-01-01T09:10:00Z,r\n\
             c1,b,not-a-date,2024-01-01T09:10:00Z,r\n"
        );
        match parse(&csv) {
            Err(Error::Row { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn end_before_start_reports_row() {
        let csv = format!("{HEADER}c1,a,2024-01-01T09:00:00Z,2024-01-01T08:00:00Z,r\n");
        assert!(matches!(parse(&csv), Err(Error::Row { row: 1, .. })));
    }

    #[test]
    fn missing_resource_kept() {
        let csv = format!("{HEADER}c1,a,2024-01-01T09:00:00Z,2024-01-01T09:00:00Z,\n");
        let log = parse(&csv).unwrap();
        assert_eq!(log.traces()[0].events[0].resource, None);
        assert!(log.resources().is_empty());
    }

    #[test]
    fn custom_columns() {
        let csv = "Case,Task,Begin,Finish,Who\n7,a,2024-01-01 09:00:00,2024-01-01 09:05:00,ann\n";
        let columns = ColumnMap {
            case: "Case".into(),
            activity: "Task".into(),
            start: "Begin".into(),
            end: "Finish".into(),
            resource: "Who".into(),
        };
        let log = parse_log(csv.as_bytes(), &columns).unwrap();
        assert_eq!(log.traces()[0].events[0].resource.as_deref(), Some("ann"));
        assert_eq!(log.traces()[0].events[0].duration(), 300);
    }

    #[test]
    fn empty_log_writes_header_only() {
        let mut out = Vec::new();
        write_log(&EventLog::default(), &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), HEADER);
    }

    fn sequential_cases(n: usize) -> Vec<Trace> {
        (0..n)
            .map(|i| {
                let start = Timestamp(1_704_099_600 + i as i64 * 3600);
                Trace::new(
                    format!("c{i:02}"),
                    vec![Event {
                        case_id: format!("c{i:02}"),
                        activity: "a".into(),
                        start,
                        end: start + 600,
                        resource: Some("r".into()),
                    }],
                )
            })
            .collect()
    }

    #[test]
    fn split_without_straddlers() {
        let log = EventLog::from_traces(sequential_cases(10));
        let split = temporal_split(&log, 0.8).unwrap();
        assert_eq!(split.train.num_cases(), 8);
        assert_eq!(split.test.num_cases(), 2);
        assert!(split.dropped.is_empty());
    }

    #[test]
    fn split_drops_straddling_case() {
        let mut traces = sequential_cases(10);
        // Case 7 now runs past the start of case 8 (the separation instant).
        traces[7].events[0].end = traces[8].events[0].start + 60;
        let log = EventLog::from_traces(traces);
        let split = temporal_split(&log, 0.8).unwrap();
        assert_eq!(split.train.num_cases(), 7);
        assert_eq!(split.test.num_cases(), 2);
        assert_eq!(split.dropped, ["c07"]);
    }

    #[test]
    fn split_needs_two_cases() {
        let log = EventLog::from_traces(sequential_cases(1));
        assert!(temporal_split(&log, 0.8).is_err());
        let log = EventLog::from_traces(sequential_cases(2));
        let split = temporal_split(&log, 0.8).unwrap();
        assert_eq!((split.train.num_cases(), split.test.num_cases()), (1, 1));
    }
}
