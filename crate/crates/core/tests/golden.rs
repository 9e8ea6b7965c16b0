use procsim::event_log::{parse_log, read_log_file, write_log, ColumnMap, Event, EventLog};
use procsim::time::Timestamp;

const GOLDEN: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/two_events.golden.csv");
const MESSY: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/two_events.messy.csv");

fn two_events() -> EventLog {
    let at = |s: &str| Timestamp::parse(s).unwrap();
    EventLog::from_events([
        Event {
            case_id: "A1".into(),
            activity: "Review, final".into(),
            start: at("2024-03-04T10:00:00Z"),
            end: at("2024-03-04T11:15:00Z"),
            resource: None,
        },
        Event {
            case_id: "A1".into(),
            activity: "Register".into(),
            start: at("2024-03-04T09:00:00Z"),
            end: at("2024-03-04T09:30:00Z"),
            resource: Some("Ann".into()),
        },
    ])
}

fn written(log: &EventLog) -> Vec<u8> {
    let mut buf = Vec::new();
    write_log(log, &mut buf).unwrap();
    buf
}

#[test]
fn serialization_matches_golden_file() {
    assert_eq!(written(&two_events()), std::fs::read(GOLDEN).unwrap());
}

#[test]
fn golden_file_parses_back() {
    assert_eq!(read_log_file(GOLDEN, &ColumnMap::default()).unwrap(), two_events());
}

#[test]
fn messy_input_normalizes_to_golden() {
    let log = read_log_file(MESSY, &ColumnMap::default()).unwrap();
    assert_eq!(written(&log), std::fs::read(GOLDEN).unwrap());
}

#[test]
fn header_only_is_empty() {
    let log = parse_log("case_id,activity,start_time,end_time,resource\n".as_bytes(), &ColumnMap::default()).unwrap();
    assert!(log.is_empty());
    assert!(log.activities().is_empty());
    assert_eq!(written(&log), b"case_id,activity,start_time,end_time,resource\n");
}
