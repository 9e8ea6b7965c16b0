//! Read a CSV event log and make the temporal 80/20 hold-out split.
//!
//! cargo run --example parse_and_split [-- path/to/log.csv]

use procsim::event_log::{read_log_file, temporal_split, ColumnMap};
use procsim::synth;

fn main() -> procsim::error::Result<()> {
    let log = match std::env::args().nth(1) {
        Some(path) => read_log_file(path, &ColumnMap::default())?,
        None => synth::loan_like(1),
    };
    println!(
        "{} cases, {} events, {} activities, {} resources",
        log.num_cases(),
        log.num_events(),
        log.activities().len(),
        log.resources().len()
    );
    let first = &log.traces()[0];
    println!("first case {}: {:?}", first.case_id, first.activities().collect::<Vec<_>>());

    let split = temporal_split(&log, 0.8)?;
    println!("separation instant {}", split.separation);
    println!(
        "train {} cases, test {} cases, {} straddling cases dropped",
        split.train.num_cases(),
        split.test.num_cases(),
        split.dropped.len()
    );
    Ok(())
}
