//! Global simulation parameters: case inter-arrival times and extraneous
//! delays.

use std::collections::BTreeMap;

use super::agents::AgentRoster;
use super::schedule::Schedule;
use crate::distributions::{fit_distribution, FittedDistribution};
use crate::error::{Error, Result};
use crate::event_log::EventLog;
use crate::time::Timestamp;

/// Fits the gaps between consecutive case starts.
pub fn discover_interarrival(log: &EventLog) -> Result<FittedDistribution> {
    if log.num_cases() < 2 {
        return Err(Error::Split("inter-arrival times need at least 2 cases".into()));
    }
    let starts: Vec<i64> = log.traces().iter().map(|t| t.start().0).collect();
    let gaps: Vec<f64> = starts.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    fit_distribution(&gaps)
}

/// Sorted, disjoint busy intervals.
#[derive(Clone, Debug, Default)]
pub(crate) struct BusyIntervals(Vec<(i64, i64)>);

impl BusyIntervals {
    pub(crate) fn from_unsorted(mut spans: Vec<(i64, i64)>) -> Self {
        spans.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(spans.len());
        for (s, e) in spans {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        BusyIntervals(merged)
    }

    /// Seconds of `[from, to)` covered by busy intervals.
    pub(crate) fn overlap(&self, from: i64, to: i64) -> i64 {
        let first = self.0.partition_point(|&(_, e)| e <= from);
        self.0[first..]
            .iter()
            .take_while(|&&(s, _)| s < to)
            .map(|&(s, e)| e.min(to) - s.max(from))
            .filter(|d| *d > 0)
            .sum()
    }
}

/// Seconds of `[from, to)` that are on shift and not busy.
fn unexplained_wait(schedule: &Schedule, busy: &BusyIntervals, from: i64, to: i64) -> i64 {
    let mut idle = 0;
    let mut t = Timestamp(from);
    while t.0 < to {
        if !schedule.is_working(t) {
            match schedule.next_working(t) {
                Some(n) if n > t => t = n,
                _ => break,
            }
            continue;
        }
        let seg_end = schedule.working_until(t).map_or(to, |u| u.0.min(to));
        idle += (seg_end - t.0) - busy.overlap(t.0, seg_end);
        t = Timestamp(seg_end);
    }
    idle
}

/// Waiting time before each activity that neither resource contention nor
/// the resource's schedule explains. An activity gets a delay distribution
/// when more than `min_fraction` of its non-initial events show such a wait.
///
/// `schedules` is indexed by agent id. Dummy agents have unlimited capacity,
/// so their whole wait counts as extraneous.
pub fn discover_extraneous_delays(
    log: &EventLog,
    roster: &AgentRoster,
    schedules: &[Schedule],
    min_fraction: f64,
) -> Result<BTreeMap<String, FittedDistribution>> {
    let mut spans: Vec<Vec<(i64, i64)>> = vec![Vec::new(); roster.len()];
    for e in log.events() {
        if let Some(agent) = roster.agent_of(e) {
            if !roster.agents()[agent].is_dummy {
                spans[agent].push((e.start.0, e.end.0));
            }
        }
    }
    let busy: Vec<BusyIntervals> = spans.into_iter().map(BusyIntervals::from_unsorted).collect();

    // activity -> (non-initial occurrences, positive residuals)
    let mut stats: BTreeMap<&str, (usize, Vec<f64>)> = BTreeMap::new();
    for trace in log.traces() {
        for pair in trace.events.windows(2) {
            let (prev, event) = (&pair[0], &pair[1]);
            let entry = stats.entry(event.activity.as_str()).or_default();
            entry.0 += 1;
            let enabled = prev.end.0;
            if event.start.0 <= enabled {
                continue;
            }
            let Some(agent) = roster.agent_of(event) else { continue };
            let residual = if roster.agents()[agent].is_dummy {
                event.start.0 - enabled
            } else {
                unexplained_wait(&schedules[agent], &busy[agent], enabled, event.start.0)
            };
            if residual > 0 {
                entry.1.push(residual as f64);
            }
        }
    }

    let mut delays = BTreeMap::new();
    for (activity, (occurrences, residuals)) in stats {
        if occurrences > 0 && residuals.len() as f64 / occurrences as f64 > min_fraction {
            delays.insert(activity.to_string(), fit_distribution(&residuals)?);
        }
    }
    Ok(delays)
}
