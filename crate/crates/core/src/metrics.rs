//! Distances between a reference log and a simulated log, and the resource
//! interaction matrix.
//!
//! Time-based distances are 1-Wasserstein distances in hours over the start
//! and end instants of every event.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::discovery::dummy_label;
use crate::distributions::wasserstein_1d;
use crate::error::{Error, Result};
use crate::event_log::EventLog;
use crate::time::HOUR;

const HOURS: f64 = HOUR as f64;

/// Distance charged for a weekday seen in only one of the two logs.
pub const MISSING_WEEKDAY_PENALTY: f64 = 24.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Token<'a> {
    Start,
    Activity(&'a str),
    End,
}

fn ngram_counts(log: &EventLog, n: usize) -> HashMap<Vec<Token<'_>>, i64> {
    let mut counts = HashMap::new();
    for trace in log.traces() {
        let padded: Vec<Token> = std::iter::repeat_n(Token::Start, n - 1)
            .chain(trace.events.iter().map(|e| Token::Activity(e.activity.as_str())))
            .chain([Token::End])
            .collect();
        for gram in padded.windows(n) {
            *counts.entry(gram.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

fn non_empty(real: &EventLog, sim: &EventLog) -> Result<()> {
    if real.is_empty() || sim.is_empty() {
        return Err(Error::EmptyLog);
    }
    Ok(())
}

/// n-gram distance: each trace gets `n - 1` start markers and one end marker;
/// the result is the summed absolute count difference over all n-grams divided
/// by the total n-gram count of both logs.
pub fn ngd(real: &EventLog, sim: &EventLog, n: usize) -> Result<f64> {
    non_empty(real, sim)?;
    if n < 2 {
        return Err(Error::Config(format!("n-gram size must be at least 2, got {n}")));
    }
    let a = ngram_counts(real, n);
    let b = ngram_counts(sim, n);
    let total: i64 = a.values().sum::<i64>() + b.values().sum::<i64>();
    let mut diff: i64 = a.iter().map(|(g, c)| (c - b.get(g).copied().unwrap_or(0)).abs()).sum();
    diff += b.iter().filter(|(g, _)| !a.contains_key(*g)).map(|(_, c)| c).sum::<i64>();
    Ok(diff as f64 / total as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventDistribution {
    /// Hours since the first instant of either log.
    Absolute,
    /// Hour of day, compared weekday by weekday.
    Circadian,
    /// Hours since the start of the event's case.
    Relative,
}

fn instants(log: &EventLog) -> impl Iterator<Item = i64> + '_ {
    log.events().flat_map(|e| [e.start.0, e.end.0])
}

fn relative_hours(log: &EventLog) -> Vec<f64> {
    log.traces()
        .iter()
        .flat_map(|t| {
            let origin = t.start().0;
            t.events.iter().flat_map(move |e| [e.start.0, e.end.0]).map(move |x| (x - origin) as f64 / HOURS)
        })
        .collect()
}

fn by_weekday(log: &EventLog) -> BTreeMap<u32, Vec<f64>> {
    let mut days: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for e in log.events() {
        for t in [e.start, e.end] {
            days.entry(t.weekday()).or_default().push(t.second_of_day() as f64 / HOURS);
        }
    }
    days
}

pub fn event_distribution_distance(real: &EventLog, sim: &EventLog, kind: EventDistribution) -> Result<f64> {
    non_empty(real, sim)?;
    match kind {
        EventDistribution::Absolute => {
            let origin = instants(real).chain(instants(sim)).min().expect("logs are non-empty");
            let hours = |log| instants(log).map(|x| (x - origin) as f64 / HOURS).collect::<Vec<_>>();
            wasserstein_1d(&hours(real), &hours(sim))
        }
        EventDistribution::Relative => wasserstein_1d(&relative_hours(real), &relative_hours(sim)),
        EventDistribution::Circadian => {
            let a = by_weekday(real);
            let b = by_weekday(sim);
            let mut total = 0.0;
            let mut days = 0;
            for day in 0..7 {
                let d = match (a.get(&day), b.get(&day)) {
                    (Some(x), Some(y)) => wasserstein_1d(x, y)?,
                    (None, None) => continue,
                    _ => MISSING_WEEKDAY_PENALTY,
                };
                total += d;
                days += 1;
            }
            Ok(total / days as f64)
        }
    }
}

fn cycle_hours(log: &EventLog) -> Vec<f64> {
    log.traces().iter().map(|t| t.cycle_time() as f64 / HOURS).collect()
}

/// Cycle-time distribution distance in hours.
pub fn ctd(real: &EventLog, sim: &EventLog) -> Result<f64> {
    non_empty(real, sim)?;
    wasserstein_1d(&cycle_hours(real), &cycle_hours(sim))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ngd: f64,
    pub aed: f64,
    pub ced: f64,
    pub red: f64,
    pub ctd: f64,
}

impl MetricsReport {
    pub fn evaluate(real: &EventLog, sim: &EventLog) -> Result<Self> {
        Self::evaluate_with(real, sim, 2)
    }

    pub fn evaluate_with(real: &EventLog, sim: &EventLog, ngram: usize) -> Result<Self> {
        Ok(MetricsReport {
            ngd: ngd(real, sim, ngram)?,
            aed: event_distribution_distance(real, sim, EventDistribution::Absolute)?,
            ced: event_distribution_distance(real, sim, EventDistribution::Circadian)?,
            red: event_distribution_distance(real, sim, EventDistribution::Relative)?,
            ctd: ctd(real, sim)?,
        })
    }

    pub fn values(&self) -> [f64; 5] {
        [self.ngd, self.aed, self.ced, self.red, self.ctd]
    }

    /// Arithmetic mean of the reports; `None` for an empty slice.
    pub fn mean(reports: &[MetricsReport]) -> Option<MetricsReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let sum = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        Some(MetricsReport {
            ngd: sum(|r| r.ngd),
            aed: sum(|r| r.aed),
            ced: sum(|r| r.ced),
            red: sum(|r| r.red),
            ctd: sum(|r| r.ctd),
        })
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "NGD {:>10.4}", self.ngd)?;
        writeln!(f, "AED {:>10.4} h", self.aed)?;
        writeln!(f, "CED {:>10.4} h", self.ced)?;
        writeln!(f, "RED {:>10.4} h", self.red)?;
        write!(f, "CTD {:>10.4} h", self.ctd)
    }
}

/// One labelled report per CSV row: `real,sim,ngd,aed,ced,red,ctd`.
pub fn write_reports_csv<W: Write>(sink: W, rows: &[(String, String, MetricsReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["real", "sim", "ngd", "aed", "ced", "red", "ctd"])?;
    for (real, sim, r) in rows {
        let mut record = vec![real.clone(), sim.clone()];
        record.extend(r.values().iter().map(|v| format!("{v:.6}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Handover counts between consecutive events of the same case.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionMatrix {
    pub labels: Vec<String>,
    /// `counts[from][to]`.
    pub counts: Vec<Vec<u64>>,
}

impl InteractionMatrix {
    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }

    pub fn get(&self, from: &str, to: &str) -> u64 {
        match (self.index(from), self.index(to)) {
            (Some(i), Some(j)) => self.counts[i][j],
            _ => 0,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(std::iter::once("from\\to").chain(self.labels.iter().map(String::as_str)))?;
        for (label, row) in self.labels.iter().zip(&self.counts) {
            w.write_record(std::iter::once(label.clone()).chain(row.iter().map(u64::to_string)))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn interaction_matrix(log: &EventLog) -> InteractionMatrix {
    let label = |e: &crate::event_log::Event| e.resource.clone().unwrap_or_else(|| dummy_label(&e.activity));
    let mut labels: Vec<String> = log.events().map(label).collect();
    labels.sort();
    labels.dedup();
    let mut m = InteractionMatrix { counts: vec![vec![0; labels.len()]; labels.len()], labels };
    for trace in log.traces() {
        for pair in trace.events.windows(2) {
            let i = m.index(&label(&pair[0])).expect("label collected");
            let j = m.index(&label(&pair[1])).expect("label collected");
            m.counts[i][j] += 1;
        }
    }
    m
}
