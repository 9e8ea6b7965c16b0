//! Brute-force reference implementations shared by the integration tests.
//! They work on labels and plain loops, never on the library's indexes.
#![allow(dead_code)]

use std::collections::BTreeMap;

use procsim::discovery::{
    discover_handover_matrix, discover_transition_model, AgentRoster, IndexedLog, Mas, Next, TransitionMode,
    TransitionModel, TransitionRow,
};
use procsim::event_log::EventLog;

pub type Counts = BTreeMap<Option<String>, u64>;
pub type Key = (Vec<String>, Option<String>);

/// Actor label: resource, or `dummy:<activity>` when missing.
pub fn actor(e: &procsim::event_log::Event) -> String {
    e.resource.clone().unwrap_or_else(|| format!("dummy:{}", e.activity))
}

fn labelled(log: &EventLog) -> Vec<Vec<(String, String)>> {
    log.traces()
        .iter()
        .map(|t| t.events.iter().map(|e| (e.activity.clone(), actor(e))).collect())
        .collect()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn reduce(num: u64, den: u64) -> (u64, u64) {
    let g = gcd(num, den).max(1);
    (num / g, den / g)
}

/// Full-prefix transition counts. Global keys have no actor and include the
/// empty prefix; local keys carry the actor of the prefix's last event.
pub fn brute_transitions(log: &EventLog, local: bool) -> BTreeMap<Key, Counts> {
    let mut table: BTreeMap<Key, Counts> = BTreeMap::new();
    for trace in labelled(log) {
        let first = if local { 1 } else { 0 };
        for k in first..=trace.len() {
            let prefix: Vec<String> = trace[..k].iter().map(|(a, _)| a.clone()).collect();
            let who = if local { Some(trace[k - 1].1.clone()) } else { None };
            let next = trace.get(k).map(|(a, _)| a.clone());
            *table.entry((prefix, who)).or_default().entry(next).or_insert(0) += 1;
        }
    }
    table
}

/// Distribution used for an arbitrary prefix: the exact prefix if some case
/// starts with it, else the longest suffix (possibly the whole prefix) seen
/// as a contiguous window
/// anywhere (with matching last actor in local mode), else in global mode
/// the first-activity distribution. `None` when nothing applies.
pub fn brute_backoff(log: &EventLog, prefix: &[&str], who: Option<&str>) -> Option<Counts> {
    let traces = labelled(log);
    let local = who.is_some();
    let matches_actor = |t: &[(String, String)], last: usize| who.is_none_or(|w| t[last].1 == w);

    // Exact prefix from the case start.
    let mut exact = Counts::new();
    if !prefix.is_empty() || !local {
        for t in &traces {
            let m = prefix.len();
            if t.len() >= m && t[..m].iter().zip(prefix).all(|((a, _), p)| a == p) && (m == 0 || matches_actor(t, m - 1)) {
                *exact.entry(t.get(m).map(|(a, _)| a.clone())).or_insert(0) += 1;
            }
        }
    }
    if !exact.is_empty() {
        return Some(exact);
    }
    for drop in 0..=prefix.len() {
        let suffix = &prefix[drop..];
        if suffix.is_empty() {
            break;
        }
        let m = suffix.len();
        let mut counts = Counts::new();
        for t in &traces {
            for i in 0..t.len() {
                if i + m <= t.len()
                    && t[i..i + m].iter().zip(suffix).all(|((a, _), p)| a == p)
                    && matches_actor(t, i + m - 1)
                {
                    *counts.entry(t.get(i + m).map(|(a, _)| a.clone())).or_insert(0) += 1;
                }
            }
        }
        if !counts.is_empty() {
            return Some(counts);
        }
    }
    if local {
        return None;
    }
    let mut first = Counts::new();
    for t in &traces {
        if let Some((a, _)) = t.first() {
            *first.entry(Some(a.clone())).or_insert(0) += 1;
        }
    }
    (!first.is_empty()).then_some(first)
}

/// Consecutive-pair actor counts, self pairs included.
pub fn brute_handover(log: &EventLog) -> BTreeMap<String, BTreeMap<String, u64>> {
    let mut m: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for t in labelled(log) {
        for pair in t.windows(2) {
            *m.entry(pair[0].1.clone()).or_default().entry(pair[1].1.clone()).or_insert(0) += 1;
        }
    }
    m
}

fn agent_id(roster: &AgentRoster, label: &str) -> usize {
    match label.strip_prefix("dummy:") {
        Some(act) => roster.dummy_for(act),
        None => roster.resource(label),
    }
    .unwrap_or_else(|| panic!("no agent for {label}"))
}

fn next_label(index: &IndexedLog, next: Next) -> Option<String> {
    match next {
        Next::Activity(a) => Some(index.activities[a].clone()),
        Next::End => None,
    }
}

/// Compares a library row with reference counts as reduced fractions.
fn same_distribution(index: &IndexedLog, row: &TransitionRow, expected: &Counts, what: &str) -> Result<(), String> {
    let total: u64 = expected.values().sum();
    let mut got = BTreeMap::new();
    for (&next, &c) in row.counts() {
        got.insert(next_label(index, next), reduce(c, row.total()));
    }
    let want: BTreeMap<Option<String>, (u64, u64)> = expected.iter().map(|(k, &c)| (k.clone(), reduce(c, total))).collect();
    if got != want {
        return Err(format!("{what}: library {got:?} vs brute force {want:?}"));
    }
    Ok(())
}

fn ids(index: &IndexedLog, labels: &[String]) -> Option<Vec<usize>> {
    labels.iter().map(|l| index.activity_id(l)).collect()
}

/// Every full-prefix row of both transition modes matches the reference.
pub fn check_transition_tables(log: &EventLog) -> Result<usize, String> {
    let index = IndexedLog::new(log);
    let mut checked = 0;
    for (mode, local) in [(TransitionMode::Global, false), (TransitionMode::Local, true)] {
        let model = discover_transition_model(log, mode);
        for ((prefix, who), counts) in brute_transitions(log, local) {
            let p = ids(&index, &prefix).expect("known activities");
            let agent = who.as_deref().map(|w| agent_id(&index.roster, w));
            let row = model.prefix_row(&p, agent).ok_or_else(|| format!("{mode:?}: missing row for {prefix:?}/{who:?}"))?;
            same_distribution(&index, row, &counts, &format!("{mode:?} {prefix:?} {who:?}"))?;
            checked += 1;
        }
    }
    Ok(checked)
}

/// Lookups for every sequence over the log's activities (plus one unseen
/// label) up to `max_len`, in both modes and for every actor.
pub fn check_backoff(log: &EventLog, max_len: usize) -> Result<usize, String> {
    let index = IndexedLog::new(log);
    let global = discover_transition_model(log, TransitionMode::Global);
    let local = discover_transition_model(log, TransitionMode::Local);
    let mut alphabet: Vec<String> = index.activities.clone();
    alphabet.push("never seen".into());
    let mut sequences: Vec<Vec<String>> = vec![vec![]];
    let mut frontier: Vec<Vec<String>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for a in &alphabet {
                let mut t = s.clone();
                t.push(a.clone());
                next.push(t);
            }
        }
        sequences.extend(next.iter().cloned());
        frontier = next;
    }
    let actors: Vec<String> = index.roster.agents().iter().map(|a| a.name.clone()).collect();
    let mut checked = 0;
    for seq in &sequences {
        let refs: Vec<&str> = seq.iter().map(String::as_str).collect();
        // Unknown labels map to an id no window can contain.
        let p: Vec<usize> = seq.iter().map(|l| index.activity_id(l).unwrap_or(usize::MAX)).collect();
        let mut cases: Vec<(&TransitionModel, Option<&str>)> = vec![(&global, None)];
        if !seq.is_empty() {
            cases.extend(actors.iter().map(|a| (&local, Some(a.as_str()))));
        }
        for (model, who) in cases {
            let expected = brute_backoff(log, &refs, who);
            let agent = who.map(|w| agent_id(&index.roster, w));
            match (model.lookup(&p, agent), expected) {
                (Ok(row), Some(counts)) => same_distribution(&index, row, &counts, &format!("lookup {seq:?} {who:?}"))?,
                (Err(_), None) => {}
                (Ok(_), None) => return Err(format!("lookup {seq:?} {who:?}: library found a row, reference none")),
                (Err(e), Some(_)) => return Err(format!("lookup {seq:?} {who:?}: library error {e}")),
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn check_handover(log: &EventLog) -> Result<usize, String> {
    let index = IndexedLog::new(log);
    let m = discover_handover_matrix(log);
    let brute = brute_handover(log);
    let mut checked = 0;
    for from in index.roster.agents() {
        let row = brute.get(&from.name);
        let total: u64 = row.map_or(0, |r| r.values().sum());
        for to in index.roster.agents() {
            let c = row.and_then(|r| r.get(&to.name)).copied().unwrap_or(0);
            let got = reduce(m.count(from.id, to.id), m.outgoing(from.id).max(1));
            let want = reduce(c, total.max(1));
            if got != want || (m.outgoing(from.id) == 0) != (total == 0) {
                return Err(format!("P({} | {}): library {got:?} vs brute force {want:?}", to.name, from.name));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// `P(to | from)` of the discovered handover matrix, by label.
pub fn handover_probability(log: &EventLog, from: &str, to: &str) -> f64 {
    let index = IndexedLog::new(log);
    let m = discover_handover_matrix(log);
    m.probability(agent_id(&index.roster, from), agent_id(&index.roster, to))
}

/// Exact 1-Wasserstein distance by integrating |F - G| between all merged
/// breakpoints, each CDF evaluated by counting: quadratic, no sorting tricks.
pub fn brute_w1(a: &[f64], b: &[f64]) -> f64 {
    let mut points: Vec<f64> = a.iter().chain(b).copied().collect();
    points.sort_by(f64::total_cmp);
    let cdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    points.windows(2).map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0])).sum()
}

/// Optimal matching over all permutations, for equal small sizes.
pub fn permutation_w1(a: &[f64], b: &[f64]) -> f64 {
    fn rec(a: &[f64], b: &mut Vec<f64>, k: usize, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if k == a.len() {
            *best = acc;
            return;
        }
        for i in k..b.len() {
            b.swap(k, i);
            rec(a, b, k + 1, acc + (a[k] - b[k]).abs(), best);
            b.swap(k, i);
        }
    }
    let mut best = f64::INFINITY;
    rec(a, &mut b.to_vec(), 0, 0.0, &mut best);
    best / a.len() as f64
}

/// Checks capability, non-overlap and timestamp order on a simulated log,
/// and that each case outside `truncated` has positive probability under
/// the model.
pub fn check_simulated_log(
    mas: &Mas,
    log: &EventLog,
    architecture: procsim::discovery::Architecture,
    truncated: &[String],
) -> Result<(), String> {
    let mut spans: BTreeMap<String, Vec<(i64, i64)>> = BTreeMap::new();
    for e in log.events() {
        if e.end < e.start {
            return Err(format!("{}: end before start", e.case_id));
        }
        let agent = match &e.resource {
            Some(r) => mas.agent_by_name(r),
            None => mas.agents.iter().find(|a| a.dummy_activity.as_deref() == Some(e.activity.as_str())),
        }
        .ok_or_else(|| format!("{}: unknown performer", e.case_id))?;
        if !agent.capabilities.alloc.contains(&e.activity) {
            return Err(format!("{} cannot perform {}", agent.name, e.activity));
        }
        if !agent.is_dummy {
            spans.entry(agent.name.clone()).or_default().push((e.start.0, e.end.0));
        }
    }
    for (name, s) in &mut spans {
        s.sort();
        if let Some(w) = s.windows(2).find(|w| w[0].1 > w[1].0) {
            return Err(format!("{name} double-booked: {:?} and {:?}", w[0], w[1]));
        }
    }
    for t in log.traces().iter().filter(|t| !truncated.contains(&t.case_id)) {
        let p = procsim::simulation::replay_log_probability(mas, architecture, t).map_err(|e| e.to_string())?;
        if p == f64::NEG_INFINITY {
            return Err(format!("{} has zero replay probability", t.case_id));
        }
    }
    Ok(())
}
