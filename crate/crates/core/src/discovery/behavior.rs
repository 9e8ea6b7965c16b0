//! Agent behaviour: next-activity transition tables and handover
//! probabilities.
//!
//! Transition tables keep exact counts. Two tables are held:
//!
//! * `anchored`: activity prefixes measured from the start of a case; these
//!   are the frequentist `P(next | prefix)` (or `P(next | prefix, actor)`).
//! * `contexts`: every contiguous activity window observed anywhere in a
//!   case. When a full prefix was never seen, lookup drops its oldest
//!   activity repeatedly and consults this table until a window matches.
//!
//! In local mode every key also carries the actor of the window's last
//! event: the agent id, or its type id when behaviour is shared per type.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::agents::{ActivityId, AgentId, IndexedLog};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Next {
    Activity(ActivityId),
    End,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransitionRow {
    counts: BTreeMap<Next, u64>,
    total: u64,
}

impl TransitionRow {
    fn add(&mut self, next: Next) {
        *self.counts.entry(next).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn count(&self, next: Next) -> u64 {
        self.counts.get(&next).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<Next, u64> {
        &self.counts
    }

    pub fn probability(&self, next: Next) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(next) as f64 / self.total as f64
        }
    }

    pub fn probabilities(&self) -> impl Iterator<Item = (Next, f64)> + '_ {
        self.counts.iter().map(|(n, c)| (*n, *c as f64 / self.total as f64))
    }

    /// Draws by walking the counts in key order with one integer draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Next {
        let mut r = rng.random_range(0..self.total);
        for (next, &c) in &self.counts {
            if r < c {
                return *next;
            }
            r -= c;
        }
        unreachable!("row counts sum to total")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionMode {
    Global,
    Local,
}

type Key = (Vec<ActivityId>, Option<usize>);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransitionModelFile", into = "TransitionModelFile")]
pub struct TransitionModel {
    mode: TransitionMode,
    /// Agent id -> behaviour key, when local behaviour is shared per type.
    actor_types: Option<Vec<usize>>,
    max_prefix_len: Option<usize>,
    anchored: HashMap<Key, TransitionRow>,
    contexts: HashMap<Key, TransitionRow>,
}

impl TransitionModel {
    /// Counts transitions in `index`. `actor_types` switches local mode to
    /// per-type behaviour; it is ignored in global mode.
    pub fn discover(
        index: &IndexedLog,
        mode: TransitionMode,
        actor_types: Option<Vec<usize>>,
        max_prefix_len: Option<usize>,
    ) -> Self {
        let actor_types = match mode {
            TransitionMode::Global => None,
            TransitionMode::Local => actor_types,
        };
        let mut model = TransitionModel {
            mode,
            actor_types,
            max_prefix_len,
            anchored: HashMap::new(),
            contexts: HashMap::new(),
        };
        let cap = max_prefix_len.unwrap_or(usize::MAX);
        for trace in &index.traces {
            let acts: Vec<ActivityId> = trace.iter().map(|s| s.activity).collect();
            if mode == TransitionMode::Global {
                if let Some(&first) = acts.first() {
                    model.anchored.entry((Vec::new(), None)).or_default().add(Next::Activity(first));
                }
            }
            for k in 0..acts.len() {
                let next = acts.get(k + 1).map_or(Next::End, |&a| Next::Activity(a));
                let actor = match mode {
                    TransitionMode::Global => None,
                    TransitionMode::Local => Some(model.actor_key(trace[k].agent)),
                };
                if k < cap {
                    model.anchored.entry((acts[..=k].to_vec(), actor)).or_default().add(next);
                }
                for i in 0..=k {
                    if k + 1 - i <= cap {
                        model.contexts.entry((acts[i..=k].to_vec(), actor)).or_default().add(next);
                    }
                }
            }
        }
        model
    }

    pub fn mode(&self) -> TransitionMode {
        self.mode
    }

    pub fn max_prefix_len(&self) -> Option<usize> {
        self.max_prefix_len
    }

    pub fn is_type_level(&self) -> bool {
        self.actor_types.is_some()
    }

    fn actor_key(&self, agent: AgentId) -> usize {
        match &self.actor_types {
            Some(types) => types[agent],
            None => agent,
        }
    }

    /// The anchored row for an exact prefix, if observed.
    pub fn prefix_row(&self, prefix: &[ActivityId], agent: Option<AgentId>) -> Option<&TransitionRow> {
        let actor = agent.map(|a| self.actor_key(a));
        self.anchored.get(&(prefix.to_vec(), actor))
    }

    pub fn anchored_rows(&self) -> impl Iterator<Item = (&[ActivityId], Option<usize>, &TransitionRow)> {
        self.anchored.iter().map(|((p, a), r)| (p.as_slice(), *a, r))
    }

    pub fn context_rows(&self) -> impl Iterator<Item = (&[ActivityId], Option<usize>, &TransitionRow)> {
        self.contexts.iter().map(|((p, a), r)| (p.as_slice(), *a, r))
    }

    /// Finds the row used to continue `prefix`: the exact prefix if seen
    /// from a case start, otherwise the longest suffix (the whole prefix
    /// included) seen anywhere. In global mode the empty
    /// suffix falls back to the first-activity row.
    pub fn lookup(&self, prefix: &[ActivityId], agent: Option<AgentId>) -> Result<&TransitionRow> {
        let actor = match (self.mode, agent) {
            (TransitionMode::Global, _) => None,
            (TransitionMode::Local, Some(a)) if !prefix.is_empty() => Some(self.actor_key(a)),
            (TransitionMode::Local, Some(_)) => {
                return Err(Error::Model("local transitions need a non-empty prefix".into()))
            }
            (TransitionMode::Local, None) => {
                return Err(Error::Model("local transitions need the last agent".into()))
            }
        };
        let cap = self.max_prefix_len.unwrap_or(usize::MAX);
        if prefix.len() <= cap {
            if let Some(row) = self.anchored.get(&(prefix.to_vec(), actor)) {
                return Ok(row);
            }
        }
        for start in 0..=prefix.len() {
            let suffix = &prefix[start..];
            if suffix.is_empty() {
                if self.mode == TransitionMode::Global {
                    if let Some(row) = self.anchored.get(&(Vec::new(), None)) {
                        return Ok(row);
                    }
                }
                break;
            }
            if suffix.len() > cap {
                continue;
            }
            if let Some(row) = self.contexts.get(&(suffix.to_vec(), actor)) {
                return Ok(row);
            }
        }
        Err(Error::Model(format!("no transition context for prefix {prefix:?}")))
    }

    /// Samples the next activity (or the end of the case).
    pub fn next_activity<R: Rng + ?Sized>(
        &self,
        prefix: &[ActivityId],
        agent: Option<AgentId>,
        rng: &mut R,
    ) -> Result<Next> {
        Ok(self.lookup(prefix, agent)?.sample(rng))
    }
}

#[derive(Serialize, Deserialize)]
struct RowEntry {
    prefix: Vec<ActivityId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    actor: Option<usize>,
    next: Vec<(Next, u64)>,
}

#[derive(Serialize, Deserialize)]
struct TransitionModelFile {
    mode: TransitionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    actor_types: Option<Vec<usize>>,
    #[serde(default)]
    max_prefix_len: Option<usize>,
    anchored: Vec<RowEntry>,
    contexts: Vec<RowEntry>,
}

fn to_entries(table: &HashMap<Key, TransitionRow>) -> Vec<RowEntry> {
    let mut entries: Vec<RowEntry> = table
        .iter()
        .map(|((prefix, actor), row)| RowEntry {
            prefix: prefix.clone(),
            actor: *actor,
            next: row.counts.iter().map(|(n, c)| (*n, *c)).collect(),
        })
        .collect();
    entries.sort_by(|a, b| (&a.prefix, a.actor).cmp(&(&b.prefix, b.actor)));
    entries
}

fn from_entries(entries: Vec<RowEntry>) -> HashMap<Key, TransitionRow> {
    entries
        .into_iter()
        .map(|e| {
            let counts: BTreeMap<Next, u64> = e.next.into_iter().collect();
            let total = counts.values().sum();
            ((e.prefix, e.actor), TransitionRow { counts, total })
        })
        .collect()
}

impl From<TransitionModel> for TransitionModelFile {
    fn from(m: TransitionModel) -> Self {
        TransitionModelFile {
            mode: m.mode,
            actor_types: m.actor_types.clone(),
            max_prefix_len: m.max_prefix_len,
            anchored: to_entries(&m.anchored),
            contexts: to_entries(&m.contexts),
        }
    }
}

impl TryFrom<TransitionModelFile> for TransitionModel {
    type Error = String;

    fn try_from(f: TransitionModelFile) -> std::result::Result<Self, String> {
        let anchored = from_entries(f.anchored);
        let contexts = from_entries(f.contexts);
        if anchored.values().chain(contexts.values()).any(|r| r.total == 0) {
            return Err("transition row without observations".into());
        }
        Ok(TransitionModel { mode: f.mode, actor_types: f.actor_types, max_prefix_len: f.max_prefix_len, anchored, contexts })
    }
}

/// Handover counts between consecutive events of a case, `[from][to]`.
/// Probabilities are normalised over each agent's observed outgoing pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "HandoverFile", into = "HandoverFile")]
pub struct HandoverMatrix {
    size: usize,
    counts: Vec<u64>,
    row_totals: Vec<u64>,
}

impl HandoverMatrix {
    pub fn discover(index: &IndexedLog) -> Self {
        let n = index.roster.len();
        let mut counts = vec![0u64; n * n];
        for trace in &index.traces {
            for pair in trace.windows(2) {
                counts[pair[0].agent * n + pair[1].agent] += 1;
            }
        }
        Self::from_counts(n, counts)
    }

    fn from_counts(size: usize, counts: Vec<u64>) -> Self {
        let row_totals = counts.chunks(size.max(1)).map(|r| r.iter().sum()).collect();
        HandoverMatrix { size, counts, row_totals }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn count(&self, from: AgentId, to: AgentId) -> u64 {
        self.counts[from * self.size + to]
    }

    pub fn outgoing(&self, from: AgentId) -> u64 {
        self.row_totals[from]
    }

    /// `P(to | from)`.
    pub fn probability(&self, from: AgentId, to: AgentId) -> f64 {
        match self.row_totals[from] {
            0 => 0.0,
            total => self.count(from, to) as f64 / total as f64,
        }
    }

    pub fn row(&self, from: AgentId) -> Vec<f64> {
        (0..self.size).map(|to| self.probability(from, to)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct HandoverFile {
    size: usize,
    /// Sparse `(from, to, count)` triples.
    entries: Vec<(AgentId, AgentId, u64)>,
}

impl From<HandoverMatrix> for HandoverFile {
    fn from(m: HandoverMatrix) -> Self {
        let n = m.size;
        let entries = m
            .counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(ix, c)| (ix / n, ix % n, *c))
            .collect();
        HandoverFile { size: n, entries }
    }
}

impl TryFrom<HandoverFile> for HandoverMatrix {
    type Error = String;

    fn try_from(f: HandoverFile) -> std::result::Result<Self, String> {
        let mut counts = vec![0u64; f.size * f.size];
        for (from, to, c) in f.entries {
            if from >= f.size || to >= f.size {
                return Err(format!("handover entry ({from}, {to}) outside {}", f.size));
            }
            counts[from * f.size + to] = c;
        }
        Ok(HandoverMatrix::from_counts(f.size, counts))
    }
}
