//! Agent instantiation and agent-type clustering.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::event_log::{Event, EventLog};

pub type AgentId = usize;
pub type ActivityId = usize;

/// Prefix of the label given to agents standing in for missing resources.
pub const DUMMY_PREFIX: &str = "dummy:";

pub fn dummy_label(activity: &str) -> String {
    format!("{DUMMY_PREFIX}{activity}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentIdentity {
    pub id: AgentId,
    pub name: String,
    pub is_dummy: bool,
    /// The activity a dummy agent stands in for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dummy_activity: Option<String>,
}

/// One agent per resource, plus one dummy per activity that has events
/// without a resource. Resources come first, sorted by label; dummies follow,
/// sorted by activity.
#[derive(Clone, Debug, Default)]
pub struct AgentRoster {
    agents: Vec<AgentIdentity>,
    by_resource: HashMap<String, AgentId>,
    dummy_for: HashMap<String, AgentId>,
}

impl AgentRoster {
    pub fn from_identities(agents: Vec<AgentIdentity>) -> Self {
        let mut by_resource = HashMap::new();
        let mut dummy_for = HashMap::new();
        for a in &agents {
            match &a.dummy_activity {
                Some(act) if a.is_dummy => {
                    dummy_for.insert(act.clone(), a.id);
                }
                _ => {
                    by_resource.insert(a.name.clone(), a.id);
                }
            }
        }
        AgentRoster { agents, by_resource, dummy_for }
    }

    pub fn agents(&self) -> &[AgentIdentity] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn resource(&self, name: &str) -> Option<AgentId> {
        self.by_resource.get(name).copied()
    }

    pub fn dummy_for(&self, activity: &str) -> Option<AgentId> {
        self.dummy_for.get(activity).copied()
    }

    /// The agent responsible for an event.
    pub fn agent_of(&self, event: &Event) -> Option<AgentId> {
        match &event.resource {
            Some(r) => self.resource(r),
            None => self.dummy_for(&event.activity),
        }
    }
}

pub fn discover_agents(log: &EventLog) -> AgentRoster {
    let mut identities: Vec<AgentIdentity> = log
        .resources()
        .iter()
        .enumerate()
        .map(|(id, name)| AgentIdentity { id, name: name.clone(), is_dummy: false, dummy_activity: None })
        .collect();
    let unresourced: BTreeSet<&str> =
        log.events().filter(|e| e.resource.is_none()).map(|e| e.activity.as_str()).collect();
    for act in unresourced {
        identities.push(AgentIdentity {
            id: identities.len(),
            name: dummy_label(act),
            is_dummy: true,
            dummy_activity: Some(act.to_string()),
        });
    }
    AgentRoster::from_identities(identities)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub activity: ActivityId,
    pub agent: AgentId,
}

/// A log re-expressed over dense activity and agent ids.
#[derive(Clone, Debug)]
pub struct IndexedLog {
    pub activities: Vec<String>,
    pub roster: AgentRoster,
    pub traces: Vec<Vec<Step>>,
}

impl IndexedLog {
    pub fn new(log: &EventLog) -> Self {
        let roster = discover_agents(log);
        let activities: Vec<String> = log.activities().iter().cloned().collect();
        let index: HashMap<&str, ActivityId> =
            activities.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
        let traces = log
            .traces()
            .iter()
            .map(|t| {
                t.events
                    .iter()
                    .map(|e| Step {
                        activity: index[e.activity.as_str()],
                        agent: roster.agent_of(e).expect("roster covers every event"),
                    })
                    .collect()
            })
            .collect();
        IndexedLog { activities, roster, traces }
    }

    pub fn activity_id(&self, label: &str) -> Option<ActivityId> {
        self.activities.binary_search_by(|a| a.as_str().cmp(label)).ok()
    }
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    (1.0 - dot / (na * nb)).max(0.0)
}

/// Normalized activity-frequency vector of every agent.
pub fn activity_profiles(index: &IndexedLog) -> Vec<Vec<f64>> {
    let mut profiles = vec![vec![0.0; index.activities.len()]; index.roster.len()];
    for step in index.traces.iter().flatten() {
        profiles[step.agent][step.activity] += 1.0;
    }
    for p in &mut profiles {
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|x| *x /= total);
        }
    }
    profiles
}

/// Single-linkage agglomerative clustering under cosine distance. Clusters
/// merge while the closest pair is nearer than `threshold`; equal distances
/// merge the pair with the lowest member ids first. Type ids are numbered by
/// each cluster's lowest agent id.
pub fn cluster_profiles(profiles: &[Vec<f64>], threshold: f64) -> Vec<usize> {
    let n = profiles.len();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cosine_distance(&profiles[i], &profiles[j]);
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }
    // Cluster representative = lowest member id.
    let mut rep: Vec<usize> = (0..n).collect();
    let mut alive: Vec<bool> = vec![true; n];
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in (0..n).filter(|&i| alive[i]) {
            for j in (i + 1..n).filter(|&j| alive[j]) {
                let d = dist[i][j];
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        match best {
            Some((d, i, j)) if d < threshold => {
                // Merge j into i (i < j keeps i the lowest id).
                alive[j] = false;
                let merged: Vec<f64> = (0..n).map(|k| dist[i][k].min(dist[j][k])).collect();
                for (k, m) in merged.into_iter().enumerate() {
                    dist[i][k] = m;
                    dist[k][i] = m;
                }
                for r in rep.iter_mut().filter(|r| **r == j) {
                    *r = i;
                }
            }
            _ => break,
        }
    }
    let mut type_of_rep = HashMap::new();
    rep.iter()
        .map(|r| {
            let next = type_of_rep.len();
            *type_of_rep.entry(*r).or_insert(next)
        })
        .collect()
}

/// Type id per agent id.
pub fn discover_agent_types(index: &IndexedLog, threshold: f64) -> Vec<usize> {
    cluster_profiles(&activity_profiles(index), threshold)
}
