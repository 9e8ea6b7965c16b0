//! Discovery of a multi-agent simulation model from an event log.
//!
//! Each resource becomes an agent with a type, a weekly schedule, the set of
//! activities it performed together with one duration distribution per
//! activity, and behaviour tables (next activity, handover). Case
//! inter-arrival times and extraneous delays complete the model.

pub mod agents;
pub mod behavior;
pub mod parameters;
pub mod schedule;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use agents::{
    discover_agent_types, discover_agents, dummy_label, ActivityId, AgentId, AgentIdentity,
    AgentRoster, IndexedLog, Step,
};
pub use behavior::{HandoverMatrix, Next, TransitionMode, TransitionModel, TransitionRow};
pub use parameters::{discover_extraneous_delays, discover_interarrival};
pub use schedule::{discover_schedule, Schedule};

use crate::distributions::{fit_distribution, FittedDistribution};
use crate::error::{Error, Result};
use crate::event_log::{Event, EventLog};
use crate::time::Timestamp;

/// How the next activity and its agent are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    /// Log-level transition table; agents asked by earliest availability.
    #[default]
    Orchestrated,
    /// Per-agent transition tables; handover probabilities rank agents.
    Autonomous,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Assignment {
    /// Ask candidates in order until one can start now.
    #[default]
    Iterative,
    /// Sample one agent and queue the task with it.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryOptions {
    pub granularity_minutes: u32,
    pub schedule_support: f64,
    pub type_threshold: f64,
    pub delay_min_fraction: f64,
    /// Share local behaviour tables among agents of the same type.
    pub type_level_behavior: bool,
    pub max_prefix_len: Option<usize>,
    pub architecture: Architecture,
    pub assignment: Assignment,
}

impl Default for DiscoveryOptions {
    fn default() -> Self {
        DiscoveryOptions {
            granularity_minutes: 60,
            schedule_support: 0.1,
            type_threshold: 0.4,
            delay_min_fraction: 0.2,
            type_level_behavior: false,
            max_prefix_len: None,
            architecture: Architecture::Orchestrated,
            assignment: Assignment::Iterative,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Capabilities {
    pub alloc: BTreeSet<String>,
    pub durations: BTreeMap<String, FittedDistribution>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub name: String,
    pub agent_type: usize,
    pub is_dummy: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dummy_activity: Option<String>,
    pub schedule: Schedule,
    pub capabilities: Capabilities,
}

impl Agent {
    pub fn identity(&self) -> AgentIdentity {
        AgentIdentity {
            id: self.id,
            name: self.name.clone(),
            is_dummy: self.is_dummy,
            dummy_activity: self.dummy_activity.clone(),
        }
    }
}

/// The discovered simulation model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mas {
    pub activities: Vec<String>,
    pub agents: Vec<Agent>,
    pub global_transitions: TransitionModel,
    pub local_transitions: TransitionModel,
    pub handovers: HandoverMatrix,
    pub interarrival: FittedDistribution,
    /// Activities without an entry have no extraneous delay.
    pub extraneous_delays: BTreeMap<String, FittedDistribution>,
    pub architecture: Architecture,
    pub assignment: Assignment,
    /// Start of the last case in the training log; default simulation start.
    pub last_arrival: Timestamp,
    pub options: DiscoveryOptions,
}

impl Mas {
    pub fn roster(&self) -> AgentRoster {
        AgentRoster::from_identities(self.agents.iter().map(Agent::identity).collect())
    }

    pub fn activity_id(&self, label: &str) -> Option<ActivityId> {
        self.activities.binary_search_by(|a| a.as_str().cmp(label)).ok()
    }

    pub fn agent_by_name(&self, name: &str) -> Option<&Agent> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn transitions(&self, architecture: Architecture) -> &TransitionModel {
        match architecture {
            Architecture::Orchestrated => &self.global_transitions,
            Architecture::Autonomous => &self.local_transitions,
        }
    }

    /// Checks the structural invariants a simulation relies on.
    pub fn validate(&self) -> Result<()> {
        for act in &self.activities {
            if !self.agents.iter().any(|a| a.capabilities.alloc.contains(act)) {
                return Err(Error::Model(format!("activity '{act}' has no capable agent")));
            }
        }
        for (i, a) in self.agents.iter().enumerate() {
            if a.id != i {
                return Err(Error::Model(format!("agent '{}' has id {} at position {i}", a.name, a.id)));
            }
            if a.capabilities.alloc.len() != a.capabilities.durations.len()
                || !a.capabilities.alloc.iter().all(|x| a.capabilities.durations.contains_key(x))
            {
                return Err(Error::Model(format!("agent '{}' lacks a duration per activity", a.name)));
            }
            if a.is_dummy && !(a.schedule.is_always_available() && a.capabilities.alloc.len() == 1) {
                return Err(Error::Model(format!("dummy agent '{}' malformed", a.name)));
            }
        }
        if self.handovers.size() != self.agents.len() {
            return Err(Error::Model("handover matrix size differs from agent count".into()));
        }
        self.interarrival.distribution.validate()?;
        Ok(())
    }

    pub fn to_writer<W: std::io::Write>(&self, sink: W) -> Result<()> {
        serde_json::to_writer_pretty(sink, self)?;
        Ok(())
    }

    pub fn from_reader<R: std::io::Read>(source: R) -> Result<Mas> {
        let mas: Mas = serde_json::from_reader(source)?;
        mas.validate()?;
        Ok(mas)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.to_writer(&mut w)?;
        std::io::Write::flush(&mut w)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Mas> {
        let file = std::fs::File::open(path)?;
        Mas::from_reader(std::io::BufReader::new(file))
    }
}

/// Activity set and per-activity duration fits of one agent.
pub fn discover_capabilities<'a>(events: impl IntoIterator<Item = &'a Event>) -> Result<Capabilities> {
    let mut by_activity: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for e in events {
        by_activity.entry(e.activity.as_str()).or_default().push(e.duration() as f64);
    }
    let mut caps = Capabilities::default();
    for (act, durations) in by_activity {
        caps.alloc.insert(act.to_string());
        caps.durations.insert(act.to_string(), fit_distribution(&durations)?);
    }
    Ok(caps)
}

pub fn discover_transition_model(log: &EventLog, mode: TransitionMode) -> TransitionModel {
    TransitionModel::discover(&IndexedLog::new(log), mode, None, None)
}

pub fn discover_handover_matrix(log: &EventLog) -> HandoverMatrix {
    HandoverMatrix::discover(&IndexedLog::new(log))
}

pub fn discover_mas(log: &EventLog, options: &DiscoveryOptions) -> Result<Mas> {
    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    let index = IndexedLog::new(log);
    let roster = &index.roster;

    let mut events_of: Vec<Vec<&Event>> = vec![Vec::new(); roster.len()];
    for e in log.events() {
        if let Some(a) = roster.agent_of(e) {
            events_of[a].push(e);
        }
    }

    let types = discover_agent_types(&index, options.type_threshold);
    let agents: Vec<Agent> = roster
        .agents()
        .par_iter()
        .map(|identity| -> Result<Agent> {
            let events = &events_of[identity.id];
            let schedule = if identity.is_dummy {
                Schedule::always_available(options.granularity_minutes)
            } else {
                discover_schedule(events.iter().copied(), options.granularity_minutes, options.schedule_support)
            };
            Ok(Agent {
                id: identity.id,
                name: identity.name.clone(),
                agent_type: types[identity.id],
                is_dummy: identity.is_dummy,
                dummy_activity: identity.dummy_activity.clone(),
                schedule,
                capabilities: discover_capabilities(events.iter().copied())?,
            })
        })
        .collect::<Result<_>>()?;

    let schedules: Vec<Schedule> = agents.iter().map(|a| a.schedule.clone()).collect();
    let local_types = options.type_level_behavior.then(|| types.clone());
    let mas = Mas {
        activities: index.activities.clone(),
        global_transitions: TransitionModel::discover(&index, TransitionMode::Global, None, options.max_prefix_len),
        local_transitions: TransitionModel::discover(
            &index,
            TransitionMode::Local,
            local_types,
            options.max_prefix_len,
        ),
        handovers: HandoverMatrix::discover(&index),
        interarrival: discover_interarrival(log)?,
        extraneous_delays: discover_extraneous_delays(log, roster, &schedules, options.delay_min_fraction)?,
        architecture: options.architecture,
        assignment: options.assignment,
        last_arrival: log.traces().last().map(|t| t.start()).unwrap_or(Timestamp(0)),
        options: options.clone(),
        agents,
    };
    mas.validate()?;
    Ok(mas)
}
