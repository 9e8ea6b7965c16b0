//! Discrete-event execution of a discovered model.
//!
//! The clock jumps between decision points: case arrivals, activity
//! completions, schedule-slot boundaries (only while some case waits) and
//! the livelock deadline. Nothing can change between those instants.
//!
//! All randomness comes from one ChaCha8 stream. Per allocation attempt the
//! draws are: next activity (when not yet known), one duration per candidate
//! agent in ascending id order, the agent draw (tie-break or handover), then
//! the extraneous delay. A new case draws the following inter-arrival gap
//! when it arrives. Sampled seconds are rounded to the nearest integer.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::discovery::{
    ActivityId, AgentId, Architecture, Assignment, Mas, Next, Schedule, TransitionModel, TransitionRow,
};
use crate::distributions::{sample_distribution, FittedDistribution};
use crate::error::{Error, Result};
use crate::event_log::{Event, EventLog, Trace};
use crate::time::{Timestamp, DAY};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub architecture: Architecture,
    pub assignment: Assignment,
    pub use_extraneous_delays: bool,
    pub n_cases: usize,
    pub start_time: Timestamp,
    /// Exactly `n_cases` arrivals; otherwise arrivals go on until `n_cases`
    /// cases have completed.
    pub evaluation_mode: bool,
    pub seed: u64,
    pub horizon_days: u32,
}

impl SimulationConfig {
    pub fn new(n_cases: usize, start_time: Timestamp, seed: u64) -> Self {
        SimulationConfig {
            architecture: Architecture::Orchestrated,
            assignment: Assignment::Iterative,
            use_extraneous_delays: false,
            n_cases,
            start_time,
            evaluation_mode: true,
            seed,
            horizon_days: 30,
        }
    }

    /// Architecture, assignment and delay switch taken from the model.
    pub fn for_model(mas: &Mas, n_cases: usize, seed: u64) -> Self {
        SimulationConfig {
            architecture: mas.architecture,
            assignment: mas.assignment,
            ..SimulationConfig::new(n_cases, mas.last_arrival, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cases == 0 {
            return Err(Error::Config("n_cases must be positive".into()));
        }
        if self.horizon_days == 0 {
            return Err(Error::Config("horizon_days must be positive".into()));
        }
        if self.assignment == Assignment::Direct && self.architecture != Architecture::Autonomous {
            return Err(Error::Config("direct assignment requires the autonomous architecture".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CaseState {
    pub case_id: String,
    pub prefix: Vec<ActivityId>,
    pub last_agent: Option<AgentId>,
    pub waiting: bool,
    pub enabled_at: Timestamp,
    pub arrival_order: usize,
    pub arrived_at: Timestamp,
    // Next activity once determined; kept across refused attempts.
    pending: Option<ActivityId>,
    busy_until: Timestamp,
    events: Vec<Event>,
    done: bool,
}

impl CaseState {
    fn arrive(arrival_order: usize, at: Timestamp) -> Self {
        CaseState {
            case_id: format!("case_{arrival_order}"),
            prefix: Vec::new(),
            last_agent: None,
            waiting: true,
            enabled_at: at,
            arrival_order,
            arrived_at: at,
            pending: None,
            busy_until: at,
            events: Vec::new(),
            done: false,
        }
    }

    fn fifo_key(&self) -> (Timestamp, usize) {
        (self.enabled_at, self.arrival_order)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Reservation {
    pub case: usize,
    pub start: Timestamp,
    pub end: Timestamp,
}

/// Occupation of one agent: disjoint `[start, end)` intervals keyed by start,
/// plus the FIFO of directly assigned tasks.
#[derive(Clone, Debug, Default)]
pub struct AgentRuntime {
    pub id: AgentId,
    busy: BTreeMap<i64, i64>,
    pending_queue: VecDeque<Reservation>,
}

impl AgentRuntime {
    pub fn new(id: AgentId) -> Self {
        AgentRuntime { id, ..Default::default() }
    }

    pub fn busy_intervals(&self) -> impl Iterator<Item = (Timestamp, Timestamp)> + '_ {
        self.busy.iter().map(|(&s, &e)| (Timestamp(s), Timestamp(e)))
    }

    pub fn pending_queue(&self) -> &VecDeque<Reservation> {
        &self.pending_queue
    }

    /// End of the last reserved interval.
    pub fn reserved_until(&self) -> Option<Timestamp> {
        self.busy.values().next_back().map(|&e| Timestamp(e))
    }

    /// End of the busy interval overlapping `[t, t + d)`, if any. A
    /// zero-length window conflicts when `t` falls inside an interval.
    fn conflict(&self, t: Timestamp, duration: i64) -> Option<Timestamp> {
        let hi = t.0 + duration.max(1);
        self.busy.range(..hi).next_back().filter(|(_, &e)| e > t.0).map(|(_, &e)| Timestamp(e))
    }

    pub fn is_free(&self, t: Timestamp, duration: i64) -> bool {
        self.conflict(t, duration).is_none()
    }

    /// Earliest `t >= from` with `[t, t + d)` clear of every busy interval.
    pub fn free_from(&self, from: Timestamp, duration: i64) -> Timestamp {
        let mut t = from;
        while let Some(e) = self.conflict(t, duration) {
            t = e;
        }
        t
    }

    pub fn reserve(&mut self, start: Timestamp, end: Timestamp) {
        debug_assert!(self.is_free(start, end - start), "overlapping reservation");
        if end > start {
            self.busy.insert(start.0, end.0);
        }
    }

    fn prune(&mut self, clock: Timestamp) {
        while let Some((&s, &e)) = self.busy.iter().next() {
            if e > clock.0 {
                break;
            }
            self.busy.remove(&s);
        }
        while self.pending_queue.front().is_some_and(|r| r.end <= clock) {
            self.pending_queue.pop_front();
        }
    }
}

/// Earliest `t >= from` such that `[t, t + duration)` lies inside one working
/// stretch of `schedule` and clear of the agent's busy intervals, searching no
/// further than `horizon_secs` past `from`.
pub fn earliest_availability(
    schedule: &Schedule,
    runtime: &AgentRuntime,
    from: Timestamp,
    duration: i64,
    horizon_secs: i64,
) -> Option<Timestamp> {
    let limit = from.0.saturating_add(horizon_secs);
    let mut t = from;
    loop {
        t = schedule.next_working(t)?;
        if t.0 > limit {
            return None;
        }
        if !schedule.fits(t, duration) {
            t = schedule.working_until(t)?;
            continue;
        }
        match runtime.conflict(t, duration) {
            Some(e) => t = e,
            None => return Some(t),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub arrivals: usize,
    pub completed: usize,
    pub events: usize,
    /// Tasks whose duration fits no working stretch of any candidate.
    pub forced_unfit: usize,
    pub forced_livelock: usize,
    /// Cases closed at the length limit instead of by a sampled end.
    #[serde(default)]
    pub truncated: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SimulationOutput {
    pub log: EventLog,
    pub report: SimulationReport,
    /// Arrival instant of every simulated case, by case id.
    pub arrivals: BTreeMap<String, Timestamp>,
}

impl SimulationOutput {
    /// Completion minus arrival per case, so waiting before the first
    /// activity counts. Sorted by case id.
    pub fn cycle_times(&self) -> Vec<(String, i64)> {
        self.log
            .traces()
            .iter()
            .map(|t| (t.case_id.clone(), t.end() - self.arrivals[&t.case_id]))
            .collect()
    }
}

/// Runs one simulation. Identical `(mas, config)` give identical output.
pub fn simulate(mas: &Mas, config: &SimulationConfig) -> Result<SimulationOutput> {
    config.validate()?;
    mas.validate()?;
    Simulator::new(mas, config).run()
}

/// Chooses among agents that can all start now.
struct Candidate<'a> {
    agent: AgentId,
    duration: &'a FittedDistribution,
}

struct Simulator<'a> {
    mas: &'a Mas,
    config: &'a SimulationConfig,
    transitions: &'a TransitionModel,
    rng: ChaCha8Rng,
    candidates: Vec<Vec<Candidate<'a>>>,
    delays: Vec<Option<&'a FittedDistribution>>,
    longest_run: Vec<Option<i64>>,
    max_case_len: usize,
    runtimes: Vec<AgentRuntime>,
    slot_seconds: i64,
    horizon: i64,
    clock: Timestamp,
    next_arrival: Option<Timestamp>,
    cases: Vec<CaseState>,
    finished: Vec<Trace>,
    arrivals: BTreeMap<String, Timestamp>,
    last_progress: Timestamp,
    report: SimulationReport,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn draw_seconds<R: Rng + ?Sized>(dist: &FittedDistribution, rng: &mut R) -> i64 {
    sample_distribution(dist, rng).round() as i64
}

impl<'a> Simulator<'a> {
    fn new(mas: &'a Mas, config: &'a SimulationConfig) -> Self {
        let candidates = mas
            .activities
            .iter()
            .map(|act| {
                mas.agents
                    .iter()
                    .filter_map(|a| a.capabilities.durations.get(act).map(|d| Candidate { agent: a.id, duration: d }))
                    .collect()
            })
            .collect();
        let delays = mas
            .activities
            .iter()
            .map(|act| config.use_extraneous_delays.then(|| mas.extraneous_delays.get(act)).flatten())
            .collect();
        let slot_seconds = mas.agents.iter().map(|a| a.schedule.slot_seconds()).fold(0, gcd).max(1);
        Simulator {
            mas,
            config,
            transitions: mas.transitions(config.architecture),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            candidates,
            delays,
            longest_run: mas.agents.iter().map(|a| a.schedule.longest_run()).collect(),
            max_case_len: max_case_len(mas),
            runtimes: mas.agents.iter().map(|a| AgentRuntime::new(a.id)).collect(),
            slot_seconds,
            horizon: config.horizon_days as i64 * DAY,
            clock: config.start_time,
            next_arrival: Some(config.start_time),
            cases: Vec::new(),
            finished: Vec::new(),
            arrivals: BTreeMap::new(),
            last_progress: config.start_time,
            report: SimulationReport::default(),
        }
    }

    fn target_reached(&self) -> bool {
        if self.config.evaluation_mode {
            self.report.arrivals == self.config.n_cases && self.cases.is_empty()
        } else {
            self.finished.len() >= self.config.n_cases
        }
    }

    fn may_spawn(&self) -> bool {
        if self.config.evaluation_mode {
            self.report.arrivals < self.config.n_cases
        } else {
            // Bounded in-flight population keeps zero gaps from spawning forever.
            self.finished.len() < self.config.n_cases && self.cases.len() < self.config.n_cases
        }
    }

    fn run(mut self) -> Result<SimulationOutput> {
        loop {
            self.spawn_arrivals();
            self.complete_activities();
            self.process_waiting()?;
            if self.target_reached() {
                break;
            }
            if self.cases.iter().any(|c| c.waiting) && self.clock.0 - self.last_progress.0 >= self.horizon {
                self.break_livelock()?;
                continue;
            }
            match self.next_decision() {
                Some(t) => self.clock = t.max(self.clock),
                None => break,
            }
            for r in &mut self.runtimes {
                r.prune(self.clock);
            }
        }
        self.report.completed = self.finished.len();
        self.report.events = self.finished.iter().map(Trace::len).sum();
        if self.report.completed < self.config.n_cases {
            return Err(Error::Model(format!(
                "simulation stalled after {} of {} cases",
                self.report.completed, self.config.n_cases
            )));
        }
        Ok(SimulationOutput { log: EventLog::from_traces(self.finished), report: self.report, arrivals: self.arrivals })
    }

    fn spawn_arrivals(&mut self) {
        while let Some(at) = self.next_arrival {
            if at > self.clock || !self.may_spawn() {
                break;
            }
            self.cases.push(CaseState::arrive(self.report.arrivals, at));
            self.report.arrivals += 1;
            self.next_arrival = if self.config.evaluation_mode && self.report.arrivals == self.config.n_cases {
                None
            } else {
                Some(at + draw_seconds(&self.mas.interarrival, &mut self.rng).max(0))
            };
        }
    }

    fn complete_activities(&mut self) {
        for case in &mut self.cases {
            if !case.waiting && case.busy_until <= self.clock {
                case.waiting = true;
                case.enabled_at = case.busy_until;
            }
        }
    }

    fn next_decision(&self) -> Option<Timestamp> {
        let mut next: Option<Timestamp> = None;
        let mut consider = |t: Timestamp| next = Some(next.map_or(t, |n| n.min(t)));
        if let Some(a) = self.next_arrival {
            if self.may_spawn() || a > self.clock {
                consider(a);
            }
        }
        let mut any_waiting = false;
        for case in &self.cases {
            if case.waiting {
                any_waiting = true;
            } else {
                consider(case.busy_until);
            }
        }
        if any_waiting {
            let len = self.slot_seconds;
            consider(Timestamp((self.clock.0.div_euclid(len) + 1) * len));
            consider(self.last_progress + self.horizon);
        }
        next
    }

    fn process_waiting(&mut self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.cases.len()).filter(|&i| self.cases[i].waiting).collect();
        order.sort_by_key(|&i| self.cases[i].fifo_key());
        for i in order {
            if !self.config.evaluation_mode && self.finished.len() >= self.config.n_cases {
                break;
            }
            if self.cases[i].pending.is_none() {
                match self.sample_next(i)? {
                    Next::End => {
                        self.finish(i);
                        continue;
                    }
                    Next::Activity(a) => self.cases[i].pending = Some(a),
                }
            }
            self.allocate(i)?;
        }
        self.cases.retain(|c| !c.done);
        Ok(())
    }

    fn sample_next(&mut self, i: usize) -> Result<Next> {
        let case = &self.cases[i];
        if case.prefix.len() >= self.max_case_len {
            let id = case.case_id.clone();
            self.report.truncated.push(id);
            self.warn(format!("case closed after {} events without reaching an end", self.max_case_len));
            return Ok(Next::End);
        }
        let row: &TransitionRow = if case.prefix.is_empty() {
            self.mas.global_transitions.lookup(&[], None)?
        } else {
            let agent = match self.config.architecture {
                Architecture::Orchestrated => None,
                Architecture::Autonomous => case.last_agent,
            };
            self.transitions.lookup(&case.prefix, agent)?
        };
        Ok(row.sample(&mut self.rng))
    }

    fn finish(&mut self, i: usize) {
        let case = &mut self.cases[i];
        case.done = true;
        case.waiting = false;
        self.finished.push(Trace::new(case.case_id.clone(), std::mem::take(&mut case.events)));
        self.arrivals.insert(case.case_id.clone(), case.arrived_at);
        self.last_progress = self.clock;
    }

    fn fits_now(&self, agent: AgentId, duration: i64) -> bool {
        self.mas.agents[agent].schedule.fits(self.clock, duration)
            && (self.mas.agents[agent].is_dummy || self.runtimes[agent].is_free(self.clock, duration))
    }

    /// Uniform draw among agents that can start now.
    fn pick_among(&mut self, fitting: &[(AgentId, i64)]) -> Option<(AgentId, i64)> {
        match fitting.len() {
            0 => None,
            1 => Some(fitting[0]),
            n => Some(fitting[self.rng.random_range(0..n)]),
        }
    }

    fn allocate(&mut self, i: usize) -> Result<()> {
        let act = self.cases[i].pending.expect("activity determined before allocation");
        let candidates = &self.candidates[act];
        if candidates.is_empty() {
            return Err(Error::Model(format!("no agent can perform '{}'", self.mas.activities[act])));
        }
        let drawn: Vec<(AgentId, i64)> = candidates
            .iter()
            .map(|c| (c.agent, draw_seconds(c.duration, &mut self.rng).max(0)))
            .collect();
        let last = self.cases[i].last_agent;
        let rule = match (last, self.config.architecture, self.config.assignment) {
            (None, _, _) | (_, Architecture::Orchestrated, _) => None,
            (Some(j), Architecture::Autonomous, a) => Some((j, a)),
        };
        let choice = match rule {
            None => self.orchestrated(&drawn),
            Some((j, Assignment::Iterative)) => self.autonomous_iterative(j, &drawn),
            Some((j, Assignment::Direct)) => {
                let (agent, start, d) = self.direct(j, &drawn);
                self.execute(i, act, agent, start, d, true);
                return Ok(());
            }
        };
        match choice {
            Some((agent, d)) => self.execute(i, act, agent, self.clock, d, false),
            None => {
                let never_fits = drawn.iter().all(|&(a, d)| self.longest_run[a].is_some_and(|run| d > run));
                if never_fits {
                    let (agent, start, d) = self.forced_start(&drawn, true);
                    self.report.forced_unfit += 1;
                    self.warn(format!(
                        "'{}' scheduled past shift end: no working stretch fits its duration",
                        self.mas.activities[act]
                    ));
                    self.execute(i, act, agent, start, d, false);
                }
            }
        }
        Ok(())
    }

    fn orchestrated(&mut self, drawn: &[(AgentId, i64)]) -> Option<(AgentId, i64)> {
        let fitting: Vec<(AgentId, i64)> = drawn.iter().copied().filter(|&(a, d)| self.fits_now(a, d)).collect();
        self.pick_among(&fitting)
    }

    fn autonomous_iterative(&mut self, last: AgentId, drawn: &[(AgentId, i64)]) -> Option<(AgentId, i64)> {
        let mut ranked: Vec<(f64, AgentId, i64)> = drawn
            .iter()
            .map(|&(a, d)| (self.mas.handovers.probability(last, a), a, d))
            .filter(|(p, _, _)| *p > 0.0)
            .collect();
        ranked.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        if let Some(&(_, a, d)) = ranked.iter().find(|&&(_, a, d)| self.fits_now(a, d)) {
            return Some((a, d));
        }
        let fitting: Vec<(AgentId, i64)> = drawn
            .iter()
            .copied()
            .filter(|&(a, d)| self.mas.handovers.probability(last, a) == 0.0 && self.fits_now(a, d))
            .collect();
        self.pick_among(&fitting)
    }

    /// Samples the agent from the handover row and queues the task with it.
    fn direct(&mut self, last: AgentId, drawn: &[(AgentId, i64)]) -> (AgentId, Timestamp, i64) {
        let weights: Vec<f64> = drawn.iter().map(|&(a, _)| self.mas.handovers.probability(last, a)).collect();
        let total: f64 = weights.iter().sum();
        let chosen = if total > 0.0 {
            let mut r = self.rng.random::<f64>() * total;
            let mut pick = drawn.len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if *w > 0.0 && r < *w {
                    pick = k;
                    break;
                }
                r -= w;
            }
            // Guard against rounding landing on a zero-weight tail entry.
            while weights[pick] == 0.0 {
                pick -= 1;
            }
            drawn[pick]
        } else {
            let available: Vec<(Timestamp, AgentId, i64)> = drawn
                .iter()
                .filter_map(|&(a, d)| self.queue_slot(a, d).map(|t| (t, a, d)))
                .collect();
            match available.iter().min() {
                Some(&(_, a, d)) => (a, d),
                None => drawn[0],
            }
        };
        let (agent, d) = chosen;
        match self.queue_slot(agent, d) {
            Some(start) => (agent, start, d),
            None => {
                self.report.forced_unfit += 1;
                self.warn(format!("agent '{}' has no working stretch for a queued task", self.mas.agents[agent].name));
                let from = self.queue_tail(agent);
                (agent, self.runtimes[agent].free_from(from, d), d)
            }
        }
    }

    fn queue_tail(&self, agent: AgentId) -> Timestamp {
        if self.mas.agents[agent].is_dummy {
            return self.clock;
        }
        self.runtimes[agent].reserved_until().map_or(self.clock, |t| t.max(self.clock))
    }

    /// Start of a directly assigned task: FIFO behind the agent's queue.
    fn queue_slot(&self, agent: AgentId, duration: i64) -> Option<Timestamp> {
        let from = self.queue_tail(agent);
        earliest_availability(&self.mas.agents[agent].schedule, &self.runtimes[agent], from, duration, self.horizon)
    }

    /// Earliest start among candidates ignoring the schedule's shift ends
    /// (`keep_shift_start`) or the schedule altogether.
    fn forced_start(&self, drawn: &[(AgentId, i64)], keep_shift_start: bool) -> (AgentId, Timestamp, i64) {
        let mut best: Option<(Timestamp, AgentId, i64)> = None;
        for &(a, d) in drawn {
            let runtime = &self.runtimes[a];
            let schedule = &self.mas.agents[a].schedule;
            let mut t = runtime.free_from(self.clock, d);
            if keep_shift_start {
                // Start on shift when the agent has any working time at all.
                let mut guard = 0;
                while let Some(w) = schedule.next_working(t) {
                    let free = runtime.free_from(w, d);
                    if free == w || guard > 1000 {
                        t = free;
                        break;
                    }
                    t = free;
                    guard += 1;
                }
            }
            if best.is_none_or(|(bt, _, _)| t < bt) {
                best = Some((t, a, d));
            }
        }
        let (t, a, d) = best.expect("candidates are non-empty");
        (a, t, d)
    }

    fn break_livelock(&mut self) -> Result<()> {
        let i = (0..self.cases.len())
            .filter(|&i| self.cases[i].waiting)
            .min_by_key(|&i| self.cases[i].fifo_key())
            .expect("a waiting case exists");
        if self.cases[i].pending.is_none() {
            match self.sample_next(i)? {
                Next::End => {
                    self.finish(i);
                    self.cases.retain(|c| !c.done);
                    return Ok(());
                }
                Next::Activity(a) => self.cases[i].pending = Some(a),
            }
        }
        let act = self.cases[i].pending.expect("set above");
        let drawn: Vec<(AgentId, i64)> = self.candidates[act]
            .iter()
            .map(|c| (c.agent, draw_seconds(c.duration, &mut self.rng).max(0)))
            .collect();
        let (agent, start, d) = self.forced_start(&drawn, false);
        self.report.forced_livelock += 1;
        self.warn(format!(
            "no progress for {} days; forced '{}' of {} ignoring calendars",
            self.config.horizon_days, self.mas.activities[act], self.cases[i].case_id
        ));
        self.execute(i, act, agent, start, d, false);
        Ok(())
    }

    fn execute(&mut self, i: usize, act: ActivityId, agent: AgentId, start: Timestamp, duration: i64, queued: bool) {
        let delay = match self.delays[act] {
            Some(dist) => draw_seconds(dist, &mut self.rng).max(0),
            None => 0,
        };
        let end = start + duration + delay;
        let performer = &self.mas.agents[agent];
        if !performer.is_dummy {
            let runtime = &mut self.runtimes[agent];
            runtime.reserve(start, end);
            if queued {
                runtime.pending_queue.push_back(Reservation { case: self.cases[i].arrival_order, start, end });
            }
        }
        let case = &mut self.cases[i];
        case.events.push(Event {
            case_id: case.case_id.clone(),
            activity: self.mas.activities[act].clone(),
            start,
            end,
            resource: (!performer.is_dummy).then(|| performer.name.clone()),
        });
        case.prefix.push(act);
        case.last_agent = Some(agent);
        case.pending = None;
        case.waiting = false;
        case.busy_until = end;
        self.last_progress = self.clock;
    }

    fn warn(&mut self, message: String) {
        log::warn!("{message}");
        if !self.report.warnings.contains(&message) {
            self.report.warnings.push(message);
        }
    }
}

/// Probability the model assigns to a trace's activity sequence followed by
/// the end of the case. The first activity always comes from the global
/// table; later ones from the table the architecture uses.
pub fn replay_probability(mas: &Mas, architecture: Architecture, trace: &Trace) -> Result<f64> {
    replay_log_probability(mas, architecture, trace).map(f64::exp)
}

/// Natural log of [`replay_probability`], usable on long traces whose
/// probability underflows. `-inf` when some step has probability zero.
pub fn replay_log_probability(mas: &Mas, architecture: Architecture, trace: &Trace) -> Result<f64> {
    let roster = mas.roster();
    let mut prefix = Vec::with_capacity(trace.len());
    let mut last = None;
    let mut lp = 0.0;
    for e in trace.events.iter().map(Some).chain([None]) {
        let next = match e {
            Some(e) => Next::Activity(
                mas.activity_id(&e.activity)
                    .ok_or_else(|| Error::Model(format!("unknown activity '{}'", e.activity)))?,
            ),
            None => Next::End,
        };
        let row = if prefix.is_empty() {
            mas.global_transitions.lookup(&[], None)?
        } else {
            let agent = (architecture == Architecture::Autonomous).then_some(last).flatten();
            mas.transitions(architecture).lookup(&prefix, agent)?
        };
        lp += row.probability(next).ln();
        if let (Some(e), Next::Activity(a)) = (e, next) {
            prefix.push(a);
            last = roster.agent_of(e);
        }
    }
    Ok(lp)
}

/// Three times the longest training trace: local backoff can form cycles
/// that never reach an end.
fn max_case_len(mas: &Mas) -> usize {
    let longest = mas.global_transitions.anchored_rows().map(|(p, _, _)| p.len()).max().unwrap_or(0);
    (3 * longest).max(10)
}
