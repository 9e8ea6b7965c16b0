//! Seeded synthetic event logs and small hand-built fixtures.
//!
//! The generators route each case through a process, then place every event
//! on its resource's weekly calendar without overlapping that resource's
//! earlier work.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp, LogNormal};

use crate::discovery::schedule::weekday_hours;
use crate::discovery::{discover_mas, DiscoveryOptions, Mas, Schedule};
use crate::distributions::FittedDistribution;
use crate::event_log::{Event, EventLog, Trace};
use crate::simulation::{earliest_availability, AgentRuntime};
use crate::time::{Timestamp, DAY, HOUR, MINUTE};

/// 2023-01-02 00:00 UTC, a Monday.
pub const EPOCH_MONDAY: Timestamp = Timestamp(1_672_617_600);

const WEEKDAYS: [usize; 5] = [0, 1, 2, 3, 4];

struct Resource {
    name: Option<String>,
    schedule: Schedule,
    speed: f64,
}

impl Resource {
    fn new(name: impl Into<String>, schedule: Schedule, speed: f64) -> Self {
        Resource { name: Some(name.into()), schedule, speed }
    }

    /// Unrecorded resource: events get an empty resource cell.
    fn system() -> Self {
        Resource { name: None, schedule: Schedule::always_available(60), speed: 1.0 }
    }
}

/// One routed step: activity index, resource index, mean duration in seconds.
type Step = (usize, usize, f64);

struct Placer {
    resources: Vec<Resource>,
    runtimes: Vec<AgentRuntime>,
    activities: Vec<&'static str>,
    duration_cv: f64,
    mean_wait: f64,
}

fn lognormal<R: Rng>(rng: &mut R, mean: f64, cv: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    let sigma2 = (1.0 + cv * cv).ln();
    LogNormal::new(mean.ln() - sigma2 / 2.0, sigma2.sqrt()).expect("valid parameters").sample(rng)
}

fn exp<R: Rng>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    Exp::new(1.0 / mean).expect("positive rate").sample(rng)
}

impl Placer {
    /// Places one case's steps starting at `arrival`.
    fn place<R: Rng>(&mut self, rng: &mut R, case_id: &str, arrival: Timestamp, steps: &[Step]) -> Vec<Event> {
        let mut ready = arrival;
        let mut events = Vec::with_capacity(steps.len());
        for (k, &(activity, res, mean)) in steps.iter().enumerate() {
            let resource = &self.resources[res];
            let duration = lognormal(rng, mean * resource.speed, self.duration_cv).round() as i64;
            let wait = if k == 0 { 0 } else { exp(rng, self.mean_wait).round() as i64 };
            let from = ready + wait;
            let start = if resource.name.is_none() {
                from
            } else {
                let runtime = &self.runtimes[res];
                earliest_availability(&resource.schedule, runtime, from, duration, 365 * DAY).unwrap_or_else(|| {
                    // Longer than any shift: start at a shift start, run over.
                    let on_shift = resource.schedule.next_working(from).unwrap_or(from);
                    runtime.free_from(on_shift, duration)
                })
            };
            let end = start + duration;
            if resource.name.is_some() {
                self.runtimes[res].reserve(start, end);
            }
            events.push(Event {
                case_id: case_id.to_string(),
                activity: self.activities[activity].to_string(),
                start,
                end,
                resource: resource.name.clone(),
            });
            ready = end;
        }
        events
    }
}

/// Resamples routes until their total length equals `target_events`.
fn routes_with_total<R: Rng>(
    rng: &mut R,
    n: usize,
    target_events: usize,
    mut route: impl FnMut(&mut R) -> Vec<Step>,
) -> Vec<Vec<Step>> {
    let mut routes: Vec<Vec<Step>> = (0..n).map(|_| route(rng)).collect();
    let mut total: usize = routes.iter().map(Vec::len).sum();
    let mut attempts = 0;
    while total != target_events {
        attempts += 1;
        assert!(attempts < 1_000_000, "route lengths cannot reach {target_events} events");
        let i = rng.random_range(0..n);
        let candidate = route(rng);
        let new_total = total - routes[i].len() + candidate.len();
        if new_total.abs_diff(target_events) < total.abs_diff(target_events) {
            total = new_total;
            routes[i] = candidate;
        }
    }
    routes
}

fn generate<R: Rng>(
    rng: &mut R,
    placer: &mut Placer,
    routes: Vec<Vec<Step>>,
    arrivals: &Schedule,
    mean_gap: f64,
) -> EventLog {
    let mut t = EPOCH_MONDAY + 8 * HOUR;
    let mut traces = Vec::with_capacity(routes.len());
    for (i, steps) in routes.iter().enumerate() {
        if i > 0 {
            t = t + exp(rng, mean_gap).round() as i64;
        }
        t = arrivals.next_working(t).unwrap_or(t);
        let id = format!("{:04}", i + 1);
        traces.push(Trace::new(id.clone(), placer.place(rng, &id, t, steps)));
    }
    EventLog::from_traces(traces)
}

const LOAN_ACTIVITIES: [&str; 12] = [
    "Loan application received",
    "Check application form completeness",
    "Return application back to applicant",
    "Receive updated application",
    "Check credit history",
    "Appraise property",
    "Assess loan risk",
    "Assess eligibility",
    "Reject application",
    "Prepare acceptance pack",
    "Send acceptance pack",
    "Approve application",
];

/// Loan-application-like log: 1000 cases, 7492 events, 12 activities,
/// 19 resources, office hours on weekdays.
pub fn loan_like(seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let office = weekday_hours(&WEEKDAYS, 9, 17);
    let mut resources = vec![Resource::new("System", Schedule::always_available(60), 1.0)];
    // 8 clerks, 3 appraisers, 4 officers, 3 administrators.
    let groups: [(&str, usize, usize, usize); 4] = [("Clerk", 8, 9, 17), ("Appraiser", 3, 8, 16), ("Officer", 4, 9, 18), ("Admin", 3, 10, 16)];
    let mut pools: Vec<Vec<usize>> = Vec::new();
    for (role, count, from, to) in groups {
        let mut pool = Vec::new();
        for k in 0..count {
            let speed = 0.7 + 0.6 * (k as f64 / count.max(2) as f64);
            pool.push(resources.len());
            resources.push(Resource::new(format!("{role}-{:03}", k + 1), weekday_hours(&WEEKDAYS, from, to), speed));
        }
        pools.push(pool);
    }
    let (clerks, appraisers, officers, admins) = (&pools[0], &pools[1], &pools[2], &pools[3]);
    let route = |rng: &mut ChaCha8Rng| -> Vec<Step> {
        // Each case keeps its clerk; officers vary per task.
        let clerk = *clerks.choose(rng).unwrap();
        let mut s: Vec<Step> = vec![(0, 0, 60.0), (1, clerk, 20.0 * MINUTE as f64)];
        let mut returns = 0;
        while returns < 3 && rng.random_bool(0.12) {
            s.push((2, clerk, 10.0 * MINUTE as f64));
            s.push((3, 0, 60.0));
            s.push((1, clerk, 15.0 * MINUTE as f64));
            returns += 1;
        }
        s.push((4, clerk, 25.0 * MINUTE as f64));
        let risk = (6, *officers.choose(rng).unwrap(), 30.0 * MINUTE as f64);
        if rng.random_bool(0.5) {
            let appraise = (5, *appraisers.choose(rng).unwrap(), 45.0 * MINUTE as f64);
            if rng.random_bool(0.5) {
                s.extend([appraise, risk]);
            } else {
                s.extend([risk, appraise]);
            }
        } else {
            s.push(risk);
        }
        let officer = *officers.choose(rng).unwrap();
        s.push((7, officer, 20.0 * MINUTE as f64));
        if rng.random_bool(0.4) {
            s.push((8, officer, 10.0 * MINUTE as f64));
        } else {
            let admin = *admins.choose(rng).unwrap();
            s.push((9, admin, 30.0 * MINUTE as f64));
            s.push((if rng.random_bool(0.8) { 11 } else { 10 }, admin, 15.0 * MINUTE as f64));
        }
        s
    };
    let routes = routes_with_total(&mut rng, 1000, 7492, route);
    let mut placer = Placer {
        runtimes: (0..resources.len()).map(AgentRuntime::new).collect(),
        resources,
        activities: LOAN_ACTIVITIES.to_vec(),
        duration_cv: 0.6,
        mean_wait: 20.0 * MINUTE as f64,
    };
    generate(&mut rng, &mut placer, routes, &office, 35.0 * MINUTE as f64)
}

const PRODUCTION_ACTIVITIES: [&str; 24] = [
    "Setup",
    "Turning & Milling",
    "Turning & Milling Q.C.",
    "Deburring",
    "Drilling",
    "Tapping",
    "Heat Treatment",
    "Nitriding",
    "Round Grinding",
    "Flat Grinding",
    "Wire Cut",
    "Lapping",
    "Polishing",
    "Grinding Rework",
    "Laser Marking",
    "Welding",
    "Assembly",
    "Washing",
    "Measuring",
    "Painting",
    "Final Inspection Q.C.",
    "Rework Q.C.",
    "Packing",
    "Shipping",
];

/// Production-like log: 225 cases, 4503 events, 24 activities, 41 resources,
/// two weekday shifts.
pub fn production_like(seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts = weekday_hours(&WEEKDAYS, 6, 22);
    let saturday = weekday_hours(&[0, 1, 2, 3, 4, 5], 6, 14);
    // Resource r serves activity r % 24: the first 17 activities get two.
    let resources: Vec<Resource> = (0..41)
        .map(|r| {
            let schedule = if r % 5 == 0 { saturday.clone() } else { shifts.clone() };
            Resource::new(format!("Operator {:02}", r + 1), schedule, 0.8 + 0.1 * (r % 5) as f64)
        })
        .collect();
    let pool = |activity: usize| -> Vec<usize> { (0..41).filter(|r| r % 24 == activity).collect() };
    let pools: Vec<Vec<usize>> = (0..24).map(pool).collect();
    let families: [&[usize]; 4] = [
        &[0, 1, 2, 3, 4, 5, 6, 8, 11, 12, 14, 17, 18, 20, 22, 23],
        &[0, 1, 2, 4, 5, 7, 9, 10, 13, 12, 14, 16, 17, 18, 20, 22, 23],
        &[0, 1, 2, 3, 15, 16, 19, 17, 18, 20, 22, 23],
        &[0, 1, 2, 4, 6, 8, 9, 11, 12, 3, 17, 14, 18, 20, 16, 22, 23],
    ];
    let mean_duration: Vec<f64> = (0..24).map(|a| ((a * 37 % 11) as f64 * 0.4 + 0.6) * HOUR as f64).collect();
    let route = |rng: &mut ChaCha8Rng| -> Vec<Step> {
        let family = *families.choose(rng).unwrap();
        let mut s = Vec::new();
        for &a in family {
            let mut passes = 1 + usize::from(rng.random_bool(0.15));
            while passes > 0 {
                s.push((a, *pools[a].choose(rng).unwrap(), mean_duration[a]));
                passes -= 1;
                let is_check = PRODUCTION_ACTIVITIES[a].ends_with("Q.C.");
                if is_check && rng.random_bool(0.25) {
                    s.push((21, *pools[21].choose(rng).unwrap(), mean_duration[21]));
                    s.push((13, *pools[13].choose(rng).unwrap(), mean_duration[13]));
                }
            }
        }
        s
    };
    let routes = routes_with_total(&mut rng, 225, 4503, route);
    let mut placer = Placer {
        runtimes: (0..resources.len()).map(AgentRuntime::new).collect(),
        resources,
        activities: PRODUCTION_ACTIVITIES.to_vec(),
        duration_cv: 0.8,
        mean_wait: HOUR as f64,
    };
    generate(&mut rng, &mut placer, routes, &shifts, 1.4 * DAY as f64)
}

/// Two teams that each keep their cases: team X is slow and thorough, team Y
/// quick. Activity order and reviewer depend on who received the case.
pub fn team_handover(seed: u64, cases: usize) -> EventLog {
    const ACTS: [&str; 5] = ["Receive", "Deep check", "Quick check", "Review", "Close"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let always = Schedule::always_available(60);
    let names = ["Xavier", "Xena", "Yann", "Yoko", "Slow reviewer", "Fast reviewer"];
    let resources: Vec<Resource> = names.iter().map(|n| Resource::new(*n, always.clone(), 1.0)).collect();
    let m = MINUTE as f64;
    let route = |rng: &mut ChaCha8Rng| -> Vec<Step> {
        let agent = rng.random_range(0..4);
        if agent < 2 {
            vec![(0, agent, 10.0 * m), (1, agent, 60.0 * m), (3, 4, 45.0 * m), (4, agent, 10.0 * m)]
        } else {
            vec![(0, agent, 10.0 * m), (2, agent, 10.0 * m), (3, 5, 5.0 * m), (4, agent, 5.0 * m)]
        }
    };
    let routes: Vec<Vec<Step>> = (0..cases).map(|_| route(&mut rng)).collect();
    let mut placer = Placer {
        runtimes: (0..resources.len()).map(AgentRuntime::new).collect(),
        resources,
        activities: ACTS.to_vec(),
        duration_cv: 0.2,
        mean_wait: 0.0,
    };
    generate(&mut rng, &mut placer, routes, &always, HOUR as f64)
}

/// Random first-order process over `activities` activities and `resources`
/// named resources; events of activity 0 have no resource.
fn random_process(seed: u64, activities: usize, resources: usize, cases: usize, schedule: Schedule, mean_gap: f64) -> EventLog {
    const NAMES: [&str; 12] = [
        "Register", "Triage", "Investigate", "Escalate", "Resolve", "Confirm", "Reopen", "Document", "Notify",
        "Approve", "Archive", "Bill",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<Vec<f64>> =
        (0..activities).map(|_| (0..=activities).map(|_| rng.random::<f64>().powi(3)).collect()).collect();
    let mut res: Vec<Resource> = vec![Resource::system()];
    res.extend((0..resources).map(|r| Resource::new(format!("Agent {}", r + 1), schedule.clone(), 0.8 + 0.1 * (r % 4) as f64)));
    let alloc: Vec<Vec<usize>> = (0..activities)
        .map(|a| if a == 0 { vec![0] } else { (1..=resources).filter(|r| (r + a) % 3 != 0).collect() })
        .collect();
    let means: Vec<f64> = (0..activities).map(|a| (5 + 7 * a) as f64 * MINUTE as f64).collect();
    let mut routes = Vec::with_capacity(cases);
    for _ in 0..cases {
        let mut s: Vec<Step> = vec![(0, 0, 0.0)];
        let mut current = 0;
        while s.len() < 4 * activities {
            let mut w = weights[current].clone();
            // Ending gets more likely as the case grows.
            w[activities] += 0.05 * s.len() as f64;
            let total: f64 = w.iter().sum();
            let mut r = rng.random::<f64>() * total;
            let mut next = activities;
            for (k, x) in w.iter().enumerate() {
                if r < *x {
                    next = k;
                    break;
                }
                r -= x;
            }
            if next == activities || next == 0 {
                break;
            }
            s.push((next, *alloc[next].choose(&mut rng).unwrap(), means[next]));
            current = next;
        }
        routes.push(s);
    }
    let mut placer = Placer {
        runtimes: (0..res.len()).map(AgentRuntime::new).collect(),
        resources: res,
        activities: NAMES[..activities].to_vec(),
        duration_cv: 0.5,
        mean_wait: 15.0 * MINUTE as f64,
    };
    let arrivals = schedule.clone();
    generate(&mut rng, &mut placer, routes, &arrivals, mean_gap)
}

/// Event on the fixture timeline: minutes after 2024-01-01 09:00 UTC (Monday).
fn fixture_event(case: &str, activity: &str, minute: i64, resource: Option<&str>) -> Event {
    const BASE: i64 = 1_704_067_200 + 9 * HOUR;
    Event {
        case_id: case.into(),
        activity: activity.into(),
        start: Timestamp(BASE + minute * MINUTE),
        end: Timestamp(BASE + (minute + 10) * MINUTE),
        resource: resource.map(Into::into),
    }
}

type Steps<'a> = &'a [(&'a str, Option<&'a str>)];

fn fixture(traces: &[(&str, Steps)]) -> EventLog {
    EventLog::from_events(traces.iter().enumerate().flat_map(|(c, (case, steps))| {
        steps
            .iter()
            .enumerate()
            .map(move |(k, (act, res))| fixture_event(case, act, c as i64 * 24 * 60 + k as i64 * 15, *res))
    }))
}

pub const RECEIVED: &str = "Application received";
pub const CREDIT: &str = "Check credit history";
pub const INCOME: &str = "Check income sources";
pub const ASSESS: &str = "Assess application";
pub const NOTIFY: &str = "Notify applicant";

/// Credit process where Angela's work always goes to Patrick and never to
/// Maria. Applications are received by an unrecorded system step.
pub fn credit_handover() -> EventLog {
    fixture(&[
        ("c1", &[(RECEIVED, None), (INCOME, Some("Oliver")), (CREDIT, Some("Angela")), (ASSESS, Some("Patrick")), (NOTIFY, Some("Patrick"))]),
        ("c2", &[(RECEIVED, None), (CREDIT, Some("Steve")), (INCOME, Some("Oliver")), (ASSESS, Some("Maria")), (NOTIFY, Some("Maria"))]),
        ("c3", &[(RECEIVED, None), (CREDIT, Some("Oliver")), (INCOME, Some("Angela")), (ASSESS, Some("Patrick")), (NOTIFY, Some("Maria"))]),
        ("c4", &[(RECEIVED, None), (INCOME, Some("Steve")), (CREDIT, Some("Oliver")), (ASSESS, Some("Patrick")), (NOTIFY, Some("Patrick"))]),
        ("c5", &[(RECEIVED, None), (CREDIT, Some("Oliver")), (INCOME, Some("Steve")), (ASSESS, Some("Maria")), (NOTIFY, Some("Maria"))]),
    ])
}

/// Credit process where Angela, after receiving an application, always
/// checks the credit history first; Steve and Oliver vary the order.
pub fn credit_local() -> EventLog {
    fixture(&[
        ("l1", &[(RECEIVED, Some("Angela")), (CREDIT, Some("Angela")), (INCOME, Some("Oliver")), (ASSESS, Some("Patrick"))]),
        ("l2", &[(RECEIVED, Some("Angela")), (CREDIT, Some("Angela")), (INCOME, Some("Angela")), (ASSESS, Some("Maria"))]),
        ("l3", &[(RECEIVED, Some("Steve")), (INCOME, Some("Steve")), (CREDIT, Some("Oliver")), (ASSESS, Some("Maria"))]),
        ("l4", &[(RECEIVED, Some("Steve")), (CREDIT, Some("Steve")), (INCOME, Some("Steve")), (ASSESS, Some("Patrick"))]),
        ("l5", &[(RECEIVED, Some("Oliver")), (INCOME, Some("Oliver")), (CREDIT, Some("Oliver")), (ASSESS, Some("Patrick"))]),
        ("l6", &[(RECEIVED, Some("Oliver")), (CREDIT, Some("Oliver")), (INCOME, Some("Steve")), (ASSESS, Some("Maria"))]),
    ])
}

/// Small log exercising prefix backoff: `<a,b,c>` three times, `<a,c,b>`,
/// `<b,c>`, `<c,a,b,c>` and `<a>` once each.
pub fn backoff_log() -> EventLog {
    let r = Some("r1");
    let s = Some("r2");
    fixture(&[
        ("b1", &[("a", r), ("b", r), ("c", s)]),
        ("b2", &[("a", r), ("b", s), ("c", s)]),
        ("b3", &[("a", s), ("b", r), ("c", r)]),
        ("b4", &[("a", r), ("c", s), ("b", s)]),
        ("b5", &[("b", s), ("c", r)]),
        ("b6", &[("c", r), ("a", s), ("b", r), ("c", r)]),
        ("b7", &[("a", r)]),
    ])
}

/// Nine varied logs for whole-log properties.
pub fn fixture_suite(seed: u64) -> Vec<(&'static str, EventLog)> {
    let always = Schedule::always_available(60);
    let mut night = vec![false; 168];
    for d in 0..7 {
        for h in [22, 23, 0, 1, 2, 3, 4, 5] {
            night[d * 24 + h] = true;
        }
    }
    let night = Schedule::from_slots(60, night);
    vec![
        ("loan_like", loan_like(seed)),
        ("production_like", production_like(seed)),
        ("credit_handover", credit_handover()),
        ("credit_local", credit_local()),
        ("backoff", backoff_log()),
        ("team_handover", team_handover(seed, 400)),
        ("service_desk", random_process(seed, 8, 6, 300, always, 2.0 * HOUR as f64)),
        ("night_shift", random_process(seed + 1, 6, 4, 150, night, 3.0 * HOUR as f64)),
        ("office_small", random_process(seed + 2, 10, 12, 200, weekday_hours(&WEEKDAYS, 8, 18), 90.0 * MINUTE as f64)),
    ]
}

/// One always-available agent performing one activity with a fixed
/// duration; cases arrive a fixed gap apart.
pub fn single_agent_model(duration_secs: i64, gap_secs: i64) -> Mas {
    let base = EPOCH_MONDAY.0;
    let log = EventLog::from_events((0..3).map(|k| Event {
        case_id: format!("s{k}"),
        activity: "work".into(),
        start: Timestamp(base + k * 10 * HOUR),
        end: Timestamp(base + k * 10 * HOUR + duration_secs),
        resource: Some("solo".into()),
    }));
    let mut mas = discover_mas(&log, &DiscoveryOptions::default()).expect("fixture discovers");
    mas.agents[0].schedule = Schedule::always_available(60);
    mas.agents[0].capabilities.durations.insert("work".into(), FittedDistribution::fixed(duration_secs as f64));
    mas.interarrival = FittedDistribution::fixed(gap_secs as f64);
    mas.extraneous_delays.clear();
    mas
}
