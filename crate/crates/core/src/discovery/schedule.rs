//! Weekly working-time grids.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::event_log::Event;
use crate::time::{Timestamp, MINUTE, WEEK};

const DAY_NAMES: [&str; 7] = ["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];

/// A repeating week of equally sized slots, each working or not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleFile", into = "ScheduleFile")]
pub struct Schedule {
    granularity_minutes: u32,
    always_available: bool,
    slots: Vec<bool>,
    // Offset from week start at which the working run containing a slot
    // ends (i64::MAX when every slot works). Unused for idle slots.
    run_end: Vec<i64>,
    // Offset from week start of the next working slot, for idle slots.
    next_start: Vec<Option<i64>>,
}

impl Schedule {
    pub fn always_available(granularity_minutes: u32) -> Self {
        let n = slots_per_week(granularity_minutes);
        let mut s = Self::from_slots(granularity_minutes, vec![true; n]);
        s.always_available = true;
        s
    }

    /// Builds a grid from `7 * (1440 / granularity)` flags, Monday 00:00 first.
    ///
    /// # Panics
    /// If the slot count does not match the granularity.
    pub fn from_slots(granularity_minutes: u32, slots: Vec<bool>) -> Self {
        let n = slots_per_week(granularity_minutes);
        assert_eq!(slots.len(), n, "slot count must match granularity");
        let slot_len = granularity_minutes as i64 * MINUTE;
        let mut run_end = vec![0; n];
        let mut next_start = vec![None; n];
        for i in 0..n {
            // Scan forward (cyclically, at most one week) for the first slot
            // whose state differs.
            let first_diff = (1..=n).find(|&k| slots[(i + k) % n] != slots[i]);
            match (slots[i], first_diff) {
                (true, Some(k)) => run_end[i] = (i + k) as i64 * slot_len,
                (true, None) => run_end[i] = i64::MAX,
                (false, Some(k)) => next_start[i] = Some((i + k) as i64 * slot_len),
                (false, None) => {}
            }
        }
        Schedule { granularity_minutes, always_available: false, slots, run_end, next_start }
    }

    pub fn granularity_minutes(&self) -> u32 {
        self.granularity_minutes
    }

    pub fn is_always_available(&self) -> bool {
        self.always_available
    }

    pub fn slots(&self) -> &[bool] {
        &self.slots
    }

    pub fn slot_seconds(&self) -> i64 {
        self.granularity_minutes as i64 * MINUTE
    }

    pub fn slot_index(&self, t: Timestamp) -> usize {
        (t.second_of_week() / self.slot_seconds()) as usize
    }

    pub fn working_slot_count(&self) -> usize {
        self.slots.iter().filter(|s| **s).count()
    }

    /// Length of the longest contiguous working stretch; `None` when some
    /// stretch never ends.
    pub fn longest_run(&self) -> Option<i64> {
        if self.always_available {
            return None;
        }
        let len = self.slot_seconds();
        let mut best = 0;
        for (i, &working) in self.slots.iter().enumerate() {
            if working {
                if self.run_end[i] == i64::MAX {
                    return None;
                }
                best = best.max(self.run_end[i] - i as i64 * len);
            }
        }
        Some(best)
    }

    pub fn is_working(&self, t: Timestamp) -> bool {
        self.always_available || self.slots[self.slot_index(t)]
    }

    /// True when `[t, t + duration)` lies inside working time. A zero-length
    /// window needs `t` itself to be working.
    pub fn fits(&self, t: Timestamp, duration: i64) -> bool {
        if self.always_available {
            return true;
        }
        let slot = self.slot_index(t);
        if !self.slots[slot] {
            return false;
        }
        let end = self.run_end[slot];
        end == i64::MAX || t.second_of_week() + duration <= end
    }

    /// End of the contiguous working stretch containing `t`; `None` when it
    /// never ends.
    pub fn working_until(&self, t: Timestamp) -> Option<Timestamp> {
        if self.always_available {
            return None;
        }
        let slot = self.slot_index(t);
        if !self.slots[slot] {
            return Some(t);
        }
        match self.run_end[slot] {
            i64::MAX => None,
            end => Some(t.week_start() + end),
        }
    }

    /// Earliest instant `>= t` that is working time.
    pub fn next_working(&self, t: Timestamp) -> Option<Timestamp> {
        if self.is_working(t) {
            return Some(t);
        }
        self.next_start[self.slot_index(t)].map(|off| t.week_start() + off)
    }

    /// First slot boundary strictly after `t`.
    pub fn next_boundary(&self, t: Timestamp) -> Timestamp {
        let len = self.slot_seconds();
        Timestamp((t.0.div_euclid(len) + 1) * len)
    }
}

fn slots_per_week(granularity_minutes: u32) -> usize {
    assert!(
        granularity_minutes > 0 && 1440 % granularity_minutes == 0,
        "granularity must divide a day"
    );
    7 * (1440 / granularity_minutes) as usize
}

/// Serialized form: one string of '1'/'0' per weekday.
#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    granularity_minutes: u32,
    always_available: bool,
    days: Vec<(String, String)>,
}

impl From<Schedule> for ScheduleFile {
    fn from(s: Schedule) -> Self {
        let per_day = s.slots.len() / 7;
        let days = s
            .slots
            .chunks(per_day)
            .zip(DAY_NAMES)
            .map(|(chunk, name)| {
                (name.to_string(), chunk.iter().map(|&w| if w { '1' } else { '0' }).collect())
            })
            .collect();
        ScheduleFile { granularity_minutes: s.granularity_minutes, always_available: s.always_available, days }
    }
}

impl TryFrom<ScheduleFile> for Schedule {
    type Error = String;

    fn try_from(f: ScheduleFile) -> Result<Self, String> {
        if f.granularity_minutes == 0 || 1440 % f.granularity_minutes != 0 {
            return Err(format!("bad granularity {}", f.granularity_minutes));
        }
        if f.always_available {
            return Ok(Schedule::always_available(f.granularity_minutes));
        }
        let slots: Vec<bool> = f.days.iter().flat_map(|(_, d)| d.chars().map(|c| c == '1')).collect();
        if slots.len() != slots_per_week(f.granularity_minutes) {
            return Err("schedule grid has wrong size".into());
        }
        Ok(Schedule::from_slots(f.granularity_minutes, slots))
    }
}

/// Support-thresholded weekly grid from the agent's events.
///
/// Every slot touched by an event interval `[start, end)` (or the start slot
/// of an instantaneous event) scores one hit per event. A slot works when its
/// hits divided by the number of distinct weeks the agent was active reach
/// `support`.
pub fn discover_schedule<'a>(
    events: impl IntoIterator<Item = &'a Event>,
    granularity_minutes: u32,
    support: f64,
) -> Schedule {
    let n = slots_per_week(granularity_minutes);
    let slot_len = granularity_minutes as i64 * MINUTE;
    let mut hits = vec![0u64; n];
    let mut weeks = BTreeSet::new();
    let mut touched = vec![false; n];
    let mut any = false;
    for event in events {
        any = true;
        weeks.insert(event.start.week_index());
        weeks.insert(event.end.week_index());
        touched.iter_mut().for_each(|t| *t = false);
        let mut t = event.start;
        let span_end = if event.end > event.start { event.end } else { event.start + 1 };
        // Walk slot by slot; a week-long event touches everything.
        let limit = event.start + WEEK;
        while t < span_end && t < limit {
            touched[(t.second_of_week() / slot_len) as usize] = true;
            t = Timestamp((t.0.div_euclid(slot_len) + 1) * slot_len);
        }
        if span_end - event.start >= WEEK {
            touched.iter_mut().for_each(|t| *t = true);
        }
        for (h, &hit) in hits.iter_mut().zip(&touched) {
            *h += hit as u64;
        }
    }
    if !any {
        log::warn!("agent without events gets an always-available schedule");
        return Schedule::always_available(granularity_minutes);
    }
    let active_weeks = weeks.len() as f64;
    let mut slots: Vec<bool> = hits.iter().map(|&h| h as f64 / active_weeks >= support).collect();
    if !slots.iter().any(|s| *s) {
        // Activity too scattered to pass the threshold anywhere: keep every
        // slot that was ever used rather than a grid that never works.
        slots = hits.iter().map(|&h| h > 0).collect();
    }
    Schedule::from_slots(granularity_minutes, slots)
}

/// Working slots per day for the common 60-minute grid, for tests and fixtures.
pub fn weekday_hours(days: &[usize], from_hour: usize, to_hour: usize) -> Schedule {
    let mut slots = vec![false; 7 * 24];
    for &d in days {
        for h in from_hour..to_hour {
            slots[d * 24 + h] = true;
        }
    }
    Schedule::from_slots(60, slots)
}
