//! Second-precision UTC timestamps and weekly calendar arithmetic.

use std::fmt;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

pub const MINUTE: i64 = 60;
pub const HOUR: i64 = 3600;
pub const DAY: i64 = 86_400;
pub const WEEK: i64 = 7 * DAY;

/// Seconds since the Unix epoch, UTC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn seconds(self) -> i64 {
        self.0
    }

    /// Day of week, Monday = 0.
    pub fn weekday(self) -> u32 {
        // 1970-01-01 was a Thursday.
        (self.0.div_euclid(DAY) + 3).rem_euclid(7) as u32
    }

    pub fn second_of_day(self) -> i64 {
        self.0.rem_euclid(DAY)
    }

    /// Offset from the most recent Monday 00:00.
    pub fn second_of_week(self) -> i64 {
        self.weekday() as i64 * DAY + self.second_of_day()
    }

    /// Monday-based week counter since the epoch.
    pub fn week_index(self) -> i64 {
        (self.0.div_euclid(DAY) + 3).div_euclid(7)
    }

    pub fn week_start(self) -> Timestamp {
        Timestamp(self.0 - self.second_of_week())
    }

    /// Parses ISO-8601 / RFC 3339 text. Offsets are honoured, naive values are
    /// read as UTC, fractional seconds are truncated.
    pub fn parse(text: &str) -> Option<Timestamp> {
        let text = text.trim();
        if let Ok(dt) = DateTime::parse_from_rfc3339(text) {
            return Some(Timestamp(dt.timestamp()));
        }
        for fmt in ["%Y-%m-%d %H:%M:%S%.f%:z", "%Y-%m-%dT%H:%M:%S%.f%#z", "%Y-%m-%d %H:%M:%S%.f%#z"] {
            if let Ok(dt) = DateTime::parse_from_str(text, fmt) {
                return Some(Timestamp(dt.timestamp()));
            }
        }
        for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
            if let Ok(dt) = NaiveDateTime::parse_from_str(text, fmt) {
                return Some(Timestamp(dt.and_utc().timestamp()));
            }
        }
        None
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match DateTime::<Utc>::from_timestamp(self.0, 0) {
            Some(dt) => write!(f, "{}", dt.format("%Y-%m-%dT%H:%M:%SZ")),
            None => write!(f, "{}", self.0),
        }
    }
}

impl std::ops::Add<i64> for Timestamp {
    type Output = Timestamp;

    fn add(self, rhs: i64) -> Timestamp {
        Timestamp(self.0 + rhs)
    }
}

impl std::ops::Sub for Timestamp {
    type Output = i64;

    fn sub(self, rhs: Timestamp) -> i64 {
        self.0 - rhs.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_common_layouts() {
        let expected = Timestamp(1_704_099_600); // 2024-01-01T09:00:00Z
        for text in [
            "2024-01-01T09:00:00Z",
            "2024-01-01T09:00:00.750Z",
            "2024-01-01 09:00:00",
            "2024-01-01T09:00:00",
            "2024-01-01 10:00:00+01:00",
            "2024-01-01T09:00:00+00:00",
            "2024-01-01 09:00:00.123+00:00",
        ] {
            assert_eq!(Timestamp::parse(text), Some(expected), "{text}");
        }
        assert_eq!(Timestamp::parse("yesterday"), None);
    }

    #[test]
    fn weekday_and_week() {
        let monday = Timestamp::parse("2024-01-01T09:30:00Z").unwrap();
        assert_eq!(monday.weekday(), 0);
        assert_eq!(monday.second_of_day(), 9 * HOUR + 30 * MINUTE);
        let sunday = Timestamp::parse("2024-01-07T23:59:59Z").unwrap();
        assert_eq!(sunday.weekday(), 6);
        assert_eq!(sunday.week_index(), monday.week_index());
        let next = Timestamp::parse("2024-01-08T00:00:00Z").unwrap();
        assert_eq!(next.week_index(), monday.week_index() + 1);
        assert_eq!(next.week_start(), next);
        assert_eq!(Timestamp(0).weekday(), 3);
    }

    #[test]
    fn display_is_iso_utc() {
        assert_eq!(Timestamp(1_704_099_600).to_string(), "2024-01-01T09:00:00Z");
    }
}
