//! Project calendar: numbered project days in a fixed local offset.

use chrono::{Duration, FixedOffset, NaiveDate, NaiveTime, TimeZone};
use serde::{Deserialize, Serialize};

use crate::Timestamp;

/// A run of consecutive project days starting at `start` (day 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calendar {
    pub start: NaiveDate,
    pub days: u32,
    /// Offset of the project's local clock from UTC.
    #[serde(default)]
    pub utc_offset_minutes: i32,
}

impl Calendar {
    pub fn new(start: NaiveDate, days: u32, utc_offset_minutes: i32) -> Self {
        Self {
            start,
            days,
            utc_offset_minutes,
        }
    }

    pub fn offset(&self) -> FixedOffset {
        FixedOffset::east_opt(self.utc_offset_minutes * 60).unwrap_or(FixedOffset::east_opt(0).unwrap())
    }

    /// Local calendar date of an instant.
    pub fn local_date(&self, at: Timestamp) -> NaiveDate {
        at.with_timezone(&self.offset()).date_naive()
    }

    /// Local wall-clock time of an instant.
    pub fn local_time(&self, at: Timestamp) -> NaiveTime {
        at.with_timezone(&self.offset()).time()
    }

    /// 1-based project day of an instant. Values outside `1..=days` are
    /// returned unclamped so callers can reason about neighbouring days.
    pub fn day_index(&self, at: Timestamp) -> i64 {
        (self.local_date(at) - self.start).num_days() + 1
    }

    /// The project day if the instant lies within the calendar.
    pub fn project_day(&self, at: Timestamp) -> Option<u32> {
        let day = self.day_index(at);
        (day >= 1 && day <= i64::from(self.days)).then_some(day as u32)
    }

    pub fn date_of_day(&self, day: i64) -> NaiveDate {
        self.start + Duration::days(day - 1)
    }

    /// The UTC instant of a local clock time on a project day.
    pub fn instant(&self, day: i64, time: NaiveTime) -> Timestamp {
        let local = self.date_of_day(day).and_time(time);
        self.offset()
            .from_local_datetime(&local)
            .single()
            .expect("fixed offsets are unambiguous")
            .to_utc()
    }

    pub fn day_numbers(&self) -> impl Iterator<Item = u32> {
        1..=self.days
    }

    /// Minutes since local midnight.
    pub fn minute_of_day(&self, at: Timestamp) -> f64 {
        let t = self.local_time(at);
        let secs = chrono::Timelike::num_seconds_from_midnight(&t);
        f64::from(secs) / 60.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;

    fn cal() -> Calendar {
        Calendar::new(NaiveDate::from_ymd_opt(2010, 8, 23).unwrap(), 5, 120)
    }

    #[test]
    fn day_index_uses_local_offset() {
        let c = cal();
        // 23:30 UTC on day 1 is already 01:30 local on day 2
        let t = Utc.with_ymd_and_hms(2010, 8, 23, 23, 30, 0).unwrap();
        assert_eq!(c.day_index(t), 2);
        let t = Utc.with_ymd_and_hms(2010, 8, 22, 12, 0, 0).unwrap();
        assert_eq!(c.day_index(t), 0);
        assert_eq!(c.project_day(t), None);
    }

    #[test]
    fn instant_round_trips_local_time() {
        let c = cal();
        let nine = NaiveTime::from_hms_opt(9, 0, 0).unwrap();
        let t = c.instant(3, nine);
        assert_eq!(t, Utc.with_ymd_and_hms(2010, 8, 25, 7, 0, 0).unwrap());
        assert_eq!(c.day_index(t), 3);
        assert_eq!(c.local_time(t), nine);
        assert_eq!(c.minute_of_day(t), 540.0);
    }
}
