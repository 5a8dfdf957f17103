use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{offset_date, SpotCurve, ZeroCurve};
use crate::error::{FundingError, Result};

/// Lookups accept a curve up to this many days older than the requested date.
pub const DEFAULT_MAX_STALENESS_DAYS: u32 = 10;

/// Inclusive range of calendar dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DateRange {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DateRange {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(FundingError::Config(format!(
                "date range ends ({end}) before it starts ({start})"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

/// Date-ordered curves for one currency on a shared tenor grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveHistory {
    entries: Vec<SpotCurve>,
    max_staleness_days: u32,
}

impl CurveHistory {
    pub fn new(entries: Vec<SpotCurve>) -> Result<Self> {
        if entries.is_empty() {
            return Err(FundingError::InsufficientData("empty curve history".into()));
        }
        for w in entries.windows(2) {
            if w[1].as_of() <= w[0].as_of() {
                return Err(FundingError::domain(format!(
                    "history dates must be strictly ascending ({} then {})",
                    w[0].as_of(),
                    w[1].as_of()
                )));
            }
            if !w[1].same_grid(&w[0]) {
                return Err(FundingError::domain(format!(
                    "curve {} uses a different tenor grid than {}",
                    w[1].as_of(),
                    w[0].as_of()
                )));
            }
        }
        Ok(Self {
            entries,
            max_staleness_days: DEFAULT_MAX_STALENESS_DAYS,
        })
    }

    pub fn with_max_staleness(mut self, days: u32) -> Self {
        self.max_staleness_days = days;
        self
    }

    pub fn max_staleness_days(&self) -> u32 {
        self.max_staleness_days
    }

    pub fn entries(&self) -> &[SpotCurve] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.entries[0].as_of()
    }

    pub fn last_date(&self) -> NaiveDate {
        self.entries[self.entries.len() - 1].as_of()
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.entries.iter().map(|c| c.as_of())
    }

    pub fn tenors(&self) -> &[f64] {
        self.entries[0].tenors()
    }

    /// Index of the last entry dated at or before `date`.
    pub fn index_at_or_before(&self, date: NaiveDate) -> Option<usize> {
        let n = self.entries.partition_point(|c| c.as_of() <= date);
        n.checked_sub(1)
    }

    /// Most recent curve observed at or before `date`.
    ///
    /// Fails with a data gap when there is none, or when the newest one is
    /// older than the staleness limit.
    pub fn curve_at(&self, date: NaiveDate) -> Result<&SpotCurve> {
        let idx = self
            .index_at_or_before(date)
            .ok_or_else(|| FundingError::gap(date, "no curve on or before this date"))?;
        let curve = &self.entries[idx];
        let age = (date - curve.as_of()).num_days();
        if age > i64::from(self.max_staleness_days) {
            return Err(FundingError::gap(
                date,
                format!(
                    "latest curve is from {} ({age} days old, limit {})",
                    curve.as_of(),
                    self.max_staleness_days
                ),
            ));
        }
        Ok(curve)
    }

    /// Checks that curves are available from `start` through `start + horizon`.
    pub fn check_coverage(&self, start: NaiveDate, horizon: f64) -> Result<()> {
        self.curve_at(start)?;
        let end = offset_date(start, horizon);
        if self.last_date() < end - Days::new(u64::from(self.max_staleness_days)) {
            return Err(FundingError::gap(
                end,
                format!("history ends at {}, before the horizon", self.last_date()),
            ));
        }
        self.curve_at(end).map(|_| ())
    }

    /// Indices of the entries dated inside `range`.
    pub fn indices_in(&self, range: &DateRange) -> std::ops::Range<usize> {
        let lo = self.entries.partition_point(|c| c.as_of() < range.start);
        let hi = self.entries.partition_point(|c| c.as_of() <= range.end);
        lo..hi.max(lo)
    }

    /// Shortest-tenor rate of every entry, in date order.
    pub fn short_rates(&self) -> Vec<(NaiveDate, f64)> {
        self.entries.iter().map(|c| (c.as_of(), c.short_rate())).collect()
    }

    /// Copy holding only entries dated at or before `date`.
    pub fn truncated(&self, date: NaiveDate) -> Result<Self> {
        let n = self.entries.partition_point(|c| c.as_of() <= date);
        if n == 0 {
            return Err(FundingError::InsufficientData(format!("no curves on or before {date}")));
        }
        Ok(Self {
            entries: self.entries[..n].to_vec(),
            max_staleness_days: self.max_staleness_days,
        })
    }
}
