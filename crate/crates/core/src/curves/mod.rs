//! Dated zero curves, forward rates and linear curve diagnostics.
//!
//! Rates are continuously compounded and tenors are year fractions with
//! 1 day = 1/365 year. Zero rates are interpolated linearly between nodes,
//! held flat below the shortest tenor and never extrapolated beyond the
//! longest one.

mod csv;
mod fit;
mod history;

pub use self::csv::{parse_history_csv, read_history_csv, write_history_csv};
pub use fit::{fit_linear, FitDiagnostics};
pub use history::{CurveHistory, DateRange, DEFAULT_MAX_STALENESS_DAYS};

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{FundingError, Result};

pub const DAYS_PER_YEAR: f64 = 365.0;

/// Slack allowed when a query lands on the longest tenor up to rounding.
pub(crate) const TENOR_EPS: f64 = 1e-9;

/// Whole days corresponding to a year fraction, rounded to the nearest day.
pub fn year_fraction_to_days(years: f64) -> i64 {
    (years * DAYS_PER_YEAR).round() as i64
}

/// The calendar date `years` after `start`.
pub fn offset_date(start: NaiveDate, years: f64) -> NaiveDate {
    let days = year_fraction_to_days(years);
    if days >= 0 {
        start + Days::new(days as u64)
    } else {
        start - Days::new(days.unsigned_abs())
    }
}

pub fn year_fraction_between(from: NaiveDate, to: NaiveDate) -> f64 {
    (to - from).num_days() as f64 / DAYS_PER_YEAR
}

/// Anything that quotes a continuously compounded zero rate by tenor.
pub trait ZeroCurve: Send + Sync {
    /// Zero rate for tenor `t` (years).
    fn zero_rate(&self, t: f64) -> Result<f64>;

    /// Longest tenor the curve can quote.
    fn max_tenor(&self) -> f64;

    /// Rate of the shortest quoted point; the "short end" tracked by predictors.
    fn short_rate(&self) -> f64;

    /// Forward rate between `t1` and `t2`, from `y(t2)·t2 − y(t1)·t1`.
    fn forward_rate(&self, t1: f64, t2: f64) -> Result<f64> {
        if !(t1 >= 0.0) || !(t2 > t1) {
            return Err(FundingError::domain(format!(
                "forward period must satisfy 0 <= t1 < t2, got ({t1}, {t2})"
            )));
        }
        let growth = |t: f64| -> Result<f64> {
            if t == 0.0 {
                Ok(0.0)
            } else {
                Ok(self.zero_rate(t)? * t)
            }
        };
        Ok((growth(t2)? - growth(t1)?) / (t2 - t1))
    }
}

/// A dated set of zero rates on an ascending tenor grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCurve {
    as_of: NaiveDate,
    tenors: Vec<f64>,
    rates: Vec<f64>,
}

impl SpotCurve {
    pub fn new(as_of: NaiveDate, tenors: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if tenors.is_empty() {
            return Err(FundingError::domain("curve needs at least one node"));
        }
        if tenors.len() != rates.len() {
            return Err(FundingError::domain(format!(
                "{} tenors but {} rates",
                tenors.len(),
                rates.len()
            )));
        }
        if !tenors.iter().all(|t| t.is_finite() && *t > 0.0) {
            return Err(FundingError::domain("tenors must be finite and positive"));
        }
        if tenors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(FundingError::domain("tenors must be strictly ascending"));
        }
        if !rates.iter().all(|r| r.is_finite()) {
            return Err(FundingError::domain("rates must be finite"));
        }
        Ok(Self { as_of, tenors, rates })
    }

    /// Flat curve at `rate` on the given tenors.
    pub fn flat(as_of: NaiveDate, tenors: &[f64], rate: f64) -> Result<Self> {
        Self::new(as_of, tenors.to_vec(), vec![rate; tenors.len()])
    }

    /// Samples `lin` on `tenors`.
    pub fn from_linear(as_of: NaiveDate, tenors: &[f64], lin: &LinearCurve) -> Result<Self> {
        let rates = tenors.iter().map(|t| lin.a + lin.b * t).collect();
        Self::new(as_of, tenors.to_vec(), rates)
    }

    pub fn as_of(&self) -> NaiveDate {
        self.as_of
    }

    pub fn tenors(&self) -> &[f64] {
        &self.tenors
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.tenors.iter().copied().zip(self.rates.iter().copied())
    }

    /// Same rates on a different date.
    pub fn with_date(&self, as_of: NaiveDate) -> Self {
        Self { as_of, ..self.clone() }
    }

    pub fn same_grid(&self, other: &SpotCurve) -> bool {
        self.tenors == other.tenors
    }
}

impl ZeroCurve for SpotCurve {
    fn zero_rate(&self, t: f64) -> Result<f64> {
        let max = self.max_tenor();
        if !(t > 0.0) || t > max + TENOR_EPS {
            return Err(FundingError::domain(format!(
                "tenor {t} outside (0, {max}] on curve {}",
                self.as_of
            )));
        }
        let ts = &self.tenors;
        let rs = &self.rates;
        if t <= ts[0] {
            return Ok(rs[0]);
        }
        if t >= max {
            return Ok(rs[rs.len() - 1]);
        }
        // grids are short (Xibor points), a linear scan beats bisection here
        let hi = ts.iter().position(|&x| x >= t).unwrap_or(ts.len() - 1);
        if ts[hi] == t {
            return Ok(rs[hi]);
        }
        let lo = hi - 1;
        let w = (t - ts[lo]) / (ts[hi] - ts[lo]);
        Ok(rs[lo] + w * (rs[hi] - rs[lo]))
    }

    fn max_tenor(&self) -> f64 {
        self.tenors[self.tenors.len() - 1]
    }

    fn short_rate(&self) -> f64 {
        self.rates[0]
    }
}

/// `y(T) = a + b·T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCurve {
    pub a: f64,
    pub b: f64,
}

impl LinearCurve {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(FundingError::domain("linear curve coefficients must be finite"));
        }
        Ok(Self { a, b })
    }
}

impl ZeroCurve for LinearCurve {
    fn zero_rate(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(FundingError::domain(format!("tenor {t} must be positive")));
        }
        Ok(self.a + self.b * t)
    }

    fn max_tenor(&self) -> f64 {
        f64::INFINITY
    }

    fn short_rate(&self) -> f64 {
        self.a
    }
}
