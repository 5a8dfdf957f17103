//! Roll schedules implied by a roll length under a liquidity buffer.
//!
//! Funding of tenor α is bought at time 0. Whenever the live funding has
//! exactly Δ left to run and does not yet reach the horizon, the next roll is
//! bought and the Δ remainder is sold, so roll `i` starts at `i·(α − Δ)`. The
//! final purchase is cut short so that it matures exactly at the horizon.

use serde::{Deserialize, Serialize};

use crate::curves::DAYS_PER_YEAR;
use crate::error::{FundingError, Result};

/// Slack used when a roll count ratio is an integer up to rounding.
const CEIL_EPS: f64 = 1e-9;

/// Horizon, regulatory buffer and bid-ask recovery fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundingSetup {
    /// Funding horizon `h` in years.
    pub horizon: f64,
    /// Regulatory buffer `Δ` in years.
    pub buffer: f64,
    /// Fraction `φ` of funding value recovered when selling the buffer remainder.
    pub bid_ask: f64,
}

impl FundingSetup {
    pub fn new(horizon: f64, buffer: f64, bid_ask: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(FundingError::Config(format!("horizon must be positive, got {horizon}")));
        }
        if !(buffer > 0.0 && buffer <= horizon) {
            return Err(FundingError::Config(format!(
                "buffer must lie in (0, horizon], got {buffer} with horizon {horizon}"
            )));
        }
        if !(bid_ask > 0.0 && bid_ask <= 1.0) {
            return Err(FundingError::Config(format!(
                "bid-ask fraction must lie in (0, 1], got {bid_ask}"
            )));
        }
        Ok(Self {
            horizon,
            buffer,
            bid_ask,
        })
    }

    /// One-year horizon, one-month buffer, 75% bid-ask recovery.
    pub fn standard() -> Self {
        Self {
            horizon: 1.0,
            buffer: 1.0 / 12.0,
            bid_ask: 0.75,
        }
    }

    pub fn with_bid_ask(self, bid_ask: f64) -> Result<Self> {
        Self::new(self.horizon, self.buffer, bid_ask)
    }

    pub fn horizon_days(&self) -> f64 {
        self.horizon * DAYS_PER_YEAR
    }
}

/// Number of rolls to reach horizon `h_n` with roll length `alpha_n`, both in
/// units of the buffer.
pub fn n_rolls(h_n: f64, alpha_n: f64) -> Result<u32> {
    if !(h_n > 0.0) || !(alpha_n > 0.0) {
        return Err(FundingError::domain(format!(
            "horizon and roll length must be positive, got ({h_n}, {alpha_n})"
        )));
    }
    if alpha_n >= h_n {
        return Ok(0);
    }
    if alpha_n <= 1.0 {
        return Err(FundingError::BufferViolation {
            alpha: alpha_n,
            delta: 1.0,
            horizon: h_n,
        });
    }
    let ratio = (h_n - alpha_n) / (alpha_n - 1.0);
    Ok((ratio - CEIL_EPS).ceil().max(0.0) as u32)
}

/// Gross excess funding as a percentage of the horizon.
pub fn gross_excess(h_n: f64, alpha_n: f64) -> Result<f64> {
    Ok(100.0 * f64::from(n_rolls(h_n, alpha_n)?) / h_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollEvent {
    pub index: u32,
    /// Start of the roll, years from the decision date.
    pub start: f64,
    /// Remainder of the previous funding sold at this roll (Δ), absent at the first purchase.
    pub sale_tenor: Option<f64>,
    pub purchase_tenor: f64,
}

impl RollEvent {
    pub fn maturity(&self) -> f64 {
        self.start + self.purchase_tenor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollSchedule {
    pub alpha: f64,
    pub n_rolls: u32,
    pub events: Vec<RollEvent>,
}

/// Lazily generated roll events; used directly by the cost evaluators.
#[derive(Debug, Clone)]
pub struct RollIter {
    alpha: f64,
    buffer: f64,
    horizon: f64,
    n_rolls: u32,
    next: u32,
}

impl RollIter {
    pub fn new(setup: &FundingSetup, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(FundingError::domain(format!(
                "roll length must be positive, got {alpha}"
            )));
        }
        if alpha < setup.horizon && alpha <= setup.buffer {
            return Err(FundingError::BufferViolation {
                alpha,
                delta: setup.buffer,
                horizon: setup.horizon,
            });
        }
        let n = n_rolls(setup.horizon / setup.buffer, alpha / setup.buffer)?;
        Ok(Self {
            alpha,
            buffer: setup.buffer,
            horizon: setup.horizon,
            n_rolls: n,
            next: 0,
        })
    }

    pub fn n_rolls(&self) -> u32 {
        self.n_rolls
    }
}

impl Iterator for RollIter {
    type Item = RollEvent;

    fn next(&mut self) -> Option<RollEvent> {
        if self.next > self.n_rolls {
            return None;
        }
        let i = self.next;
        self.next += 1;
        let start = f64::from(i) * (self.alpha - self.buffer);
        let purchase_tenor = if i == self.n_rolls {
            self.alpha.min(self.horizon - start)
        } else {
            self.alpha
        };
        Some(RollEvent {
            index: i,
            start,
            sale_tenor: (i >= 1).then_some(self.buffer),
            purchase_tenor,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.n_rolls + 1).saturating_sub(self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for RollIter {}

pub fn build_schedule(setup: &FundingSetup, alpha: f64) -> Result<RollSchedule> {
    let iter = RollIter::new(setup, alpha)?;
    let n_rolls = iter.n_rolls();
    Ok(RollSchedule {
        alpha,
        n_rolls,
        events: iter.collect(),
    })
}

/// Candidate roll lengths `Δ + step, Δ + 2·step, …` strictly below the
/// horizon, followed by the horizon itself (term funding).
pub fn alpha_grid(setup: &FundingSetup, step_days: u32) -> Result<Vec<f64>> {
    if step_days == 0 {
        return Err(FundingError::Config("alpha grid step must be at least one day".into()));
    }
    let step = f64::from(step_days) / DAYS_PER_YEAR;
    let mut grid = Vec::new();
    let mut k = 1u32;
    loop {
        let alpha = setup.buffer + f64::from(k) * step;
        if alpha >= setup.horizon - 1e-12 {
            break;
        }
        grid.push(alpha);
        k += 1;
    }
    grid.push(setup.horizon);
    Ok(grid)
}
