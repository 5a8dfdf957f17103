//! Average undiscounted funding cost of a roll choice.
//!
//! For roll length α the cost over horizon `h` is
//!
//! ```text
//! (1/h)·[ m·F(0, m) + Σ_{i=1..n} ( −φ·Δ·F(s_i, s_i + Δ) + q_i·F(s_i, min(s_i + α, h)) ) ]
//! ```
//!
//! with `m = min(α, h)`, `s_i = i·(α − Δ)` and `q_i = min(α, h − s_i)`. The
//! forward rates `F` come from a [`CurveProvider`], which encodes the measure.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::curves::{offset_date, CurveHistory, LinearCurve, ZeroCurve};
use crate::error::{FundingError, Result};
use crate::schedule::{n_rolls, FundingSetup, RollIter};

/// Which expectation a cost was computed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "P-Const")]
    PConstant,
    #[serde(rename = "P-EWMA")]
    PEwma,
    #[serde(rename = "PI")]
    PerfectInformation,
    Realized,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Q => "Q",
            Measure::PConstant => "P-Const",
            Measure::PEwma => "P-EWMA",
            Measure::PerfectInformation => "PI",
            Measure::Realized => "Realized",
        })
    }
}

impl FromStr for Measure {
    type Err = FundingError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "Q" => Ok(Measure::Q),
            "P-CONST" | "P-CONSTANT" => Ok(Measure::PConstant),
            "P-EWMA" => Ok(Measure::PEwma),
            "PI" => Ok(Measure::PerfectInformation),
            _ => Err(FundingError::Config(format!(
                "unknown measure `{s}` (expected Q, P-CONST, P-EWMA or PI)"
            ))),
        }
    }
}

/// Source of forward rates `F(t1, t2)` for `0 <= t1 < t2 <= h`, as assessed
/// at the decision date under some measure.
///
/// Implementations are read-only after construction and shared across
/// evaluation threads.
pub trait CurveProvider: Send + Sync {
    fn forward(&self, t1: f64, t2: f64) -> Result<f64>;

    fn measure(&self) -> Measure;
}

impl<P: CurveProvider + ?Sized> CurveProvider for &P {
    fn forward(&self, t1: f64, t2: f64) -> Result<f64> {
        (**self).forward(t1, t2)
    }

    fn measure(&self) -> Measure {
        (**self).measure()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostResult {
    pub alpha: f64,
    pub cav: f64,
    pub measure: Measure,
}

fn query<P: CurveProvider + ?Sized>(provider: &P, t1: f64, t2: f64) -> Result<f64> {
    provider.forward(t1, t2).map_err(|e| match e {
        FundingError::Domain(msg) => FundingError::Measure(format!(
            "{} provider cannot quote F({t1}, {t2}): {msg}",
            provider.measure()
        )),
        other => other,
    })
}

/// Expected average funding cost of roll length `alpha` under `provider`.
pub fn cav<P: CurveProvider + ?Sized>(provider: &P, setup: &FundingSetup, alpha: f64) -> Result<CostResult> {
    let h = setup.horizon;
    let mut total = 0.0;
    for event in RollIter::new(setup, alpha)? {
        let s = event.start;
        if let Some(sold) = event.sale_tenor {
            total -= setup.bid_ask * sold * query(provider, s, s + sold)?;
        }
        let end = (s + alpha).min(h);
        total += event.purchase_tenor * query(provider, s, end)?;
    }
    let cav = total / h;
    if !cav.is_finite() {
        return Err(FundingError::Measure(format!("non-finite cost for alpha {alpha}")));
    }
    Ok(CostResult {
        alpha,
        cav,
        measure: provider.measure(),
    })
}

/// How future curves relate to a linear curve `a + b·T` in [`cav_linear`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinearShape {
    /// Future funding at today's forwards: `F(s, s + q) = a + b·(2s + q)`.
    Forward,
    /// Today's curve shape persists: `F(s, s + q) = a + b·q`.
    Constant,
}

/// Closed-form cost for a linear zero curve.
pub fn cav_linear(lin: &LinearCurve, setup: &FundingSetup, alpha: f64, shape: LinearShape) -> Result<CostResult> {
    // validates alpha the same way the generic evaluator does
    RollIter::new(setup, alpha)?;
    let (a, b) = (lin.a, lin.b);
    let h = setup.horizon;
    let delta = setup.buffer;
    let n = n_rolls(h / delta, alpha / delta)?;

    let m = alpha.min(h);
    let mut total = (a + b * m) * m;
    for i in 1..=n {
        let s = f64::from(i) * (alpha - delta);
        let q = if i == n { alpha.min(h - s) } else { alpha };
        let drift = match shape {
            LinearShape::Forward => 2.0 * b * s,
            LinearShape::Constant => 0.0,
        };
        total += -setup.bid_ask * delta * (a + drift + delta * b) + q * (a + drift + q * b);
    }
    Ok(CostResult {
        alpha,
        cav: total / h,
        measure: match shape {
            LinearShape::Forward => Measure::Q,
            LinearShape::Constant => Measure::PConstant,
        },
    })
}

/// Cost actually incurred by holding roll length `alpha` from `start` to the
/// horizon, buying and selling at the spot curves observed on each roll date.
pub fn realized_cost(history: &CurveHistory, setup: &FundingSetup, alpha: f64, start: NaiveDate) -> Result<CostResult> {
    let events = RollIter::new(setup, alpha)?;
    history.check_coverage(start, setup.horizon)?;
    let mut total = 0.0;
    for event in events {
        let date = offset_date(start, event.start);
        let curve = history.curve_at(date)?;
        total += event.purchase_tenor * curve.zero_rate(event.purchase_tenor)?;
        if let Some(sold) = event.sale_tenor {
            total -= setup.bid_ask * sold * curve.zero_rate(sold)?;
        }
    }
    Ok(CostResult {
        alpha,
        cav: total / setup.horizon,
        measure: Measure::Realized,
    })
}
