//! Curve providers for the four measures, and the EWMA short-end predictor.
//!
//! * Q: future funding costs today's forwards.
//! * P-Constant: the curve shape seen today persists unchanged.
//! * P-EWMA: today's shape shifted in parallel by a filtered short-end trend.
//! * Perfect information: the curves that were actually observed later.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cost::{CurveProvider, Measure};
use crate::curves::{offset_date, CurveHistory, ZeroCurve, DAYS_PER_YEAR};
use crate::error::{FundingError, Result};

fn check_period(t1: f64, t2: f64) -> Result<()> {
    if !(t1 >= 0.0) || !(t2 > t1) {
        return Err(FundingError::domain(format!(
            "forward period must satisfy 0 <= t1 < t2, got ({t1}, {t2})"
        )));
    }
    Ok(())
}

/// EWMA decay `λ` (years), gradient threshold `θ` (rate per day) and
/// gradient scaling `ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictorParams {
    pub lambda: f64,
    pub theta: f64,
    pub omega: f64,
}

impl PredictorParams {
    pub const MAX_LAMBDA_YEARS: f64 = 10.0;

    pub fn new(lambda: f64, theta: f64, omega: f64) -> Result<Self> {
        if !(0.0..=Self::MAX_LAMBDA_YEARS).contains(&lambda) {
            return Err(FundingError::Config(format!(
                "lambda must lie in [0, 10] years, got {lambda}"
            )));
        }
        if !(theta >= 0.0) {
            return Err(FundingError::Config(format!("theta must be non-negative, got {theta}")));
        }
        if !(0.0..=1.0).contains(&omega) {
            return Err(FundingError::Config(format!("omega must lie in [0, 1], got {omega}")));
        }
        Ok(Self { lambda, theta, omega })
    }

    /// 90-day decay, 0.005/day threshold, 30% scaling.
    pub fn standard() -> Self {
        Self {
            lambda: 90.0 / DAYS_PER_YEAR,
            theta: 0.005,
            omega: 0.3,
        }
    }

    pub fn lambda_days(&self) -> f64 {
        self.lambda * DAYS_PER_YEAR
    }
}

/// Predicted short-end drift after the refinements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftForecast {
    /// Filtered short-rate change per day.
    pub gradient_raw: f64,
    /// Drift per day actually applied to future curves.
    pub gradient_effective: f64,
    pub short_rate_now: f64,
}

impl ShiftForecast {
    /// A forecast that leaves the curve where it is.
    pub fn none(short_rate_now: f64) -> Self {
        Self {
            gradient_raw: 0.0,
            gradient_effective: 0.0,
            short_rate_now,
        }
    }
}

/// Causal EWMA of day-over-day changes in `short_rates`.
///
/// Element `i` is the filter output after observation `i` (`None` for the
/// first observation, which has no change yet). Each gap of `d` days decays
/// the previous state by `exp(−d / λ)`; `λ = 0` passes the latest change
/// straight through.
pub fn ewma_gradient_series(short_rates: &[(NaiveDate, f64)], lambda: f64) -> Vec<Option<f64>> {
    let mut out = Vec::with_capacity(short_rates.len());
    let mut state: Option<f64> = None;
    for (i, &(date, rate)) in short_rates.iter().enumerate() {
        if i > 0 {
            let (prev_date, prev_rate) = short_rates[i - 1];
            let gap_days = (date - prev_date).num_days() as f64;
            let change = (rate - prev_rate) / gap_days;
            state = Some(match state {
                None => change,
                Some(prev) => {
                    let keep = if lambda > 0.0 {
                        (-(gap_days / DAYS_PER_YEAR) / lambda).exp()
                    } else {
                        0.0
                    };
                    keep * prev + (1.0 - keep) * change
                }
            });
        }
        out.push(state);
    }
    out
}

/// EWMA short-rate gradient (per day) over the whole series.
pub fn ewma_gradient(short_rates: &[(NaiveDate, f64)], lambda: f64) -> Result<f64> {
    if short_rates.len() < 2 {
        return Err(FundingError::InsufficientData(format!(
            "EWMA gradient needs at least 2 observations, got {}",
            short_rates.len()
        )));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(FundingError::domain(format!(
            "EWMA decay must be non-negative, got {lambda}"
        )));
    }
    if short_rates.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(FundingError::domain("short-rate dates must be strictly ascending"));
    }
    Ok(ewma_gradient_series(short_rates, lambda)
        .pop()
        .flatten()
        .expect("two or more observations"))
}

/// Applies threshold, scaling and the zero floor to a raw gradient.
///
/// Gradients with `|g| < θ` are dropped, the rest scaled by `ω`. A negative
/// drift is then limited so that the short rate projected `horizon_days`
/// ahead does not fall below zero; when the short rate is already at or
/// below zero no downward drift is kept at all.
pub fn refine_gradient(g_raw: f64, params: &PredictorParams, short_rate_now: f64, horizon_days: f64) -> ShiftForecast {
    let mut g = if g_raw.abs() < params.theta {
        0.0
    } else {
        params.omega * g_raw
    };
    if g < 0.0 {
        let floor = if short_rate_now > 0.0 && horizon_days > 0.0 {
            -short_rate_now / horizon_days
        } else {
            0.0
        };
        g = g.max(floor);
    }
    ShiftForecast {
        gradient_raw: g_raw,
        gradient_effective: g,
        short_rate_now,
    }
}

/// Forecast at `date` using only curves observed on or before it.
pub fn forecast_at(
    history: &CurveHistory,
    date: NaiveDate,
    params: &PredictorParams,
    horizon_days: f64,
) -> Result<ShiftForecast> {
    let n = history.index_at_or_before(date).map(|i| i + 1).unwrap_or(0);
    let rates: Vec<_> = history.short_rates().into_iter().take(n).collect();
    let g = ewma_gradient(&rates, params.lambda)?;
    let short = rates[rates.len() - 1].1;
    Ok(refine_gradient(g, params, short, horizon_days))
}

#[derive(Debug, Clone, Copy)]
pub struct QProvider<'a, C: ?Sized> {
    curve: &'a C,
}

pub fn q_provider<C: ZeroCurve + ?Sized>(curve: &C) -> QProvider<'_, C> {
    QProvider { curve }
}

impl<C: ZeroCurve + ?Sized> CurveProvider for QProvider<'_, C> {
    fn forward(&self, t1: f64, t2: f64) -> Result<f64> {
        self.curve.forward_rate(t1, t2)
    }

    fn measure(&self) -> Measure {
        Measure::Q
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantProvider<'a, C: ?Sized> {
    curve: &'a C,
}

pub fn constant_provider<C: ZeroCurve + ?Sized>(curve: &C) -> ConstantProvider<'_, C> {
    ConstantProvider { curve }
}

impl<C: ZeroCurve + ?Sized> CurveProvider for ConstantProvider<'_, C> {
    fn forward(&self, t1: f64, t2: f64) -> Result<f64> {
        check_period(t1, t2)?;
        self.curve.zero_rate(t2 - t1)
    }

    fn measure(&self) -> Measure {
        Measure::PConstant
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EwmaProvider<'a, C: ?Sized> {
    curve: &'a C,
    forecast: ShiftForecast,
}

pub fn ewma_provider<C: ZeroCurve + ?Sized>(curve: &C, forecast: ShiftForecast) -> EwmaProvider<'_, C> {
    EwmaProvider { curve, forecast }
}

impl<C: ZeroCurve + ?Sized> EwmaProvider<'_, C> {
    /// Parallel shift applied to the curve at future time `t1` (years).
    pub fn shift_at(&self, t1: f64) -> f64 {
        let drift = self.forecast.gradient_effective * (DAYS_PER_YEAR * t1);
        // projected short end may not be pushed below zero
        let lowest = (-self.forecast.short_rate_now).min(0.0);
        drift.max(lowest)
    }

    pub fn forecast(&self) -> &ShiftForecast {
        &self.forecast
    }
}

impl<C: ZeroCurve + ?Sized> CurveProvider for EwmaProvider<'_, C> {
    fn forward(&self, t1: f64, t2: f64) -> Result<f64> {
        check_period(t1, t2)?;
        let base = self.curve.zero_rate(t2 - t1)?;
        if self.forecast.gradient_effective == 0.0 {
            return Ok(base);
        }
        Ok(base + self.shift_at(t1))
    }

    fn measure(&self) -> Measure {
        Measure::PEwma
    }
}

/// Quotes the spot curves actually observed after `start`.
#[derive(Debug, Clone, Copy)]
pub struct PerfectInfoProvider<'a> {
    history: &'a CurveHistory,
    start: NaiveDate,
}

pub fn pi_provider(history: &CurveHistory, start: NaiveDate, horizon: f64) -> Result<PerfectInfoProvider<'_>> {
    history.check_coverage(start, horizon)?;
    Ok(PerfectInfoProvider { history, start })
}

impl CurveProvider for PerfectInfoProvider<'_> {
    fn forward(&self, t1: f64, t2: f64) -> Result<f64> {
        check_period(t1, t2)?;
        let curve = self.history.curve_at(offset_date(self.start, t1))?;
        curve.zero_rate(t2 - t1)
    }

    fn measure(&self) -> Measure {
        Measure::PerfectInformation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{LinearCurve, SpotCurve};
    use approx::assert_abs_diff_eq;
    use chrono::Days;

    const M: f64 = 1.0 / 12.0;
    const TENORS: [f64; 6] = [M, 2.0 * M, 3.0 * M, 6.0 * M, 9.0 * M, 1.0];

    fn d0() -> NaiveDate {
        NaiveDate::from_ymd_opt(2004, 3, 1).unwrap()
    }

    fn series(rates: &[f64], gap: u64) -> Vec<(NaiveDate, f64)> {
        rates
            .iter()
            .enumerate()
            .map(|(i, &r)| (d0() + Days::new(gap * i as u64), r))
            .collect()
    }

    #[test]
    fn flat_providers() {
        let flat = SpotCurve::flat(d0(), &TENORS, 0.02).unwrap();
        let q = q_provider(&flat);
        let c = constant_provider(&flat);
        for (t1, t2) in [(0.0, 0.5), (0.3, 0.9), (0.9, 1.0)] {
            assert_abs_diff_eq!(q.forward(t1, t2).unwrap(), 0.02, epsilon = 1e-15);
            assert_abs_diff_eq!(c.forward(t1, t2).unwrap(), 0.02, epsilon = 1e-15);
        }
    }

    #[test]
    fn linear_providers() {
        let lin = LinearCurve::new(0.01, 0.02).unwrap();
        assert_abs_diff_eq!(q_provider(&lin).forward(0.5, 1.0).unwrap(), 0.04, epsilon = 1e-15);
        assert_abs_diff_eq!(
            constant_provider(&lin).forward(0.5, 1.0).unwrap(),
            0.02,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(q_provider(&lin).forward(0.0, 1.0).unwrap(), 0.03, epsilon = 1e-15);
    }

    #[test]
    fn ewma_constant_series_is_zero() {
        let s = series(&[0.03; 20], 7);
        assert_eq!(ewma_gradient(&s, 90.0 / 365.0).unwrap(), 0.0);
    }

    #[test]
    fn ewma_linear_trend() {
        let g = 2e-5;
        let rates: Vec<f64> = (0..400).map(|i| 0.05 + g * 7.0 * i as f64).collect();
        let s = series(&rates, 7);
        assert_abs_diff_eq!(ewma_gradient(&s, 90.0 / 365.0).unwrap(), g, epsilon = 1e-9);
    }

    #[test]
    fn ewma_zero_decay_passes_latest_change() {
        let s = series(&[0.010, 0.017], 7);
        assert_abs_diff_eq!(ewma_gradient(&s, 0.0).unwrap(), 0.001, epsilon = 1e-15);
    }

    #[test]
    fn ewma_needs_two_points() {
        assert!(matches!(
            ewma_gradient(&series(&[0.01], 7), 0.1),
            Err(FundingError::InsufficientData(_))
        ));
    }

    #[test]
    fn ewma_matches_direct_weighted_sum() {
        // uneven gaps, weights written out as explicit products
        let dates = [0u64, 7, 14, 28, 35, 49, 50, 57];
        let rates = [0.05, 0.051, 0.0495, 0.047, 0.0475, 0.046, 0.0461, 0.0455];
        let s: Vec<_> = dates
            .iter()
            .zip(rates)
            .map(|(&d, r)| (d0() + Days::new(d), r))
            .collect();
        let lambda = 30.0 / 365.0;
        let changes: Vec<f64> = (1..s.len())
            .map(|k| (s[k].1 - s[k - 1].1) / (dates[k] - dates[k - 1]) as f64)
            .collect();
        let keeps: Vec<f64> = (1..s.len())
            .map(|k| (-((dates[k] - dates[k - 1]) as f64 / 365.0) / lambda).exp())
            .collect();
        let m = changes.len();
        let mut direct = 0.0;
        for j in 0..m {
            let tail: f64 = keeps[j + 1..].iter().product();
            let own = if j == 0 { 1.0 } else { 1.0 - keeps[j] };
            direct += own * tail * changes[j];
        }
        assert_abs_diff_eq!(ewma_gradient(&s, lambda).unwrap(), direct, epsilon = 1e-15);
    }

    #[test]
    fn refinement_threshold_and_scaling() {
        let p = PredictorParams::new(0.25, 0.005, 0.3).unwrap();
        let f = refine_gradient(0.0001, &p, 0.03, 365.0);
        assert_eq!(f.gradient_effective, 0.0);
        let f = refine_gradient(0.01, &p, 0.03, 365.0);
        assert_abs_diff_eq!(f.gradient_effective, 0.003, epsilon = 1e-15);
    }

    #[test]
    fn refinement_zero_floor() {
        let p = PredictorParams::new(0.25, 0.0, 0.3).unwrap();
        let f = refine_gradient(-0.01, &p, 0.001, 365.0);
        assert_abs_diff_eq!(f.gradient_effective, -0.001 / 365.0, epsilon = 1e-18);
        assert_abs_diff_eq!(0.001 + f.gradient_effective * 365.0, 0.0, epsilon = 1e-15);
        let f = refine_gradient(-0.01, &p, -0.001, 365.0);
        assert_eq!(f.gradient_effective, 0.0);
    }

    #[test]
    fn ewma_provider_shift_and_floor() {
        let flat = SpotCurve::flat(d0(), &TENORS, 0.02).unwrap();
        let up = ShiftForecast {
            gradient_raw: 0.0001,
            gradient_effective: 0.0001,
            short_rate_now: 0.02,
        };
        let p = ewma_provider(&flat, up);
        for tau in [M, 0.25, 0.5] {
            assert_abs_diff_eq!(p.forward(0.5, 0.5 + tau).unwrap(), 0.03825, epsilon = 1e-12);
        }

        let low = SpotCurve::flat(d0(), &TENORS, 0.005).unwrap();
        let down = ShiftForecast {
            gradient_raw: -0.0001,
            gradient_effective: -0.0001,
            short_rate_now: 0.005,
        };
        assert_abs_diff_eq!(
            ewma_provider(&low, down).forward(0.5, 0.75).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn ewma_provider_without_drift_is_constant() {
        let lin = LinearCurve::new(0.02, 0.01).unwrap();
        let c = SpotCurve::from_linear(d0(), &TENORS, &lin).unwrap();
        let e = ewma_provider(&c, ShiftForecast::none(c.short_rate()));
        let k = constant_provider(&c);
        for (t1, t2) in [(0.0, 0.2), (0.4, 0.9), (0.1, 1.0)] {
            assert_eq!(e.forward(t1, t2).unwrap(), k.forward(t1, t2).unwrap());
        }
    }

    fn two_regime(jump_week: u64) -> CurveHistory {
        let entries = (0..80)
            .map(|w| {
                let lvl = if w < jump_week { 0.04 } else { 0.02 };
                SpotCurve::from_linear(d0() + Days::new(7 * w), &TENORS, &LinearCurve { a: lvl, b: 0.01 }).unwrap()
            })
            .collect();
        CurveHistory::new(entries).unwrap()
    }

    #[test]
    fn perfect_information_sees_the_jump() {
        let h = two_regime(26);
        let pi = pi_provider(&h, d0(), 1.0).unwrap();
        // before the jump: level 0.04; 26 weeks = 182 days ≈ 0.4986y
        assert_abs_diff_eq!(pi.forward(0.2, 0.45).unwrap(), 0.04 + 0.01 * 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(pi.forward(0.6, 0.85).unwrap(), 0.02 + 0.01 * 0.25, epsilon = 1e-12);
        // spot-starting rates agree with today's curve
        let c = &h.entries()[0];
        assert_eq!(pi.forward(0.0, 0.5).unwrap(), c.zero_rate(0.5).unwrap());
    }

    #[test]
    fn perfect_information_needs_coverage() {
        let h = two_regime(26);
        assert!(matches!(
            pi_provider(&h, h.last_date(), 1.0),
            Err(FundingError::DataGap { .. })
        ));
    }

    #[test]
    fn params_validation() {
        assert!(PredictorParams::new(11.0, 0.0, 0.5).is_err());
        assert!(PredictorParams::new(1.0, -0.1, 0.5).is_err());
        assert!(PredictorParams::new(1.0, 0.0, 1.5).is_err());
        let p = PredictorParams::standard();
        assert_abs_diff_eq!(p.lambda_days(), 90.0, epsilon = 1e-12);
    }
}
