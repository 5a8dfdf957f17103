//! Out-of-sample replay of the Q, P-EWMA and perfect-information strategies.
//!
//! At each history date the three strategies pick a roll length once and hold
//! it to the horizon; every choice is then costed at the curves that were
//! actually observed.

mod stats;

pub use stats::{efficiency, newey_west_t_test, paired_t_test, t_test, TTestMethod, TTestResult};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cost::CostResult;
use crate::curves::{CurveHistory, DateRange, SpotCurve};
use crate::error::{FundingError, Result};
use crate::exec::Exec;
use crate::measures::{
    ewma_gradient_series, ewma_provider, q_provider, refine_gradient, PredictorParams, ShiftForecast,
};
use crate::optimize::{optimal_roll_on, realized_profile, select_optimum};
use crate::schedule::{alpha_grid, FundingSetup};

pub const BPS_PER_UNIT: f64 = 10_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BacktestOptions {
    pub grid_step_days: u32,
    pub t_test: TTestMethod,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for BacktestOptions {
    fn default() -> Self {
        Self {
            grid_step_days: 1,
            t_test: TTestMethod::Plain,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestSummary {
    pub n_dates: usize,
    pub mean_q_vs_ewma_bps: f64,
    pub mean_ewma_vs_evpi_bps: f64,
    pub mean_q_vs_evpi_bps: f64,
    /// `None` when the differences carry no variance.
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    /// `None` when perfect information does not beat Q on average.
    pub efficiency_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub dates: Vec<NaiveDate>,
    pub q_cost: Vec<f64>,
    pub ewma_cost: Vec<f64>,
    pub evpi_cost: Vec<f64>,
    pub q_alpha: Vec<f64>,
    pub ewma_alpha: Vec<f64>,
    pub evpi_alpha: Vec<f64>,
    pub ewma_forecast: Vec<ShiftForecast>,
    pub q_vs_ewma_bps: Vec<f64>,
    pub summary: BacktestSummary,
}

/// EWMA forecasts for every history entry, each using only entries up to
/// and including its own date. The first entry has no forecast.
pub fn ewma_forecasts(
    history: &CurveHistory,
    params: &PredictorParams,
    horizon_days: f64,
) -> Vec<Option<ShiftForecast>> {
    let rates = history.short_rates();
    ewma_gradient_series(&rates, params.lambda)
        .into_iter()
        .zip(&rates)
        .map(|(g, &(_, short))| g.map(|g| refine_gradient(g, params, short, horizon_days)))
        .collect()
}

/// History indices inside `window` that can serve as decision dates: every
/// one except the very first entry, which has no short-rate change yet.
pub fn decision_indices(history: &CurveHistory, window: &DateRange) -> Vec<usize> {
    history.indices_in(window).filter(|&i| i > 0).collect()
}

/// Realized costs over the grid plus the Q strategy's pick, both independent
/// of the predictor parameters.
pub(crate) struct ReferenceOutcome {
    pub realized: Vec<f64>,
    pub q_index: usize,
    pub evpi_index: usize,
}

pub(crate) fn grid_index(grid: &[f64], alpha: f64) -> usize {
    grid.iter()
        .position(|&a| a == alpha)
        .expect("optimizer returns a grid point")
}

pub(crate) fn reference_outcome(
    history: &CurveHistory,
    setup: &FundingSetup,
    grid: &[f64],
    curve: &SpotCurve,
    exec: Exec,
) -> Result<ReferenceOutcome> {
    let date = curve.as_of();
    let profile: Vec<CostResult> = realized_profile(history, setup, grid, date, exec)?;
    let evpi = select_optimum(&profile)?;
    let q = optimal_roll_on(&q_provider(curve), setup, grid, exec)?;
    Ok(ReferenceOutcome {
        realized: profile.iter().map(|c| c.cav).collect(),
        q_index: grid_index(grid, q.alpha_star),
        evpi_index: grid_index(grid, evpi.alpha_star),
    })
}

struct DateOutcome {
    date: NaiveDate,
    q: (f64, f64),
    ewma: (f64, f64),
    evpi: (f64, f64),
    forecast: ShiftForecast,
}

/// Replays `window` date by date.
pub fn run_backtest(
    history: &CurveHistory,
    setup: &FundingSetup,
    params: &PredictorParams,
    window: &DateRange,
    options: &BacktestOptions,
) -> Result<BacktestReport> {
    let grid = alpha_grid(setup, options.grid_step_days)?;
    let forecasts = ewma_forecasts(history, params, setup.horizon_days());
    let indices = decision_indices(history, window);
    if indices.is_empty() {
        return Err(FundingError::DataGap {
            date: window.start,
            reason: format!("no decision dates up to {}", window.end),
        });
    }

    let inner = options.exec.inner();
    let outcomes = options.exec.try_map(&indices, |&i| -> Result<DateOutcome> {
        let curve = &history.entries()[i];
        let forecast = forecasts[i].expect("decision dates have a forecast");
        let reference = reference_outcome(history, setup, &grid, curve, inner)?;
        let ewma = optimal_roll_on(&ewma_provider(curve, forecast), setup, &grid, inner)?;
        let e = grid_index(&grid, ewma.alpha_star);
        let pick = |k: usize| (grid[k], reference.realized[k]);
        Ok(DateOutcome {
            date: curve.as_of(),
            q: pick(reference.q_index),
            ewma: pick(e),
            evpi: pick(reference.evpi_index),
            forecast,
        })
    })?;

    let n = outcomes.len();
    let mut report = BacktestReport {
        dates: Vec::with_capacity(n),
        q_cost: Vec::with_capacity(n),
        ewma_cost: Vec::with_capacity(n),
        evpi_cost: Vec::with_capacity(n),
        q_alpha: Vec::with_capacity(n),
        ewma_alpha: Vec::with_capacity(n),
        evpi_alpha: Vec::with_capacity(n),
        ewma_forecast: Vec::with_capacity(n),
        q_vs_ewma_bps: Vec::with_capacity(n),
        summary: BacktestSummary {
            n_dates: n,
            mean_q_vs_ewma_bps: 0.0,
            mean_ewma_vs_evpi_bps: 0.0,
            mean_q_vs_evpi_bps: 0.0,
            t_stat: None,
            p_value: None,
            efficiency_pct: None,
        },
    };
    for o in outcomes {
        report.dates.push(o.date);
        report.q_alpha.push(o.q.0);
        report.q_cost.push(o.q.1);
        report.ewma_alpha.push(o.ewma.0);
        report.ewma_cost.push(o.ewma.1);
        report.evpi_alpha.push(o.evpi.0);
        report.evpi_cost.push(o.evpi.1);
        report.ewma_forecast.push(o.forecast);
        report.q_vs_ewma_bps.push((o.q.1 - o.ewma.1) * BPS_PER_UNIT);
    }
    report.summary = summarize(&report.q_cost, &report.ewma_cost, &report.evpi_cost, options.t_test)?;
    Ok(report)
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    xs.sum::<f64>() / n
}

/// Table-style statistics for aligned cost series.
pub fn summarize(q: &[f64], ewma: &[f64], evpi: &[f64], method: TTestMethod) -> Result<BacktestSummary> {
    let n = q.len();
    if ewma.len() != n || evpi.len() != n || n == 0 {
        return Err(FundingError::InsufficientData(
            "cost series must be non-empty and aligned".into(),
        ));
    }
    let q_ewma: Vec<f64> = q.iter().zip(ewma).map(|(a, b)| a - b).collect();
    let m_q_ewma = mean(q_ewma.iter().copied());
    let m_ewma_evpi = mean(ewma.iter().zip(evpi).map(|(a, b)| a - b));
    let m_q_evpi = mean(q.iter().zip(evpi).map(|(a, b)| a - b));

    let test = match t_test(&q_ewma, method) {
        Ok(t) => Some(t),
        Err(FundingError::DegenerateSample(_)) | Err(FundingError::InsufficientData(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(BacktestSummary {
        n_dates: n,
        mean_q_vs_ewma_bps: m_q_ewma * BPS_PER_UNIT,
        mean_ewma_vs_evpi_bps: m_ewma_evpi * BPS_PER_UNIT,
        mean_q_vs_evpi_bps: m_q_evpi * BPS_PER_UNIT,
        t_stat: test.map(|t| t.t_stat),
        p_value: test.map(|t| t.p_value),
        efficiency_pct: efficiency(m_q_ewma, m_q_evpi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::LinearCurve;
    use chrono::Days;

    const M: f64 = 1.0 / 12.0;
    const TENORS: [f64; 6] = [M, 2.0 * M, 3.0 * M, 6.0 * M, 9.0 * M, 1.0];

    fn history(level: impl Fn(u64) -> f64, slope: f64, weeks: u64) -> CurveHistory {
        let d0 = NaiveDate::from_ymd_opt(2006, 1, 2).unwrap();
        let entries = (0..weeks)
            .map(|w| {
                SpotCurve::from_linear(d0 + Days::new(7 * w), &TENORS, &LinearCurve { a: level(w), b: slope }).unwrap()
            })
            .collect();
        CurveHistory::new(entries).unwrap()
    }

    fn window(h: &CurveHistory, weeks: u64) -> DateRange {
        DateRange::new(h.first_date(), h.first_date() + Days::new(7 * weeks)).unwrap()
    }

    fn fast() -> BacktestOptions {
        BacktestOptions {
            grid_step_days: 7,
            ..Default::default()
        }
    }

    #[test]
    fn flat_history_is_degenerate() {
        let h = history(|_| 0.03, 0.0, 70);
        let s = FundingSetup::standard().with_bid_ask(1.0).unwrap();
        let r = run_backtest(&h, &s, &PredictorParams::standard(), &window(&h, 10), &fast()).unwrap();
        assert_eq!(r.dates.len(), 10);
        assert_eq!(r.q_cost, r.ewma_cost);
        assert_eq!(r.q_cost, r.evpi_cost);
        assert_eq!(r.summary.efficiency_pct, None);
        assert_eq!(r.summary.p_value, None);
    }

    #[test]
    fn evpi_dominates_every_date() {
        let h = history(
            |w| 0.05 - 0.0003 * w as f64 + 0.002 * ((w as f64) / 5.0).sin(),
            0.01,
            110,
        );
        let s = FundingSetup::standard();
        let p = PredictorParams::new(60.0 / 365.0, 0.0, 0.5).unwrap();
        let r = run_backtest(&h, &s, &p, &window(&h, 50), &fast()).unwrap();
        for i in 0..r.dates.len() {
            assert!(r.evpi_cost[i] <= r.q_cost[i]);
            assert!(r.evpi_cost[i] <= r.ewma_cost[i]);
        }
    }

    #[test]
    fn q_picks_term_on_positive_upward_curves() {
        let h = history(|w| 0.04 - 0.0002 * w as f64, 0.01, 80);
        let r = run_backtest(
            &h,
            &FundingSetup::standard(),
            &PredictorParams::standard(),
            &window(&h, 20),
            &fast(),
        )
        .unwrap();
        assert!(r.q_alpha.iter().all(|&a| a == 1.0));
    }

    #[test]
    fn window_beyond_coverage_is_a_data_gap() {
        let h = history(|_| 0.03, 0.01, 60);
        let w = DateRange::new(h.first_date(), h.last_date()).unwrap();
        let e = run_backtest(&h, &FundingSetup::standard(), &PredictorParams::standard(), &w, &fast()).unwrap_err();
        assert!(matches!(e, FundingError::DataGap { .. }), "{e}");
    }

    #[test]
    fn summary_statistics() {
        let q = [0.05, 0.05, 0.05, 0.05];
        let e = [0.049, 0.048, 0.0495, 0.047];
        let v = [0.045, 0.046, 0.0475, 0.044];
        let s = summarize(&q, &e, &v, TTestMethod::Plain).unwrap();
        assert!((s.mean_q_vs_ewma_bps - 16.25).abs() < 1e-9);
        assert!((s.mean_q_vs_evpi_bps - 43.75).abs() < 1e-9);
        assert!((s.mean_ewma_vs_evpi_bps - 27.5).abs() < 1e-9);
        assert!((s.efficiency_pct.unwrap() - 100.0 * 16.25 / 43.75).abs() < 1e-9);
        // diffs 10, 20, 5, 30 bps: sample sd = sqrt(368.75 / 3)
        let t = 16.25 / ((368.75f64 / 3.0).sqrt() / 2.0);
        assert!((s.t_stat.unwrap() - t).abs() < 1e-6);
        assert!(s.p_value.unwrap() > 0.05 && s.p_value.unwrap() < 0.1);
    }
}
