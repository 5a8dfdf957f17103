//! Joint grid search for the EWMA predictor parameters across currencies.
//!
//! The objective of a parameter set is the mean over currencies of the mean
//! realized saving (Q cost minus P-EWMA cost) over the decision dates of the
//! calibration window.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::backtest::{decision_indices, grid_index, reference_outcome, ReferenceOutcome};
use crate::curves::{CurveHistory, DateRange, ZeroCurve, DAYS_PER_YEAR};
use crate::error::{FundingError, Result};
use crate::exec::Exec;
use crate::measures::{ewma_gradient_series, ewma_provider, refine_gradient, PredictorParams};
use crate::optimize::optimal_roll_on;
use crate::schedule::{alpha_grid, FundingSetup};

/// Candidate values for each predictor parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub lambda_days: Vec<f64>,
    /// Rate per day.
    pub theta: Vec<f64>,
    pub omega: Vec<f64>,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self {
            lambda_days: vec![30.0, 60.0, 90.0, 180.0, 365.0, 730.0],
            theta: vec![0.0, 0.001, 0.0025, 0.005, 0.01],
            omega: (0..=10).map(|k| f64::from(k) / 10.0).collect(),
        }
    }
}

impl CalibrationGrid {
    pub fn len(&self) -> usize {
        self.lambda_days.len() * self.theta.len() * self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every grid point in preference order: ascending ω, then descending θ,
    /// then ascending λ. The first point reaching the best objective wins.
    pub fn points(&self) -> Result<Vec<PredictorParams>> {
        if self.is_empty() {
            return Err(FundingError::Config("calibration grid is empty".into()));
        }
        let sorted = |xs: &[f64], descending: bool| {
            let mut v = xs.to_vec();
            v.sort_by(|a, b| if descending { b.total_cmp(a) } else { a.total_cmp(b) });
            v.dedup();
            v
        };
        let mut out = Vec::with_capacity(self.len());
        for &omega in &sorted(&self.omega, false) {
            for &theta in &sorted(&self.theta, true) {
                for &lambda_days in &sorted(&self.lambda_days, false) {
                    if !(0.0..=1.0).contains(&theta) {
                        return Err(FundingError::Config(format!("theta must lie in [0, 1], got {theta}")));
                    }
                    out.push(PredictorParams::new(lambda_days / DAYS_PER_YEAR, theta, omega)?);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub grid_step_days: u32,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            grid_step_days: 1,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEvaluation {
    pub params: PredictorParams,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub params: PredictorParams,
    /// Mean saving in rate units (1 bp = 1e-4).
    pub objective: f64,
    pub per_currency: BTreeMap<String, f64>,
    pub dates_per_currency: BTreeMap<String, usize>,
    pub grid_evaluations: usize,
    /// Objective of every grid point, in preference order.
    pub surface: Vec<GridEvaluation>,
}

struct DateTask<'a> {
    currency: usize,
    history: &'a CurveHistory,
    index: usize,
}

/// Realized savings of one decision date at every grid point.
fn savings_at_date(
    task: &DateTask<'_>,
    reference: &ReferenceOutcome,
    raw_by_lambda: &[Vec<Option<f64>>],
    points: &[(usize, PredictorParams)],
    setup: &FundingSetup,
    alpha_grid: &[f64],
) -> Result<Vec<f64>> {
    let curve = &task.history.entries()[task.index];
    let short = curve.short_rate();
    let q_cost = reference.realized[reference.q_index];
    // many grid points collapse onto the same effective drift
    let mut picked: HashMap<u64, usize> = HashMap::new();
    let mut out = Vec::with_capacity(points.len());
    for (lambda_slot, params) in points {
        let raw = raw_by_lambda[*lambda_slot][task.index].expect("decision dates have a prior change");
        let forecast = refine_gradient(raw, params, short, setup.horizon_days());
        let key = forecast.gradient_effective.to_bits();
        let k = match picked.get(&key) {
            Some(&k) => k,
            None => {
                let best = optimal_roll_on(&ewma_provider(curve, forecast), setup, alpha_grid, Exec::Sequential)?;
                let k = grid_index(alpha_grid, best.alpha_star);
                picked.insert(key, k);
                k
            }
        };
        out.push(q_cost - reference.realized[k]);
    }
    Ok(out)
}

/// Grid search maximizing the average saving of P-EWMA over Q.
///
/// Decision dates are the history's own dates inside `window` (the first
/// entry of a history is skipped since it carries no short-rate change).
pub fn calibrate(
    histories: &BTreeMap<String, CurveHistory>,
    setup: &FundingSetup,
    window: &DateRange,
    grid: &CalibrationGrid,
    options: &CalibrationOptions,
) -> Result<CalibrationResult> {
    let windows = histories.keys().map(|k| (k.clone(), *window)).collect();
    calibrate_windows(histories, setup, &windows, grid, options)
}

/// [`calibrate`] with a separate window per currency, for panels whose
/// histories start on different dates.
pub fn calibrate_windows(
    histories: &BTreeMap<String, CurveHistory>,
    setup: &FundingSetup,
    windows: &BTreeMap<String, DateRange>,
    grid: &CalibrationGrid,
    options: &CalibrationOptions,
) -> Result<CalibrationResult> {
    let params = grid.points()?;
    if histories.is_empty() {
        return Err(FundingError::Config("no currencies to calibrate".into()));
    }
    let alphas = alpha_grid(setup, options.grid_step_days)?;

    let mut lambdas: Vec<f64> = params.iter().map(|p| p.lambda).collect();
    lambdas.sort_by(f64::total_cmp);
    lambdas.dedup();
    let points: Vec<(usize, PredictorParams)> = params
        .iter()
        .map(|p| {
            (
                lambdas.iter().position(|&l| l == p.lambda).expect("collected above"),
                *p,
            )
        })
        .collect();

    let mut tasks = Vec::new();
    let mut raw: Vec<Vec<Vec<Option<f64>>>> = Vec::new();
    for (c, (name, history)) in histories.iter().enumerate() {
        let window = windows
            .get(name)
            .ok_or_else(|| FundingError::Config(format!("no calibration window for {name}")))?;
        let indices = decision_indices(history, window);
        if indices.is_empty() {
            return Err(FundingError::DataGap {
                date: window.start,
                reason: format!("{name} has no decision dates up to {}", window.end),
            });
        }
        tasks.extend(indices.into_iter().map(|index| DateTask {
            currency: c,
            history,
            index,
        }));
        let rates = history.short_rates();
        raw.push(lambdas.iter().map(|&l| ewma_gradient_series(&rates, l)).collect());
    }

    let savings = options.exec.try_map(&tasks, |task| -> Result<Vec<f64>> {
        let curve = &task.history.entries()[task.index];
        let reference = reference_outcome(task.history, setup, &alphas, curve, Exec::Sequential)?;
        savings_at_date(task, &reference, &raw[task.currency], &points, setup, &alphas)
    })?;

    // per currency, per grid point: mean over dates, summed in date order
    let n_ccy = histories.len();
    let mut sums = vec![vec![0.0; points.len()]; n_ccy];
    let mut counts = vec![0usize; n_ccy];
    for (task, row) in tasks.iter().zip(&savings) {
        counts[task.currency] += 1;
        for (acc, s) in sums[task.currency].iter_mut().zip(row) {
            *acc += s;
        }
    }
    let per_ccy_mean = |c: usize, g: usize| sums[c][g] / counts[c] as f64;
    let objective = |g: usize| (0..n_ccy).map(|c| per_ccy_mean(c, g)).sum::<f64>() / n_ccy as f64;

    let surface: Vec<GridEvaluation> = points
        .iter()
        .enumerate()
        .map(|(g, (_, p))| GridEvaluation {
            params: *p,
            objective: objective(g),
        })
        .collect();
    let mut best = 0;
    for (g, e) in surface.iter().enumerate() {
        if e.objective > surface[best].objective {
            best = g;
        }
    }

    let names: Vec<&String> = histories.keys().collect();
    Ok(CalibrationResult {
        params: surface[best].params,
        objective: surface[best].objective,
        per_currency: (0..n_ccy).map(|c| (names[c].clone(), per_ccy_mean(c, best))).collect(),
        dates_per_currency: (0..n_ccy).map(|c| (names[c].clone(), counts[c])).collect(),
        grid_evaluations: points.len(),
        surface,
    })
}
