use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use chrono::NaiveDate;
use funding_core::backtest::TTestMethod;
use funding_core::curves::fit_linear;
use funding_core::measures::{constant_provider, ewma_provider, forecast_at, pi_provider, q_provider};
use funding_core::optimize::{cost_profile, select_optimum};
use funding_core::{
    alpha_grid, calibrate_windows, run_backtest, BacktestOptions, BacktestReport, CalibrationOptions,
    CalibrationResult, CurveHistory, CurveProvider, DateRange, ErrorCategory, Exec, FundingError, Measure,
    PredictorParams,
};
use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::output::{fmt_bps, fmt_rate, json_bps, json_opt, json_rate, to_json_bytes, write_atomic};

#[derive(Debug)]
pub enum CliError {
    Core(FundingError),
    Output { path: PathBuf, source: std::io::Error },
}

impl From<FundingError> for CliError {
    fn from(e: FundingError) -> Self {
        CliError::Core(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::Output { path, source } => write!(f, "cannot write {}: {source}", path.display()),
        }
    }
}

impl CliError {
    pub fn label(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Parse => "parse",
                ErrorCategory::DataGap => "data-gap",
                ErrorCategory::Config => "config",
                ErrorCategory::Domain => "domain",
            },
            CliError::Output { .. } => "output",
        }
    }

    /// 2 is left to argument errors reported by clap.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.category() {
                ErrorCategory::Parse => 3,
                ErrorCategory::DataGap => 4,
                ErrorCategory::Config => 5,
                ErrorCategory::Domain => 6,
            },
            CliError::Output { .. } => 7,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn save(cfg: &RunConfig, name: &str, contents: &[u8]) -> CliResult<()> {
    write_atomic(&cfg.output_dir, name, contents)
        .map(|_| ())
        .map_err(|source| CliError::Output {
            path: cfg.output_dir.join(name),
            source,
        })
}

fn load_all(cfg: &RunConfig, currencies: &[String]) -> CliResult<BTreeMap<String, CurveHistory>> {
    let loaded = Exec::default().try_map(currencies, |c| cfg.load_history(c).map(|h| (c.clone(), h)))?;
    Ok(loaded.into_iter().collect())
}

fn calibration_windows(
    cfg: &RunConfig,
    histories: &BTreeMap<String, CurveHistory>,
) -> CliResult<BTreeMap<String, DateRange>> {
    histories
        .iter()
        .map(|(c, h)| Ok((c.clone(), cfg.calibration_window(h)?)))
        .collect()
}

fn params_json(p: &PredictorParams) -> Value {
    json!({
        "lambda_days": json_rate(p.lambda_days()),
        "theta_per_day": json_rate(p.theta),
        "omega": json_rate(p.omega),
    })
}

fn window_json(w: &DateRange) -> Value {
    json!({ "start": w.start, "end": w.end })
}

pub fn cmd_fit(cfg: &RunConfig, only: Option<&str>) -> CliResult<String> {
    let currencies = cfg.currencies(only)?;
    let rows = Exec::default().try_map(&currencies, |ccy| -> CliResult<_> {
        let history = cfg.load_history(ccy)?;
        let mut series = String::from("date,a,b,r_squared,p_value\n");
        let (mut sum_r2, mut sum_ln_p) = (0.0, 0.0);
        for curve in history.entries() {
            let (lin, diag) = fit_linear(curve)?;
            sum_r2 += diag.r_squared;
            sum_ln_p += diag.p_value.ln();
            series.push_str(&format!(
                "{},{},{},{},{:.6e}\n",
                curve.as_of(),
                fmt_rate(lin.a),
                fmt_rate(lin.b),
                fmt_rate(diag.r_squared),
                diag.p_value
            ));
        }
        save(cfg, &format!("fit_{ccy}.csv"), series.as_bytes())?;
        let n = history.len() as f64;
        Ok((ccy.clone(), history.len(), sum_r2 / n, (sum_ln_p / n).exp()))
    })?;

    let mut table = String::from("currency,n_curves,mean_r_squared,geomean_p_value\n");
    for (ccy, n, r2, p) in rows {
        table.push_str(&format!("{ccy},{n},{},{p:.6e}\n", fmt_rate(r2)));
    }
    save(cfg, "fit.csv", table.as_bytes())?;
    Ok(table)
}

pub fn cmd_optimize(cfg: &RunConfig, only: Option<&str>, date: NaiveDate, measure: Measure) -> CliResult<String> {
    let ccy = match (only, cfg.data_paths.len()) {
        (Some(c), _) => cfg.currencies(Some(c))?.remove(0),
        (None, 1) => cfg.data_paths.keys().next().cloned().expect("one currency"),
        (None, _) => {
            return Err(
                FundingError::Config("--currency is required when [data] lists several currencies".into()).into(),
            );
        }
    };
    let history = cfg.load_history(&ccy)?;
    let curve = history.curve_at(date)?;
    let setup = cfg.setup;
    let grid = alpha_grid(&setup, cfg.alpha_grid_step)?;

    let mut forecast = None;
    let provider: Box<dyn CurveProvider + '_> = match measure {
        Measure::Q => Box::new(q_provider(curve)),
        Measure::PConstant => Box::new(constant_provider(curve)),
        Measure::PEwma => {
            let f = forecast_at(&history, date, &cfg.params_or_standard(), setup.horizon_days())?;
            forecast = Some(f);
            Box::new(ewma_provider(curve, f))
        }
        Measure::PerfectInformation => Box::new(pi_provider(&history, date, setup.horizon)?),
        Measure::Realized => {
            return Err(FundingError::Config("the realized measure is only used inside backtests".into()).into());
        }
    };
    let profile = cost_profile(provider.as_ref(), &setup, &grid, Exec::default())?;
    let best = select_optimum(&profile)?;

    let mut curve_csv = String::from("alpha_days,alpha,cost\n");
    let mut points = Vec::with_capacity(profile.len());
    for c in &profile {
        let days = (c.alpha * funding_core::curves::DAYS_PER_YEAR).round();
        curve_csv.push_str(&format!("{days},{},{}\n", fmt_rate(c.alpha), fmt_rate(c.cav)));
        points.push(json!({ "alpha": json_rate(c.alpha), "cost": json_rate(c.cav) }));
    }
    let mut out = json!({
        "currency": ccy,
        "date": date,
        "curve_date": curve.as_of(),
        "measure": measure.to_string(),
        "setup": {
            "horizon_years": json_rate(setup.horizon),
            "buffer_years": json_rate(setup.buffer),
            "bid_ask": json_rate(setup.bid_ask),
        },
        "alpha_star": json_rate(best.alpha_star),
        "cost": json_rate(best.cost),
        "classification": serde_json::to_value(best.classification).expect("enum serializes"),
        "tie_count": best.tie_set.len(),
        "cost_curve": points,
    });
    if let Some(f) = forecast {
        out["forecast"] = json!({
            "gradient_raw_per_day": json_rate(f.gradient_raw),
            "gradient_effective_per_day": json_rate(f.gradient_effective),
            "short_rate": json_rate(f.short_rate_now),
        });
    }
    let stem = format!("optimize_{ccy}_{date}_{}", measure.to_string().to_ascii_lowercase());
    save(cfg, &format!("{stem}.csv"), curve_csv.as_bytes())?;
    let bytes = to_json_bytes(&out);
    save(cfg, &format!("{stem}.json"), &bytes)?;
    Ok(String::from_utf8(bytes).expect("JSON is UTF-8"))
}

fn calibration_json(r: &CalibrationResult, windows: &BTreeMap<String, DateRange>) -> Value {
    let per_ccy: Map<String, Value> = r
        .per_currency
        .iter()
        .map(|(c, v)| {
            let entry = json!({
                "objective": json_rate(*v),
                "objective_bps": json_bps(v * funding_core::backtest::BPS_PER_UNIT),
                "n_dates": r.dates_per_currency.get(c).copied().unwrap_or(0),
                "window": windows.get(c).map(window_json),
            });
            (c.clone(), entry)
        })
        .collect();
    let surface: Vec<Value> = r
        .surface
        .iter()
        .map(|e| {
            let mut p = params_json(&e.params);
            p["objective"] = json_rate(e.objective);
            p
        })
        .collect();
    json!({
        "params": params_json(&r.params),
        "objective": json_rate(r.objective),
        "objective_bps": json_bps(r.objective * funding_core::backtest::BPS_PER_UNIT),
        "per_currency": per_ccy,
        "grid_evaluations": r.grid_evaluations,
        "surface": surface,
    })
}

fn run_calibration(
    cfg: &RunConfig,
    histories: &BTreeMap<String, CurveHistory>,
) -> CliResult<(CalibrationResult, Vec<u8>)> {
    let windows = calibration_windows(cfg, histories)?;
    let options = CalibrationOptions {
        grid_step_days: cfg.alpha_grid_step,
        exec: Exec::default(),
    };
    let result = calibrate_windows(histories, &cfg.setup, &windows, &cfg.grid(), &options)?;
    let bytes = to_json_bytes(&calibration_json(&result, &windows));
    save(cfg, "calibration.json", &bytes)?;
    Ok((result, bytes))
}

pub fn cmd_calibrate(cfg: &RunConfig, only: Option<&str>) -> CliResult<String> {
    let histories = load_all(cfg, &cfg.currencies(only)?)?;
    let (_, bytes) = run_calibration(cfg, &histories)?;
    Ok(String::from_utf8(bytes).expect("JSON is UTF-8"))
}

fn backtest_csv(r: &BacktestReport) -> String {
    let bps = funding_core::backtest::BPS_PER_UNIT;
    let mut s = String::from("date,q_cost,ewma_cost,evpi_cost,ewma_alpha,q_minus_ewma,ewma_minus_evpi\n");
    for i in 0..r.dates.len() {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.dates[i],
            fmt_rate(r.q_cost[i]),
            fmt_rate(r.ewma_cost[i]),
            fmt_rate(r.evpi_cost[i]),
            fmt_rate(r.ewma_alpha[i]),
            fmt_bps((r.q_cost[i] - r.ewma_cost[i]) * bps),
            fmt_bps((r.ewma_cost[i] - r.evpi_cost[i]) * bps),
        ));
    }
    s
}

fn summary_json(r: &BacktestReport, window: &DateRange) -> Value {
    let s = &r.summary;
    json!({
        "window": window_json(window),
        "n_dates": s.n_dates,
        "mean_q_vs_ewma_bps": json_bps(s.mean_q_vs_ewma_bps),
        "t_stat": json_opt(s.t_stat, |t| json!(t)),
        "p_value": json_opt(s.p_value, |p| json!(p)),
        "mean_ewma_vs_evpi_bps": json_bps(s.mean_ewma_vs_evpi_bps),
        "mean_q_vs_evpi_bps": json_bps(s.mean_q_vs_evpi_bps),
        "efficiency_pct": json_opt(s.efficiency_pct, json_bps),
    })
}

pub fn cmd_backtest(cfg: &RunConfig, only: Option<&str>) -> CliResult<String> {
    let currencies = cfg.currencies(only)?;
    let histories = load_all(cfg, &currencies)?;
    let (params, calibration) = match cfg.params {
        Some(p) => (p, None),
        None => {
            let (r, _) = run_calibration(cfg, &histories)?;
            (r.params, Some(r.objective))
        }
    };
    let options = BacktestOptions {
        grid_step_days: cfg.alpha_grid_step,
        t_test: TTestMethod::Plain,
        exec: Exec::default(),
    };
    let summaries = Exec::default().try_map(&currencies, |ccy| -> CliResult<_> {
        let h = &histories[ccy];
        let window = cfg.backtest_window(h)?;
        let report = run_backtest(h, &cfg.setup, &params, &window, &options)?;
        let summary = summary_json(&report, &window);
        save(cfg, &format!("backtest_{ccy}.csv"), backtest_csv(&report).as_bytes())?;
        save(cfg, &format!("backtest_{ccy}.json"), &to_json_bytes(&summary))?;
        Ok((ccy.clone(), summary))
    })?;

    let out = json!({
        "params": params_json(&params),
        "calibrated": calibration.is_some(),
        "calibration_objective_bps": json_opt(calibration, |o| json_bps(o * funding_core::backtest::BPS_PER_UNIT)),
        "currencies": summaries.into_iter().collect::<Map<String, Value>>(),
    });
    let bytes = to_json_bytes(&out);
    save(cfg, "backtest_summary.json", &bytes)?;
    Ok(String::from_utf8(bytes).expect("JSON is UTF-8"))
}
