//! TOML run configuration.
//!
//! Relative paths (data files, output directory) resolve against the
//! directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};
use funding_core::curves::read_history_csv;
use funding_core::curves::DAYS_PER_YEAR;
use funding_core::{CalibrationGrid, CurveHistory, DateRange, FundingError, FundingSetup, PredictorParams, Result};
use serde::Deserialize;

const MONTHS_PER_YEAR: f64 = 12.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SetupSection {
    pub horizon_years: f64,
    pub buffer_months: f64,
    pub bid_ask: f64,
}

impl Default for SetupSection {
    fn default() -> Self {
        Self {
            horizon_years: 1.0,
            buffer_months: 1.0,
            bid_ask: 0.75,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub lambda_days: Vec<f64>,
    pub theta_per_day: Vec<f64>,
    pub omega: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = CalibrationGrid::default();
        Self {
            lambda_days: g.lambda_days,
            theta_per_day: g.theta,
            omega: g.omega,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationSection {
    /// Length of the calibration window from the start of each history.
    pub years: u32,
    /// Explicit window shared by every currency; overrides `years`.
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
    pub grid: GridSection,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            years: 5,
            start: None,
            end: None,
            grid: GridSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PredictorSection {
    pub lambda_days: f64,
    pub theta_per_day: f64,
    pub omega: f64,
}

impl Default for PredictorSection {
    fn default() -> Self {
        Self {
            lambda_days: 90.0,
            theta_per_day: 0.005,
            omega: 0.3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    setup: SetupSection,
    data: BTreeMap<String, PathBuf>,
    #[serde(default)]
    calibration: CalibrationSection,
    predictor: Option<PredictorSection>,
    #[serde(default = "default_step")]
    alpha_grid_step_days: u32,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default = "default_staleness")]
    max_staleness_days: u32,
}

fn default_step() -> u32 {
    1
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_staleness() -> u32 {
    funding_core::curves::DEFAULT_MAX_STALENESS_DAYS
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub setup: FundingSetup,
    pub data_paths: BTreeMap<String, PathBuf>,
    pub calibration: CalibrationSection,
    /// When set, backtests use these parameters and skip calibration.
    pub params: Option<PredictorParams>,
    pub alpha_grid_step: u32,
    pub output_dir: PathBuf,
    pub max_staleness_days: u32,
}

fn config_err(path: &Path, msg: impl std::fmt::Display) -> FundingError {
    FundingError::Config(format!("{}: {msg}", path.display()))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path, e))?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| config_err(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_raw(raw, base).map_err(|e| match e {
            FundingError::Config(msg) => config_err(path, msg),
            other => other,
        })
    }

    fn from_raw(raw: RawConfig, base: &Path) -> Result<Self> {
        let s = raw.setup;
        let setup = FundingSetup::new(s.horizon_years, s.buffer_months / MONTHS_PER_YEAR, s.bid_ask)
            .map_err(|e| FundingError::Config(format!("[setup] {e}")))?;
        if raw.data.is_empty() {
            return Err(FundingError::Config("[data] lists no currencies".into()));
        }
        let data_paths = raw
            .data
            .into_iter()
            .map(|(ccy, p)| {
                let full = base.join(p);
                if full.is_file() {
                    Ok((ccy, full))
                } else {
                    Err(FundingError::Config(format!(
                        "[data] {ccy}: no such file {}",
                        full.display()
                    )))
                }
            })
            .collect::<Result<_>>()?;
        if raw.alpha_grid_step_days == 0 {
            return Err(FundingError::Config("alpha_grid_step_days must be positive".into()));
        }
        let cal = &raw.calibration;
        match (cal.start, cal.end) {
            (Some(a), Some(b)) if a > b => {
                return Err(FundingError::Config(format!(
                    "[calibration] start {a} is after end {b}"
                )));
            }
            (Some(_), None) | (None, Some(_)) => {
                return Err(FundingError::Config(
                    "[calibration] start and end must be given together".into(),
                ));
            }
            _ => {}
        }
        if cal.years == 0 && cal.start.is_none() {
            return Err(FundingError::Config("[calibration] years must be positive".into()));
        }
        let params = raw
            .predictor
            .map(|p| {
                PredictorParams::new(p.lambda_days / DAYS_PER_YEAR, p.theta_per_day, p.omega)
                    .map_err(|e| FundingError::Config(format!("[predictor] {e}")))
            })
            .transpose()?;
        Ok(Self {
            setup,
            data_paths,
            calibration: raw.calibration,
            params,
            alpha_grid_step: raw.alpha_grid_step_days,
            output_dir: base.join(raw.output_dir),
            max_staleness_days: raw.max_staleness_days,
        })
    }

    /// Predictor used when none is calibrated: the configured one, or the
    /// standard 90-day / 0.005 / 0.3 setting.
    pub fn params_or_standard(&self) -> PredictorParams {
        self.params.unwrap_or_else(PredictorParams::standard)
    }

    pub fn grid(&self) -> CalibrationGrid {
        let g = &self.calibration.grid;
        CalibrationGrid {
            lambda_days: g.lambda_days.clone(),
            theta: g.theta_per_day.clone(),
            omega: g.omega.clone(),
        }
    }

    /// Currencies to process: all of them, or the one requested.
    pub fn currencies(&self, only: Option<&str>) -> Result<Vec<String>> {
        match only {
            None => Ok(self.data_paths.keys().cloned().collect()),
            Some(c) if self.data_paths.contains_key(c) => Ok(vec![c.to_string()]),
            Some(c) => Err(FundingError::Config(format!(
                "currency `{c}` is not in [data] (have {})",
                self.data_paths.keys().cloned().collect::<Vec<_>>().join(", ")
            ))),
        }
    }

    pub fn load_history(&self, currency: &str) -> Result<CurveHistory> {
        let path = &self.data_paths[currency];
        Ok(read_history_csv(path)?.with_max_staleness(self.max_staleness_days))
    }

    pub fn calibration_window(&self, history: &CurveHistory) -> Result<DateRange> {
        match (self.calibration.start, self.calibration.end) {
            (Some(a), Some(b)) => DateRange::new(a, b),
            _ => {
                let start = history.first_date();
                DateRange::new(start, start + Days::new(365 * u64::from(self.calibration.years)))
            }
        }
    }

    /// Out-of-sample window: after the calibration window up to the last
    /// date whose horizon the history still covers.
    pub fn backtest_window(&self, history: &CurveHistory) -> Result<DateRange> {
        let cal = self.calibration_window(history)?;
        let start = cal.end + Days::new(1);
        let end = funding_core::curves::offset_date(history.last_date(), -self.setup.horizon);
        if start > end {
            return Err(FundingError::DataGap {
                date: start,
                reason: format!(
                    "history ends {}, leaving no backtest dates after the calibration window",
                    history.last_date()
                ),
            });
        }
        DateRange::new(start, end)
    }
}
