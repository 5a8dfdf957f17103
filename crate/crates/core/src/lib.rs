//! Treasury funding under a regulatory liquidity buffer.
//!
//! A desk funds a position to a horizon `h` by rolling purchases of length
//! `α`, each sold back `Δ` before maturity at a bid-ask haircut `φ`. This
//! crate prices the average funding cost of any roll length under several
//! views of future curves, finds the cheapest one, calibrates an EWMA
//! short-end predictor and replays strategies on curve histories.

// negated comparisons below are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod calibrate;
pub mod cost;
pub mod curves;
pub mod error;
pub mod exec;
pub mod measures;
pub mod optimize;
pub mod schedule;
pub mod synthetic;

pub use backtest::{run_backtest, BacktestOptions, BacktestReport, BacktestSummary};
pub use calibrate::{calibrate, calibrate_windows, CalibrationGrid, CalibrationOptions, CalibrationResult};
pub use cost::{cav, cav_linear, realized_cost, CostResult, CurveProvider, LinearShape, Measure};
pub use curves::{CurveHistory, DateRange, LinearCurve, SpotCurve, ZeroCurve};
pub use error::{ErrorCategory, FundingError, Result};
pub use exec::Exec;
pub use measures::{PredictorParams, ShiftForecast};
pub use optimize::{optimal_roll, optimal_roll_on, Classification, OptimalRoll};
pub use schedule::{alpha_grid, build_schedule, gross_excess, n_rolls, FundingSetup, RollEvent, RollSchedule};
