//! Myopic roll-length optimization: pick α once at the decision date by
//! exhaustive search over a day-spaced grid.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cost::{cav, realized_cost, CostResult, CurveProvider, Measure};
use crate::curves::CurveHistory;
use crate::error::{FundingError, Result};
use crate::exec::Exec;
use crate::schedule::{alpha_grid, FundingSetup};

/// Costs within this distance of the minimum (rate units) count as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// Single purchase to the horizon.
    Term,
    /// Shortest admissible roll on the grid.
    Shortest,
    Interior,
    /// Every grid point costs the same within the tie tolerance.
    AllEquivalent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalRoll {
    pub alpha_star: f64,
    pub cost: f64,
    pub tie_set: Vec<f64>,
    pub classification: Classification,
    pub measure: Measure,
}

/// Cost of every α on `grid`, in grid order.
pub fn cost_profile<P: CurveProvider + ?Sized>(
    provider: &P,
    setup: &FundingSetup,
    grid: &[f64],
    exec: Exec,
) -> Result<Vec<CostResult>> {
    exec.try_map(grid, |&alpha| cav(provider, setup, alpha))
}

/// Picks the minimum of a cost profile (sorted by α). Ties go to the
/// largest α, i.e. the fewest rolls.
pub fn select_optimum(profile: &[CostResult]) -> Result<OptimalRoll> {
    let first = profile
        .first()
        .ok_or_else(|| FundingError::Config("empty roll-length grid".into()))?;
    let last = profile[profile.len() - 1];
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in profile {
        min = min.min(c.cav);
        max = max.max(c.cav);
    }
    let tie_set: Vec<f64> = profile
        .iter()
        .filter(|c| c.cav <= min + TIE_TOLERANCE)
        .map(|c| c.alpha)
        .collect();
    let alpha_star = *tie_set.last().expect("minimum is attained");
    let cost = profile
        .iter()
        .find(|c| c.alpha == alpha_star)
        .expect("alpha_star comes from the profile")
        .cav;

    let classification = if max - min <= TIE_TOLERANCE {
        Classification::AllEquivalent
    } else if alpha_star == last.alpha {
        Classification::Term
    } else if alpha_star == first.alpha {
        Classification::Shortest
    } else {
        Classification::Interior
    };
    Ok(OptimalRoll {
        alpha_star,
        cost,
        tie_set,
        classification,
        measure: first.measure,
    })
}

/// Exhaustive minimization of expected cost over `grid`.
pub fn optimal_roll_on<P: CurveProvider + ?Sized>(
    provider: &P,
    setup: &FundingSetup,
    grid: &[f64],
    exec: Exec,
) -> Result<OptimalRoll> {
    select_optimum(&cost_profile(provider, setup, grid, exec)?)
}

/// [`optimal_roll_on`] over the daily grid.
pub fn optimal_roll<P: CurveProvider + ?Sized>(provider: &P, setup: &FundingSetup) -> Result<OptimalRoll> {
    let grid = alpha_grid(setup, 1)?;
    optimal_roll_on(provider, setup, &grid, Exec::default())
}

/// Realized cost of every α on `grid` for a decision taken at `start`.
pub fn realized_profile(
    history: &CurveHistory,
    setup: &FundingSetup,
    grid: &[f64],
    start: NaiveDate,
    exec: Exec,
) -> Result<Vec<CostResult>> {
    history.check_coverage(start, setup.horizon)?;
    exec.try_map(grid, |&alpha| realized_cost(history, setup, alpha, start))
}

/// Best roll length in hindsight: minimum realized cost over `grid`.
pub fn evpi_roll_on(
    history: &CurveHistory,
    setup: &FundingSetup,
    start: NaiveDate,
    grid: &[f64],
    exec: Exec,
) -> Result<OptimalRoll> {
    let profile = realized_profile(history, setup, grid, start, exec)?;
    let mut best = select_optimum(&profile)?;
    best.measure = Measure::PerfectInformation;
    Ok(best)
}

pub fn evpi_roll(history: &CurveHistory, setup: &FundingSetup, start: NaiveDate) -> Result<OptimalRoll> {
    let grid = alpha_grid(setup, 1)?;
    evpi_roll_on(history, setup, start, &grid, Exec::default())
}
