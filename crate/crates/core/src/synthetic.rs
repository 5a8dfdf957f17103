//! Deterministic synthetic curve histories for tests, benches and fixtures.
//!
//! Every generator is a pure function of its arguments; randomized ones take
//! an explicit seed.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::curves::{CurveHistory, LinearCurve, SpotCurve, DAYS_PER_YEAR};

/// 1, 2, 3, 6, 9 and 12 months.
pub const STANDARD_TENOR_MONTHS: [u32; 6] = [1, 2, 3, 6, 9, 12];

pub fn standard_tenors() -> Vec<f64> {
    STANDARD_TENOR_MONTHS.iter().map(|&m| f64::from(m) / 12.0).collect()
}

fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid literal date")
}

/// History of linear curves `a(t) + b(t)·τ` observed every `step_days` days,
/// with `t` the number of years since `start`.
pub fn linear_history(
    start: NaiveDate,
    step_days: u64,
    count: usize,
    level: impl Fn(f64) -> f64,
    slope: impl Fn(f64) -> f64,
) -> CurveHistory {
    let tenors = standard_tenors();
    let entries = (0..count as u64)
        .map(|k| {
            let t = (k * step_days) as f64 / DAYS_PER_YEAR;
            let lin = LinearCurve {
                a: level(t),
                b: slope(t),
            };
            SpotCurve::from_linear(start + Days::new(k * step_days), &tenors, &lin).expect("finite synthetic rates")
        })
        .collect();
    CurveHistory::new(entries).expect("ascending synthetic dates")
}

/// Weekly upward-sloping curves over eight years whose short end halves
/// mid-sample: flat at 5% for 3¼ years, a steady slide to 2.5% over the next
/// 1½ years, flat again afterwards. A little seeded noise is added to the
/// level so that differences between strategies are not all identical.
pub fn two_regime_history() -> CurveHistory {
    let weeks = 8 * 52 + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(20_000_103);
    let noise: Vec<f64> = (0..weeks)
        .map(|_| 0.0002 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let level = |t: f64| {
        let base = if t < 3.25 {
            0.05
        } else if t < 4.75 {
            0.05 - 0.025 * (t - 3.25) / 1.5
        } else {
            0.025
        };
        let k = (t * DAYS_PER_YEAR / 7.0).round() as usize;
        base + noise[k]
    };
    linear_history(ymd(2000, 1, 3), 7, weeks, level, |_| 0.01)
}

/// Weekly upward curves whose short end falls steadily by one point a year
/// from 8%, over seven years.
pub fn trend_history() -> CurveHistory {
    linear_history(ymd(2001, 1, 1), 7, 7 * 52 + 1, |t| 0.08 - 0.01 * t, |_| 0.01)
}

/// Daily curves consistent with one fixed instantaneous forward curve
/// `f(T) = f0 + f1·T` in calendar time, so every later curve is exactly what
/// today's forwards implied: `y_s(τ) = f0 + f1·(s + τ/2)`.
pub fn forward_following_history(days: usize, f0: f64, f1: f64) -> CurveHistory {
    linear_history(ymd(2003, 1, 6), 1, days, |s| f0 + f1 * s, |_| 0.5 * f1)
}

/// Mean-reverting level with a slow cycle and a randomly wandering slope,
/// sampled every `step_days` days.
pub fn random_history(seed: u64, start: NaiveDate, step_days: u64, count: usize, mean_level: f64) -> CurveHistory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = step_days as f64 / DAYS_PER_YEAR;
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let period: f64 = rng.random_range(5.0..9.0);
    let amplitude: f64 = rng.random_range(0.005..0.02);
    let mut x = 0.0_f64;
    let mut slope = rng.random_range(-0.005..0.02);
    let mut levels = Vec::with_capacity(count);
    let mut slopes = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 * dt;
        let cycle = amplitude * (std::f64::consts::TAU * t / period + phase).sin();
        levels.push(mean_level + cycle + x);
        slopes.push(slope);
        x += -0.8 * x * dt + 0.008 * dt.sqrt() * rng.sample::<f64, _>(StandardNormal);
        slope += -0.5 * (slope - 0.008) * dt + 0.006 * dt.sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    let tenors = standard_tenors();
    let entries = (0..count)
        .map(|k| {
            let date = start + Days::new(k as u64 * step_days);
            let lin = LinearCurve {
                a: levels[k],
                b: slopes[k],
            };
            SpotCurve::from_linear(date, &tenors, &lin).expect("finite synthetic rates")
        })
        .collect();
    CurveHistory::new(entries).expect("ascending synthetic dates")
}

/// Four weekly currencies from 1995 through 2012 (EU from 2000), shaped like
/// a typical Xibor panel.
pub fn currency_panel(seed: u64) -> BTreeMap<String, CurveHistory> {
    let end = ymd(2012, 12, 31);
    let weeks_from = |start: NaiveDate| ((end - start).num_days() / 7 + 1) as usize;
    let specs = [
        ("BP", ymd(1995, 1, 2), 0.05),
        ("EU", ymd(2000, 1, 3), 0.03),
        ("JP", ymd(1995, 1, 2), 0.01),
        ("US", ymd(1995, 1, 2), 0.04),
    ];
    specs
        .iter()
        .enumerate()
        .map(|(i, &(name, start, mean))| {
            let h = random_history(seed.wrapping_add(i as u64), start, 7, weeks_from(start), mean);
            (name.to_string(), h)
        })
        .collect()
}
