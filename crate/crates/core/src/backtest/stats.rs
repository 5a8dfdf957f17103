//! Significance of paired cost differences.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{FundingError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_stat: f64,
    /// Two-sided.
    pub p_value: f64,
    pub df: u64,
}

/// Variance estimator behind the t statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TTestMethod {
    /// Plain sample variance.
    #[default]
    Plain,
    /// Newey-West long-run variance with Bartlett weights; overlapping
    /// holding periods make successive differences autocorrelated.
    NeweyWest { lags: usize },
}

fn mean_and_check(diffs: &[f64]) -> Result<f64> {
    if diffs.len() < 2 {
        return Err(FundingError::InsufficientData(format!(
            "t-test needs at least 2 differences, got {}",
            diffs.len()
        )));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(FundingError::domain("t-test input contains non-finite values"));
    }
    if diffs.iter().all(|&d| d == diffs[0]) {
        return Err(FundingError::DegenerateSample("all differences are equal".into()));
    }
    Ok(diffs.iter().sum::<f64>() / diffs.len() as f64)
}

fn two_sided(t_stat: f64, df: u64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
    (2.0 * dist.sf(t_stat.abs())).clamp(f64::MIN_POSITIVE, 1.0)
}

/// One-sample t-test of `mean(diffs) = 0` with `n − 1` degrees of freedom.
pub fn paired_t_test(diffs: &[f64]) -> Result<TTestResult> {
    let mean = mean_and_check(diffs)?;
    let n = diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if !(var > 0.0) {
        return Err(FundingError::DegenerateSample("zero sample variance".into()));
    }
    let t_stat = mean / (var / n).sqrt();
    let df = diffs.len() as u64 - 1;
    Ok(TTestResult {
        t_stat,
        p_value: two_sided(t_stat, df),
        df,
    })
}

/// t-test with a Newey-West standard error over `lags` autocovariances.
pub fn newey_west_t_test(diffs: &[f64], lags: usize) -> Result<TTestResult> {
    let mean = mean_and_check(diffs)?;
    let n = diffs.len();
    let centered: Vec<f64> = diffs.iter().map(|d| d - mean).collect();
    let autocov = |lag: usize| -> f64 {
        centered[lag..]
            .iter()
            .zip(&centered[..n - lag])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / n as f64
    };
    let lags = lags.min(n - 1);
    let mut long_run = autocov(0);
    for l in 1..=lags {
        let w = 1.0 - l as f64 / (lags as f64 + 1.0);
        long_run += 2.0 * w * autocov(l);
    }
    if !(long_run > 0.0) {
        return Err(FundingError::DegenerateSample("non-positive long-run variance".into()));
    }
    let t_stat = mean / (long_run / n as f64).sqrt();
    let df = n as u64 - 1;
    Ok(TTestResult {
        t_stat,
        p_value: two_sided(t_stat, df),
        df,
    })
}

pub fn t_test(diffs: &[f64], method: TTestMethod) -> Result<TTestResult> {
    match method {
        TTestMethod::Plain => paired_t_test(diffs),
        TTestMethod::NeweyWest { lags } => newey_west_t_test(diffs, lags),
    }
}

/// Share of the perfect-information improvement captured by a strategy, in
/// percent. `None` when perfect information does not improve on the
/// reference.
pub fn efficiency(mean_q_minus_ewma: f64, mean_q_minus_evpi: f64) -> Option<f64> {
    (mean_q_minus_evpi > 0.0 && mean_q_minus_evpi.is_finite()).then(|| 100.0 * mean_q_minus_ewma / mean_q_minus_evpi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn three_point_sample() {
        let r = paired_t_test(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(r.t_stat, 12f64.sqrt(), epsilon = 1e-12);
        assert_eq!(r.df, 2);
        // df = 2 has a closed-form CDF: p = 1 - t / sqrt(2 + t²)
        assert_abs_diff_eq!(r.p_value, 1.0 - 12f64.sqrt() / 14f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_value, 0.0742, epsilon = 5e-5);
    }

    #[test]
    fn zero_mean_gives_unit_p() {
        let r = paired_t_test(&[-1.0, 1.0]).unwrap();
        assert_eq!(r.t_stat, 0.0);
        assert_abs_diff_eq!(r.p_value, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn degenerate_and_short_samples() {
        assert!(matches!(
            paired_t_test(&[0.0; 5]),
            Err(FundingError::DegenerateSample(_))
        ));
        assert!(matches!(
            paired_t_test(&[0.3; 5]),
            Err(FundingError::DegenerateSample(_))
        ));
        assert!(matches!(paired_t_test(&[1.0]), Err(FundingError::InsufficientData(_))));
    }

    #[test]
    fn newey_west_without_lags_is_close_to_plain() {
        let d = [0.3, -0.1, 0.5, 0.2, 0.4, 0.0, 0.6, 0.1];
        let plain = paired_t_test(&d).unwrap();
        let nw = newey_west_t_test(&d, 0).unwrap();
        // the only difference is the n vs n−1 variance denominator
        let n = d.len() as f64;
        assert_abs_diff_eq!(nw.t_stat, plain.t_stat * (n / (n - 1.0)).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn newey_west_widens_for_persistent_differences() {
        let d: Vec<f64> = (0..200).map(|i| 1.0 + ((i / 20) % 2) as f64).collect();
        let plain = paired_t_test(&d).unwrap();
        let nw = newey_west_t_test(&d, 26).unwrap();
        assert!(nw.t_stat < plain.t_stat);
    }

    #[test]
    fn efficiency_cases() {
        assert_abs_diff_eq!(efficiency(10.0, 20.0).unwrap(), 50.0);
        assert_abs_diff_eq!(efficiency(7.0, 7.0).unwrap(), 100.0);
        assert_eq!(efficiency(10.0, 14.0).map(f64::round), Some(71.0));
        assert_eq!(efficiency(1.0, 0.0), None);
        assert_eq!(efficiency(1.0, -2.0), None);
    }
}
