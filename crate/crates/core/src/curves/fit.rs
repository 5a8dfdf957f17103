use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{LinearCurve, SpotCurve};
use crate::error::{FundingError, Result};

/// Goodness of fit of a linear model to one curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub r_squared: f64,
    /// Two-sided p-value of the slope coefficient.
    pub p_value: f64,
}

/// Ordinary least squares of zero rate on tenor.
///
/// A flat curve (zero total variance) reports `r_squared = 1` and
/// `p_value = 1`. An exact fit with non-zero variance has a slope p-value of
/// zero in exact arithmetic; it is reported as the smallest positive `f64`.
pub fn fit_linear(curve: &SpotCurve) -> Result<(LinearCurve, FitDiagnostics)> {
    let xs = curve.tenors();
    let ys = curve.rates();
    let n = xs.len();
    if n < 3 {
        return Err(FundingError::InsufficientData(format!(
            "linear fit needs at least 3 nodes, curve {} has {n}",
            curve.as_of()
        )));
    }

    if ys.iter().all(|&y| y == ys[0]) {
        return Ok((
            LinearCurve { a: ys[0], b: 0.0 },
            FitDiagnostics {
                r_squared: 1.0,
                p_value: 1.0,
            },
        ));
    }

    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let b = sxy / sxx;
    let a = mean_y - b * mean_x;

    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - (a + b * x);
            e * e
        })
        .sum();
    let r_squared = (1.0 - sse / syy).clamp(0.0, 1.0);

    let df = nf - 2.0;
    let se_b = (sse / df / sxx).sqrt();
    let p_value = if se_b == 0.0 {
        f64::MIN_POSITIVE
    } else {
        let t = (b / se_b).abs();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
        (2.0 * dist.sf(t)).clamp(f64::MIN_POSITIVE, 1.0)
    };

    Ok((LinearCurve { a, b }, FitDiagnostics { r_squared, p_value }))
}
