//! Least squares in log-log space.

use alloc::vec::Vec;

// `Float` supplies the f64 math methods without std.
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegressionResult {
    /// `(log N, log value)`.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// Fits `log value = slope · log N + intercept` to `(N, value)` pairs.
pub fn regress(samples: &[(f64, f64)]) -> Result<RegressionResult> {
    if samples.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: samples.len(),
        });
    }
    let mut points = Vec::with_capacity(samples.len());
    for &(n, v) in samples {
        if !(n > 0.0) {
            return Err(Error::NonPositiveValue(n));
        }
        if !(v > 0.0) {
            return Err(Error::NonPositiveValue(v));
        }
        points.push((n.ln(), v.ln()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateAbscissae);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    Ok(RegressionResult {
        points,
        slope,
        intercept,
        residual: (ss / k).sqrt(),
    })
}
