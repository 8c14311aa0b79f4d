//! Numerical primitives with fixed accumulation order.
//!
//! Long-series accuracy and byte-level reproducibility both hinge on how sums
//! are taken, so every reduction in the crate goes through these helpers:
//!
//! * [`pairwise_sum`] / [`pairwise_dot`] — tree reductions with a fixed split,
//!   independent of thread count, with error growth O(log n) instead of O(n).
//! * [`CompensatedSum`] — Neumaier running compensation for cumulative sums.
//! * [`line_fit`] — ordinary least squares of y on x with r².

use crate::error::{Error, Result};

/// Below this length a plain sequential loop is both fast and accurate; the
/// recursion in the pairwise reductions bottoms out here.
const PAIRWISE_BLOCK: usize = 64;

/// Sum with a fixed-order pairwise (tree) reduction.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Dot product with the same fixed-order tree reduction as [`pairwise_sum`].
///
/// Symmetric in its arguments bit-for-bit: products commute exactly and the
/// reduction order does not depend on which slice is which.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for (x, y) in a.iter().zip(b) {
            acc += x * y;
        }
        return acc;
    }
    let mid = a.len() / 2;
    pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
}

/// Neumaier-compensated running sum, for cumulative profiles where each
/// partial sum is observed.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one term.
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Arithmetic mean via pairwise summation. Empty input returns NaN.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Population variance (1/n normalizer) via pairwise summation.
pub fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mu = mean(values);
    let sq: Vec<f64> = values.iter().map(|v| (v - mu) * (v - mu)).collect();
    pairwise_sum(&sq) / values.len() as f64
}

/// Result of an ordinary least-squares line fit y ≈ slope·x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of y on x.
///
/// Requires at least two points and non-degenerate x spread. r² is reported as
/// 1.0 when y is constant (the line reproduces it exactly).
pub fn line_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::parameter("line_fit: x and y lengths differ"));
    }
    if x.len() < 2 {
        return Err(Error::Fit {
            message: "line_fit: need at least 2 points".into(),
            excluded: 0,
        });
    }
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let dx: Vec<f64> = x.iter().map(|v| v - mx).collect();
    let dy: Vec<f64> = y.iter().map(|v| v - my).collect();
    let sxx = pairwise_dot(&dx, &dx);
    let sxy = pairwise_dot(&dx, &dy);
    let syy = pairwise_dot(&dy, &dy);
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Fit {
            message: "line_fit: abscissa has no spread".into(),
            excluded: 0,
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 {
        let explained = slope * sxy;
        (explained / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let _ = n;
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// Empirical quantile of an ascending-sorted sample (nearest-rank, inclusive).
///
/// `p` in [0, 1]; p = 0 gives the minimum, p = 1 the maximum.
pub fn sorted_quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::parameter("quantile of empty sample"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::parameter(format!(
            "quantile level {p} outside [0, 1]"
        )));
    }
    let n = sorted.len();
    let rank = ((p * n as f64).ceil() as usize).clamp(1, n);
    Ok(sorted[rank - 1])
}
