//! Detrended fluctuation engine.
//!
//! Given two synchronized return series, the analysis walks profile →
//! segmentation → polynomial detrending → signed covariance → q-order
//! fluctuation family → log–log scaling fits:
//!
//! * the profile is the running (compensated) sum of returns — no mean
//!   subtraction, window-local detrending absorbs offsets;
//! * each scale s cuts the profile into 2M windows (M = n/s), tiled forward
//!   from the first sample and backward from the last so the tail is covered;
//! * in each window both profiles lose a degree-m least-squares polynomial
//!   (fitted against the in-window sample index) and the residual covariance
//!   C(s, k) is recorded **with its sign**;
//! * the q-order fluctuation averages sign(C)·|C|^{q/2} over windows (the
//!   q = 0 member is the log-average limit), and the generalized exponent is
//!   the slope of ln [F^(q)]^{1/q} against ln s.
//!
//! The detrending basis is an orthonormal polynomial basis built once per
//! (s, m) — the design matrix does not depend on the window — so per-window
//! work is a handful of fixed-order dot products.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{cumulative_sums, ReturnSeries};
use crate::numeric::{line_fit, pairwise_dot, pairwise_sum};

/// Maximum supported detrending degree.
pub const MAX_DETREND_DEGREE: usize = 5;

/// Cumulative-sum profile of a return series.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    /// Label of the series the profile came from.
    pub label: String,
    /// Element k is the sum of the first k+1 returns.
    pub values: Vec<f64>,
}

/// Build the profile (compensated running sum, no mean subtraction).
pub fn profile(series: &ReturnSeries) -> Profile {
    Profile {
        label: series.pair.clone(),
        values: cumulative_sums(&series.values),
    }
}

/// Dual-ended segmentation of n samples at scale s with detrending degree m.
///
/// Windows 0..M tile forward from index 0; windows M..2M tile backward from
/// index n−1 (window M starts at n−s). When s divides n the two tilings
/// coincide and every sample is covered exactly twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentationPlan {
    n: usize,
    s: usize,
    m: usize,
    half: usize,
}

/// Validate (n, s, m) and build the segmentation plan.
///
/// Requires 1 ≤ m ≤ [`MAX_DETREND_DEGREE`], s ≥ m + 2 (so the fit is
/// overdetermined) and s < n/5 (so at least five windows tile each end).
pub fn segment(n: usize, s: usize, m: usize) -> Result<SegmentationPlan> {
    if !(1..=MAX_DETREND_DEGREE).contains(&m) {
        return Err(Error::parameter(format!(
            "detrending degree m={m} outside 1..={MAX_DETREND_DEGREE}"
        )));
    }
    if s < m + 2 {
        return Err(Error::parameter(format!(
            "scale s={s} below m+2={} (fit underdetermined)",
            m + 2
        )));
    }
    if 5 * s >= n {
        return Err(Error::parameter(format!(
            "scale s={s} not below n/5 (n={n})"
        )));
    }
    Ok(SegmentationPlan {
        n,
        s,
        m,
        half: n / s,
    })
}

impl SegmentationPlan {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scale(&self) -> usize {
        self.s
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// Number of windows, 2M.
    pub fn count(&self) -> usize {
        2 * self.half
    }

    /// Half the window count: M = n/s.
    pub fn half(&self) -> usize {
        self.half
    }

    /// Index range of window k (forward tiling for k < M, backward for k ≥ M).
    pub fn window(&self, k: usize) -> std::ops::Range<usize> {
        debug_assert!(k < self.count());
        if k < self.half {
            k * self.s..(k + 1) * self.s
        } else {
            let i = k - self.half;
            self.n - (i + 1) * self.s..self.n - i * self.s
        }
    }

    /// All window ranges in order.
    pub fn windows(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        (0..self.count()).map(|k| self.window(k))
    }
}

/// Orthonormal polynomial basis on a window of length s, degree ≤ m.
///
/// Built by modified Gram–Schmidt with reorthogonalization on a centered,
/// scaled abscissa; spans the same space as fitting raw powers of the
/// in-window index, with far better conditioning. One instance serves every
/// window of a scale.
#[derive(Debug, Clone)]
pub struct DetrendBasis {
    s: usize,
    m: usize,
    columns: Vec<Vec<f64>>,
}

impl DetrendBasis {
    pub fn new(s: usize, m: usize) -> Result<Self> {
        if !(1..=MAX_DETREND_DEGREE).contains(&m) {
            return Err(Error::parameter(format!(
                "detrending degree m={m} outside 1..={MAX_DETREND_DEGREE}"
            )));
        }
        if s < m + 2 {
            return Err(Error::parameter(format!(
                "window length s={s} below m+2={}",
                m + 2
            )));
        }
        // Abscissa 1..=s mapped affinely onto [-1, 1].
        let scale = 2.0 / (s as f64 - 1.0);
        let abscissa: Vec<f64> = (0..s).map(|i| -1.0 + i as f64 * scale).collect();
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for degree in 0..=m {
            let mut v: Vec<f64> = abscissa.iter().map(|t| t.powi(degree as i32)).collect();
            // Two orthogonalization passes keep the basis orthonormal to
            // machine precision even at high degree.
            for _ in 0..2 {
                for q in &columns {
                    let c = pairwise_dot(q, &v);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= c * qi;
                    }
                }
            }
            let norm = pairwise_dot(&v, &v).sqrt();
            if !(norm > 0.0) {
                return Err(Error::parameter(format!(
                    "degenerate detrending basis at s={s}, m={m}"
                )));
            }
            for vi in &mut v {
                *vi /= norm;
            }
            columns.push(v);
        }
        Ok(Self { s, m, columns })
    }

    pub fn scale(&self) -> usize {
        self.s
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    /// Write the detrending residual of `window` into `out`.
    pub fn residual_into(&self, window: &[f64], out: &mut [f64]) {
        debug_assert_eq!(window.len(), self.s);
        debug_assert_eq!(out.len(), self.s);
        out.copy_from_slice(window);
        for q in &self.columns {
            let c = pairwise_dot(q, out);
            for (oi, qi) in out.iter_mut().zip(q) {
                *oi -= c * qi;
            }
        }
    }
}

/// Detrending residuals of every window, concatenated in window order
/// (window k occupies `[k*s, (k+1)*s)` of the output).
pub fn window_residuals(profile: &Profile, plan: &SegmentationPlan, basis: &DetrendBasis) -> Result<Vec<f64>> {
    if profile.values.len() != plan.n() {
        return Err(Error::parameter(format!(
            "profile length {} does not match plan length {}",
            profile.values.len(),
            plan.n()
        )));
    }
    if basis.scale() != plan.scale() || basis.degree() != plan.degree() {
        return Err(Error::parameter("detrending basis does not match plan"));
    }
    let s = plan.scale();
    let mut out = vec![0.0; plan.count() * s];
    for (k, range) in plan.windows().enumerate() {
        basis.residual_into(&profile.values[range], &mut out[k * s..(k + 1) * s]);
    }
    Ok(out)
}

/// Signed per-window detrended covariances at one scale.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    /// Window length the covariances were computed at.
    pub s: usize,
    /// One signed covariance per window, window order.
    pub values: Vec<f64>,
    /// Windows whose covariance is exactly zero.
    pub zero_windows: usize,
}

/// Per-window covariances from two residual buffers laid out as
/// [`window_residuals`] produces them.
pub fn covariances_from_residuals(rx: &[f64], ry: &[f64], plan: &SegmentationPlan) -> CovarianceSet {
    let s = plan.scale();
    let inv_s = 1.0 / s as f64;
    let mut values = Vec::with_capacity(plan.count());
    let mut zero_windows = 0usize;
    for k in 0..plan.count() {
        let c = pairwise_dot(&rx[k * s..(k + 1) * s], &ry[k * s..(k + 1) * s]) * inv_s;
        if c == 0.0 {
            zero_windows += 1;
        }
        values.push(c);
    }
    CovarianceSet {
        s,
        values,
        zero_windows,
    }
}

/// Signed detrended covariance of one window:
/// `C(s, k) = (1/s) Σ_j residual_x(j) · residual_y(j)`.
pub fn detrended_covariance(x: &Profile, y: &Profile, plan: &SegmentationPlan, k: usize) -> Result<f64> {
    if k >= plan.count() {
        return Err(Error::parameter(format!(
            "window index {k} out of range (plan has {} windows)",
            plan.count()
        )));
    }
    if x.values.len() != plan.n() || y.values.len() != plan.n() {
        return Err(Error::parameter(
            "profile lengths do not match segmentation plan",
        ));
    }
    let s = plan.scale();
    let basis = DetrendBasis::new(s, plan.degree())?;
    let range = plan.window(k);
    let mut rx = vec![0.0; s];
    let mut ry = vec![0.0; s];
    basis.residual_into(&x.values[range.clone()], &mut rx);
    basis.residual_into(&y.values[range], &mut ry);
    Ok(pairwise_dot(&rx, &ry) / s as f64)
}

/// All per-window covariances of a profile pair at one scale.
pub fn window_covariances(x: &Profile, y: &Profile, plan: &SegmentationPlan) -> Result<CovarianceSet> {
    let basis = DetrendBasis::new(plan.scale(), plan.degree())?;
    let rx = window_residuals(x, plan, &basis)?;
    if std::ptr::eq(x, y) {
        return Ok(covariances_from_residuals(&rx, &rx, plan));
    }
    let ry = window_residuals(y, plan, &basis)?;
    Ok(covariances_from_residuals(&rx, &ry, plan))
}

/// One member of the fluctuation family with its zero-window accounting.
#[derive(Debug, Clone, Copy)]
pub struct CombinedFluctuation {
    pub value: f64,
    pub zero_windows: usize,
}

/// Collapse per-window covariances into the q-order fluctuation value.
///
/// For q ≠ 0 this is the signed-moment average (1/2M) Σ sign(C)·|C|^{q/2};
/// zero windows contribute zero when q > 0 and are excluded from the average
/// (with their count reported) when q < 0, where they would be poles. The
/// q = 0 member is the log-average limit sgn·exp(mean ln|C| / 2) over
/// non-zero windows, signed by the mean window sign.
pub fn combine_covariances(covariances: &[f64], q: f64) -> Result<CombinedFluctuation> {
    if covariances.is_empty() {
        return Err(Error::parameter("no windows to combine"));
    }
    if !q.is_finite() {
        return Err(Error::parameter(format!("q must be finite, got {q}")));
    }
    let zero_windows = covariances.iter().filter(|c| **c == 0.0).count();
    if q == 0.0 {
        if zero_windows == covariances.len() {
            return Err(Error::domain(
                "degenerate scale: every window has zero detrended covariance at q = 0",
            ));
        }
        let logs: Vec<f64> = covariances
            .iter()
            .filter(|c| **c != 0.0)
            .map(|c| c.abs().ln())
            .collect();
        let signs: Vec<f64> = covariances.iter().map(|c| sign_of(*c)).collect();
        let mean_sign = pairwise_sum(&signs) / covariances.len() as f64;
        let sgn = sign_of(mean_sign);
        let value = sgn * (pairwise_sum(&logs) / logs.len() as f64 / 2.0).exp();
        return Ok(CombinedFluctuation {
            value,
            zero_windows,
        });
    }
    let half_q = 0.5 * q;
    let terms: Vec<f64> = covariances
        .iter()
        .filter(|c| q > 0.0 || **c != 0.0)
        .map(|c| sign_of(*c) * c.abs().powf(half_q))
        .collect();
    if terms.is_empty() {
        return Err(Error::domain(
            "degenerate scale: every window has zero detrended covariance at q < 0",
        ));
    }
    let denominator = if q > 0.0 {
        covariances.len()
    } else {
        terms.len()
    } as f64;
    Ok(CombinedFluctuation {
        value: pairwise_sum(&terms) / denominator,
        zero_windows,
    })
}

fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// q-order detrended fluctuation of a profile pair at one scale.
pub fn fluctuation(x: &Profile, y: &Profile, q: f64, s: usize, m: usize) -> Result<f64> {
    let n = x.values.len();
    if y.values.len() != n {
        return Err(Error::parameter("profiles have different lengths"));
    }
    let plan = segment(n, s, m)?;
    let cov = window_covariances(x, y, &plan)?;
    Ok(combine_covariances(&cov.values, q)?.value)
}

/// Which profile pair a fluctuation surface describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SurfaceKind {
    Cross,
    AutoX,
    AutoY,
}

/// Fluctuation values over a (q, s) grid for one profile pair.
#[derive(Debug, Clone, Serialize)]
pub struct FluctuationSurface {
    pub pair_x: String,
    pub pair_y: String,
    pub m: usize,
    pub q_grid: Vec<f64>,
    pub s_grid: Vec<usize>,
    /// Row-major by q: `F[qi * s_grid.len() + si]`.
    #[serde(rename = "F")]
    pub values: Vec<f64>,
    pub kind: SurfaceKind,
    /// Zero-covariance windows per scale (q-independent).
    pub excluded_window_counts: Vec<usize>,
}

impl FluctuationSurface {
    /// Value at (q index, s index).
    pub fn at(&self, qi: usize, si: usize) -> f64 {
        self.values[qi * self.s_grid.len() + si]
    }
}

/// Compute the fluctuation surface of a profile pair over a (q, s) grid.
///
/// Each scale's segmentation, detrending basis, and per-window covariances
/// are computed once and shared across the whole q-grid.
pub fn fluctuation_surface(
    x: &Profile,
    y: &Profile,
    q_grid: &[f64],
    s_grid: &[usize],
    m: usize,
) -> Result<FluctuationSurface> {
    let n = x.values.len();
    if y.values.len() != n {
        return Err(Error::parameter("profiles have different lengths"));
    }
    if q_grid.is_empty() || s_grid.is_empty() {
        return Err(Error::parameter("fluctuation surface needs non-empty grids"));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::parameter("scale grid must be strictly ascending"));
    }
    let mut values = vec![0.0; q_grid.len() * s_grid.len()];
    let mut excluded = Vec::with_capacity(s_grid.len());
    for (si, &s) in s_grid.iter().enumerate() {
        let plan = segment(n, s, m)?;
        let cov = window_covariances(x, y, &plan)?;
        excluded.push(cov.zero_windows);
        for (qi, &q) in q_grid.iter().enumerate() {
            values[qi * s_grid.len() + si] = combine_covariances(&cov.values, q)?.value;
        }
    }
    // Relative to a pair (X, Y) the Y-auto surface is tagged by the caller;
    // from the two labels alone only auto-vs-cross is decidable.
    let kind = if x.label == y.label {
        SurfaceKind::AutoX
    } else {
        SurfaceKind::Cross
    };
    Ok(FluctuationSurface {
        pair_x: x.label.clone(),
        pair_y: y.label.clone(),
        m,
        q_grid: q_grid.to_vec(),
        s_grid: s_grid.to_vec(),
        values,
        kind,
        excluded_window_counts: excluded,
    })
}

/// Scaling exponent of one q-row of a surface.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    pub q: f64,
    /// Slope of ln [F^(q)]^{1/q} against ln s over the fit range.
    pub exponent: f64,
    /// Inclusive scale bounds the fit used.
    pub fit_range: (usize, usize),
    pub r_squared: f64,
    /// Scales excluded because the rooted fluctuation was not positive.
    pub excluded_scales: usize,
}

/// Fit the scaling exponent of the q-row over `fit_range` (inclusive scale
/// bounds).
///
/// The regression runs on ln [F^(q)]^{1/q} against ln s; for q = 0 the
/// fluctuation value is already the rooted form. Scales whose rooted value is
/// not positive are excluded and counted; at least three usable scales are
/// required.
pub fn fit_scaling(surface: &FluctuationSurface, q: f64, fit_range: (usize, usize)) -> Result<ScalingFit> {
    let qi = surface
        .q_grid
        .iter()
        .position(|g| (g - q).abs() < 1e-12)
        .ok_or_else(|| Error::parameter(format!("q={q} not in surface grid")))?;
    if fit_range.0 > fit_range.1 {
        return Err(Error::parameter(format!(
            "fit range ({}, {}) is empty",
            fit_range.0, fit_range.1
        )));
    }
    let mut ln_s = Vec::new();
    let mut ln_f = Vec::new();
    let mut excluded = 0usize;
    for (si, &s) in surface.s_grid.iter().enumerate() {
        if s < fit_range.0 || s > fit_range.1 {
            continue;
        }
        let f = surface.at(qi, si);
        let rooted = if q == 0.0 { Some(f) } else { signed_root(f, q) };
        match rooted {
            Some(r) if r > 0.0 => {
                ln_s.push((s as f64).ln());
                ln_f.push(r.ln());
            }
            _ => excluded += 1,
        }
    }
    if ln_s.len() < 3 {
        return Err(Error::Fit {
            message: format!(
                "fewer than 3 usable scales in fit range [{}, {}] at q={q}",
                fit_range.0, fit_range.1
            ),
            excluded,
        });
    }
    let fit = line_fit(&ln_s, &ln_f)?;
    Ok(ScalingFit {
        q,
        exponent: fit.slope,
        fit_range,
        r_squared: fit.r_squared,
        excluded_scales: excluded,
    })
}

/// [F]^{1/q} when it is a positive real; `None` otherwise.
fn signed_root(f: f64, q: f64) -> Option<f64> {
    if f > 0.0 {
        Some(f.powf(1.0 / q))
    } else {
        None
    }
}

/// Average the two auto exponents at the same q: the cross exponent of
/// fractal-cointegrated pairs equals this mean.
pub fn hurst_average(x: &ScalingFit, y: &ScalingFit) -> Result<f64> {
    if (x.q - y.q).abs() > 1e-12 {
        return Err(Error::parameter(format!(
            "hurst_average: q mismatch ({} vs {})",
            x.q, y.q
        )));
    }
    Ok(0.5 * (x.exponent + y.exponent))
}

/// Geometric scale grid between max(m+2, 20) and the largest scale below n/5.
///
/// `per_decade` controls the density (default 24 in the CLI). The upper bound
/// is always included so the grid spans the full usable range.
pub fn scale_grid(n: usize, m: usize, per_decade: usize) -> Result<Vec<usize>> {
    if per_decade == 0 {
        return Err(Error::parameter("scales per decade must be >= 1"));
    }
    let lo = (m + 2).max(20);
    let hi = n.div_ceil(5).saturating_sub(1);
    if lo > hi {
        return Err(Error::parameter(format!(
            "series too short for a scale grid: need n > {} for m={m}",
            5 * lo
        )));
    }
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut scales = Vec::new();
    let mut x = lo as f64;
    while x <= hi as f64 {
        let s = x.round() as usize;
        if scales.last() != Some(&s) {
            scales.push(s);
        }
        x *= ratio;
    }
    if scales.last() != Some(&hi) {
        scales.push(hi);
    }
    Ok(scales)
}

/// Default fit range: the central 80% of the grid's logarithmic span.
///
/// Falls back to the full range when trimming would leave nothing.
pub fn default_fit_range(s_grid: &[usize]) -> Result<(usize, usize)> {
    let (first, last) = match (s_grid.first(), s_grid.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::parameter("empty scale grid")),
    };
    if first == last {
        return Ok((first, last));
    }
    let ln_lo = (first as f64).ln();
    let ln_hi = (last as f64).ln();
    let trim = 0.1 * (ln_hi - ln_lo);
    let lo_bound = (ln_lo + trim).exp();
    let hi_bound = (ln_hi - trim).exp();
    let lo = s_grid.iter().copied().find(|s| (*s as f64) >= lo_bound);
    let hi = s_grid.iter().rev().copied().find(|s| (*s as f64) <= hi_bound);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo <= hi => Ok((lo, hi)),
        _ => Ok((first, last)),
    }
}
