//! q-dependent detrended cross-correlation coefficients.
//!
//! ρ_q(s) divides the cross fluctuation of a synchronized pair by the
//! geometric mean of the two auto fluctuations at the same (q, s). For q > 0
//! the value is bounded in [−1, 1]; q selects which fluctuation sizes drive
//! the coefficient (q > 2 weighs large excursions, q < 2 the bulk). Basket
//! assembly shares per-scale detrending residuals across every pair so the
//! all-pairs matrix costs one residual pass plus cheap dot products.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{split_pair, synchronize_basket, ReturnSeries};
use crate::mfcca::{
    combine_covariances, covariances_from_residuals, profile, segment, window_residuals,
    DetrendBasis, Profile,
};
use crate::numeric::pairwise_sum;

/// Zero-covariance window counts behind one coefficient.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ZeroWindows {
    pub cross: usize,
    pub auto_x: usize,
    pub auto_y: usize,
}

/// One detrended cross-correlation coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct RhoResult {
    pub q: f64,
    pub s: usize,
    pub value: f64,
    /// Labels of the two series, in call order.
    pub pair: (String, String),
    pub excluded: ZeroWindows,
}

/// Scale treatment for matrix assembly: one scale, or the arithmetic mean of
/// coefficients over a scale grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleSpec {
    Single(usize),
    Average(Vec<usize>),
}

impl ScaleSpec {
    fn scales(&self) -> &[usize] {
        match self {
            ScaleSpec::Single(s) => std::slice::from_ref(s),
            ScaleSpec::Average(grid) => grid,
        }
    }
}

/// Symmetric all-pairs coefficient matrix over a basket.
#[derive(Debug, Clone, Serialize)]
pub struct RhoMatrix {
    pub labels: Vec<String>,
    pub q: f64,
    pub s_spec: ScaleSpec,
    /// Symmetric, unit diagonal; `rows[i][j]` pairs `labels[i]` with `labels[j]`.
    pub rows: Vec<Vec<f64>>,
}

impl RhoMatrix {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    /// JSON export: `{labels, q, s_spec, rows}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// CSV export with a header row of labels and one labeled row per series.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("label");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (label, row) in self.labels.iter().zip(&self.rows) {
            out.push_str(label);
            for v in row {
                out.push(',');
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        out
    }
}

fn require_positive_q(q: f64) -> Result<()> {
    if !(q > 0.0) {
        return Err(Error::parameter(format!(
            "rho is defined for q > 0 only (boundedness requires it), got q={q}"
        )));
    }
    Ok(())
}

fn require_synchronized(x: &ReturnSeries, y: &ReturnSeries) -> Result<()> {
    if x.values.len() != y.values.len() || x.step_ms() != y.step_ms() || x.t0 != y.t0 {
        return Err(Error::parameter(format!(
            "inputs {:?} and {:?} are not synchronized (length/step/origin mismatch)",
            x.pair, y.pair
        )));
    }
    Ok(())
}

/// Coefficient of one profile pair at one scale, reusing a single residual
/// pass for the cross and both auto fluctuations.
fn rho_at_scale(px: &Profile, py: &Profile, q: f64, s: usize, m: usize) -> Result<(f64, ZeroWindows)> {
    let n = px.values.len();
    let plan = segment(n, s, m)?;
    let basis = DetrendBasis::new(s, m)?;
    let rx = window_residuals(px, &plan, &basis)?;
    let ry = window_residuals(py, &plan, &basis)?;
    let cross = covariances_from_residuals(&rx, &ry, &plan);
    let auto_x = covariances_from_residuals(&rx, &rx, &plan);
    let auto_y = covariances_from_residuals(&ry, &ry, &plan);
    let f_xy = combine_covariances(&cross.values, q)?.value;
    let f_xx = combine_covariances(&auto_x.values, q)?.value;
    let f_yy = combine_covariances(&auto_y.values, q)?.value;
    let denom = f_xx * f_yy;
    if !(denom > 0.0) {
        return Err(Error::domain(format!(
            "degenerate auto-fluctuation at scale {s} ({:?}/{:?}): denominator not positive",
            px.label, py.label
        )));
    }
    Ok((
        f_xy / denom.sqrt(),
        ZeroWindows {
            cross: cross.zero_windows,
            auto_x: auto_x.zero_windows,
            auto_y: auto_y.zero_windows,
        },
    ))
}

/// ρ_q(s) of a synchronized pair at one scale.
pub fn rho_q(x: &ReturnSeries, y: &ReturnSeries, q: f64, s: usize, m: usize) -> Result<RhoResult> {
    require_positive_q(q)?;
    require_synchronized(x, y)?;
    let px = profile(x);
    let py = profile(y);
    let (value, excluded) = rho_at_scale(&px, &py, q, s, m)?;
    Ok(RhoResult {
        q,
        s,
        value,
        pair: (x.pair.clone(), y.pair.clone()),
        excluded,
    })
}

/// ρ_q across a scale grid: one coefficient per scale, each sharing a single
/// residual pass between the cross and auto fluctuations.
pub fn rho_scale_profile(
    x: &ReturnSeries,
    y: &ReturnSeries,
    q: f64,
    s_grid: &[usize],
    m: usize,
) -> Result<Vec<RhoResult>> {
    require_positive_q(q)?;
    require_synchronized(x, y)?;
    if s_grid.is_empty() {
        return Err(Error::parameter("rho_scale_profile: empty scale grid"));
    }
    let px = profile(x);
    let py = profile(y);
    s_grid
        .iter()
        .map(|&s| {
            let (value, excluded) = rho_at_scale(&px, &py, q, s, m)?;
            Ok(RhoResult {
                q,
                s,
                value,
                pair: (x.pair.clone(), y.pair.clone()),
                excluded,
            })
        })
        .collect()
}

/// All-pairs coefficient matrix over a basket.
///
/// The basket is synchronized onto its common sampling grid first, so every
/// auto fluctuation is computed on the same domain each pair sees. Per scale,
/// detrending residuals are computed once per series (in parallel) and reused
/// by every pair; with an `Average` spec the per-scale coefficients are
/// averaged arithmetically. The diagonal is exactly 1.
pub fn rho_matrix(basket: &[ReturnSeries], q: f64, s_spec: &ScaleSpec, m: usize) -> Result<RhoMatrix> {
    require_positive_q(q)?;
    if basket.is_empty() {
        return Err(Error::parameter("rho_matrix: empty basket"));
    }
    let scales = s_spec.scales();
    if scales.is_empty() {
        return Err(Error::parameter("rho_matrix: empty scale grid"));
    }
    let synced = synchronize_basket(basket)?;
    let profiles: Vec<Profile> = synced.iter().map(profile).collect();
    let n = profiles[0].values.len();
    let count = profiles.len();
    let pairs: Vec<(usize, usize)> = (0..count)
        .flat_map(|i| (i + 1..count).map(move |j| (i, j)))
        .collect();
    let mut sums = vec![0.0f64; pairs.len()];
    for &s in scales {
        let plan = segment(n, s, m)?;
        let basis = DetrendBasis::new(s, m)?;
        let residuals: Vec<Vec<f64>> = profiles
            .par_iter()
            .map(|p| window_residuals(p, &plan, &basis))
            .collect::<Result<_>>()?;
        let autos: Vec<f64> = residuals
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let cov = covariances_from_residuals(r, r, &plan);
                let f = combine_covariances(&cov.values, q)?.value;
                if !(f > 0.0) {
                    return Err(Error::domain(format!(
                        "degenerate auto-fluctuation for {:?} at scale {s}",
                        profiles[i].label
                    )));
                }
                Ok(f)
            })
            .collect::<Result<_>>()?;
        let layer: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let cov = covariances_from_residuals(&residuals[i], &residuals[j], &plan);
                let f_xy = combine_covariances(&cov.values, q)?.value;
                Ok(f_xy / (autos[i] * autos[j]).sqrt())
            })
            .collect::<Result<_>>()?;
        for (sum, v) in sums.iter_mut().zip(&layer) {
            *sum += v;
        }
    }
    let inv = 1.0 / scales.len() as f64;
    let mut rows = vec![vec![0.0f64; count]; count];
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        let v = sums[idx] * inv;
        rows[i][j] = v;
        rows[j][i] = v;
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    Ok(RhoMatrix {
        labels: synced.iter().map(|s| s.pair.clone()).collect(),
        q,
        s_spec: s_spec.clone(),
        rows,
    })
}

/// Partition of matrix entries by the triangular relation, with mean |ρ| per
/// side.
#[derive(Debug, Clone, Serialize)]
pub struct TrianglePartition {
    /// Unordered label pairs sharing a currency on either side.
    pub triangular: Vec<(String, String)>,
    /// Unordered label pairs with four distinct currencies.
    pub non_triangular: Vec<(String, String)>,
    /// Mean |ρ| over the triangular entries (absent when the set is empty).
    pub triangular_mean_abs: Option<f64>,
    /// Mean |ρ| over the non-triangular entries (absent when the set is empty).
    pub non_triangular_mean_abs: Option<f64>,
}

/// Split a coefficient matrix of exchange-rate labels into pairs bound by a
/// common currency (triangular relation) and pairs with none, reporting the
/// mean absolute coefficient on each side.
pub fn triangle_partition(matrix: &RhoMatrix) -> Result<TrianglePartition> {
    let currencies: Vec<(&str, &str)> = matrix
        .labels
        .iter()
        .map(|l| split_pair(l))
        .collect::<Result<_>>()?;
    let mut triangular = Vec::new();
    let mut non_triangular = Vec::new();
    let mut tri_values = Vec::new();
    let mut non_values = Vec::new();
    for i in 0..matrix.len() {
        for j in i + 1..matrix.len() {
            let (a, b) = currencies[i];
            let (c, d) = currencies[j];
            let shares = a == c || a == d || b == c || b == d;
            let entry = (matrix.labels[i].clone(), matrix.labels[j].clone());
            if shares {
                triangular.push(entry);
                tri_values.push(matrix.at(i, j).abs());
            } else {
                non_triangular.push(entry);
                non_values.push(matrix.at(i, j).abs());
            }
        }
    }
    let mean_of = |v: &[f64]| {
        if v.is_empty() {
            None
        } else {
            Some(pairwise_sum(v) / v.len() as f64)
        }
    };
    Ok(TrianglePartition {
        triangular_mean_abs: mean_of(&tri_values),
        non_triangular_mean_abs: mean_of(&non_values),
        triangular,
        non_triangular,
    })
}
