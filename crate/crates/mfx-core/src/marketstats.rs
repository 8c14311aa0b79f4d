//! Basket-level descriptive statistics: the per-currency index and
//! heavy-tail analysis of absolute returns.
//!
//! The currency index distills one currency's strength out of all its pairs:
//! orient every counterparty series so the currency sits as the pair's base
//! (negating log-returns of inversely quoted pairs), cumulate, and average —
//! a uniform appreciation of 1% per step moves the index up 0.01 per step.
//!
//! Tail analysis builds the empirical complementary CDF of absolute returns
//! (ties collapse upward so the curve never touches zero and stays usable in
//! log–log space) and fits a power-law slope over a chosen |r| range; the
//! slope near −3 is the classic inverse-cubic signature of developed-market
//! returns, while Gaussian data falls off far faster.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{cumulative_sums, split_pair, GapMap, ReturnSeries};
use crate::numeric::{line_fit, population_variance, sorted_quantile};

/// Strength index of one currency against its basket.
#[derive(Debug, Clone, Serialize)]
pub struct CurrencyIndexSeries {
    pub currency: String,
    pub values: Vec<f64>,
    pub t0: i64,
    pub delta_t: f64,
    pub mode: IndexMode,
    /// Number of currencies in the basket (counterparties + 1).
    pub basket_size: usize,
}

/// Cumulative sums the oriented returns before averaging (the index drifts);
/// instantaneous averages the raw returns at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexMode {
    Cumulative,
    Instantaneous,
}

/// Build the index of `currency` from the return series of all its pairs.
///
/// Every input series must quote the currency on one side; series quoting it
/// as the counter currency contribute with negated returns so that a rising
/// index always means appreciation. All series must share one sampling grid.
pub fn currency_index(
    currency: &str,
    returns: &[ReturnSeries],
    mode: IndexMode,
) -> Result<CurrencyIndexSeries> {
    if returns.is_empty() {
        return Err(Error::parameter(
            "currency_index: need at least one counterparty series",
        ));
    }
    let first = &returns[0];
    let len = first.values.len();
    let mut oriented: Vec<Vec<f64>> = Vec::with_capacity(returns.len());
    let mut counterparties: Vec<String> = Vec::with_capacity(returns.len());
    for series in returns {
        if series.values.len() != len
            || series.step_ms() != first.step_ms()
            || series.t0 != first.t0
        {
            return Err(Error::parameter(format!(
                "currency_index: series {:?} is not on the common grid",
                series.pair
            )));
        }
        let (base, counter) = split_pair(&series.pair)?;
        let values = if base == currency {
            series.values.clone()
        } else if counter == currency {
            series.values.iter().map(|v| -v).collect()
        } else {
            return Err(Error::parameter(format!(
                "currency_index: series {:?} does not involve {currency}",
                series.pair
            )));
        };
        let other = if base == currency { counter } else { base };
        if counterparties.iter().any(|c| c == other) {
            return Err(Error::parameter(format!(
                "currency_index: duplicate counterparty {other} for {currency}"
            )));
        }
        counterparties.push(other.to_string());
        oriented.push(match mode {
            IndexMode::Cumulative => cumulative_sums(&values),
            IndexMode::Instantaneous => values,
        });
    }
    let weight = 1.0 / oriented.len() as f64;
    let mut values = vec![0.0f64; len];
    for (k, v) in values.iter_mut().enumerate() {
        let mut sum = 0.0;
        for series in &oriented {
            sum += series[k];
        }
        *v = 1.0 + weight * sum;
    }
    Ok(CurrencyIndexSeries {
        currency: currency.to_string(),
        values,
        t0: first.t0,
        delta_t: first.delta_t,
        mode,
        basket_size: returns.len() + 1,
    })
}

/// Empirical complementary CDF of absolute returns.
///
/// Returns ascending distinct |r| abscissae with P(X ≥ |r|) = (count of
/// samples at or above)/N. Ties collapse to the larger probability, so P is
/// strictly decreasing and never reaches zero — every point survives a
/// logarithm. With `normalized` the abscissae are divided by the population
/// standard deviation of the returns first.
pub fn ccdf(returns: &ReturnSeries, normalized: bool) -> Result<Vec<(f64, f64)>> {
    let n = returns.values.len();
    if n < 100 {
        return Err(Error::parameter(format!(
            "ccdf: need at least 100 samples, got {n}"
        )));
    }
    let scale = if normalized {
        let var = population_variance(&returns.values);
        if !(var > 0.0) {
            return Err(Error::domain(
                "ccdf: zero variance, cannot normalize",
            ));
        }
        1.0 / var.sqrt()
    } else {
        1.0
    };
    let mut abs: Vec<f64> = returns.values.iter().map(|v| (v * scale).abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("finite returns"));
    if abs[0] == abs[n - 1] {
        return Err(Error::domain(
            "ccdf: all absolute returns identical (degenerate distribution)",
        ));
    }
    let mut points = Vec::new();
    let mut i = 0usize;
    while i < n {
        let v = abs[i];
        // P(X >= v) counts everything from the first occurrence up.
        points.push((v, (n - i) as f64 / n as f64));
        let mut j = i + 1;
        while j < n && abs[j] == v {
            j += 1;
        }
        i = j;
    }
    Ok(points)
}

/// Evaluate an empirical CCDF at an arbitrary abscissa: the probability mass
/// at or above `x` (zero beyond the largest sample).
pub fn ccdf_at(points: &[(f64, f64)], x: f64) -> f64 {
    let idx = points.partition_point(|(v, _)| *v < x);
    if idx == points.len() {
        0.0
    } else {
        points[idx].1
    }
}

/// Power-law tail fit of a CCDF.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailFit {
    /// Slope of ln P against ln |r| over the range (negative for real tails).
    pub gamma: f64,
    /// The |r| bounds actually used, ascending.
    pub fit_range: (f64, f64),
    /// CCDF points inside the range.
    pub n_tail: usize,
}

/// Fit the log–log slope of a CCDF over `fit_range = (|r|_min, |r|_max)`.
///
/// Requires at least 50 distinct CCDF points inside the range.
pub fn tail_slope(points: &[(f64, f64)], fit_range: (f64, f64)) -> Result<TailFit> {
    let (lo, hi) = fit_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::parameter(format!(
            "tail fit range must be positive and ascending, got ({lo}, {hi})"
        )));
    }
    let mut ln_r = Vec::new();
    let mut ln_p = Vec::new();
    for &(r, p) in points {
        if r >= lo && r <= hi {
            ln_r.push(r.ln());
            ln_p.push(p.ln());
        }
    }
    if ln_r.len() < 50 {
        return Err(Error::Fit {
            message: format!(
                "tail fit needs at least 50 points in [{lo}, {hi}], found {}",
                ln_r.len()
            ),
            excluded: points.len() - ln_r.len(),
        });
    }
    let fit = line_fit(&ln_r, &ln_p)?;
    Ok(TailFit {
        gamma: fit.slope,
        fit_range,
        n_tail: ln_r.len(),
    })
}

/// Map a quantile range of |r| to an abscissa range, e.g. (0.99, 0.9999)
/// for "top 1% down to top 0.01%" of absolute returns.
pub fn abs_quantile_range(returns: &ReturnSeries, lo_q: f64, hi_q: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&lo_q) || !(0.0..=1.0).contains(&hi_q) || lo_q >= hi_q {
        return Err(Error::parameter(format!(
            "quantile range ({lo_q}, {hi_q}) must be ascending within [0, 1]"
        )));
    }
    let mut abs: Vec<f64> = returns.values.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).expect("finite returns"));
    let lo = sorted_quantile(&abs, lo_q)?;
    let hi = sorted_quantile(&abs, hi_q)?;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::domain(format!(
            "quantile range degenerates to ({lo}, {hi})"
        )));
    }
    Ok((lo, hi))
}

/// Remove every sample whose timestamp falls in `[start_ms, end_ms)` and
/// report the removal as a gap map over the original indices.
///
/// The window must intersect the series span, and at least one sample must
/// survive.
pub fn excise_window(
    series: &ReturnSeries,
    window: (i64, i64),
) -> Result<(ReturnSeries, GapMap)> {
    let (start, end) = window;
    if start >= end {
        return Err(Error::parameter(format!(
            "excise window ({start}, {end}) is empty"
        )));
    }
    let n = series.values.len();
    if n == 0 {
        return Err(Error::domain("excise_window: empty series"));
    }
    let last_ts = series.timestamp(n - 1);
    if end <= series.t0 || start > last_ts {
        return Err(Error::parameter(format!(
            "excise window ({start}, {end}) lies outside the series span [{}, {last_ts}]",
            series.t0
        )));
    }
    let mut removed_lo: Option<usize> = None;
    let mut removed_hi = 0usize;
    let mut kept = Vec::with_capacity(n);
    for (i, v) in series.values.iter().enumerate() {
        let t = series.timestamp(i);
        if t >= start && t < end {
            removed_lo.get_or_insert(i);
            removed_hi = i;
        } else {
            kept.push(*v);
        }
    }
    let Some(lo) = removed_lo else {
        // Window sits between samples: nothing removed.
        return Ok((series.clone(), GapMap::none(n)));
    };
    if kept.is_empty() {
        return Err(Error::domain(
            "excise_window: removal would leave no samples",
        ));
    }
    let map = GapMap::from_removed(n, vec![(lo, removed_hi)])?;
    let mut out = series.clone();
    // Time origin moves only when the head is cut off.
    if lo == 0 {
        out.t0 = series.timestamp(removed_hi + 1);
    }
    out.values = kept;
    Ok((out, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::series_from_values;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal, StudentT};

    fn labeled(pair: &str, values: Vec<f64>) -> ReturnSeries {
        series_from_values(pair, values)
    }

    #[test]
    fn zero_returns_give_flat_unit_index() {
        let basket = vec![
            labeled("AAA/BBB", vec![0.0; 10]),
            labeled("AAA/CCC", vec![0.0; 10]),
        ];
        let ci = currency_index("AAA", &basket, IndexMode::Cumulative).unwrap();
        assert!(ci.values.iter().all(|v| *v == 1.0));
        assert_eq!(ci.basket_size, 3);
    }

    #[test]
    fn single_counterparty_index_cumulates_returns() {
        let basket = vec![labeled("AAA/BBB", vec![0.01, -0.01])];
        let ci = currency_index("AAA", &basket, IndexMode::Cumulative).unwrap();
        assert!((ci.values[0] - 1.01).abs() < 1e-15);
        assert!((ci.values[1] - 1.00).abs() < 1e-15);
    }

    #[test]
    fn uniform_appreciation_gives_constant_slope_regardless_of_quoting() {
        // AAA appreciates 1% per step against three counterparties; one pair
        // quotes AAA as the counter currency, so its returns arrive negated.
        let n = 50;
        let basket = vec![
            labeled("AAA/BBB", vec![0.01; n]),
            labeled("CCC/AAA", vec![-0.01; n]),
            labeled("AAA/DDD", vec![0.01; n]),
        ];
        let ci = currency_index("AAA", &basket, IndexMode::Cumulative).unwrap();
        for k in 0..n {
            let expected = 1.0 + 0.01 * (k + 1) as f64;
            assert!(
                (ci.values[k] - expected).abs() < 1e-12,
                "k={k}: {} vs {expected}",
                ci.values[k]
            );
        }
    }

    #[test]
    fn instantaneous_mode_averages_raw_returns() {
        let basket = vec![
            labeled("AAA/BBB", vec![0.02, 0.0]),
            labeled("AAA/CCC", vec![0.0, -0.02]),
        ];
        let ci = currency_index("AAA", &basket, IndexMode::Instantaneous).unwrap();
        assert!((ci.values[0] - 1.01).abs() < 1e-15);
        assert!((ci.values[1] - 0.99).abs() < 1e-15);
    }

    #[test]
    fn index_rejects_foreign_pairs_duplicates_and_grid_mismatches() {
        let ok = labeled("AAA/BBB", vec![0.0; 5]);
        let foreign = labeled("XXX/YYY", vec![0.0; 5]);
        assert!(currency_index("AAA", &[ok.clone(), foreign], IndexMode::Cumulative).is_err());
        let dup = labeled("BBB/AAA", vec![0.0; 5]);
        assert!(currency_index("AAA", &[ok.clone(), dup], IndexMode::Cumulative).is_err());
        let mut shifted = labeled("AAA/CCC", vec![0.0; 5]);
        shifted.t0 = 1000;
        assert!(currency_index("AAA", &[ok, shifted], IndexMode::Cumulative).is_err());
    }

    #[test]
    fn ccdf_collapses_ties_upward_and_never_reaches_zero() {
        let mut values = vec![1.0; 60];
        values.extend(vec![-1.0; 30]);
        values.extend(vec![2.0; 9]);
        values.push(3.0);
        let series = labeled("A/B", values);
        let points = ccdf(&series, false).unwrap();
        assert_eq!(points.len(), 3);
        // 90 samples of |r|=1, 9 of 2, 1 of 3: P at the minimum is 1 by
        // definition, and ties share the first occurrence's probability.
        assert_eq!(points[0], (1.0, 1.0));
        assert_eq!(points[1], (2.0, 0.1));
        assert_eq!(points[2], (3.0, 0.01));
        assert!(points.windows(2).all(|w| w[1].1 < w[0].1 && w[1].0 > w[0].0));
        assert!(points.iter().all(|(_, p)| *p > 0.0));
    }

    #[test]
    fn ccdf_rejects_short_and_degenerate_input() {
        assert!(ccdf(&labeled("A/B", vec![1.0; 99]), false).is_err());
        assert!(ccdf(&labeled("A/B", vec![0.5; 200]), false).is_err());
        let mixed_signs: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        // Same absolute value everywhere is still degenerate.
        assert!(ccdf(&labeled("A/B", mixed_signs), false).is_err());
    }

    #[test]
    fn ccdf_midpoint_matches_exponential_quantile() {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let values: Vec<f64> = (0..n)
            .map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln())
            .collect();
        let series = labeled("A/B", values);
        let points = ccdf(&series, false).unwrap();
        let p = ccdf_at(&points, 2f64.ln());
        assert!((p - 0.5).abs() < 0.01, "P at ln 2 = {p}");
        assert_eq!(ccdf_at(&points, f64::INFINITY), 0.0);
    }

    #[test]
    fn normalization_rescales_abscissae_by_standard_deviation() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let values: Vec<f64> = (0..1000)
            .map(|_| {
                let g: f64 = StandardNormal.sample(&mut rng);
                3.0 * g
            })
            .collect();
        let series = labeled("A/B", values.clone());
        let raw = ccdf(&series, false).unwrap();
        let norm = ccdf(&series, true).unwrap();
        let std = population_variance(&values).sqrt();
        assert_eq!(raw.len(), norm.len());
        for ((r_raw, p_raw), (r_norm, p_norm)) in raw.iter().zip(&norm) {
            assert!((r_raw / std - r_norm).abs() < 1e-12);
            assert_eq!(p_raw, p_norm);
        }
    }

    #[test]
    fn exact_power_law_recovers_slope_minus_three() {
        let points: Vec<(f64, f64)> = (1..=200)
            .map(|i| {
                let x = 1.0 + i as f64 / 50.0;
                (x, x.powi(-3))
            })
            .collect();
        let fit = tail_slope(&points, (1.0, 10.0)).unwrap();
        assert!((fit.gamma + 3.0).abs() < 1e-10, "{}", fit.gamma);
        assert_eq!(fit.n_tail, 200);
    }

    #[test]
    fn tail_fit_requires_fifty_points() {
        let points: Vec<(f64, f64)> = (1..=60)
            .map(|i| (i as f64, (i as f64).powi(-3)))
            .collect();
        match tail_slope(&points, (1.0, 40.0)) {
            Err(Error::Fit { .. }) => {}
            other => panic!("expected fit error, got {other:?}"),
        }
        assert!(tail_slope(&points, (5.0, 2.0)).is_err());
        assert!(tail_slope(&points, (-1.0, 2.0)).is_err());
    }

    #[test]
    fn student_t_tail_index_is_recovered_and_gaussian_is_steeper() {
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let t3 = StudentT::new(3.0).unwrap();
        let heavy: Vec<f64> = (0..n).map(|_| t3.sample(&mut rng)).collect();
        let heavy_series = labeled("A/B", heavy);
        let range = abs_quantile_range(&heavy_series, 0.99, 0.9999).unwrap();
        let points = ccdf(&heavy_series, false).unwrap();
        let fit = tail_slope(&points, range).unwrap();
        assert!(
            (fit.gamma + 3.0).abs() <= 0.3,
            "Student-t(3) tail slope {}",
            fit.gamma
        );

        let light: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let light_series = labeled("A/B", light);
        let range = abs_quantile_range(&light_series, 0.99, 0.9999).unwrap();
        let points = ccdf(&light_series, false).unwrap();
        let fit = tail_slope(&points, range).unwrap();
        assert!(fit.gamma < -4.0, "Gaussian tail slope {}", fit.gamma);
    }

    #[test]
    fn excise_window_removes_timestamp_range_and_maps_gaps() {
        let mut series = labeled("A/B", (0..10).map(|i| i as f64).collect());
        series.t0 = 1000;
        series.delta_t = 1.0; // 1000 ms steps
        // Remove timestamps [3000, 6000): indices 2, 3, 4.
        let (out, map) = excise_window(&series, (3000, 6000)).unwrap();
        assert_eq!(out.values, vec![0.0, 1.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(out.t0, 1000);
        assert_eq!(map.removed(), &[(2, 4)]);
        assert_eq!(map.original_len(), 10);
        // Removing the head advances the origin.
        let (out, _) = excise_window(&series, (0, 3000)).unwrap();
        assert_eq!(out.t0, 3000);
        assert_eq!(out.values.len(), 8);
    }

    #[test]
    fn excise_window_rejects_bad_windows() {
        let series = labeled("A/B", (0..10).map(|i| i as f64).collect());
        assert!(excise_window(&series, (5, 5)).is_err());
        assert!(excise_window(&series, (100_000, 200_000)).is_err());
        assert!(excise_window(&series, (0, 10_000)).is_err()); // removes everything
    }
}
