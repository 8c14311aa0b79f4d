//! Triangular (and longer-cycle) arbitrage coefficients from bid/ask quotes.
//!
//! Everything reduces to one conversion-walk primitive: start with 1 unit of
//! the first currency and convert along the path, at each leg selling the
//! base of a quoted pair at its bid or buying it at its ask (whichever the
//! traversal direction requires). The walk cannot mis-type a side, so the
//! closed-form three-leg products α₁ (forward cycle) and α₂ (reverse cycle)
//! are defined by it and asserted against it. Values above zero mark rate
//! sets where the cycle returns more than it started with; the two
//! directions cannot both profit at zero spread, and any spread taxes both.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::TickQuote;

/// Which quoted side a traversal executes against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// Selling the pair's base currency.
    Bid,
    /// Buying the pair's base currency.
    Ask,
}

/// One leg of a currency cycle, mapped onto an available quote series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Leg {
    /// Label of the quoted pair the leg executes against.
    pub pair: String,
    /// Side used when walking the cycle forward.
    pub side: Side,
    /// True when the traversal runs against the pair's quoting direction
    /// (holding the quote currency, buying the base).
    pub inverted: bool,
}

/// A three-currency cycle with its legs resolved onto quoted pairs.
///
/// Legs describe the forward cycle A→B→C→A (the α₁ direction); the reverse
/// cycle flips every leg's side and orientation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriangleSpec {
    pub currencies: (String, String, String),
    pub legs: [Leg; 3],
}

impl TriangleSpec {
    /// Compact display form, e.g. `EUR-USD-CHF`.
    pub fn label(&self) -> String {
        format!(
            "{}-{}-{}",
            self.currencies.0, self.currencies.1, self.currencies.2
        )
    }
}

/// Resolve the forward cycle A→B→C→A onto the available pair labels.
///
/// Each leg U→V uses the pair `U/V` at its bid when quoted directly, or the
/// pair `V/U` at its ask when only the inverse is quoted.
pub fn resolve_triangle(a: &str, b: &str, c: &str, available: &[String]) -> Result<TriangleSpec> {
    if a == b || b == c || a == c {
        return Err(Error::parameter(format!(
            "triangle currencies must be distinct, got {a}, {b}, {c}"
        )));
    }
    let legs = [(a, b), (b, c), (c, a)];
    let resolved: Vec<Leg> = legs
        .iter()
        .map(|(u, v)| {
            let direct = format!("{u}/{v}");
            let inverse = format!("{v}/{u}");
            if available.iter().any(|l| *l == direct) {
                Ok(Leg {
                    pair: direct,
                    side: Side::Bid,
                    inverted: false,
                })
            } else if available.iter().any(|l| *l == inverse) {
                Ok(Leg {
                    pair: inverse,
                    side: Side::Ask,
                    inverted: true,
                })
            } else {
                Err(Error::parameter(format!(
                    "no quote available for leg {u}->{v} (need {direct} or {inverse})"
                )))
            }
        })
        .collect::<Result<_>>()?;
    Ok(TriangleSpec {
        currencies: (a.to_string(), b.to_string(), c.to_string()),
        legs: [resolved[0].clone(), resolved[1].clone(), resolved[2].clone()],
    })
}

fn positive(rate: f64, what: &str) -> Result<f64> {
    if rate > 0.0 && rate.is_finite() {
        Ok(rate)
    } else {
        Err(Error::domain(format!("non-positive rate for {what}: {rate}")))
    }
}

/// Executable conversion rate for one unit of `from` into `to` under the
/// quote snapshot: bid of `from/to` when quoted directly, 1/ask of
/// `to/from` otherwise.
fn conversion_rate(quotes: &BTreeMap<String, TickQuote>, from: &str, to: &str) -> Result<f64> {
    let direct = format!("{from}/{to}");
    if let Some(q) = quotes.get(&direct) {
        return positive(q.bid, &format!("bid {direct}"));
    }
    let inverse = format!("{to}/{from}");
    if let Some(q) = quotes.get(&inverse) {
        return Ok(1.0 / positive(q.ask, &format!("ask {inverse}"))?);
    }
    Err(Error::parameter(format!(
        "no quote for leg {from}->{to} (need {direct} or {inverse})"
    )))
}

/// Walk a closed currency path and return the cycle product minus one.
///
/// The path may list the starting currency again at the end or leave the
/// closure implicit; at least three distinct legs are required. Each leg
/// multiplies by its executable conversion rate, so the result is the excess
/// return of converting one unit all the way around.
pub fn cycle_product(path: &[&str], quotes: &BTreeMap<String, TickQuote>) -> Result<f64> {
    let closed: Vec<&str> = match path {
        [] => Vec::new(),
        [rest @ .., last] if rest.first() == Some(last) => rest.to_vec(),
        _ => path.to_vec(),
    };
    if closed.len() < 3 {
        return Err(Error::parameter(format!(
            "cycle needs at least 3 currencies, got {}",
            closed.len()
        )));
    }
    let mut amount = 1.0f64;
    for i in 0..closed.len() {
        let from = closed[i];
        let to = closed[(i + 1) % closed.len()];
        amount *= conversion_rate(quotes, from, to)?;
    }
    Ok(amount - 1.0)
}

fn role_snapshot(ab: &TickQuote, bc: &TickQuote, ac: &TickQuote) -> BTreeMap<String, TickQuote> {
    let mut quotes = BTreeMap::new();
    quotes.insert("A/B".to_string(), *ab);
    quotes.insert("B/C".to_string(), *bc);
    quotes.insert("A/C".to_string(), *ac);
    quotes
}

/// Forward-cycle coefficient for quotes in role layout (A/B, B/C, A/C):
/// α₁ = bid(A/B)·bid(B/C)/ask(A/C) − 1.
pub fn alpha1(ab: &TickQuote, bc: &TickQuote, ac: &TickQuote) -> Result<f64> {
    cycle_product(&["A", "B", "C"], &role_snapshot(ab, bc, ac))
}

/// Reverse-cycle coefficient for the same role layout:
/// α₂ = bid(A/C)/(ask(B/C)·ask(A/B)) − 1.
pub fn alpha2(ab: &TickQuote, bc: &TickQuote, ac: &TickQuote) -> Result<f64> {
    cycle_product(&["A", "C", "B"], &role_snapshot(ab, bc, ac))
}

/// Which cycle direction an event's peak came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Alpha1,
    Alpha2,
}

/// A maximal run of samples where the better cycle direction exceeded the
/// threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ArbitrageEvent {
    pub triangle: TriangleSpec,
    /// Direction holding the larger coefficient at the peak sample.
    pub direction: Direction,
    /// Timestamp (ms) of the first qualifying sample.
    pub start_ms: i64,
    /// Timestamp (ms) of the last qualifying sample.
    pub end_ms: i64,
    /// Largest max(α₁, α₂) inside the run.
    pub peak_alpha: f64,
    /// Number of consecutive qualifying samples.
    pub samples: usize,
}

/// The two coefficients of a triangle evaluated over a common time grid.
#[derive(Debug, Clone)]
pub struct AlphaSeries {
    pub t0: i64,
    pub step_ms: i64,
    pub alpha1: Vec<f64>,
    pub alpha2: Vec<f64>,
}

fn step_from_delta(delta_t: f64) -> Result<i64> {
    let step = (delta_t * 1000.0).round() as i64;
    if step <= 0 || !delta_t.is_finite() {
        return Err(Error::parameter(format!(
            "sampling interval {delta_t} must round to at least 1 ms"
        )));
    }
    Ok(step)
}

/// Evaluate both cycle coefficients of a triangle on the common grid of its
/// three tick streams (last-quote-carried-forward on bid and ask).
///
/// The grid starts at the latest first tick and ends at the earliest last
/// tick; an empty overlap is a data error.
pub fn alpha_series(
    triangle: &TriangleSpec,
    streams: &BTreeMap<String, Vec<TickQuote>>,
    delta_t: f64,
) -> Result<AlphaSeries> {
    let step = step_from_delta(delta_t)?;
    let mut legs: Vec<(&str, &[TickQuote])> = Vec::with_capacity(3);
    for leg in &triangle.legs {
        let ticks = streams
            .get(&leg.pair)
            .ok_or_else(|| Error::parameter(format!("missing tick stream for {}", leg.pair)))?;
        if ticks.is_empty() {
            return Err(Error::domain(format!("empty tick stream for {}", leg.pair)));
        }
        if ticks.windows(2).any(|w| w[1].timestamp_ms < w[0].timestamp_ms) {
            return Err(Error::parameter(format!(
                "tick stream for {} is not time-ordered",
                leg.pair
            )));
        }
        legs.push((leg.pair.as_str(), ticks.as_slice()));
    }
    let start = legs
        .iter()
        .map(|(_, t)| t[0].timestamp_ms)
        .max()
        .expect("three legs");
    let end = legs
        .iter()
        .map(|(_, t)| t[t.len() - 1].timestamp_ms)
        .min()
        .expect("three legs");
    if end < start {
        return Err(Error::domain(
            "tick streams have no overlapping time range",
        ));
    }
    let count = ((end - start) / step) as usize + 1;
    let (a, b, c) = (
        triangle.currencies.0.as_str(),
        triangle.currencies.1.as_str(),
        triangle.currencies.2.as_str(),
    );
    let forward = [a, b, c];
    let reverse = [a, c, b];
    let mut cursors = [0usize; 3];
    let mut alpha1 = Vec::with_capacity(count);
    let mut alpha2 = Vec::with_capacity(count);
    let mut snapshot: BTreeMap<String, TickQuote> = BTreeMap::new();
    for k in 0..count {
        let t = start + k as i64 * step;
        for (i, (pair, ticks)) in legs.iter().enumerate() {
            let cur = &mut cursors[i];
            while *cur + 1 < ticks.len() && ticks[*cur + 1].timestamp_ms <= t {
                *cur += 1;
            }
            snapshot.insert((*pair).to_string(), ticks[*cur]);
        }
        alpha1.push(cycle_product(&forward, &snapshot)?);
        alpha2.push(cycle_product(&reverse, &snapshot)?);
    }
    Ok(AlphaSeries {
        t0: start,
        step_ms: step,
        alpha1,
        alpha2,
    })
}

/// Scan a triangle's tick streams for opportunity windows.
///
/// Emits every maximal run of grid samples where max(α₁, α₂) > `threshold`
/// lasting at least `min_duration` samples. Each event records the direction
/// holding the larger coefficient at the run's peak.
pub fn scan(
    triangle: &TriangleSpec,
    streams: &BTreeMap<String, Vec<TickQuote>>,
    delta_t: f64,
    threshold: f64,
    min_duration: usize,
) -> Result<Vec<ArbitrageEvent>> {
    if !(threshold >= 0.0) {
        return Err(Error::parameter(format!(
            "threshold must be >= 0, got {threshold}"
        )));
    }
    let series = alpha_series(triangle, streams, delta_t)?;
    Ok(events_from_series(triangle, &series, threshold, min_duration))
}

/// Extract qualifying runs from an evaluated coefficient series.
pub fn events_from_series(
    triangle: &TriangleSpec,
    series: &AlphaSeries,
    threshold: f64,
    min_duration: usize,
) -> Vec<ArbitrageEvent> {
    let min_duration = min_duration.max(1);
    let n = series.alpha1.len();
    let mut events = Vec::new();
    let mut run_start: Option<usize> = None;
    for k in 0..=n {
        let qualifying = k < n && series.alpha1[k].max(series.alpha2[k]) > threshold;
        match (qualifying, run_start) {
            (true, None) => run_start = Some(k),
            (false, Some(s)) => {
                let len = k - s;
                if len >= min_duration {
                    events.push(event_from_run(triangle, series, s, k - 1));
                }
                run_start = None;
            }
            _ => {}
        }
    }
    events
}

fn event_from_run(
    triangle: &TriangleSpec,
    series: &AlphaSeries,
    start: usize,
    end: usize,
) -> ArbitrageEvent {
    let mut peak = f64::NEG_INFINITY;
    let mut peak_k = start;
    for k in start..=end {
        let v = series.alpha1[k].max(series.alpha2[k]);
        if v > peak {
            peak = v;
            peak_k = k;
        }
    }
    let direction = if series.alpha1[peak_k] >= series.alpha2[peak_k] {
        Direction::Alpha1
    } else {
        Direction::Alpha2
    };
    ArbitrageEvent {
        triangle: triangle.clone(),
        direction,
        start_ms: series.t0 + start as i64 * series.step_ms,
        end_ms: series.t0 + end as i64 * series.step_ms,
        peak_alpha: peak,
        samples: end - start + 1,
    }
}

/// Raw-tick scan: evaluate the coefficients at every tick arrival instead of
/// on a fixed grid; run duration is measured in milliseconds.
pub fn scan_ticks(
    triangle: &TriangleSpec,
    streams: &BTreeMap<String, Vec<TickQuote>>,
    threshold: f64,
    min_duration_ms: i64,
) -> Result<Vec<ArbitrageEvent>> {
    if !(threshold >= 0.0) {
        return Err(Error::parameter(format!(
            "threshold must be >= 0, got {threshold}"
        )));
    }
    let mut legs: Vec<(&str, &[TickQuote])> = Vec::with_capacity(3);
    for leg in &triangle.legs {
        let ticks = streams
            .get(&leg.pair)
            .ok_or_else(|| Error::parameter(format!("missing tick stream for {}", leg.pair)))?;
        if ticks.is_empty() {
            return Err(Error::domain(format!("empty tick stream for {}", leg.pair)));
        }
        legs.push((leg.pair.as_str(), ticks.as_slice()));
    }
    let start = legs.iter().map(|(_, t)| t[0].timestamp_ms).max().unwrap();
    let end = legs
        .iter()
        .map(|(_, t)| t[t.len() - 1].timestamp_ms)
        .min()
        .unwrap();
    if end < start {
        return Err(Error::domain(
            "tick streams have no overlapping time range",
        ));
    }
    let mut times: Vec<i64> = legs
        .iter()
        .flat_map(|(_, t)| t.iter().map(|q| q.timestamp_ms))
        .filter(|t| (start..=end).contains(t))
        .collect();
    times.sort_unstable();
    times.dedup();
    let (a, b, c) = (
        triangle.currencies.0.as_str(),
        triangle.currencies.1.as_str(),
        triangle.currencies.2.as_str(),
    );
    let mut cursors = [0usize; 3];
    let mut snapshot: BTreeMap<String, TickQuote> = BTreeMap::new();
    let mut events = Vec::new();
    let mut run: Option<(i64, i64, f64, Direction, usize)> = None;
    for &t in &times {
        for (i, (pair, ticks)) in legs.iter().enumerate() {
            let cur = &mut cursors[i];
            while *cur + 1 < ticks.len() && ticks[*cur + 1].timestamp_ms <= t {
                *cur += 1;
            }
            snapshot.insert((*pair).to_string(), ticks[*cur]);
        }
        let a1 = cycle_product(&[a, b, c], &snapshot)?;
        let a2 = cycle_product(&[a, c, b], &snapshot)?;
        let v = a1.max(a2);
        let dir = if a1 >= a2 {
            Direction::Alpha1
        } else {
            Direction::Alpha2
        };
        if v > threshold {
            run = Some(match run {
                None => (t, t, v, dir, 1),
                Some((s, _, peak, pdir, n)) => {
                    if v > peak {
                        (s, t, v, dir, n + 1)
                    } else {
                        (s, t, peak, pdir, n + 1)
                    }
                }
            });
        } else if let Some((s, e, peak, pdir, n)) = run.take() {
            if e - s >= min_duration_ms {
                events.push(ArbitrageEvent {
                    triangle: triangle.clone(),
                    direction: pdir,
                    start_ms: s,
                    end_ms: e,
                    peak_alpha: peak,
                    samples: n,
                });
            }
        }
    }
    if let Some((s, e, peak, pdir, n)) = run {
        if e - s >= min_duration_ms {
            events.push(ArbitrageEvent {
                triangle: triangle.clone(),
                direction: pdir,
                start_ms: s,
                end_ms: e,
                peak_alpha: peak,
                samples: n,
            });
        }
    }
    Ok(events)
}

/// JSON-lines export: one event per line.
pub fn events_to_jsonl(events: &[ArbitrageEvent]) -> Result<String> {
    let mut out = String::new();
    for e in events {
        out.push_str(&serde_json::to_string(e)?);
        out.push('\n');
    }
    Ok(out)
}

/// Summary CSV grouped by (triangle, direction): count, total samples, and
/// the largest peak.
pub fn events_summary_csv(events: &[ArbitrageEvent]) -> String {
    let mut groups: BTreeMap<(String, &'static str), (usize, usize, f64)> = BTreeMap::new();
    for e in events {
        let dir = match e.direction {
            Direction::Alpha1 => "alpha1",
            Direction::Alpha2 => "alpha2",
        };
        let entry = groups.entry((e.triangle.label(), dir)).or_insert((0, 0, f64::NEG_INFINITY));
        entry.0 += 1;
        entry.1 += e.samples;
        entry.2 = entry.2.max(e.peak_alpha);
    }
    let mut out = String::from("triangle,direction,events,total_samples,max_peak\n");
    for ((label, dir), (count, samples, peak)) in groups {
        out.push_str(&format!("{label},{dir},{count},{samples},{peak}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quote(bid: f64, ask: f64) -> TickQuote {
        TickQuote {
            timestamp_ms: 0,
            ask,
            bid,
        }
    }

    fn zero_spread(rate: f64) -> TickQuote {
        quote(rate, rate)
    }

    /// Independent unit-of-account simulator: literally walk the path with a
    /// wallet, spelling out each case long-hand.
    fn simulate_walk(path: &[&str], quotes: &BTreeMap<String, TickQuote>) -> Option<f64> {
        let mut wallet = 1.0f64;
        let n = path.len();
        for i in 0..n {
            let from = path[i];
            let to = path[(i + 1) % n];
            if from == to {
                continue;
            }
            let mut converted = None;
            for (label, q) in quotes {
                let mut parts = label.split('/');
                let base = parts.next().unwrap();
                let counter = parts.next().unwrap();
                if base == from && counter == to {
                    // Selling `from` (the base) hits the bid.
                    converted = Some(wallet * q.bid);
                    break;
                }
                if base == to && counter == from {
                    // Buying `to` (the base) with `from` pays the ask.
                    converted = Some(wallet / q.ask);
                    break;
                }
            }
            wallet = converted?;
        }
        Some(wallet - 1.0)
    }

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn consistent_zero_spread_rates_give_zero_alphas() {
        // A/B = 1.10, B/C = 0.90, A/C = 0.99 is exactly consistent.
        let ab = zero_spread(1.10);
        let bc = zero_spread(0.90);
        let ac = zero_spread(0.99);
        assert!(alpha1(&ab, &bc, &ac).unwrap().abs() < 1e-15);
        assert!(alpha2(&ab, &bc, &ac).unwrap().abs() < 1e-15);
    }

    #[test]
    fn spreads_make_both_alphas_negative_on_consistent_mids() {
        let with_spread = |mid: f64| {
            let half = mid * 0.5e-4; // one basis point total
            quote(mid - half, mid + half)
        };
        let ab = with_spread(1.10);
        let bc = with_spread(0.90);
        let ac = with_spread(0.99);
        assert!(alpha1(&ab, &bc, &ac).unwrap() < 0.0);
        assert!(alpha2(&ab, &bc, &ac).unwrap() < 0.0);
    }

    #[test]
    fn alpha1_matches_direct_product_and_simulator() {
        let ab = zero_spread(1.10);
        let bc = zero_spread(0.90);
        let ac = TickQuote {
            timestamp_ms: 0,
            bid: 0.9801,
            ask: 0.9801,
        };
        let expected = 0.99f64 / 0.9801 - 1.0;
        let got = alpha1(&ab, &bc, &ac).unwrap();
        assert!((got - expected).abs() < 1e-15, "{got} vs {expected}");
        let sim = simulate_walk(&["A", "B", "C"], &role_snapshot(&ab, &bc, &ac)).unwrap();
        assert!((got - sim).abs() < 1e-15);
        assert!((got - 0.01010).abs() < 5e-5);
    }

    #[test]
    fn zero_spread_alphas_are_reciprocal_complements() {
        // Inconsistent zero-spread rates: alpha2 = 1/(1+alpha1) - 1.
        let mut state = 42u64;
        for _ in 0..100 {
            let ab = zero_spread(0.5 + xorshift(&mut state));
            let bc = zero_spread(0.5 + xorshift(&mut state));
            let ac = zero_spread(0.5 + xorshift(&mut state));
            let a1 = alpha1(&ab, &bc, &ac).unwrap();
            let a2 = alpha2(&ab, &bc, &ac).unwrap();
            assert!((a2 - (1.0 / (1.0 + a1) - 1.0)).abs() < 1e-12);
            if a1 > 1e-9 {
                assert!(a2 < 0.0, "direction exclusivity violated: {a1} {a2}");
            }
            if a2 > 1e-9 {
                assert!(a1 < 0.0);
            }
        }
    }

    #[test]
    fn widening_any_spread_never_raises_either_alpha() {
        let mut state = 7u64;
        for _ in 0..50 {
            let mids = [
                0.5 + xorshift(&mut state),
                0.5 + xorshift(&mut state),
                0.5 + xorshift(&mut state),
            ];
            let base: Vec<TickQuote> = mids.iter().map(|m| zero_spread(*m)).collect();
            let a1_base = alpha1(&base[0], &base[1], &base[2]).unwrap();
            let a2_base = alpha2(&base[0], &base[1], &base[2]).unwrap();
            for widened_leg in 0..3 {
                let mut quotes = base.clone();
                let mid = mids[widened_leg];
                let half = mid * 1e-3 * (0.5 + xorshift(&mut state));
                quotes[widened_leg] = quote(mid - half, mid + half);
                let a1 = alpha1(&quotes[0], &quotes[1], &quotes[2]).unwrap();
                let a2 = alpha2(&quotes[0], &quotes[1], &quotes[2]).unwrap();
                assert!(a1 <= a1_base + 1e-15, "leg {widened_leg}");
                assert!(a2 <= a2_base + 1e-15, "leg {widened_leg}");
            }
        }
    }

    /// Rates derived from a single valuation vector are cycle-free: every
    /// closed path multiplies to exactly 1.
    #[test]
    fn valuation_consistent_rates_have_zero_cycle_products() {
        let currencies = ["W", "X", "Y", "Z", "V"];
        let mut state = 99u64;
        for _ in 0..20 {
            let values: Vec<f64> = currencies.iter().map(|_| 0.5 + xorshift(&mut state)).collect();
            let mut quotes = BTreeMap::new();
            // Quote roughly half the pairs directly, the rest only inverted.
            for i in 0..currencies.len() {
                for j in i + 1..currencies.len() {
                    let rate = values[i] / values[j];
                    if (i + j) % 2 == 0 {
                        quotes.insert(
                            format!("{}/{}", currencies[i], currencies[j]),
                            zero_spread(rate),
                        );
                    } else {
                        quotes.insert(
                            format!("{}/{}", currencies[j], currencies[i]),
                            zero_spread(1.0 / rate),
                        );
                    }
                }
            }
            for path in [
                vec!["W", "X", "Y"],
                vec!["X", "Z", "V"],
                vec!["W", "X", "Y", "Z"],
                vec!["W", "Z", "X", "V", "Y"],
                vec!["W", "X", "Y", "W"], // explicit closure
            ] {
                let p = cycle_product(&path, &quotes).unwrap();
                assert!(p.abs() < 1e-14, "path {path:?}: {p}");
                let sim = simulate_walk(
                    &(if path.first() == path.last() && path.len() > 1 {
                        path[..path.len() - 1].to_vec()
                    } else {
                        path.clone()
                    }),
                    &quotes,
                )
                .unwrap();
                assert!((p - sim).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn three_cycle_specializes_to_alpha1() {
        let mut state = 1234u64;
        for _ in 0..100 {
            let ab = quote(1.0 + xorshift(&mut state), 1.1 + xorshift(&mut state));
            let bc = quote(0.5 + xorshift(&mut state), 0.6 + xorshift(&mut state));
            let ac = quote(0.7 + xorshift(&mut state), 0.8 + xorshift(&mut state));
            let quotes = role_snapshot(&ab, &bc, &ac);
            let via_cycle = cycle_product(&["A", "B", "C"], &quotes).unwrap();
            let via_alpha = alpha1(&ab, &bc, &ac).unwrap();
            assert_eq!(via_cycle.to_bits(), via_alpha.to_bits());
        }
    }

    #[test]
    fn planted_four_cycle_inconsistency_is_positive_and_matches_simulator() {
        let currencies = ["W", "X", "Y", "Z"];
        let values = [1.0, 1.3, 0.8, 2.1];
        let mut quotes = BTreeMap::new();
        for i in 0..4 {
            for j in 0..4 {
                if i < j {
                    quotes.insert(
                        format!("{}/{}", currencies[i], currencies[j]),
                        zero_spread(values[i] / values[j]),
                    );
                }
            }
        }
        // Bias one leg so the cycle through it gains 0.5%.
        let wx = quotes.get_mut("W/X").unwrap();
        wx.bid *= 1.005;
        wx.ask *= 1.005;
        let p = cycle_product(&["W", "X", "Y", "Z"], &quotes).unwrap();
        assert!((p - 0.005).abs() < 1e-12, "{p}");
        let sim = simulate_walk(&["W", "X", "Y", "Z"], &quotes).unwrap();
        assert!((p - sim).abs() < 1e-15);
        // The reverse direction pays for it.
        let rev = cycle_product(&["Z", "Y", "X", "W"], &quotes).unwrap();
        assert!(rev < 0.0);
    }

    #[test]
    fn unquotable_leg_is_a_parameter_error() {
        let quotes = role_snapshot(&zero_spread(1.0), &zero_spread(1.0), &zero_spread(1.0));
        match cycle_product(&["A", "B", "Q"], &quotes) {
            Err(Error::Parameter(msg)) => assert!(msg.contains("B->Q"), "{msg}"),
            other => panic!("expected parameter error, got {other:?}"),
        }
        assert!(cycle_product(&["A", "B"], &quotes).is_err());
    }

    #[test]
    fn resolve_triangle_honors_quoting_direction() {
        let available: Vec<String> = ["EUR/USD", "USD/CHF", "EUR/CHF"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let t = resolve_triangle("EUR", "USD", "CHF", &available).unwrap();
        assert_eq!(t.legs[0].pair, "EUR/USD");
        assert_eq!(t.legs[0].side, Side::Bid);
        assert!(!t.legs[0].inverted);
        assert_eq!(t.legs[1].pair, "USD/CHF");
        // Leg CHF->EUR must invert EUR/CHF and pay the ask.
        assert_eq!(t.legs[2].pair, "EUR/CHF");
        assert_eq!(t.legs[2].side, Side::Ask);
        assert!(t.legs[2].inverted);
        assert_eq!(t.label(), "EUR-USD-CHF");
        assert!(resolve_triangle("EUR", "USD", "JPY", &available).is_err());
        assert!(resolve_triangle("EUR", "EUR", "CHF", &available).is_err());
    }

    fn constant_stream(label_rate: f64, count: usize) -> Vec<TickQuote> {
        (0..count)
            .map(|k| TickQuote {
                timestamp_ms: k as i64 * 1000,
                bid: label_rate,
                ask: label_rate,
            })
            .collect()
    }

    fn fixture_streams(count: usize) -> BTreeMap<String, Vec<TickQuote>> {
        let mut streams = BTreeMap::new();
        streams.insert("A/B".to_string(), constant_stream(1.0, count));
        streams.insert("B/C".to_string(), constant_stream(1.0, count));
        streams.insert("A/C".to_string(), constant_stream(1.0, count));
        streams
    }

    fn fixture_triangle() -> TriangleSpec {
        let available: Vec<String> = ["A/B", "B/C", "A/C"].iter().map(|s| s.to_string()).collect();
        resolve_triangle("A", "B", "C", &available).unwrap()
    }

    #[test]
    fn consistent_fixture_produces_no_events() {
        let triangle = fixture_triangle();
        let streams = fixture_streams(200);
        let events = scan(&triangle, &streams, 1.0, 0.0, 1).unwrap();
        assert!(events.is_empty());
    }

    #[test]
    fn planted_window_is_recovered_exactly() {
        let triangle = fixture_triangle();
        let mut streams = fixture_streams(200);
        // Raise the A/B quote (both sides) for samples 50..80 so the forward
        // cycle gains 0.002.
        for q in &mut streams.get_mut("A/B").unwrap()[50..80] {
            q.bid = 1.002;
            q.ask = 1.002;
        }
        let events = scan(&triangle, &streams, 1.0, 0.0, 1).unwrap();
        assert_eq!(events.len(), 1);
        let e = &events[0];
        assert_eq!(e.samples, 30);
        assert_eq!(e.direction, Direction::Alpha1);
        assert_eq!(e.start_ms, 50_000);
        assert_eq!(e.end_ms, 79_000);
        assert!((e.peak_alpha - 0.002).abs() < 1e-12);
        // A min_duration longer than the run suppresses it.
        let none = scan(&triangle, &streams, 1.0, 0.0, 31).unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn shock_is_detected_in_the_shocked_direction_only() {
        let triangle = fixture_triangle();
        let mut streams = fixture_streams(100);
        // One leg reprices 15% down for 5 samples before the others adjust:
        // buying C with A suddenly cheap -> forward cycle profits.
        for q in &mut streams.get_mut("A/C").unwrap()[40..45] {
            q.bid = 0.85;
            q.ask = 0.85;
        }
        let events = scan(&triangle, &streams, 1.0, 0.0, 1).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].direction, Direction::Alpha1);
        assert_eq!(events[0].samples, 5);
        assert!((events[0].peak_alpha - (1.0 / 0.85 - 1.0)).abs() < 1e-12);
        // With a 10-sample minimum the shock is filtered out.
        assert!(scan(&triangle, &streams, 1.0, 0.0, 10).unwrap().is_empty());
    }

    #[test]
    fn halving_the_grid_step_keeps_the_event() {
        let triangle = fixture_triangle();
        let mut streams = fixture_streams(100);
        for q in &mut streams.get_mut("A/B").unwrap()[30..50] {
            q.bid = 1.003;
            q.ask = 1.003;
        }
        let coarse = scan(&triangle, &streams, 2.0, 0.0, 1).unwrap();
        let fine = scan(&triangle, &streams, 1.0, 0.0, 1).unwrap();
        assert_eq!(coarse.len(), 1);
        assert_eq!(fine.len(), 1);
        assert!(fine[0].samples >= 2 * coarse[0].samples - 2);
        assert!((coarse[0].peak_alpha - fine[0].peak_alpha).abs() < 1e-15);
    }

    #[test]
    fn disjoint_streams_are_a_domain_error() {
        let triangle = fixture_triangle();
        let mut streams = fixture_streams(10);
        for q in streams.get_mut("A/B").unwrap() {
            q.timestamp_ms += 1_000_000;
        }
        match scan(&triangle, &streams, 1.0, 0.0, 1) {
            Err(Error::Domain(_)) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn raw_tick_scan_finds_the_planted_window() {
        let triangle = fixture_triangle();
        let mut streams = fixture_streams(100);
        for q in &mut streams.get_mut("A/B").unwrap()[20..35] {
            q.bid = 1.004;
            q.ask = 1.004;
        }
        let events = scan_ticks(&triangle, &streams, 0.0, 0).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].start_ms, 20_000);
        assert_eq!(events[0].end_ms, 34_000);
        assert!((events[0].peak_alpha - 0.004).abs() < 1e-12);
        // Duration filter in milliseconds.
        assert!(scan_ticks(&triangle, &streams, 0.0, 15_000).unwrap().is_empty());
    }

    #[test]
    fn exports_serialize_events_faithfully() {
        let triangle = fixture_triangle();
        let mut streams = fixture_streams(60);
        for q in &mut streams.get_mut("A/B").unwrap()[10..20] {
            q.bid = 1.001;
            q.ask = 1.001;
        }
        let events = scan(&triangle, &streams, 1.0, 0.0, 1).unwrap();
        let jsonl = events_to_jsonl(&events).unwrap();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 1);
        let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(v["direction"], "alpha1");
        assert_eq!(v["samples"], 10);
        assert_eq!(v["triangle"]["currencies"][0], "A");
        let csv = events_summary_csv(&events);
        assert!(csv.starts_with("triangle,direction,events,total_samples,max_peak\n"));
        assert!(csv.contains("A-B-C,alpha1,1,10,"));
    }
}
