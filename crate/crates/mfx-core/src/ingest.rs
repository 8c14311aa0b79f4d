//! Tick ingestion and return-series preparation.
//!
//! Pipeline: parse raw tick quotes → resample mid-prices onto a regular grid
//! (last observation carried forward) → logarithmic returns → excision of
//! inactive (stale-quote) runs → pairwise synchronization → unit-variance
//! scaling. Timestamps are integer milliseconds UTC throughout; no calendar
//! arithmetic is done anywhere.

use std::collections::BTreeSet;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mean, population_variance, CompensatedSum};

/// One bid/ask quote. `ask >= bid > 0` is enforced at parse time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickQuote {
    pub timestamp_ms: i64,
    pub ask: f64,
    pub bid: f64,
}

/// Mid-price of a quote: the bid/ask average.
pub fn mid_price(quote: &TickQuote) -> f64 {
    0.5 * (quote.ask + quote.bid)
}

/// Header handling for tick CSV streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeaderMode {
    /// Treat the first row as a header iff its timestamp column is not numeric.
    Auto,
    Present,
    Absent,
}

/// Column roles a tick stream may declare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TickColumn {
    TimestampMs,
    Ask,
    Bid,
}

/// Declared layout of a tick stream.
///
/// The default matches `timestamp_ms,ask,bid` with an optional header and a
/// 1% tolerance for bad rows.
#[derive(Debug, Clone)]
pub struct TickFormat {
    pub delimiter: u8,
    pub header: HeaderMode,
    pub columns: [TickColumn; 3],
    /// Reject the whole stream when more than this fraction of data rows is bad.
    pub max_malformed_fraction: f64,
}

impl Default for TickFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: HeaderMode::Auto,
            columns: [TickColumn::TimestampMs, TickColumn::Ask, TickColumn::Bid],
            max_malformed_fraction: 0.01,
        }
    }
}

/// Per-stream accounting of what the parser accepted and rejected.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ParseReport {
    /// Data rows seen (header excluded).
    pub rows_total: usize,
    /// Rows that produced a quote.
    pub rows_ok: usize,
    /// Rows that failed to parse (column count, numbers, non-positive prices).
    pub rows_malformed: usize,
    /// Rows with ask < bid (crossed market, treated as bad data).
    pub rows_crossed: usize,
    /// Rows whose timestamp went backwards relative to the last accepted row.
    pub rows_out_of_order: usize,
    /// Line number and reason for the first rejected row, if any.
    pub first_rejected: Option<(usize, String)>,
}

impl ParseReport {
    /// Total rejected rows of any kind.
    pub fn rows_rejected(&self) -> usize {
        self.rows_malformed + self.rows_crossed + self.rows_out_of_order
    }
}

/// Parse a tick CSV stream into quotes plus an accounting report.
///
/// Quotes come back in timestamp order; rows that would break that order are
/// rejected and counted rather than silently re-sorted. The stream as a whole
/// is rejected (naming the first offending line) when the rejected fraction
/// exceeds `format.max_malformed_fraction`.
pub fn parse_ticks<R: BufRead>(reader: R, format: &TickFormat) -> Result<(Vec<TickQuote>, ParseReport)> {
    let mut quotes = Vec::new();
    let mut report = ParseReport::default();
    let mut last_ts: Option<i64> = None;

    let ts_col = column_position(format, TickColumn::TimestampMs)?;
    let ask_col = column_position(format, TickColumn::Ask)?;
    let bid_col = column_position(format, TickColumn::Bid)?;
    let delim = format.delimiter as char;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if idx == 0 {
            match format.header {
                HeaderMode::Present => continue,
                HeaderMode::Auto => {
                    let first_field = line.split(delim).nth(ts_col).unwrap_or("");
                    if first_field.trim().parse::<i64>().is_err() {
                        continue;
                    }
                }
                HeaderMode::Absent => {}
            }
        }
        if line.is_empty() {
            continue;
        }
        report.rows_total += 1;

        let fields: Vec<&str> = line.split(delim).collect();
        let parsed = parse_row(&fields, ts_col, ask_col, bid_col);
        match parsed {
            Ok(q) if q.ask < q.bid => {
                report.rows_crossed += 1;
                note_reject(&mut report, line_no, "ask below bid (crossed market)");
            }
            Ok(q) => {
                if last_ts.is_some_and(|t| q.timestamp_ms < t) {
                    report.rows_out_of_order += 1;
                    note_reject(&mut report, line_no, "timestamp decreases");
                } else {
                    last_ts = Some(q.timestamp_ms);
                    report.rows_ok += 1;
                    quotes.push(q);
                }
            }
            Err(reason) => {
                report.rows_malformed += 1;
                note_reject(&mut report, line_no, &reason);
            }
        }
    }

    if report.rows_total > 0 {
        let frac = report.rows_rejected() as f64 / report.rows_total as f64;
        if frac > format.max_malformed_fraction {
            let (line, message) = report
                .first_rejected
                .clone()
                .unwrap_or((0, "unknown".into()));
            return Err(Error::Format {
                line,
                message: format!(
                    "{:.2}% of rows rejected (limit {:.2}%); first: {message}",
                    100.0 * frac,
                    100.0 * format.max_malformed_fraction
                ),
            });
        }
    }
    Ok((quotes, report))
}

fn column_position(format: &TickFormat, role: TickColumn) -> Result<usize> {
    format
        .columns
        .iter()
        .position(|c| *c == role)
        .ok_or_else(|| Error::parameter(format!("tick format is missing a {role:?} column")))
}

fn parse_row(fields: &[&str], ts: usize, ask: usize, bid: usize) -> std::result::Result<TickQuote, String> {
    let need = ts.max(ask).max(bid) + 1;
    if fields.len() < need {
        return Err(format!("expected {need} columns, found {}", fields.len()));
    }
    let timestamp_ms: i64 = fields[ts]
        .trim()
        .parse()
        .map_err(|_| format!("bad timestamp {:?}", fields[ts]))?;
    let ask_v: f64 = fields[ask]
        .trim()
        .parse()
        .map_err(|_| format!("bad ask {:?}", fields[ask]))?;
    let bid_v: f64 = fields[bid]
        .trim()
        .parse()
        .map_err(|_| format!("bad bid {:?}", fields[bid]))?;
    if !(ask_v.is_finite() && bid_v.is_finite()) || ask_v <= 0.0 || bid_v <= 0.0 {
        return Err("non-positive or non-finite price".into());
    }
    Ok(TickQuote {
        timestamp_ms,
        ask: ask_v,
        bid: bid_v,
    })
}

fn note_reject(report: &mut ParseReport, line_no: usize, reason: &str) {
    if report.first_rejected.is_none() {
        report.first_rejected = Some((line_no, reason.to_string()));
    }
}

/// Split an exchange-rate label `"BASE/QUOTE"` into its two currencies.
pub fn split_pair(label: &str) -> Result<(&str, &str)> {
    let mut parts = label.split('/');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(base), Some(quote), None) if !base.is_empty() && !quote.is_empty() => Ok((base, quote)),
        _ => Err(Error::parameter(format!(
            "malformed exchange-rate label {label:?} (expected BASE/QUOTE)"
        ))),
    }
}

/// Regularly sampled mid-price series.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    /// Exchange-rate label, e.g. `"EUR/USD"`.
    pub pair: String,
    /// Sampling interval in seconds.
    pub delta_t: f64,
    /// Timestamp (ms UTC) of the first sample.
    pub t0: i64,
    pub values: Vec<f64>,
}

/// Normalization tag carried by a return series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    UnitVariance,
}

/// Regularly sampled logarithmic returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub pair: String,
    /// Sampling interval in seconds.
    pub delta_t: f64,
    /// Timestamp (ms UTC) of the first return (the instant it is realized).
    pub t0: i64,
    pub values: Vec<f64>,
    pub normalization: Normalization,
}

impl ReturnSeries {
    /// Nominal grid step in milliseconds.
    pub fn step_ms(&self) -> i64 {
        step_ms(self.delta_t)
    }

    /// Nominal timestamp of sample `i` on the compacted grid.
    pub fn timestamp(&self, i: usize) -> i64 {
        self.t0 + i as i64 * self.step_ms()
    }
}

fn step_ms(delta_t: f64) -> i64 {
    (delta_t * 1000.0).round() as i64
}

/// Resample ticks onto a regular grid by carrying the last mid-price forward.
///
/// The grid starts at the first tick's timestamp and ends at the last grid
/// point not after the final tick, so the output length is
/// `floor(span / delta_t) + 1`. Every grid point is covered because the grid
/// starts on a tick.
pub fn resample(ticks: &[TickQuote], delta_t: f64, pair: &str) -> Result<RateSeries> {
    if ticks.is_empty() {
        return Err(Error::domain("resample: empty tick stream"));
    }
    if !(delta_t > 0.0) || step_ms(delta_t) < 1 {
        return Err(Error::parameter(format!(
            "resample: delta_t must be a positive interval of at least 1 ms, got {delta_t}"
        )));
    }
    if ticks.windows(2).any(|w| w[1].timestamp_ms < w[0].timestamp_ms) {
        return Err(Error::domain("resample: ticks are not in timestamp order"));
    }
    let step = step_ms(delta_t);
    let t0 = ticks[0].timestamp_ms;
    let span = ticks[ticks.len() - 1].timestamp_ms - t0;
    let count = (span / step) as usize + 1;

    let mut values = Vec::with_capacity(count);
    let mut cursor = 0usize;
    for k in 0..count {
        let grid_ts = t0 + k as i64 * step;
        while cursor + 1 < ticks.len() && ticks[cursor + 1].timestamp_ms <= grid_ts {
            cursor += 1;
        }
        values.push(mid_price(&ticks[cursor]));
    }
    Ok(RateSeries {
        pair: pair.to_string(),
        delta_t,
        t0,
        values,
    })
}

/// Logarithmic returns of a rate series: `r(k) = ln v(k+1) − ln v(k)`.
pub fn log_returns(rates: &RateSeries) -> Result<ReturnSeries> {
    if rates.values.len() < 2 {
        return Err(Error::parameter("log_returns: need at least two samples"));
    }
    if rates.values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::domain("log_returns: non-positive rate in input"));
    }
    let values: Vec<f64> = rates
        .values
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    Ok(ReturnSeries {
        pair: rates.pair.clone(),
        delta_t: rates.delta_t,
        t0: rates.t0 + step_ms(rates.delta_t),
        values,
        normalization: Normalization::Raw,
    })
}

/// Which original-grid samples were removed from a compacted series.
///
/// Ranges are inclusive original indices, sorted and disjoint. The map (plus
/// the compacted series' `t0`) is enough to recover every retained sample's
/// original timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapMap {
    original_len: usize,
    ranges: Vec<(usize, usize)>,
}

impl GapMap {
    /// Gap map with nothing removed.
    pub fn none(original_len: usize) -> Self {
        Self {
            original_len,
            ranges: Vec::new(),
        }
    }

    /// Build from explicit removed ranges (inclusive). Ranges must be in
    /// bounds; overlapping or adjacent ranges are merged.
    pub fn from_removed(original_len: usize, mut ranges: Vec<(usize, usize)>) -> Result<Self> {
        ranges.sort_unstable();
        let mut merged: Vec<(usize, usize)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            if lo > hi || hi >= original_len {
                return Err(Error::parameter(format!(
                    "gap range [{lo}, {hi}] invalid for original length {original_len}"
                )));
            }
            match merged.last_mut() {
                Some((_, last_hi)) if lo <= *last_hi + 1 => *last_hi = (*last_hi).max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self {
            original_len,
            ranges: merged,
        })
    }

    pub fn original_len(&self) -> usize {
        self.original_len
    }

    /// Removed ranges, inclusive original indices.
    pub fn removed(&self) -> &[(usize, usize)] {
        &self.ranges
    }

    /// Number of samples surviving the removal.
    pub fn retained_len(&self) -> usize {
        let removed: usize = self.ranges.iter().map(|(lo, hi)| hi - lo + 1).sum();
        self.original_len - removed
    }

    /// Retained original-index segments, inclusive, in order.
    pub fn retained_ranges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.ranges.len() + 1);
        let mut next = 0usize;
        for &(lo, hi) in &self.ranges {
            if lo > next {
                out.push((next, lo - 1));
            }
            next = hi + 1;
        }
        if next < self.original_len {
            out.push((next, self.original_len - 1));
        }
        out
    }

    /// Original index of compacted sample `i`.
    pub fn original_index(&self, i: usize) -> usize {
        let mut remaining = i;
        for (lo, hi) in self.retained_ranges() {
            let len = hi - lo + 1;
            if remaining < len {
                return lo + remaining;
            }
            remaining -= len;
        }
        panic!("compacted index {i} out of range");
    }

    /// New map with the compacted range `[lo, hi]` (inclusive) also removed.
    pub fn with_removed_compacted(&self, lo: usize, hi: usize) -> Result<GapMap> {
        if lo > hi || hi >= self.retained_len() {
            return Err(Error::parameter(format!(
                "compacted range [{lo}, {hi}] invalid for retained length {}",
                self.retained_len()
            )));
        }
        let mut ranges = self.ranges.clone();
        // Each retained segment overlapping [lo, hi] contributes one original range.
        let mut pos = 0usize; // compacted index at the start of the segment
        for (seg_lo, seg_hi) in self.retained_ranges() {
            let len = seg_hi - seg_lo + 1;
            let seg_first = pos;
            let seg_last = pos + len - 1;
            if seg_last >= lo && seg_first <= hi {
                let cut_first = lo.max(seg_first) - seg_first + seg_lo;
                let cut_last = hi.min(seg_last) - seg_first + seg_lo;
                ranges.push((cut_first, cut_last));
            }
            pos += len;
        }
        GapMap::from_removed(self.original_len, ranges)
    }
}

/// Excise maximal runs of exactly-zero returns at least `threshold` long.
///
/// Stale quotes survive LOCF resampling as repeated mids, i.e. exactly zero
/// log-returns, so long zero runs mark inactive periods rather than genuine
/// stasis. The compacted series and a gap map over the input's index space are
/// returned; `t0` advances if the head is excised. The output may be empty
/// (e.g. an all-zero series with threshold 1).
pub fn filter_inactive(series: &ReturnSeries, threshold: usize) -> Result<(ReturnSeries, GapMap)> {
    if threshold == 0 {
        return Err(Error::parameter("filter_inactive: threshold must be >= 1"));
    }
    let n = series.values.len();
    let mut removed: Vec<(usize, usize)> = Vec::new();
    let mut i = 0usize;
    while i < n {
        if series.values[i] == 0.0 {
            let start = i;
            while i < n && series.values[i] == 0.0 {
                i += 1;
            }
            if i - start >= threshold {
                removed.push((start, i - 1));
            }
        } else {
            i += 1;
        }
    }
    let gaps = GapMap::from_removed(n, removed)?;
    let mut values = Vec::with_capacity(gaps.retained_len());
    for (lo, hi) in gaps.retained_ranges() {
        values.extend_from_slice(&series.values[lo..=hi]);
    }
    let t0 = if values.is_empty() {
        series.t0
    } else {
        series.timestamp(gaps.original_index(0))
    };
    Ok((
        ReturnSeries {
            pair: series.pair.clone(),
            delta_t: series.delta_t,
            t0,
            values,
            normalization: series.normalization,
        },
        gaps,
    ))
}

fn retained_timestamps(series: &ReturnSeries, gaps: &GapMap) -> Result<Vec<(usize, i64)>> {
    if gaps.retained_len() != series.values.len() {
        return Err(Error::parameter(format!(
            "gap map retains {} samples but series {:?} has {}",
            gaps.retained_len(),
            series.pair,
            series.values.len()
        )));
    }
    let step = series.step_ms();
    let segments = gaps.retained_ranges();
    let first = match segments.first() {
        Some(&(lo, _)) => lo,
        None => return Ok(Vec::new()),
    };
    let mut out = Vec::with_capacity(series.values.len());
    let mut compacted = 0usize;
    for (lo, hi) in segments {
        for orig in lo..=hi {
            out.push((compacted, series.t0 + (orig - first) as i64 * step));
            compacted += 1;
        }
    }
    Ok(out)
}

/// Restrict two return series to the timestamps present in both gap-free
/// domains.
///
/// Both inputs must share the sampling interval. The outputs are compacted:
/// they carry the common samples back-to-back with `t0` set to the first
/// common timestamp (the same convention the inactive-period filter uses), so
/// re-synchronizing the outputs is the identity.
pub fn synchronize(
    a: &ReturnSeries,
    gaps_a: &GapMap,
    b: &ReturnSeries,
    gaps_b: &GapMap,
) -> Result<(ReturnSeries, ReturnSeries)> {
    if a.step_ms() != b.step_ms() {
        return Err(Error::parameter(format!(
            "synchronize: sampling intervals differ ({} vs {})",
            a.delta_t, b.delta_t
        )));
    }
    let ts_a = retained_timestamps(a, gaps_a)?;
    let ts_b = retained_timestamps(b, gaps_b)?;

    let mut vals_a = Vec::new();
    let mut vals_b = Vec::new();
    let mut t0 = None;
    let (mut i, mut j) = (0usize, 0usize);
    while i < ts_a.len() && j < ts_b.len() {
        let (ia, ta) = ts_a[i];
        let (ib, tb) = ts_b[j];
        match ta.cmp(&tb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                t0.get_or_insert(ta);
                vals_a.push(a.values[ia]);
                vals_b.push(b.values[ib]);
                i += 1;
                j += 1;
            }
        }
    }
    let t0 = t0.ok_or_else(|| {
        Error::domain(format!(
            "synchronize: {:?} and {:?} share no timestamps (disjoint or misaligned grids)",
            a.pair, b.pair
        ))
    })?;
    let out = |src: &ReturnSeries, values: Vec<f64>| ReturnSeries {
        pair: src.pair.clone(),
        delta_t: src.delta_t,
        t0,
        values,
        normalization: src.normalization,
    };
    Ok((out(a, vals_a), out(b, vals_b)))
}

/// Scale a return series to unit population variance.
///
/// The mean is left alone: the analysis profiles raw sums and removes
/// window-local polynomial trends, which absorb any constant offset, so only
/// the scale matters downstream.
pub fn normalize(series: &ReturnSeries) -> Result<ReturnSeries> {
    if series.values.is_empty() {
        return Err(Error::parameter("normalize: empty series"));
    }
    let var = population_variance(&series.values);
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::domain(format!(
            "normalize: series {:?} has zero or non-finite variance",
            series.pair
        )));
    }
    let scale = var.sqrt();
    Ok(ReturnSeries {
        pair: series.pair.clone(),
        delta_t: series.delta_t,
        t0: series.t0,
        values: series.values.iter().map(|v| v / scale).collect(),
        normalization: Normalization::UnitVariance,
    })
}

/// Basket synchronization: restrict every series to the timestamps common to
/// all nominal grids. Inputs must share the sampling interval; the first pair
/// with no common timestamps is named in the error.
pub fn synchronize_basket(series: &[ReturnSeries]) -> Result<Vec<ReturnSeries>> {
    if series.len() < 2 {
        return Ok(series.to_vec());
    }
    let step = series[0].step_ms();
    for s in &series[1..] {
        if s.step_ms() != step {
            return Err(Error::parameter(format!(
                "basket: sampling interval of {:?} differs from {:?}",
                s.pair, series[0].pair
            )));
        }
    }
    // Intersect nominal grids: timestamps t0 + k*step for each series.
    let mut common: BTreeSet<i64> = (0..series[0].values.len())
        .map(|k| series[0].timestamp(k))
        .collect();
    for s in &series[1..] {
        let grid: BTreeSet<i64> = (0..s.values.len()).map(|k| s.timestamp(k)).collect();
        common.retain(|t| grid.contains(t));
        if common.is_empty() {
            return Err(Error::domain(format!(
                "basket: {:?} and {:?} share no timestamps",
                series[0].pair, s.pair
            )));
        }
    }
    let t0 = *common.iter().next().unwrap();
    let out = series
        .iter()
        .map(|s| {
            let values: Vec<f64> = common
                .iter()
                .map(|t| {
                    let k = ((t - s.t0) / step) as usize;
                    s.values[k]
                })
                .collect();
            ReturnSeries {
                pair: s.pair.clone(),
                delta_t: s.delta_t,
                t0,
                values,
                normalization: s.normalization,
            }
        })
        .collect();
    Ok(out)
}

const CACHE_MAGIC: &[u8; 4] = b"MFX1";

/// Write a return series in the binary cache layout: magic `MFX1`, u32 LE
/// label length, label bytes, f64 LE delta_t, i64 LE t0, u64 LE count, then
/// count little-endian f64 values. The normalization tag is not persisted;
/// caches hold raw returns.
pub fn write_cache<W: Write>(series: &ReturnSeries, writer: &mut W) -> Result<()> {
    writer.write_all(CACHE_MAGIC)?;
    let label = series.pair.as_bytes();
    writer.write_all(&(label.len() as u32).to_le_bytes())?;
    writer.write_all(label)?;
    writer.write_all(&series.delta_t.to_le_bytes())?;
    writer.write_all(&series.t0.to_le_bytes())?;
    writer.write_all(&(series.values.len() as u64).to_le_bytes())?;
    for v in &series.values {
        writer.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Read a return series written by [`write_cache`].
pub fn read_cache<R: Read>(reader: &mut R) -> Result<ReturnSeries> {
    let mut magic = [0u8; 4];
    reader.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::domain("return cache: bad magic bytes"));
    }
    let mut u32buf = [0u8; 4];
    reader.read_exact(&mut u32buf)?;
    let label_len = u32::from_le_bytes(u32buf) as usize;
    if label_len > 1 << 16 {
        return Err(Error::domain("return cache: implausible label length"));
    }
    let mut label = vec![0u8; label_len];
    reader.read_exact(&mut label)?;
    let pair = String::from_utf8(label)
        .map_err(|_| Error::domain("return cache: label is not UTF-8"))?;
    let mut f64buf = [0u8; 8];
    reader.read_exact(&mut f64buf)?;
    let delta_t = f64::from_le_bytes(f64buf);
    let mut i64buf = [0u8; 8];
    reader.read_exact(&mut i64buf)?;
    let t0 = i64::from_le_bytes(i64buf);
    let mut u64buf = [0u8; 8];
    reader.read_exact(&mut u64buf)?;
    let count = u64::from_le_bytes(u64buf) as usize;
    let mut values = Vec::with_capacity(count.min(1 << 28));
    for _ in 0..count {
        reader.read_exact(&mut f64buf)?;
        values.push(f64::from_le_bytes(f64buf));
    }
    Ok(ReturnSeries {
        pair,
        delta_t,
        t0,
        values,
        normalization: Normalization::Raw,
    })
}

/// [`write_cache`] to a filesystem path.
pub fn write_cache_file(series: &ReturnSeries, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_cache(series, &mut file)?;
    use std::io::Write as _;
    file.flush()?;
    Ok(())
}

/// [`read_cache`] from a filesystem path.
pub fn read_cache_file(path: &Path) -> Result<ReturnSeries> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_cache(&mut file)
}

/// Convenience constructor used widely in tests and by the surrogate module.
pub fn series_from_values(pair: &str, values: Vec<f64>) -> ReturnSeries {
    ReturnSeries {
        pair: pair.to_string(),
        delta_t: 1.0,
        t0: 0,
        values,
        normalization: Normalization::Raw,
    }
}

/// Mean helper re-exported for callers that already depend on ingest.
pub fn sample_mean(values: &[f64]) -> f64 {
    mean(values)
}

/// Compensated cumulative sums of `values`; element k holds the sum of the
/// first k+1 entries.
pub fn cumulative_sums(values: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    values
        .iter()
        .map(|v| {
            acc.add(*v);
            acc.value()
        })
        .collect()
}
