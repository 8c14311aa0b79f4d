//! Subcommand implementations: data loading, analysis wiring, artifact
//! emission. Every command ends by writing a run manifest naming its
//! artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::Path;

use mfx_core::arbitrage::{
    alpha_series, events_from_series, events_summary_csv, events_to_jsonl, resolve_triangle,
    scan_ticks, ArbitrageEvent, TriangleSpec,
};
use mfx_core::cluster::{agglomerate, cut, gap_cut, to_distance};
use mfx_core::ingest::{
    filter_inactive, log_returns, normalize, parse_ticks, read_cache_file, resample, split_pair,
    synchronize_basket, ParseReport, ReturnSeries, TickFormat, TickQuote,
};
use mfx_core::marketstats::{abs_quantile_range, ccdf, currency_index, tail_slope};
use mfx_core::mfcca::{
    default_fit_range, fit_scaling, fluctuation_surface, profile, scale_grid, FluctuationSurface,
    ScalingFit,
};
use mfx_core::rho::{rho_matrix, rho_scale_profile, triangle_partition, ScaleSpec};
use mfx_core::surrogate::{
    fourier_surrogate, shuffle, synth_cascade, synth_fgn, RNG_ALGORITHM,
};
use mfx_core::{Error, Result};

use crate::artifacts::{fmt_q, safe_label, ArtifactWriter};
use crate::config::Settings;

// ---------------------------------------------------------------------------
// Data loading
// ---------------------------------------------------------------------------

fn load_ticks_file(path: &Path) -> Result<(Vec<TickQuote>, ParseReport)> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::parameter(format!("cannot open {}: {e}", path.display())))?;
    parse_ticks(BufReader::new(file), &TickFormat::default())
}

fn is_cache_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

/// Load one configured series: a binary returns cache, or a tick CSV pushed
/// through resampling and log-returns.
fn load_series(label: &str, path: &Path, delta_t: f64) -> Result<ReturnSeries> {
    if is_cache_path(path) {
        let series = read_cache_file(path)?;
        if series.pair != label {
            return Err(Error::parameter(format!(
                "cache {} holds series {:?} but is configured as {label}",
                path.display(),
                series.pair
            )));
        }
        if (series.delta_t - delta_t).abs() > 1e-9 {
            return Err(Error::parameter(format!(
                "cache {} was sampled at delta_t = {} but the run is configured for {delta_t}",
                path.display(),
                series.delta_t
            )));
        }
        return Ok(series);
    }
    let (ticks, _) = load_ticks_file(path)?;
    let rates = resample(&ticks, delta_t, label)?;
    log_returns(&rates)
}

/// Per-series preparation: inactivity filtering, then optional rescaling.
fn prep_single(series: ReturnSeries, settings: &Settings, rescale: bool) -> Result<ReturnSeries> {
    let filtered = if settings.data.min_active_gap >= 1 {
        filter_inactive(&series, settings.data.min_active_gap)?.0
    } else {
        series
    };
    if rescale && settings.data.normalize {
        normalize(&filtered)
    } else {
        Ok(filtered)
    }
}

fn configured_labels(settings: &Settings, requested: &[String]) -> Result<Vec<String>> {
    if settings.data.pairs.is_empty() {
        return Err(Error::parameter(
            "no data series configured; add [data.pairs] entries to the config",
        ));
    }
    if requested.is_empty() {
        return Ok(settings.data.pairs.keys().cloned().collect());
    }
    for label in requested {
        if !settings.data.pairs.contains_key(label) {
            return Err(Error::parameter(format!(
                "series {label} is not configured under [data.pairs]"
            )));
        }
    }
    Ok(requested.to_vec())
}

fn load_basket(settings: &Settings) -> Result<Vec<ReturnSeries>> {
    settings.check_data_paths()?;
    settings
        .data
        .pairs
        .iter()
        .map(|(label, path)| load_series(label, path, settings.data.delta_t))
        .collect()
}

/// Excise, from every series, the union of all series' qualifying
/// inactivity gaps, so the basket stays sample-aligned.
fn joint_filter(basket: Vec<ReturnSeries>, threshold: usize) -> Result<Vec<ReturnSeries>> {
    if threshold == 0 || basket.is_empty() {
        return Ok(basket);
    }
    let n = basket[0].values.len();
    let mut keep = vec![true; n];
    for series in &basket {
        let (_, gaps) = filter_inactive(series, threshold)?;
        for &(lo, hi) in gaps.removed() {
            for slot in keep.iter_mut().take(hi + 1).skip(lo) {
                *slot = false;
            }
        }
    }
    if keep.iter().all(|k| !*k) {
        return Err(Error::domain(
            "inactivity filtering removed every common sample",
        ));
    }
    Ok(basket
        .into_iter()
        .map(|series| {
            let values: Vec<f64> = series
                .values
                .iter()
                .zip(&keep)
                .filter_map(|(v, k)| k.then_some(*v))
                .collect();
            ReturnSeries { values, ..series }
        })
        .collect())
}

/// Basket preparation for cross-series analyses: common grid, joint
/// inactivity filtering, optional per-series rescaling.
fn prepare_basket(settings: &Settings, rescale: bool) -> Result<Vec<ReturnSeries>> {
    let loaded = load_basket(settings)?;
    let synchronized = synchronize_basket(&loaded)?;
    drop(loaded);
    let filtered = joint_filter(synchronized, settings.data.min_active_gap)?;
    if rescale && settings.data.normalize {
        filtered.iter().map(normalize).collect()
    } else {
        Ok(filtered)
    }
}

fn require_pairs(basket: &[ReturnSeries]) -> Result<()> {
    if basket.len() < 2 {
        return Err(Error::parameter(
            "this analysis needs at least two configured series",
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared analysis plumbing
// ---------------------------------------------------------------------------

fn grid_and_range(settings: &Settings, n: usize) -> Result<(Vec<usize>, (usize, usize))> {
    let grid = scale_grid(n, settings.analysis.degree, settings.analysis.scales_per_decade)?;
    let auto = default_fit_range(&grid)?;
    let range = (
        settings.analysis.fit_lo.unwrap_or(auto.0),
        settings.analysis.fit_hi.unwrap_or(auto.1),
    );
    Ok((grid, range))
}

fn scale_spec(settings: &Settings, grid: &[usize]) -> ScaleSpec {
    match settings.rho.scale {
        Some(s) => ScaleSpec::Single(s),
        None => ScaleSpec::Average(grid.to_vec()),
    }
}

/// Rooted fluctuation value for plot emission: [F]^{1/q} for q ≠ 0 when
/// positive (the q = 0 value is already rooted).
fn rooted(f: f64, q: f64) -> Option<f64> {
    if q == 0.0 {
        (f > 0.0).then_some(f)
    } else {
        (f > 0.0).then(|| f.powf(1.0 / q))
    }
}

struct AutoAnalysis {
    surface: FluctuationSurface,
    fits: Vec<ScalingFit>,
}

fn auto_analysis(settings: &Settings, series: &ReturnSeries) -> Result<AutoAnalysis> {
    let p = profile(series);
    let (grid, range) = grid_and_range(settings, p.values.len())?;
    let surface = fluctuation_surface(
        &p,
        &p,
        &settings.analysis.q_grid,
        &grid,
        settings.analysis.degree,
    )?;
    let fits = settings
        .analysis
        .q_grid
        .iter()
        .map(|q| fit_scaling(&surface, *q, range))
        .collect::<Result<Vec<_>>>()?;
    Ok(AutoAnalysis { surface, fits })
}

fn surface_csv(surface: &FluctuationSurface) -> String {
    let mut body = String::from("s");
    for q in &surface.q_grid {
        let _ = write!(body, ",f_rooted_q{}", fmt_q(*q));
    }
    body.push('\n');
    for (si, s) in surface.s_grid.iter().enumerate() {
        let _ = write!(body, "{s}");
        for (qi, q) in surface.q_grid.iter().enumerate() {
            match rooted(surface.at(qi, si), *q) {
                Some(v) => {
                    let _ = write!(body, ",{v}");
                }
                None => body.push(','),
            }
        }
        body.push('\n');
    }
    body
}

fn mfdfa_artifacts(
    writer: &mut ArtifactWriter,
    settings: &Settings,
    series: &ReturnSeries,
) -> Result<()> {
    let analysis = auto_analysis(settings, series)?;
    let name = safe_label(&series.pair);
    writer.write_json(
        &format!("mfdfa_{name}.json"),
        &serde_json::json!({
            "pair": series.pair,
            "samples": series.values.len(),
            "delta_t": series.delta_t,
            "normalization": series.normalization,
            "surface": analysis.surface,
            "fits": analysis.fits,
        }),
    )?;
    let mut hurst = String::from("q,h,r_squared,excluded_scales\n");
    for fit in &analysis.fits {
        let _ = writeln!(
            hurst,
            "{},{},{},{}",
            fit.q, fit.exponent, fit.r_squared, fit.excluded_scales
        );
    }
    writer.write_csv(&format!("mfdfa_{name}_hurst.csv"), &hurst)?;
    writer.write_csv(
        &format!("mfdfa_{name}_fluct.csv"),
        &surface_csv(&analysis.surface),
    )?;
    Ok(())
}

/// Per-q cross fit as JSON: the fitted exponent, or the failure reason (a
/// signed cross fluctuation need not stay positive, so per-q failures are
/// data, not fatal errors).
fn cross_fit_entry(surface: &FluctuationSurface, q: f64, range: (usize, usize)) -> serde_json::Value {
    match fit_scaling(surface, q, range) {
        Ok(fit) => serde_json::json!({
            "q": q,
            "lambda": fit.exponent,
            "r_squared": fit.r_squared,
            "excluded_scales": fit.excluded_scales,
        }),
        Err(e) => serde_json::json!({ "q": q, "error": e.to_string() }),
    }
}

fn mfcca_pair_artifacts(
    writer: &mut ArtifactWriter,
    settings: &Settings,
    x: &ReturnSeries,
    y: &ReturnSeries,
    auto_x: &AutoAnalysis,
    auto_y: &AutoAnalysis,
) -> Result<()> {
    let px = profile(x);
    let py = profile(y);
    let (grid, range) = grid_and_range(settings, px.values.len())?;
    let cross = fluctuation_surface(
        &px,
        &py,
        &settings.analysis.q_grid,
        &grid,
        settings.analysis.degree,
    )?;
    let cross_fits: Vec<serde_json::Value> = settings
        .analysis
        .q_grid
        .iter()
        .map(|q| cross_fit_entry(&cross, *q, range))
        .collect();
    let auto_mean: Vec<serde_json::Value> = auto_x
        .fits
        .iter()
        .zip(&auto_y.fits)
        .map(|(fx, fy)| {
            serde_json::json!({
                "q": fx.q,
                "h_mean": 0.5 * (fx.exponent + fy.exponent),
            })
        })
        .collect();
    let name = format!("{}__{}", safe_label(&x.pair), safe_label(&y.pair));
    writer.write_json(
        &format!("mfcca_{name}.json"),
        &serde_json::json!({
            "pair_x": x.pair,
            "pair_y": y.pair,
            "samples": x.values.len(),
            "surface": cross,
            "cross_fits": cross_fits,
            "auto_mean": auto_mean,
        }),
    )?;
    let mut csv = String::from("q,lambda,auto_mean_h\n");
    for (entry, mean) in cross_fits.iter().zip(&auto_mean) {
        let q = entry["q"].as_f64().unwrap_or(f64::NAN);
        let lambda = entry
            .get("lambda")
            .and_then(|v| v.as_f64())
            .map(|v| v.to_string())
            .unwrap_or_default();
        let h = mean["h_mean"].as_f64().unwrap_or(f64::NAN);
        let _ = writeln!(csv, "{q},{lambda},{h}");
    }
    writer.write_csv(&format!("mfcca_{name}.csv"), &csv)?;
    Ok(())
}

fn matrix_csv_name(q: f64) -> String {
    format!("rho_matrix_q{}.csv", fmt_q(q))
}

fn rho_artifacts(
    writer: &mut ArtifactWriter,
    settings: &Settings,
    basket: &[ReturnSeries],
) -> Result<()> {
    require_pairs(basket)?;
    let (grid, _) = grid_and_range(settings, basket[0].values.len())?;
    let spec = scale_spec(settings, &grid);
    let mut matrices = Vec::new();
    let mut partitions = Vec::new();
    for &q in &settings.rho.q {
        let matrix = rho_matrix(basket, q, &spec, settings.analysis.degree)?;
        writer.write_csv(&matrix_csv_name(q), &matrix.to_csv())?;
        // The triangular/non-triangular split only exists for currency-pair
        // labels; other baskets simply omit it.
        partitions.push(match triangle_partition(&matrix) {
            Ok(p) => serde_json::to_value(&p)?,
            Err(_) => serde_json::Value::Null,
        });
        matrices.push(matrix);
    }
    writer.write_json(
        "rho_matrices.json",
        &serde_json::json!({
            "s_spec": spec,
            "q": settings.rho.q,
            "matrices": matrices,
            "triangle_partitions": partitions,
        }),
    )?;
    if settings.rho.profiles {
        for i in 0..basket.len() {
            for j in i + 1..basket.len() {
                let x = &basket[i];
                let y = &basket[j];
                let mut columns = Vec::new();
                for &q in &settings.rho.q {
                    columns.push(rho_scale_profile(x, y, q, &grid, settings.analysis.degree)?);
                }
                let mut csv = String::from("s");
                for &q in &settings.rho.q {
                    let _ = write!(csv, ",rho_q{}", fmt_q(q));
                }
                csv.push('\n');
                for (si, s) in grid.iter().enumerate() {
                    let _ = write!(csv, "{s}");
                    for column in &columns {
                        let _ = write!(csv, ",{}", column[si].value);
                    }
                    csv.push('\n');
                }
                let name = format!(
                    "rho_profile_{}__{}.csv",
                    safe_label(&x.pair),
                    safe_label(&y.pair)
                );
                writer.write_csv(&name, &csv)?;
            }
        }
    }
    Ok(())
}

fn dendro_artifacts(
    writer: &mut ArtifactWriter,
    settings: &Settings,
    basket: &[ReturnSeries],
) -> Result<()> {
    require_pairs(basket)?;
    let (grid, _) = grid_and_range(settings, basket[0].values.len())?;
    let spec = scale_spec(settings, &grid);
    let matrix = rho_matrix(basket, settings.cluster.q, &spec, settings.analysis.degree)?;
    let distance = to_distance(&matrix)?;
    let tree = agglomerate(&distance, settings.cluster.linkage)?;
    let auto = settings.cluster.clusters == 0;
    let k = if auto {
        gap_cut(&tree)
    } else {
        settings.cluster.clusters
    };
    let groups = cut(&tree, k)?;
    let q_name = fmt_q(settings.cluster.q);
    writer.write_json(
        &format!("dendro_q{q_name}.json"),
        &serde_json::json!({
            "q": settings.cluster.q,
            "s_spec": spec,
            "linkage": settings.cluster.linkage,
            "distance": distance,
            "dendrogram": tree,
            "cut": { "k": k, "auto": auto, "groups": groups },
        }),
    )?;
    writer.write_newick(&format!("dendro_q{q_name}.newick"), &tree.to_newick())?;
    let mut csv = String::from("label");
    for label in &distance.labels {
        let _ = write!(csv, ",{label}");
    }
    csv.push('\n');
    for (i, label) in distance.labels.iter().enumerate() {
        let _ = write!(csv, "{label}");
        for j in 0..distance.len() {
            let _ = write!(csv, ",{}", distance.at(i, j));
        }
        csv.push('\n');
    }
    writer.write_csv(&format!("distance_q{q_name}.csv"), &csv)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Arbitrage
// ---------------------------------------------------------------------------

fn parse_triangle(text: &str) -> Result<(String, String, String)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b, c] if !a.is_empty() && !b.is_empty() && !c.is_empty() => {
            Ok((a.to_string(), b.to_string(), c.to_string()))
        }
        _ => Err(Error::parameter(format!(
            "triangle {text:?} must name three currencies, e.g. \"EUR,USD,CHF\""
        ))),
    }
}

fn arb_artifacts(writer: &mut ArtifactWriter, settings: &Settings) -> Result<()> {
    if settings.arb.triangles.is_empty() {
        return Err(Error::parameter(
            "no triangles configured; pass --triangle A,B,C or set [arb] triangles",
        ));
    }
    settings.check_data_paths()?;
    let available: Vec<String> = settings.data.pairs.keys().cloned().collect();
    let mut specs: Vec<TriangleSpec> = Vec::new();
    for text in &settings.arb.triangles {
        let (a, b, c) = parse_triangle(text)?;
        specs.push(resolve_triangle(&a, &b, &c, &available)?);
    }
    let mut needed: BTreeSet<String> = BTreeSet::new();
    for spec in &specs {
        for leg in &spec.legs {
            needed.insert(leg.pair.clone());
        }
    }
    let mut streams: BTreeMap<String, Vec<TickQuote>> = BTreeMap::new();
    for label in needed {
        let path = &settings.data.pairs[&label];
        if is_cache_path(path) {
            return Err(Error::parameter(format!(
                "triangular scan needs tick data with bid and ask, but {label} points at a returns cache"
            )));
        }
        let (ticks, _) = load_ticks_file(path)?;
        streams.insert(label, ticks);
    }
    let mut all_events: Vec<ArbitrageEvent> = Vec::new();
    for spec in &specs {
        let label = spec.label();
        let events = if settings.arb.raw_ticks {
            scan_ticks(
                spec,
                &streams,
                settings.arb.threshold,
                settings.arb.min_duration_ms,
            )?
        } else {
            let series = alpha_series(spec, &streams, settings.data.delta_t)?;
            let mut csv = String::from("timestamp_ms,alpha1,alpha2\n");
            for (k, (a1, a2)) in series.alpha1.iter().zip(&series.alpha2).enumerate() {
                let _ = writeln!(csv, "{},{a1},{a2}", series.t0 + k as i64 * series.step_ms);
            }
            writer.write_csv(&format!("arb_alpha_{label}.csv"), &csv)?;
            events_from_series(spec, &series, settings.arb.threshold, settings.arb.min_duration)
        };
        writer.write_jsonl(&format!("arb_{label}.jsonl"), &events_to_jsonl(&events)?)?;
        all_events.extend(events);
    }
    writer.write_csv("arb_summary.csv", &events_summary_csv(&all_events))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Tails and indexes
// ---------------------------------------------------------------------------

fn tails_artifacts(
    writer: &mut ArtifactWriter,
    settings: &Settings,
    series_list: &[ReturnSeries],
) -> Result<()> {
    let mut summary = Vec::new();
    for series in series_list {
        let prepared = if settings.tails.normalized {
            normalize(series)?
        } else {
            series.clone()
        };
        let points = ccdf(&prepared, false)?;
        let range = abs_quantile_range(
            &prepared,
            settings.tails.lo_quantile,
            settings.tails.hi_quantile,
        )?;
        let fit = tail_slope(&points, range)?;
        let name = safe_label(&series.pair);
        let mut csv = String::from("abs_return,ccdf\n");
        for (v, p) in &points {
            let _ = writeln!(csv, "{v},{p}");
        }
        writer.write_csv(&format!("tails_{name}.csv"), &csv)?;
        summary.push(serde_json::json!({
            "pair": series.pair,
            "normalized": settings.tails.normalized,
            "gamma": fit.gamma,
            "fit_range": fit.fit_range,
            "n_tail": fit.n_tail,
            "points": points.len(),
        }));
    }
    writer.write_json("tails_summary.json", &serde_json::json!({ "series": summary }))?;
    Ok(())
}

fn index_artifacts(
    writer: &mut ArtifactWriter,
    settings: &Settings,
    basket: &[ReturnSeries],
) -> Result<()> {
    let currencies: Vec<String> = if settings.index.currencies.is_empty() {
        let mut set = BTreeSet::new();
        for series in basket {
            let (base, counter) = split_pair(&series.pair)?;
            set.insert(base.to_string());
            set.insert(counter.to_string());
        }
        set.into_iter().collect()
    } else {
        settings.index.currencies.clone()
    };
    if currencies.is_empty() {
        return Err(Error::parameter("no currencies to index"));
    }
    let mut indexes = Vec::new();
    for currency in &currencies {
        let subset: Vec<ReturnSeries> = basket
            .iter()
            .filter(|s| {
                split_pair(&s.pair)
                    .map(|(b, c)| b == currency || c == currency)
                    .unwrap_or(false)
            })
            .cloned()
            .collect();
        if subset.is_empty() {
            return Err(Error::parameter(format!(
                "currency {currency} appears in no configured pair"
            )));
        }
        let index = currency_index(currency, &subset, settings.index.mode)?;
        let mut csv = String::from("timestamp_ms,index\n");
        let step = (index.delta_t * 1000.0).round() as i64;
        for (k, v) in index.values.iter().enumerate() {
            let _ = writeln!(csv, "{},{v}", index.t0 + k as i64 * step);
        }
        writer.write_csv(&format!("index_{}.csv", safe_label(currency)), &csv)?;
        indexes.push(index);
    }
    writer.write_json(
        "index_summary.json",
        &serde_json::json!({ "mode": settings.index.mode, "indexes": indexes }),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Public commands
// ---------------------------------------------------------------------------

fn writer_for(settings: &Settings) -> Result<ArtifactWriter> {
    let hash = settings.config_hash()?;
    ArtifactWriter::new(&settings.run.output_dir, &hash)
}

pub fn cmd_ingest(settings: &Settings) -> Result<()> {
    settings.check_data_paths()?;
    if settings.data.pairs.is_empty() {
        return Err(Error::parameter(
            "no data series configured; add [data.pairs] entries to the config",
        ));
    }
    let mut writer = writer_for(settings)?;
    let mut entries = Vec::new();
    for (label, path) in &settings.data.pairs {
        if is_cache_path(path) {
            return Err(Error::parameter(format!(
                "{label} already points at a returns cache; ingest reads tick CSVs"
            )));
        }
        let (ticks, report) = load_ticks_file(path)?;
        let rates = resample(&ticks, settings.data.delta_t, label)?;
        let returns = log_returns(&rates)?;
        let cache_name = format!("{}.returns.bin", safe_label(label));
        writer.write_cache(&cache_name, &returns)?;
        entries.push(serde_json::json!({
            "pair": label,
            "source": path.display().to_string(),
            "parse": report,
            "ticks": ticks.len(),
            "samples": returns.values.len(),
            "delta_t": returns.delta_t,
            "t0": returns.t0,
            "cache": cache_name,
        }));
    }
    writer.write_json("ingest_report.json", &serde_json::json!({ "series": entries }))?;
    writer.write_manifest("ingest")
}

pub fn cmd_mfdfa(settings: &Settings, requested: &[String]) -> Result<()> {
    let labels = configured_labels(settings, requested)?;
    settings.check_data_paths()?;
    let mut writer = writer_for(settings)?;
    for label in &labels {
        let series = load_series(label, &settings.data.pairs[label], settings.data.delta_t)?;
        let prepared = prep_single(series, settings, true)?;
        mfdfa_artifacts(&mut writer, settings, &prepared)?;
    }
    writer.write_manifest("mfdfa")
}

pub fn cmd_mfcca(
    settings: &Settings,
    pair_x: Option<&str>,
    pair_y: Option<&str>,
) -> Result<()> {
    let basket = prepare_basket(settings, true)?;
    require_pairs(&basket)?;
    let mut writer = writer_for(settings)?;
    let targets: Vec<(usize, usize)> = match (pair_x, pair_y) {
        (Some(x), Some(y)) => {
            let find = |label: &str| {
                basket
                    .iter()
                    .position(|s| s.pair == label)
                    .ok_or_else(|| {
                        Error::parameter(format!("series {label} is not configured under [data.pairs]"))
                    })
            };
            vec![(find(x)?, find(y)?)]
        }
        (None, None) => {
            let mut all = Vec::new();
            for i in 0..basket.len() {
                for j in i + 1..basket.len() {
                    all.push((i, j));
                }
            }
            all
        }
        _ => {
            return Err(Error::parameter(
                "--pair-x and --pair-y must be given together",
            ))
        }
    };
    let autos: Vec<AutoAnalysis> = basket
        .iter()
        .map(|s| auto_analysis(settings, s))
        .collect::<Result<Vec<_>>>()?;
    for (i, j) in targets {
        mfcca_pair_artifacts(&mut writer, settings, &basket[i], &basket[j], &autos[i], &autos[j])?;
    }
    writer.write_manifest("mfcca")
}

pub fn cmd_rho(settings: &Settings) -> Result<()> {
    let basket = prepare_basket(settings, true)?;
    let mut writer = writer_for(settings)?;
    rho_artifacts(&mut writer, settings, &basket)?;
    writer.write_manifest("rho")
}

pub fn cmd_dendro(settings: &Settings) -> Result<()> {
    let basket = prepare_basket(settings, true)?;
    let mut writer = writer_for(settings)?;
    dendro_artifacts(&mut writer, settings, &basket)?;
    writer.write_manifest("dendro")
}

pub fn cmd_arb(settings: &Settings) -> Result<()> {
    let mut writer = writer_for(settings)?;
    arb_artifacts(&mut writer, settings)?;
    writer.write_manifest("arb")
}

pub fn cmd_tails(settings: &Settings, requested: &[String]) -> Result<()> {
    let labels = configured_labels(settings, requested)?;
    settings.check_data_paths()?;
    let mut series_list = Vec::new();
    for label in &labels {
        let series = load_series(label, &settings.data.pairs[label], settings.data.delta_t)?;
        series_list.push(prep_single(series, settings, false)?);
    }
    let mut writer = writer_for(settings)?;
    tails_artifacts(&mut writer, settings, &series_list)?;
    writer.write_manifest("tails")
}

pub fn cmd_index(settings: &Settings) -> Result<()> {
    let basket = prepare_basket(settings, false)?;
    let mut writer = writer_for(settings)?;
    index_artifacts(&mut writer, settings, &basket)?;
    writer.write_manifest("index")
}

/// Parameters for surrogate/synthetic ensemble generation.
pub struct SurrogateRequest {
    pub kind: String,
    pub target: Option<String>,
    pub count: usize,
    pub hurst: Option<f64>,
    pub length: Option<usize>,
    pub levels: Option<usize>,
    pub spread: Option<f64>,
}

pub fn cmd_surrogate(settings: &Settings, request: &SurrogateRequest) -> Result<()> {
    if request.count == 0 {
        return Err(Error::parameter("surrogate count must be at least 1"));
    }
    let seeds: Vec<u64> = (0..request.count as u64)
        .map(|k| settings.run.seed + k)
        .collect();
    let mut writer = writer_for(settings)?;
    let mut parameters = serde_json::Map::new();
    let needs_target = matches!(request.kind.as_str(), "shuffle" | "fourier-phase");
    let target_series = if needs_target {
        let label = request.target.as_deref().ok_or_else(|| {
            Error::parameter(format!(
                "surrogate kind {:?} needs --target <PAIR> naming a configured series",
                request.kind
            ))
        })?;
        if !settings.data.pairs.contains_key(label) {
            return Err(Error::parameter(format!(
                "series {label} is not configured under [data.pairs]"
            )));
        }
        settings.check_data_paths()?;
        let series = load_series(label, &settings.data.pairs[label], settings.data.delta_t)?;
        parameters.insert("target".into(), serde_json::json!(label));
        parameters.insert("samples".into(), serde_json::json!(series.values.len()));
        Some(series)
    } else {
        None
    };
    match request.kind.as_str() {
        "shuffle" | "fourier-phase" => {}
        "fgn" => {
            parameters.insert(
                "hurst".into(),
                serde_json::json!(request.hurst.unwrap_or(0.5)),
            );
            parameters.insert(
                "length".into(),
                serde_json::json!(request.length.unwrap_or(65536)),
            );
        }
        "cascade" => {
            parameters.insert(
                "levels".into(),
                serde_json::json!(request.levels.unwrap_or(14)),
            );
            parameters.insert(
                "spread".into(),
                serde_json::json!(request.spread.unwrap_or(0.0)),
            );
        }
        other => {
            return Err(Error::parameter(format!(
                "unknown surrogate kind {other:?}; expected shuffle, fourier-phase, fgn, or cascade"
            )))
        }
    }
    for &seed in &seeds {
        let series = match request.kind.as_str() {
            "shuffle" => shuffle(target_series.as_ref().unwrap(), seed),
            "fourier-phase" => fourier_surrogate(target_series.as_ref().unwrap(), seed)?,
            "fgn" => synth_fgn(
                request.hurst.unwrap_or(0.5),
                request.length.unwrap_or(65536),
                seed,
            )?,
            "cascade" => synth_cascade(
                request.levels.unwrap_or(14),
                request.spread.unwrap_or(0.0),
                seed,
            )?,
            _ => unreachable!(),
        };
        writer.write_cache(
            &format!("surrogate_{}_{seed}.bin", safe_label(&request.kind)),
            &series,
        )?;
    }
    writer.write_json(
        "surrogate_manifest.json",
        &serde_json::json!({
            "kind": request.kind,
            "algorithm": RNG_ALGORITHM,
            "seeds": seeds,
            "parameters": parameters,
        }),
    )?;
    writer.write_manifest("surrogate")
}

pub fn cmd_report(settings: &Settings) -> Result<()> {
    settings.check_data_paths()?;
    if settings.data.pairs.is_empty() {
        return Err(Error::parameter(
            "no data series configured; add [data.pairs] entries to the config",
        ));
    }
    let mut writer = writer_for(settings)?;

    // Per-series analyses on each series' own grid.
    let mut singles = Vec::new();
    for (label, path) in &settings.data.pairs {
        let series = load_series(label, path, settings.data.delta_t)?;
        singles.push(series);
    }
    for series in &singles {
        let prepared = prep_single(series.clone(), settings, true)?;
        mfdfa_artifacts(&mut writer, settings, &prepared)?;
    }
    let tails_input: Vec<ReturnSeries> = singles
        .iter()
        .map(|s| prep_single(s.clone(), settings, false))
        .collect::<Result<Vec<_>>>()?;
    tails_artifacts(&mut writer, settings, &tails_input)?;

    // Cross-series analyses on the common grid.
    if singles.len() >= 2 {
        let synchronized = synchronize_basket(&singles)?;
        let filtered = joint_filter(synchronized, settings.data.min_active_gap)?;
        let rescaled: Vec<ReturnSeries> = if settings.data.normalize {
            filtered.iter().map(normalize).collect::<Result<Vec<_>>>()?
        } else {
            filtered.clone()
        };
        let autos: Vec<AutoAnalysis> = rescaled
            .iter()
            .map(|s| auto_analysis(settings, s))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..rescaled.len() {
            for j in i + 1..rescaled.len() {
                mfcca_pair_artifacts(
                    &mut writer,
                    settings,
                    &rescaled[i],
                    &rescaled[j],
                    &autos[i],
                    &autos[j],
                )?;
            }
        }
        rho_artifacts(&mut writer, settings, &rescaled)?;
        dendro_artifacts(&mut writer, settings, &rescaled)?;
        index_artifacts(&mut writer, settings, &filtered)?;
    }
    drop(singles);

    if !settings.arb.triangles.is_empty() {
        arb_artifacts(&mut writer, settings)?;
    }
    writer.write_manifest("report")
}
