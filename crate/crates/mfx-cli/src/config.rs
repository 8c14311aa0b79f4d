//! Configuration model: TOML file + command-line flags → resolved settings.
//!
//! Precedence is flag > config file > built-in default; every resolved value
//! records where it came from so `--verbose` can print the full resolution.
//! The resolved settings (minus execution knobs like `jobs`/`verbose`) are
//! hashed, and that hash is embedded in every artifact.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mfx_core::cluster::Linkage;
use mfx_core::marketstats::IndexMode;
use mfx_core::mfcca::MAX_DETREND_DEGREE;
use mfx_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Where a resolved setting came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    Config,
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Flag => "flag",
            Source::Config => "config",
            Source::Default => "default",
        })
    }
}

/// Per-key record of the resolution, for `--verbose` output.
#[derive(Debug, Default)]
pub struct Provenance {
    entries: Vec<(String, String, Source)>,
}

impl Provenance {
    fn note(&mut self, key: &str, value: impl fmt::Display, source: Source) {
        self.entries.push((key.to_string(), value.to_string(), source));
    }

    /// One line per setting: `key = value (source)`, resolution order
    /// flag > config > default.
    pub fn describe(&self) -> String {
        let mut out = String::from("resolved settings (precedence: flag > config > default):\n");
        for (key, value, source) in &self.entries {
            out.push_str(&format!("  {key} = {value} ({source})\n"));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Raw TOML model: every field optional, unknown keys rejected.
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    run: Option<RawRun>,
    data: Option<RawData>,
    analysis: Option<RawAnalysis>,
    rho: Option<RawRho>,
    cluster: Option<RawCluster>,
    arb: Option<RawArb>,
    tails: Option<RawTails>,
    index: Option<RawIndex>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
    verbose: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawData {
    delta_t: Option<f64>,
    normalize: Option<bool>,
    min_active_gap: Option<usize>,
    pairs: Option<BTreeMap<String, PathBuf>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    degree: Option<usize>,
    q_grid: Option<Vec<f64>>,
    scales_per_decade: Option<usize>,
    fit_lo: Option<usize>,
    fit_hi: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRho {
    q: Option<Vec<f64>>,
    scale: Option<usize>,
    avg_scales: Option<bool>,
    profiles: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCluster {
    q: Option<f64>,
    linkage: Option<String>,
    clusters: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArb {
    triangles: Option<Vec<String>>,
    threshold: Option<f64>,
    min_duration: Option<usize>,
    raw_ticks: Option<bool>,
    min_duration_ms: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTails {
    normalized: Option<bool>,
    lo_quantile: Option<f64>,
    hi_quantile: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndex {
    currencies: Option<Vec<String>>,
    mode: Option<String>,
}

/// Load and parse the TOML config file; `None` means all defaults.
///
/// Relative data paths inside the file are resolved against the file's own
/// directory, so configs work from any working directory.
pub fn load_raw(path: Option<&Path>) -> Result<RawConfig> {
    let Some(path) = path else {
        return Ok(RawConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parameter(format!("config file {}: {e}", path.display())))?;
    let mut raw: RawConfig = toml::from_str(&text)
        .map_err(|e| Error::parameter(format!("config file {}: {e}", path.display())))?;
    if let Some(dir) = path.parent() {
        if let Some(data) = raw.data.as_mut() {
            if let Some(pairs) = data.pairs.as_mut() {
                for p in pairs.values_mut() {
                    if p.is_relative() {
                        *p = dir.join(&p);
                    }
                }
            }
        }
    }
    Ok(raw)
}

// ---------------------------------------------------------------------------
// Flag overrides handed down from the command line.
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub verbose: bool,
    pub delta_t: Option<f64>,
    pub rho_q: Vec<f64>,
    pub scale: Option<usize>,
    pub avg_scales: bool,
    pub profiles: bool,
    pub cluster_q: Option<f64>,
    pub linkage: Option<String>,
    pub clusters: Option<usize>,
    pub triangles: Vec<String>,
    pub threshold: Option<f64>,
    pub min_duration: Option<usize>,
    pub raw_ticks: bool,
    pub min_duration_ms: Option<i64>,
    pub normalized: Option<bool>,
    pub lo_quantile: Option<f64>,
    pub hi_quantile: Option<f64>,
    pub currencies: Vec<String>,
    pub index_mode: Option<String>,
}

// ---------------------------------------------------------------------------
// Resolved settings. Serialization order is fixed by declaration, and the
// serialized form (minus execution knobs) is what gets hashed.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RunSettings {
    /// Where artifacts land; an execution knob, so not part of the config
    /// hash — the same analysis in two directories is the same analysis.
    #[serde(skip_serializing)]
    pub output_dir: PathBuf,
    pub seed: u64,
    #[serde(skip_serializing)]
    pub jobs: usize,
    #[serde(skip_serializing)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSettings {
    pub delta_t: f64,
    pub normalize: bool,
    /// Zero-return run length treated as inactivity; 0 disables filtering.
    pub min_active_gap: usize,
    pub pairs: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSettings {
    pub degree: usize,
    pub q_grid: Vec<f64>,
    pub scales_per_decade: usize,
    /// Explicit fit bounds in scale units; `None` means the automatic
    /// central-80%-of-log-span range.
    pub fit_lo: Option<usize>,
    pub fit_hi: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhoSettings {
    pub q: Vec<f64>,
    /// Evaluate at this single scale instead of averaging over the grid.
    pub scale: Option<usize>,
    pub avg_scales: bool,
    pub profiles: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterSettings {
    pub q: f64,
    pub linkage: Linkage,
    /// Requested cluster count; 0 means the automatic largest-gap cut.
    pub clusters: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArbSettings {
    pub triangles: Vec<String>,
    pub threshold: f64,
    pub min_duration: usize,
    pub raw_ticks: bool,
    pub min_duration_ms: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailsSettings {
    pub normalized: bool,
    pub lo_quantile: f64,
    pub hi_quantile: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexSettings {
    pub currencies: Vec<String>,
    pub mode: IndexMode,
}

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub run: RunSettings,
    pub data: DataSettings,
    pub analysis: AnalysisSettings,
    pub rho: RhoSettings,
    pub cluster: ClusterSettings,
    pub arb: ArbSettings,
    pub tails: TailsSettings,
    pub index: IndexSettings,
}

impl Settings {
    /// SHA-256 over the canonical serialized settings (hex, lowercase).
    /// Execution knobs (`jobs`, `verbose`) are excluded: they may not change
    /// output bytes, so they must not change the embedded hash either.
    pub fn config_hash(&self) -> Result<String> {
        let canonical = serde_json::to_string(self)?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// Config-level error if any referenced data file is missing.
    pub fn check_data_paths(&self) -> Result<()> {
        for (label, path) in &self.data.pairs {
            if !path.exists() {
                return Err(Error::parameter(format!(
                    "data file for {label} not found: {}",
                    path.display()
                )));
            }
        }
        Ok(())
    }
}

fn pick<T: Clone + fmt::Display>(
    prov: &mut Provenance,
    key: &str,
    flag: Option<T>,
    config: Option<T>,
    default: T,
) -> T {
    let (value, source) = match (flag, config) {
        (Some(v), _) => (v, Source::Flag),
        (None, Some(v)) => (v, Source::Config),
        (None, None) => (default, Source::Default),
    };
    prov.note(key, &value, source);
    value
}

fn pick_list<T: Clone + fmt::Debug>(
    prov: &mut Provenance,
    key: &str,
    flag: Vec<T>,
    config: Option<Vec<T>>,
    default: Vec<T>,
) -> Vec<T> {
    let (value, source) = if !flag.is_empty() {
        (flag, Source::Flag)
    } else if let Some(v) = config {
        (v, Source::Config)
    } else {
        (default, Source::Default)
    };
    prov.note(key, format!("{value:?}"), source);
    value
}

/// Merge flags over the config file over defaults into resolved settings.
pub fn resolve(raw: RawConfig, o: Overrides) -> Result<(Settings, Provenance)> {
    let mut prov = Provenance::default();
    let run_raw = raw.run.unwrap_or_default();
    let data_raw = raw.data.unwrap_or_default();
    let analysis_raw = raw.analysis.unwrap_or_default();
    let rho_raw = raw.rho.unwrap_or_default();
    let cluster_raw = raw.cluster.unwrap_or_default();
    let arb_raw = raw.arb.unwrap_or_default();
    let tails_raw = raw.tails.unwrap_or_default();
    let index_raw = raw.index.unwrap_or_default();

    let output_dir = {
        let v = pick(
            &mut prov,
            "run.output_dir",
            o.output_dir.map(|p| p.display().to_string()),
            run_raw.output_dir.map(|p| p.display().to_string()),
            "mfx-out".to_string(),
        );
        PathBuf::from(v)
    };
    let run = RunSettings {
        output_dir,
        seed: pick(&mut prov, "run.seed", o.seed, run_raw.seed, 42),
        jobs: pick(&mut prov, "run.jobs", o.jobs, run_raw.jobs, 0),
        verbose: pick(
            &mut prov,
            "run.verbose",
            o.verbose.then_some(true),
            run_raw.verbose,
            false,
        ),
    };

    let delta_t = pick(&mut prov, "data.delta_t", o.delta_t, data_raw.delta_t, 1.0);
    if !(delta_t > 0.0) || !delta_t.is_finite() {
        return Err(Error::parameter(format!(
            "data.delta_t must be a positive number of seconds, got {delta_t}"
        )));
    }
    let pairs = data_raw.pairs.unwrap_or_default();
    prov.note(
        "data.pairs",
        format!("{} series", pairs.len()),
        if pairs.is_empty() { Source::Default } else { Source::Config },
    );
    let data = DataSettings {
        delta_t,
        normalize: pick(&mut prov, "data.normalize", None, data_raw.normalize, true),
        min_active_gap: pick(
            &mut prov,
            "data.min_active_gap",
            None,
            data_raw.min_active_gap,
            0,
        ),
        pairs,
    };

    let degree = pick(&mut prov, "analysis.degree", None, analysis_raw.degree, 2);
    if !(1..=MAX_DETREND_DEGREE).contains(&degree) {
        return Err(Error::parameter(format!(
            "analysis.degree must lie in 1..={MAX_DETREND_DEGREE}, got {degree}"
        )));
    }
    let scales_per_decade = pick(
        &mut prov,
        "analysis.scales_per_decade",
        None,
        analysis_raw.scales_per_decade,
        24,
    );
    if scales_per_decade == 0 {
        return Err(Error::parameter("analysis.scales_per_decade must be >= 1"));
    }
    let analysis = AnalysisSettings {
        degree,
        q_grid: pick_list(
            &mut prov,
            "analysis.q_grid",
            Vec::new(),
            analysis_raw.q_grid,
            vec![-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0, 4.0],
        ),
        scales_per_decade,
        fit_lo: match analysis_raw.fit_lo {
            Some(v) => Some(pick(&mut prov, "analysis.fit_lo", None, Some(v), v)),
            None => {
                prov.note("analysis.fit_lo", "auto", Source::Default);
                None
            }
        },
        fit_hi: match analysis_raw.fit_hi {
            Some(v) => Some(pick(&mut prov, "analysis.fit_hi", None, Some(v), v)),
            None => {
                prov.note("analysis.fit_hi", "auto", Source::Default);
                None
            }
        },
    };
    if analysis.q_grid.is_empty() {
        return Err(Error::parameter("analysis.q_grid must not be empty"));
    }
    if let (Some(lo), Some(hi)) = (analysis.fit_lo, analysis.fit_hi) {
        if lo > hi {
            return Err(Error::parameter(format!(
                "analysis fit range [{lo}, {hi}] is empty"
            )));
        }
    }

    let rho_q = pick_list(
        &mut prov,
        "rho.q",
        o.rho_q,
        rho_raw.q,
        vec![1.0, 2.0, 4.0],
    );
    for q in &rho_q {
        if !(*q > 0.0) || !q.is_finite() {
            return Err(Error::parameter(format!(
                "rho.q values must be positive and finite, got {q}"
            )));
        }
    }
    let rho = RhoSettings {
        q: rho_q,
        scale: match (o.scale, rho_raw.scale) {
            (Some(s), _) => Some(pick(&mut prov, "rho.scale", Some(s), None, s)),
            (None, Some(s)) => Some(pick(&mut prov, "rho.scale", None, Some(s), s)),
            (None, None) => {
                prov.note("rho.scale", "grid average", Source::Default);
                None
            }
        },
        avg_scales: pick(
            &mut prov,
            "rho.avg_scales",
            o.avg_scales.then_some(true),
            rho_raw.avg_scales,
            false,
        ),
        profiles: pick(
            &mut prov,
            "rho.profiles",
            o.profiles.then_some(true),
            rho_raw.profiles,
            false,
        ),
    };
    if rho.avg_scales && rho.scale.is_some() {
        return Err(Error::parameter(
            "rho.scale and rho.avg_scales are mutually exclusive",
        ));
    }

    let linkage_name = pick(
        &mut prov,
        "cluster.linkage",
        o.linkage,
        cluster_raw.linkage,
        "average".to_string(),
    );
    let linkage = Linkage::from_str(&linkage_name)?;
    let cluster = ClusterSettings {
        q: pick(&mut prov, "cluster.q", o.cluster_q, cluster_raw.q, 1.0),
        linkage,
        clusters: pick(
            &mut prov,
            "cluster.clusters",
            o.clusters,
            cluster_raw.clusters,
            0,
        ),
    };
    if !(cluster.q > 0.0) || !cluster.q.is_finite() {
        return Err(Error::parameter(format!(
            "cluster.q must be positive and finite, got {}",
            cluster.q
        )));
    }

    let arb = ArbSettings {
        triangles: pick_list(
            &mut prov,
            "arb.triangles",
            o.triangles,
            arb_raw.triangles,
            Vec::new(),
        ),
        threshold: pick(&mut prov, "arb.threshold", o.threshold, arb_raw.threshold, 0.0),
        min_duration: pick(
            &mut prov,
            "arb.min_duration",
            o.min_duration,
            arb_raw.min_duration,
            2,
        ),
        raw_ticks: pick(
            &mut prov,
            "arb.raw_ticks",
            o.raw_ticks.then_some(true),
            arb_raw.raw_ticks,
            false,
        ),
        min_duration_ms: pick(
            &mut prov,
            "arb.min_duration_ms",
            o.min_duration_ms,
            arb_raw.min_duration_ms,
            2000,
        ),
    };
    if !(arb.threshold >= 0.0) {
        return Err(Error::parameter(format!(
            "arb.threshold must be >= 0, got {}",
            arb.threshold
        )));
    }

    let tails = TailsSettings {
        normalized: pick(
            &mut prov,
            "tails.normalized",
            o.normalized,
            tails_raw.normalized,
            true,
        ),
        lo_quantile: pick(
            &mut prov,
            "tails.lo_quantile",
            o.lo_quantile,
            tails_raw.lo_quantile,
            0.99,
        ),
        hi_quantile: pick(
            &mut prov,
            "tails.hi_quantile",
            o.hi_quantile,
            tails_raw.hi_quantile,
            0.9999,
        ),
    };
    if !(tails.lo_quantile > 0.0 && tails.hi_quantile < 1.0 && tails.lo_quantile < tails.hi_quantile)
    {
        return Err(Error::parameter(format!(
            "tails quantile range ({}, {}) must satisfy 0 < lo < hi < 1",
            tails.lo_quantile, tails.hi_quantile
        )));
    }

    let mode_name = pick(
        &mut prov,
        "index.mode",
        o.index_mode,
        index_raw.mode,
        "cumulative".to_string(),
    );
    let mode = match mode_name.as_str() {
        "cumulative" => IndexMode::Cumulative,
        "instantaneous" => IndexMode::Instantaneous,
        other => {
            return Err(Error::parameter(format!(
                "index.mode must be \"cumulative\" or \"instantaneous\", got {other:?}"
            )))
        }
    };
    let index = IndexSettings {
        currencies: pick_list(
            &mut prov,
            "index.currencies",
            o.currencies,
            index_raw.currencies,
            Vec::new(),
        ),
        mode,
    };

    Ok((
        Settings {
            run,
            data,
            analysis,
            rho,
            cluster,
            arb,
            tails,
            index,
        },
        prov,
    ))
}
