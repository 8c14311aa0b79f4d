//! `mfx` — multifractal cross-correlation analysis of synchronized return
//! series, with tick-data front ends for currency markets.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::SurrogateRequest;
use crate::config::{load_raw, resolve, Overrides};

#[derive(Parser)]
#[command(
    name = "mfx",
    version,
    about = "Multifractal detrended cross-correlation analysis for tick data"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory artifacts are written into.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Base RNG seed for stochastic steps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker-thread bound (0 = one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print resolved settings with their sources.
    #[arg(long, global = true)]
    verbose: bool,
    /// Sampling interval in seconds.
    #[arg(long, global = true)]
    delta_t: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse tick CSVs, resample, and cache log-return series.
    Ingest,
    /// Single-series fluctuation surfaces and generalized Hurst exponents.
    Mfdfa {
        /// Restrict to these configured series (default: all).
        #[arg(long = "pair")]
        pairs: Vec<String>,
    },
    /// Cross-correlation scaling for series pairs.
    Mfcca {
        /// First series of a single pair to analyze.
        #[arg(long)]
        pair_x: Option<String>,
        /// Second series of a single pair to analyze.
        #[arg(long)]
        pair_y: Option<String>,
    },
    /// q-dependent detrended correlation matrices.
    Rho {
        /// Correlation orders q (repeatable).
        #[arg(long = "q")]
        q: Vec<f64>,
        /// Evaluate at this single scale instead of averaging.
        #[arg(long)]
        scale: Option<usize>,
        /// Average the coefficient over the scale grid.
        #[arg(long)]
        avg_scales: bool,
        /// Also emit per-pair coefficient-vs-scale profiles.
        #[arg(long)]
        profiles: bool,
    },
    /// Hierarchical clustering of the correlation matrix.
    Dendro {
        /// Correlation order the distance matrix is built from.
        #[arg(long)]
        q: Option<f64>,
        /// Merge rule: single, complete, or average.
        #[arg(long)]
        linkage: Option<String>,
        /// Cut into this many clusters (0 = automatic gap cut).
        #[arg(long)]
        clusters: Option<usize>,
    },
    /// Scan currency triangles for cycle-consistency violations.
    Arb {
        /// Triangle as three currencies, e.g. EUR,USD,CHF (repeatable).
        #[arg(long = "triangle")]
        triangles: Vec<String>,
        /// Minimum coefficient magnitude that counts as an event.
        #[arg(long)]
        threshold: Option<f64>,
        /// Minimum event duration in grid steps.
        #[arg(long)]
        min_duration: Option<usize>,
        /// Evaluate at every tick arrival instead of on the grid.
        #[arg(long)]
        raw_ticks: bool,
        /// Minimum event duration in milliseconds (raw-tick mode).
        #[arg(long)]
        min_duration_ms: Option<i64>,
    },
    /// Distribution tails of absolute returns.
    Tails {
        /// Restrict to these configured series (default: all).
        #[arg(long = "pair")]
        pairs: Vec<String>,
        /// Fit on unit-variance returns.
        #[arg(long)]
        normalized: bool,
        /// Lower tail quantile of |r| bounding the fit.
        #[arg(long)]
        lo_quantile: Option<f64>,
        /// Upper tail quantile of |r| bounding the fit.
        #[arg(long)]
        hi_quantile: Option<f64>,
    },
    /// Per-currency strength indexes from the pair basket.
    Index {
        /// Currencies to index (default: all appearing in pair labels).
        #[arg(long = "currency")]
        currencies: Vec<String>,
        /// cumulative or instantaneous.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Generate surrogate or synthetic series ensembles.
    Surrogate {
        /// shuffle, fourier-phase, fgn, or cascade.
        #[arg(long)]
        kind: String,
        /// Configured series the surrogate is built from.
        #[arg(long)]
        target: Option<String>,
        /// Ensemble size (seeds are seed, seed+1, ...).
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Target Hurst exponent (fgn).
        #[arg(long)]
        hurst: Option<f64>,
        /// Series length (fgn).
        #[arg(long)]
        length: Option<usize>,
        /// Tree depth (cascade).
        #[arg(long)]
        levels: Option<usize>,
        /// Multiplier asymmetry in [0, 1) (cascade).
        #[arg(long)]
        spread: Option<f64>,
    },
    /// Run every configured analysis into one artifact directory.
    Report,
}

fn run(cli: Cli) -> i32 {
    let mut overrides = Overrides {
        output_dir: cli.output_dir,
        seed: cli.seed,
        jobs: cli.jobs,
        verbose: cli.verbose,
        delta_t: cli.delta_t,
        ..Overrides::default()
    };
    match &cli.command {
        Command::Rho {
            q,
            scale,
            avg_scales,
            profiles,
        } => {
            overrides.rho_q = q.clone();
            overrides.scale = *scale;
            overrides.avg_scales = *avg_scales;
            overrides.profiles = *profiles;
        }
        Command::Dendro {
            q,
            linkage,
            clusters,
        } => {
            overrides.cluster_q = *q;
            overrides.linkage = linkage.clone();
            overrides.clusters = *clusters;
        }
        Command::Arb {
            triangles,
            threshold,
            min_duration,
            raw_ticks,
            min_duration_ms,
        } => {
            overrides.triangles = triangles.clone();
            overrides.threshold = *threshold;
            overrides.min_duration = *min_duration;
            overrides.raw_ticks = *raw_ticks;
            overrides.min_duration_ms = *min_duration_ms;
        }
        Command::Tails {
            normalized,
            lo_quantile,
            hi_quantile,
            ..
        } => {
            overrides.normalized = normalized.then_some(true);
            overrides.lo_quantile = *lo_quantile;
            overrides.hi_quantile = *hi_quantile;
        }
        Command::Index { currencies, mode } => {
            overrides.currencies = currencies.clone();
            overrides.index_mode = mode.clone();
        }
        _ => {}
    }

    let raw = match load_raw(cli.config.as_deref()) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: {e}");
            return artifacts::exit_code(&e);
        }
    };
    let (settings, provenance) = match resolve(raw, overrides) {
        Ok(resolved) => resolved,
        Err(e) => {
            eprintln!("error: {e}");
            return artifacts::exit_code(&e);
        }
    };
    if settings.run.verbose {
        eprint!("{}", provenance.describe());
    }
    if settings.run.jobs > 0 {
        // A second global-pool initialization (e.g. in tests) is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(settings.run.jobs)
            .build_global();
    }

    let result = match &cli.command {
        Command::Ingest => commands::cmd_ingest(&settings),
        Command::Mfdfa { pairs } => commands::cmd_mfdfa(&settings, pairs),
        Command::Mfcca { pair_x, pair_y } => {
            commands::cmd_mfcca(&settings, pair_x.as_deref(), pair_y.as_deref())
        }
        Command::Rho { .. } => commands::cmd_rho(&settings),
        Command::Dendro { .. } => commands::cmd_dendro(&settings),
        Command::Arb { .. } => commands::cmd_arb(&settings),
        Command::Tails { pairs, .. } => commands::cmd_tails(&settings, pairs),
        Command::Index { .. } => commands::cmd_index(&settings),
        Command::Surrogate {
            kind,
            target,
            count,
            hurst,
            length,
            levels,
            spread,
        } => commands::cmd_surrogate(
            &settings,
            &SurrogateRequest {
                kind: kind.clone(),
                target: target.clone(),
                count: *count,
                hurst: *hurst,
                length: *length,
                levels: *levels,
                spread: *spread,
            },
        ),
        Command::Report => commands::cmd_report(&settings),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            artifacts::exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print to stdout and exit 0; real usage errors
            // are configuration errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli) as u8)
}
