//! Deterministic artifact emission.
//!
//! Every artifact embeds the tool version and the resolved-config hash:
//! JSON files carry them in a top-level envelope, text formats (CSV, JSON
//! lines, Newick) carry them in a leading comment or metadata line. Writers
//! produce the full content in memory and write it in one call, with no
//! clocks or machine-local state, so identical runs give identical bytes.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use mfx_core::ingest::{write_cache_file, ReturnSeries};
use mfx_core::surrogate::RNG_ALGORITHM;
use mfx_core::{Error, Result};
use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope wrapping every JSON artifact.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool_version: &'static str,
    config_hash: &'a str,
    data: &'a T,
}

/// Run manifest: what a command produced, under which configuration.
#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool_version: &'static str,
    pub config_hash: &'a str,
    pub rng_algorithm: &'static str,
    pub command: &'a str,
    pub artifacts: Vec<String>,
}

/// Collects artifacts under the output directory, tracking names for the
/// run manifest.
pub struct ArtifactWriter {
    dir: PathBuf,
    config_hash: String,
    names: BTreeSet<String>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path, config_hash: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(ArtifactWriter {
            dir: dir.to_path_buf(),
            config_hash: config_hash.to_string(),
            names: BTreeSet::new(),
        })
    }

    fn record(&mut self, name: &str) -> PathBuf {
        self.names.insert(name.to_string());
        self.dir.join(name)
    }

    /// JSON artifact: payload under `data`, hash and version alongside.
    pub fn write_json<T: Serialize>(&mut self, name: &str, payload: &T) -> Result<()> {
        let envelope = Envelope {
            tool_version: TOOL_VERSION,
            config_hash: &self.config_hash,
            data: payload,
        };
        let body = serde_json::to_string_pretty(&envelope)?;
        let path = self.record(name);
        std::fs::write(path, body + "\n")?;
        Ok(())
    }

    /// CSV artifact: a `#` comment line with version and hash, then the body.
    pub fn write_csv(&mut self, name: &str, body: &str) -> Result<()> {
        let content = format!(
            "# tool_version={TOOL_VERSION} config_hash={}\n{body}",
            self.config_hash
        );
        let path = self.record(name);
        std::fs::write(path, content)?;
        Ok(())
    }

    /// JSON-lines artifact: a leading metadata object, then one record per line.
    pub fn write_jsonl(&mut self, name: &str, body: &str) -> Result<()> {
        let meta = serde_json::json!({
            "tool_version": TOOL_VERSION,
            "config_hash": self.config_hash,
        });
        let content = format!("{meta}\n{body}");
        let path = self.record(name);
        std::fs::write(path, content)?;
        Ok(())
    }

    /// Newick artifact: a bracketed comment prefix, then the tree.
    pub fn write_newick(&mut self, name: &str, tree: &str) -> Result<()> {
        let content = format!(
            "[tool_version={TOOL_VERSION} config_hash={}]\n{tree}\n",
            self.config_hash
        );
        let path = self.record(name);
        std::fs::write(path, content)?;
        Ok(())
    }

    /// Binary return-series cache. The binary format has no metadata slot;
    /// the accompanying JSON report carries the hash for these.
    pub fn write_cache(&mut self, name: &str, series: &ReturnSeries) -> Result<()> {
        let path = self.record(name);
        write_cache_file(series, &path)
    }

    /// Write the run manifest, listing every artifact (itself included).
    pub fn write_manifest(&mut self, command: &str) -> Result<()> {
        self.names.insert("run_manifest.json".to_string());
        let manifest = RunManifest {
            tool_version: TOOL_VERSION,
            config_hash: &self.config_hash,
            rng_algorithm: RNG_ALGORITHM,
            command,
            artifacts: self.names.iter().cloned().collect(),
        };
        let body = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(self.dir.join("run_manifest.json"), body + "\n")?;
        Ok(())
    }
}

/// Exit code for an error, per the documented convention: 1 for
/// configuration problems, 2 for data problems, 3 for numerical failures.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Parameter(_) => 1,
        Error::Io(_) | Error::Format { .. } | Error::Domain(_) => 2,
        Error::Fit { .. } | Error::Serialization(_) => 3,
    }
}

/// File-name-safe form of a series label: `EUR/USD` → `EUR_USD`.
pub fn safe_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// Compact decimal form of a moment order for file names: 1.0 → `1`,
/// 0.5 → `0.5`, -2.0 → `-2`.
pub fn fmt_q(q: f64) -> String {
    if q == q.trunc() && q.abs() < 1e9 {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}
