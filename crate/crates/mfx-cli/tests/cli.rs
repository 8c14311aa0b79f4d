//! End-to-end tests of the `mfx` binary against the bundled fixtures.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn mfx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfx"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(code), "stderr: {stderr}");
}

/// Every regular file under `dir`, keyed by relative path.
fn dir_contents(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("readable dir") {
        let path = entry.expect("entry").path();
        assert!(path.is_file(), "unexpected non-file {}", path.display());
        let rel = path.strip_prefix(dir).expect("prefix").to_path_buf();
        out.insert(rel, std::fs::read(&path).expect("readable file"));
    }
    out
}

#[test]
fn averaged_correlation_matrices_cover_every_requested_order() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let out = mfx(&[
        "rho",
        "--config",
        &fixture("demo.toml"),
        "--output-dir",
        out_dir.to_str().expect("utf8"),
        "--q",
        "1",
        "--q",
        "4",
        "--avg-scales",
    ]);
    assert_exit(&out, 0);

    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("rho_matrices.json")).expect("matrix json"),
    )
    .expect("valid json");
    assert_eq!(json["data"]["q"], serde_json::json!([1.0, 4.0]));
    assert!(json["data"]["s_spec"]["average"].is_array());
    let matrices = json["data"]["matrices"].as_array().expect("matrix list");
    assert_eq!(matrices.len(), 2);
    for matrix in matrices {
        let rows = matrix["rows"].as_array().expect("rows");
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            for (j, cell) in row.as_array().expect("row").iter().enumerate() {
                let v = cell.as_f64().expect("finite entry");
                assert!(v.abs() <= 1.0 + 1e-9, "rho out of range: {v}");
                if i == j {
                    assert_eq!(v, 1.0);
                }
            }
        }
    }
    assert!(out_dir.join("rho_matrix_q1.csv").is_file());
    assert!(out_dir.join("rho_matrix_q4.csv").is_file());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("run_manifest.json")).expect("manifest"),
    )
    .expect("valid manifest");
    assert_eq!(manifest["command"], "rho");
    assert_eq!(manifest["config_hash"].as_str().expect("hash").len(), 64);
}

#[test]
fn triangle_scan_reports_exactly_the_planted_event() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let out = mfx(&[
        "arb",
        "--config",
        &fixture("arb.toml"),
        "--output-dir",
        out_dir.to_str().expect("utf8"),
        "--triangle",
        "A,B,C",
        "--threshold",
        "0",
    ]);
    assert_exit(&out, 0);

    let jsonl = std::fs::read_to_string(out_dir.join("arb_A-B-C.jsonl")).expect("events");
    let lines: Vec<&str> = jsonl.lines().collect();
    assert_eq!(lines.len(), 2, "meta line plus exactly one event");
    let event: serde_json::Value = serde_json::from_str(lines[1]).expect("event json");
    assert_eq!(event["direction"], "alpha1");
    // The dip covers grid seconds 50..=79 of a stream starting at
    // 1 700 000 000 000 ms.
    assert_eq!(event["start_ms"], 1_700_000_050_000_i64);
    assert_eq!(event["end_ms"], 1_700_000_079_000_i64);
    assert!(event["peak_alpha"].as_f64().expect("peak") > 0.02);

    let summary = std::fs::read_to_string(out_dir.join("arb_summary.csv")).expect("summary");
    assert_eq!(summary.lines().count(), 3, "comment, header, one event row");
}

#[test]
fn full_report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().expect("tempdir");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = mfx(&[
            "report",
            "--config",
            &fixture("demo.toml"),
            "--output-dir",
            out_dir.to_str().expect("utf8"),
        ]);
        assert_exit(&out, 0);
    }
    let (fa, fb) = (dir_contents(&a), dir_contents(&b));
    assert_eq!(
        fa.keys().collect::<Vec<_>>(),
        fb.keys().collect::<Vec<_>>(),
        "same artifact set"
    );
    assert!(!fa.is_empty());
    for (name, bytes) in &fa {
        assert_eq!(Some(bytes), fb.get(name), "artifact {} differs", name.display());
    }
}

#[test]
fn surrogate_ensembles_are_reproducible_and_seed_sequenced() {
    let dir = tempfile::tempdir().expect("tempdir");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out_dir in [&a, &b] {
        let out = mfx(&[
            "surrogate",
            "--config",
            &fixture("demo.toml"),
            "--output-dir",
            out_dir.to_str().expect("utf8"),
            "--kind",
            "shuffle",
            "--target",
            "EUR/USD",
            "--count",
            "3",
            "--seed",
            "100",
        ]);
        assert_exit(&out, 0);
    }
    for (name, bytes) in dir_contents(&a) {
        assert_eq!(
            Some(&bytes),
            dir_contents(&b).get(&name),
            "artifact {} differs",
            name.display()
        );
    }
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(a.join("surrogate_manifest.json")).expect("manifest"),
    )
    .expect("valid json");
    assert_eq!(manifest["data"]["seeds"], serde_json::json!([100, 101, 102]));
    assert_eq!(manifest["data"]["algorithm"], "chacha8");
    for seed in [100, 101, 102] {
        assert!(a.join(format!("surrogate_shuffle_{seed}.bin")).is_file());
    }
}

#[test]
fn exit_codes_distinguish_config_data_and_fit_failures() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_str = dir.path().join("out");
    let out_dir = out_str.to_str().expect("utf8");

    // Missing config file: configuration error.
    let out = mfx(&["mfdfa", "--config", "/nonexistent/mfx.toml", "--output-dir", out_dir]);
    assert_exit(&out, 1);

    // Config referencing a missing data file: still a configuration error.
    let cfg = dir.path().join("missing_data.toml");
    std::fs::write(&cfg, "[data.pairs]\n\"X/Y\" = \"/nonexistent/ticks.csv\"\n").expect("write");
    let out = mfx(&["mfdfa", "--config", cfg.to_str().expect("utf8"), "--output-dir", out_dir]);
    assert_exit(&out, 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("X/Y"));

    // Unknown configuration key: configuration error.
    let cfg = dir.path().join("unknown_key.toml");
    std::fs::write(&cfg, "[data]\ndelta_tea = 1.0\n").expect("write");
    let out = mfx(&["mfdfa", "--config", cfg.to_str().expect("utf8"), "--output-dir", out_dir]);
    assert_exit(&out, 1);

    // A stream that exceeds the malformed-row tolerance: data error.
    let ticks = dir.path().join("bad_ticks.csv");
    std::fs::write(&ticks, "timestamp_ms,ask,bid\nnot,a,number\nstill,not,one\n").expect("write");
    let cfg = dir.path().join("bad_data.toml");
    std::fs::write(
        &cfg,
        format!("[data.pairs]\n\"X/Y\" = {:?}\n", ticks.to_str().expect("utf8")),
    )
    .expect("write");
    let out = mfx(&["mfdfa", "--config", cfg.to_str().expect("utf8"), "--output-dir", out_dir]);
    assert_exit(&out, 2);

    // Too few tail points inside the requested quantile range: fit error.
    let out = mfx(&[
        "tails",
        "--config",
        &fixture("demo.toml"),
        "--output-dir",
        out_dir,
        "--lo-quantile",
        "0.999",
    ]);
    assert_exit(&out, 3);

    // Help is not an error.
    let out = mfx(&["--help"]);
    assert_exit(&out, 0);
}

#[test]
fn verbose_mode_reports_each_setting_with_its_source() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("out");
    let out = mfx(&[
        "rho",
        "--config",
        &fixture("demo.toml"),
        "--output-dir",
        out_dir.to_str().expect("utf8"),
        "--q",
        "2",
        "--verbose",
    ]);
    assert_exit(&out, 0);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("precedence: flag > config > default"), "{stderr}");
    assert!(stderr.contains("rho.q = [2.0] (flag)"), "{stderr}");
    assert!(stderr.contains("run.seed = 7 (config)"), "{stderr}");
    assert!(stderr.contains("analysis.degree = 2 (default)"), "{stderr}");
}

#[test]
fn cached_returns_round_trip_through_ingest() {
    let dir = tempfile::tempdir().expect("tempdir");
    let ingest_dir = dir.path().join("ingest");
    let out = mfx(&[
        "ingest",
        "--config",
        &fixture("demo.toml"),
        "--output-dir",
        ingest_dir.to_str().expect("utf8"),
    ]);
    assert_exit(&out, 0);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(ingest_dir.join("ingest_report.json")).expect("report"),
    )
    .expect("valid json");
    let series = report["data"]["series"].as_array().expect("series");
    assert_eq!(series.len(), 3);
    for entry in series {
        assert_eq!(entry["parse"]["rows_total"], entry["parse"]["rows_ok"]);
        assert!(entry["samples"].as_u64().expect("samples") > 3000);
    }

    // Analyses accept the caches in place of tick CSVs at matching delta_t...
    let cache = ingest_dir.join("EUR_USD.returns.bin");
    let cfg = dir.path().join("cache.toml");
    std::fs::write(
        &cfg,
        format!(
            "[data]\ndelta_t = 1.0\n[data.pairs]\n\"EUR/USD\" = {:?}\n[tails]\nlo_quantile = 0.95\n",
            cache.to_str().expect("utf8")
        ),
    )
    .expect("write");
    let out_dir = dir.path().join("out");
    let out = mfx(&[
        "tails",
        "--config",
        cfg.to_str().expect("utf8"),
        "--output-dir",
        out_dir.to_str().expect("utf8"),
    ]);
    assert_exit(&out, 0);

    // ...and reject them when the run is configured for a different grid.
    let out = mfx(&[
        "tails",
        "--config",
        cfg.to_str().expect("utf8"),
        "--output-dir",
        out_dir.to_str().expect("utf8"),
        "--delta-t",
        "5.0",
    ]);
    assert_exit(&out, 1);
}
