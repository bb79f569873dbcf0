use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use swapchain::analysis::{outcome_probabilities, Setting, OUTCOME_NAMES};
use swapchain::states::{bell, BellKind};

fn swapchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swapchain"))
        .args(args)
        .env_remove("SWAPCHAIN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = swapchain(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn correlation(report: &Value, label: &str) -> f64 {
    report["tomography"]["correlations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["label"] == label)
        .unwrap()["value"]
        .as_f64()
        .unwrap()
}

#[test]
fn run_ideal() {
    let r = ok_json(&["run", "--preset", "ideal"]);
    assert!((r["witness"]["value"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    assert!((r["success_probability"]["analytic"].as_f64().unwrap() - 1.0 / 64.0).abs() < 1e-12);
    assert_eq!(r["generator"], "chacha20/sha256-substream-v1");
}

#[test]
fn run_is_deterministic() {
    let a = swapchain(&["run", "--preset", "paper", "--seed", "7", "--format", "json"]);
    let b = swapchain(&["run", "--preset", "paper", "--seed", "7", "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = swapchain(&["run", "--preset", "paper", "--seed", "8", "--format", "json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn more_events_shrink_the_error_bar() {
    let stderr_at = |n: &str| ok_json(&["run", "--preset", "paper", "--events-per-setting", n])["witness"]["stderr"].as_f64().unwrap();
    let ratio = stderr_at("6000") / stderr_at("60");
    assert!((0.07..0.14).contains(&ratio), "ratio {ratio}");
}

#[test]
fn embedded_preset_replays_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = swapchain(&["run", "--preset", "paper", "--seed", "11"]);
    let report: Value = serde_json::from_slice(&first.stdout).unwrap();
    let config = dir.path().join("rerun.json");
    std::fs::write(&config, serde_json::json!({ "experiment": report["preset"] }).to_string()).unwrap();
    let second = swapchain(&["run", "--config", config.to_str().unwrap()]);
    assert!(second.status.success(), "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn toml_config_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "base = \"ideal\"\nformat = \"csv\"\n\n[experiment]\nn_pairs = 4\n\n[experiment.noise]\nbsm_visibility = [1.0, 0.5, 1.0]\n",
    )
    .unwrap();
    let out = swapchain(&["run", "--config", config.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&out);
    assert_eq!(rows[0][5], "witness");
    let w: f64 = rows[1][5].parse().unwrap();
    assert!((w + 0.25).abs() < 1e-12, "{w}");
}

#[test]
fn invalid_configs_exit_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("unknown.toml", "[experiment.noise]\nvisiblity = 0.5\n", "experiment.noise"),
        ("range.toml", "[experiment.noise]\nbackground_fraction = 1.5\n", "noise.background_fraction"),
        ("type.json", "{\"experiment\": {\"n_pairs\": \"three\"}}", "experiment.n_pairs"),
        ("top.toml", "preset = \"paper\"\n", "preset"),
        ("stages.toml", "[experiment.noise]\nbsm_visibility = [1.0]\n", "noise.bsm_visibility"),
        ("syntax.toml", "[experiment\n", "syntax.toml"),
        ("config.yaml", "a: 1\n", ".toml or .json"),
    ];
    for (name, text, needle) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        let out = swapchain(&["run", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(stderr(&out).contains(needle), "{name}: {}", stderr(&out));
    }
    let missing = swapchain(&["run", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sweep_visibility_follows_square_law() {
    let out = swapchain(&["sweep", "visibility", "0:1:0.1", "--analytic", "--format", "csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["parameter", "value", "witness", "stderr", "success_probability", "concurrence"]);
    assert_eq!(rows.len(), 12);
    for row in &rows[1..] {
        let v: f64 = row[1].parse().unwrap();
        let w: f64 = row[2].parse().unwrap();
        assert!((w + v * v / 2.0).abs() < 1e-9, "V={v}: {w}");
    }
}

#[test]
fn sweep_chain_length_keeps_ideal_witness() {
    let r = ok_json(&["sweep", "n-pairs", "2:5"]);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!((row["witness"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    }
}

#[test]
fn bad_sweeps_exit_2() {
    for args in [
        vec!["sweep", "visibility", ""],
        vec!["sweep", "visibility", "1:0"],
        vec!["sweep", "temperature", "0:1:0.5"],
        vec!["sweep", "visibility", "0,1.5"],
        vec!["sweep", "n-pairs", "1:3"],
    ] {
        let out = swapchain(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn tomo_pre_swap() {
    let r = ok_json(&["tomo", "--preset", "pre-swap"]);
    assert_eq!(r["tomography"]["concurrence"].as_f64(), Some(0.0));
    assert_eq!(correlation(&r, "II"), 1.0);
    for c in r["tomography"]["correlations"].as_array().unwrap() {
        if c["label"] != "II" {
            assert!(c["value"].as_f64().unwrap().abs() < 0.06, "{c}");
        }
    }
    assert_eq!(r["tomography"]["rho_real"].as_array().unwrap().len(), 4);
}

fn write_counts(path: &Path, rows: &[(String, &str, u64)]) {
    let mut text = String::from("setting,outcome,count\n");
    for (s, o, c) in rows {
        text.push_str(&format!("{s},{o},{c}\n"));
    }
    std::fs::write(path, text).unwrap();
}

#[test]
fn tomo_from_singlet_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("singlet.csv");
    let rho = bell(BellKind::PsiMinus).to_density();
    let mut rows = Vec::new();
    for s in Setting::ALL {
        let p = outcome_probabilities(&rho, s).unwrap();
        for (name, pk) in OUTCOME_NAMES.iter().zip(p) {
            rows.push((s.label(), *name, (pk * 100_000.0).round() as u64));
        }
    }
    write_counts(&path, &rows);
    let r = ok_json(&["tomo", "--counts", path.to_str().unwrap(), "--bootstrap", "20"]);
    for label in ["XX", "YY", "ZZ"] {
        assert!((correlation(&r, label) + 1.0).abs() < 1e-3, "{label}");
    }
    assert!(r["tomography"]["concurrence"].as_f64().unwrap() > 0.99);
    assert!((r["witness"]["value"].as_f64().unwrap() + 0.5).abs() < 1e-3);
}

#[test]
fn counts_written_by_run_feed_tomo() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let out = swapchain(&[
        "run",
        "--preset",
        "pre-swap",
        "--counts-out",
        counts.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = ok_json(&["tomo", "--counts", counts.to_str().unwrap(), "--bootstrap", "10"]);
    assert_eq!(r["tomography"]["concurrence"].as_f64(), Some(0.0));

    let analytic = swapchain(&["run", "--preset", "ideal", "--counts-out", counts.to_str().unwrap()]);
    assert_eq!(analytic.status.code(), Some(2));
}

#[test]
fn malformed_and_incomplete_counts_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "setting,outcome,count\nZZ,pp,10\nZZ,pm,ten\n").unwrap();
    let out = swapchain(&["tomo", "--counts", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3, column 3 (count)"), "{}", stderr(&out));

    let partial = dir.path().join("partial.csv");
    let rows: Vec<_> = Setting::ALL[..7]
        .iter()
        .flat_map(|s| OUTCOME_NAMES.iter().map(move |o| (s.label(), *o, 5u64)))
        .collect();
    write_counts(&partial, &rows);
    let out = swapchain(&["tomo", "--counts", partial.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("YX, YY"), "{}", stderr(&out));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_swapchain"))
        .args(["run", "--preset", "ideal", "--format", "csv"])
        .env("SWAPCHAIN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let file = dir.path().join("run-ideal-seed0.csv");
    assert!(std::fs::read_to_string(file).unwrap().starts_with("preset,seed"));

    let explicit = dir.path().join("nested/report.json");
    let out = swapchain(&["run", "--preset", "ideal", "--out", explicit.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(explicit.exists());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(swapchain(&["run", "--preset", "nope"]).status.code(), Some(2));
    assert_eq!(swapchain(&["tomo"]).status.code(), Some(2));
    assert_eq!(swapchain(&["run", "--preset", "ideal", "--config", "x.toml"]).status.code(), Some(2));
    assert_eq!(swapchain(&["frobnicate"]).status.code(), Some(2));
}
