//! Exit codes, determinism and artifact contents of the command-line tool.

mod common;

use common::{config, modecover, p, read_json};

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(modecover(&["--help"]).code, 0);
    assert_eq!(modecover(&["--version"]).code, 0);
    assert_eq!(modecover(&["verify", "--help"]).code, 0);
}

#[test]
fn usage_and_config_errors_exit_one() {
    let cases: [&[&str]; 7] = [
        &[],
        &["verify", "nope"],
        &["repro", "fig99"],
        &["verify", "theorem1", "--support", "13"],
        &["verify", "eq3", "--delta", "0.3"],
        &["boost", "--config", "/definitely/missing.json"],
        &["generate", "--kind", "moons", "--out", "x.csv"],
    ];
    for args in cases {
        let r = modecover(args);
        assert_eq!(r.code, 1, "{args:?}: {}", r.stderr);
        assert!(!r.stderr.is_empty());
    }
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bodies = [
        // empty dataset path
        r#"{"input": "", "boost": {"generator": {"kind": "kde"}}}"#,
        // two data sources
        r#"{"points": [[0.0]], "dataset": {"kind": "spiral", "n": 10}, "boost": {"generator": {"kind": "kde"}}}"#,
        // unknown field
        r#"{"points": [[0.0]], "boost": {"generator": {"kind": "kde"}}, "roundz": 3}"#,
        // out-of-range delta
        r#"{"points": [[0.0]], "boost": {"delta": 1.5, "generator": {"kind": "kde"}}}"#,
        // target outside exact mode
        r#"{"target": {"kind": "discrete", "distribution": {"support": [[0.0]], "mass": [1.0]}}, "boost": {"generator": {"kind": "tabular"}}}"#,
        // minority mode on data without mode ids
        r#"{"points": [[0.0], [1.0]], "minority_mode": 1, "boost": {"generator": {"kind": "kde"}}}"#,
        // input file that does not exist
        r#"{"input": "missing.csv", "boost": {"generator": {"kind": "kde"}}}"#,
    ];
    for (i, body) in bodies.iter().enumerate() {
        let cfg = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&cfg, body).unwrap();
        let r = modecover(&["boost", "--config", p(&cfg), "--out", p(&dir.path().join("o"))]);
        assert_eq!(r.code, 1, "case {i}: {}", r.stderr);
        assert_eq!(r.line()["status"], "error");
    }
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let r = modecover(&["repro", "fig1", "--out", p(&file.join("sub"))]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(r.line()["exit_code"], 3);
}

#[test]
fn failed_checks_exit_two() {
    let r = modecover(&["verify", "lemma1", "--delta", "0.01", "--raise", "0.05"]);
    assert_eq!(r.code, 2);
    let line = r.line();
    assert_eq!(line["status"], "failed");
    assert!(line["report"]["violations"].as_u64().unwrap() >= 1);
    assert!(line["report"]["first_violation"].is_object());
}

#[test]
fn verify_default_suites_pass() {
    for suite in ["eq3", "theorem1"] {
        let r = modecover(&["verify", suite, "--threads", "2"]);
        assert_eq!(r.code, 0, "{suite}: {}", r.stderr);
        assert_eq!(r.line()["report"]["violations"], 0);
    }
}

#[test]
fn appendix_b_boost_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let r = modecover(&["boost", "--config", &config("appendix_b.json"), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["n_points"], 7);
    assert_eq!(s["doubled_per_round"][0], 2);
    let r2 = &s["round_distributions"][1];
    let masses: Vec<f64> = r2["masses"].as_array().unwrap().iter().map(|m| m.as_f64().unwrap()).collect();
    assert!((masses[0] - 5.0 / 9.0).abs() < 1e-12);
    assert!((masses[1] - 4.0 / 9.0).abs() < 1e-12);
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(
        trace.lines().next().unwrap(),
        "round,log2_W,n_doubled,tv_gen_vs_pt,minority_ratio,epsilon_prime,lambda_min"
    );
    assert_eq!(trace.lines().count(), 3);
}

#[test]
fn seed_flag_changes_stochastic_runs_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"dataset": {"kind": "gauss_grid", "modes": 3, "n": 300},
            "boost": {"rounds": 3, "generator": {"kind": "gmm", "k": 2},
                      "discriminator": {"kind": "logistic", "features": {"kind": "bins", "cells": 8}}}}"#,
    )
    .unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let r = modecover(&["boost", "--config", p(&cfg), "--seed", seed, "--out", p(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        std::fs::read(out.join("mixture.json")).unwrap()
    };
    assert_eq!(run("5", "a"), run("5", "b"));
    assert_ne!(run("5", "a"), run("6", "c"));
}

#[test]
fn repeated_commands_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let twice = |args: &dyn Fn(&str) -> Vec<String>, files: &[&str]| {
        for tag in ["1", "2"] {
            let a = args(tag);
            let a: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
            let r = modecover(&a);
            assert_eq!(r.code, 0, "{a:?}: {}", r.stderr);
        }
        for f in files {
            let x = std::fs::read(dir.path().join("1").join(f)).unwrap();
            let y = std::fs::read(dir.path().join("2").join(f)).unwrap();
            assert!(x == y, "{f} differs between identical runs");
        }
    };
    let d = dir.path().to_path_buf();
    twice(
        &|t| {
            vec![
                "boost".into(),
                "--config".into(),
                config("exact_three_mode.json"),
                "--out".into(),
                d.join(t).to_string_lossy().into_owned(),
            ]
        },
        &["trace.csv", "mixture.json", "coverage_report.json", "summary.json"],
    );
    let d = dir.path().to_path_buf();
    twice(
        &|t| vec!["repro".into(), "fig6".into(), "--out".into(), d.join(t).to_string_lossy().into_owned()],
        &["values.json", "densities.csv", "kl_table.csv"],
    );
}

#[test]
fn generated_csv_feeds_boost() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data").join("grid.csv");
    let r = modecover(&["generate", "--kind", "gauss-grid", "--n", "500", "--seed", "3", "--out", p(&csv)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.line()["dataset"]["modes"], 10);
    let again = dir.path().join("again.csv");
    modecover(&["generate", "--kind", "gauss-grid", "--n", "500", "--seed", "3", "--out", p(&again)]);
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(&again).unwrap());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x0,x1,mode_id");
    assert_eq!(text.lines().count(), 501);

    // A config next to the data refers to it by a relative path.
    let cfg = dir.path().join("data").join("run.json");
    std::fs::write(
        &cfg,
        r#"{"input": "grid.csv", "minority_mode": 0,
            "boost": {"rounds": 4, "generator": {"kind": "histogram", "cells": 32},
                      "discriminator": {"kind": "logistic", "features": {"kind": "bins", "cells": 32}}}}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let r = modecover(&["boost", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let s = r.line()["summary"].clone();
    assert_eq!(s["mode_coverage"]["total"], 10);
    assert_eq!(s["minority_ratio"].as_array().unwrap().len(), 4);
    let cov = read_json(&out.join("coverage_report.json"));
    assert_eq!(cov["ratios"].as_array().unwrap().len(), 500);
}

#[test]
fn generate_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"kind": "spiral", "n": 40}"#).unwrap();
    let out = dir.path().join("s.csv");
    let r = modecover(&["generate", "--config", p(&spec), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.line()["dataset"]["n"], 40);
    let r = modecover(&["generate", "--kind", "fig1", "--n", "100", "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.line()["dataset"]["modes"], serde_json::Value::Null);
}
