//! Every JSON the CLI writes validates against the shipped schemas.

mod common;

use std::path::Path;

use common::{config, modecover, p, read_json, repo_root};
use jsonschema::{Resource, Validator};
use serde_json::Value;

const SCHEMAS: [&str; 8] = [
    "coverage_report",
    "meta",
    "mixture",
    "oracle_report",
    "run_config",
    "stdout_line",
    "summary",
    "values",
];

fn load_schema(name: &str) -> Value {
    read_json(&repo_root().join("schemas").join(format!("{name}.schema.json")))
}

fn validator(name: &str) -> Validator {
    let mut opts = jsonschema::options();
    for other in SCHEMAS {
        let s = load_schema(other);
        let id = s["$id"].as_str().unwrap().to_string();
        opts = opts.with_resource(id, Resource::from_contents(s).unwrap());
    }
    opts.build(&load_schema(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assert_valid(schema: &str, doc: &Value, what: &str) {
    let v = validator(schema);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{what} against {schema}: {errors:?}");
}

fn assert_file(schema: &str, path: &Path) {
    assert_valid(schema, &read_json(path), &path.display().to_string());
}

#[test]
fn bundled_configs_match_the_config_schema() {
    for entry in std::fs::read_dir(repo_root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        assert_file("run_config", &path);
    }
}

#[test]
fn schemas_reject_malformed_documents() {
    let v = validator("coverage_report");
    assert!(!v.is_valid(&serde_json::json!({"psi_hat": 1.0})));
    let v = validator("values");
    assert!(!v.is_valid(&serde_json::json!({"recipe": "nope", "seed": 0, "passed": true, "quantities": []})));
    let v = validator("run_config");
    assert!(!v.is_valid(&serde_json::json!({"boost": {"generator": {"kind": "tabular"}}})));
}

#[test]
fn boost_outputs_validate() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["appendix_b.json", "exact_three_mode.json"] {
        let out = dir.path().join(name);
        let r = modecover(&["boost", "--config", &config(name), "--out", p(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_valid("stdout_line", &r.line(), "boost stdout");
        assert_file("summary", &out.join("summary.json"));
        assert_file("coverage_report", &out.join("coverage_report.json"));
        assert_file("mixture", &out.join("mixture.json"));
        assert_file("meta", &out.join("meta.json"));
    }
}

#[test]
fn empirical_outputs_with_modes_validate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.json");
    std::fs::write(
        &cfg,
        r#"{
            "dataset": {"kind": "gauss_grid", "modes": 4, "n": 400},
            "minority_mode": 3,
            "boost": {"rounds": 3, "seed": 2, "generator": {"kind": "kde", "bandwidth": 0.3},
                      "discriminator": {"kind": "logistic", "features": {"kind": "bins", "cells": 16}}}
        }"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let r = modecover(&["boost", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let line = r.line();
    assert_valid("stdout_line", &line, "boost stdout");
    assert_eq!(line["summary"]["mode_coverage"]["total"], 4);
    assert_file("summary", &out.join("summary.json"));
    assert_file("mixture", &out.join("mixture.json"));
}

#[test]
fn repro_and_verify_outputs_validate() {
    let dir = tempfile::tempdir().unwrap();
    for recipe in ["fig1", "fig6", "appendix-b"] {
        let out = dir.path().join(recipe);
        let r = modecover(&["repro", recipe, "--out", p(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_valid("stdout_line", &r.line(), recipe);
        assert_file("values", &out.join("values.json"));
        assert_file("meta", &out.join("meta.json"));
    }
    for suite in ["lemma1", "eq3", "dynamics", "theorem1"] {
        let out = dir.path().join(format!("{suite}.json"));
        let r = modecover(&["verify", suite, "--trials", "10", "--out", p(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert_valid("stdout_line", &r.line(), suite);
        assert_file("oracle_report", &out);
    }
    let r = modecover(&["verify", "lemma1", "--delta", "0.01", "--raise", "0.05"]);
    assert_eq!(r.code, 2);
    assert_valid("stdout_line", &r.line(), "failing verify");
}

#[test]
fn error_lines_validate() {
    for args in [&["verify", "nope"][..], &["repro", "nope"], &["boost", "--config", "/nonexistent.json"]] {
        let r = modecover(args);
        assert_eq!(r.code, 1);
        assert_valid("stdout_line", &r.line(), &format!("{args:?}"));
    }
    let r = modecover(&["--bogus"]);
    assert_eq!(r.code, 1);
    assert_valid("stdout_line", &r.line(), "parse error");
}

#[test]
fn generate_line_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let r = modecover(&["generate", "--kind", "spiral", "--n", "200", "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_valid("stdout_line", &r.line(), "generate");
}
