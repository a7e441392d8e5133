//! Whole boosting runs: determinism, coverage growth, diagnostics and file formats.

use modecover::boost::ReferenceDensity;
use modecover::bounds::{empirical_psi, pointwise_psi};
use modecover::discriminator::{DiscriminatorSpec, FeatureSpec, LogisticConfig};
use modecover::dist::discretize;
use modecover::io::{read_dataset, write_dataset, write_trace, TRACE_HEADER};
use modecover::synth::{fig1_target, make_gauss_grid, make_sine_dataset};
use modecover::{run_empirical, run_exact, BoostConfig, Error, GeneratorSpec, GridSpec};

fn bins_disc() -> DiscriminatorSpec {
    DiscriminatorSpec::Logistic(LogisticConfig {
        features: FeatureSpec::Bins { grid: None, cells: 32 },
        ..LogisticConfig::default()
    })
}

fn trace_bytes(t: &modecover::RoundTrace) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trace(&mut buf, t).unwrap();
    buf
}

#[test]
fn empirical_runs_are_reproducible() {
    let d = make_gauss_grid(10, 15.0, 0.05, 2000, 4).unwrap();
    let mut cfg = BoostConfig::new(GeneratorSpec::Gmm {
        k: 3,
        max_iter: 50,
        var_floor: 1e-6,
        restarts: 2,
    });
    cfg.rounds = 5;
    cfg.seed = 21;
    cfg.discriminator = bins_disc();
    let a = run_empirical(&d.points, &cfg).unwrap();
    let b = run_empirical(&d.points, &cfg).unwrap();
    assert_eq!(trace_bytes(&a.trace), trace_bytes(&b.trace));
    assert_eq!(
        serde_json::to_string(&a.mixture).unwrap(),
        serde_json::to_string(&b.mixture).unwrap()
    );
    cfg.seed = 22;
    let c = run_empirical(&d.points, &cfg).unwrap();
    assert_ne!(
        serde_json::to_string(&a.mixture).unwrap(),
        serde_json::to_string(&c.mixture).unwrap()
    );
}

#[test]
fn exact_boosting_lifts_pointwise_coverage() {
    // A single Gaussian cannot match the three-mode target; the mixture of
    // per-round fits covers every cell far better.
    let grid = GridSpec::line(-15.0, 15.0, 300).unwrap();
    let target = discretize(&fig1_target(), &grid).unwrap();
    let mut cfg = BoostConfig::new(GeneratorSpec::Gmm {
        k: 1,
        max_iter: 50,
        var_floor: 1e-6,
        restarts: 1,
    });
    cfg.rounds = 1;
    let single = run_exact(&target, &cfg).unwrap();
    cfg.rounds = 12;
    let boosted = run_exact(&target, &cfg).unwrap();
    let lb = 0.01;
    let s = pointwise_psi(&single.mixture, &target, lb).unwrap();
    let b = pointwise_psi(&boosted.mixture, &target, lb).unwrap();
    assert!(b.worst_subset.ratio > s.worst_subset.ratio, "{} vs {}", b.worst_subset.ratio, s.worst_subset.ratio);
    assert!(b.worst_subset.ratio > 0.1, "{}", b.worst_subset.ratio);
    // Total weight never grows faster than doubling.
    for r in &boosted.trace.records {
        assert!(r.doubled_mass <= 1.0);
    }
    assert!(boosted.trace.final_log2_w <= 12.0);
}

#[test]
fn diagnostics_reported_with_reference() {
    let d = make_sine_dataset(4000, 400, [10.0, 0.0], 1.0, 2).unwrap();
    let mut cfg = BoostConfig::new(GeneratorSpec::Histogram {
        grid: None,
        cells: 32,
        alpha: 1e-9,
        max_bins: Some(60),
    });
    cfg.rounds = 6;
    cfg.seed = 3;
    cfg.discriminator = bins_disc();
    cfg.minority = d.indices_of_mode(1);
    cfg.reference = Some(ReferenceDensity::Grid { grid: None, cells: 32 });
    let run = run_empirical(&d.points, &cfg).unwrap();
    for r in &run.trace.records {
        let eps = r.epsilon_prime.unwrap();
        let lam = r.lambda_min.unwrap();
        assert!((0.0..=1.0).contains(&eps));
        assert!((0.0..=1.0).contains(&lam));
        assert!(r.lambda_mean.unwrap() >= lam);
        assert!(r.minority_ratio.unwrap() > 0.0);
        assert!(r.tv_gen_vs_pt.unwrap() <= 1.0);
    }
    let rep = empirical_psi(&run.mixture, &d.points, &GridSpec::bounding(&d.points, 32, 0.05).unwrap()).unwrap();
    assert_eq!(rep.ratios.len(), d.len());
}

#[test]
fn trace_and_dataset_formats() {
    let d = make_gauss_grid(3, 5.0, 0.05, 30, 1).unwrap();
    let mut buf = Vec::new();
    write_dataset(&mut buf, &d.points, Some(&d.mode_ids)).unwrap();
    let back = read_dataset(&buf[..]).unwrap();
    assert_eq!(back.points, d.points);
    assert_eq!(back.mode_ids.as_deref(), Some(&d.mode_ids[..]));

    let mut cfg = BoostConfig::new(GeneratorSpec::Kde { bandwidth: 0.5 });
    cfg.rounds = 2;
    cfg.discriminator = bins_disc();
    let run = run_empirical(&d.points, &cfg).unwrap();
    let text = String::from_utf8(trace_bytes(&run.trace)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "round,log2_W,n_doubled,tv_gen_vs_pt,minority_ratio,epsilon_prime,lambda_min"
    );
    assert_eq!(TRACE_HEADER.join(","), "round,log2_W,n_doubled,tv_gen_vs_pt,minority_ratio,epsilon_prime,lambda_min");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 7);
    assert_eq!(first[0], "1");
    assert_eq!(first[1], "0");
    // KDE has no measured TV and no reference was configured.
    assert_eq!(&first[3..], &["", "", "", ""]);
}

#[test]
fn config_errors() {
    let d = make_gauss_grid(3, 5.0, 0.05, 30, 1).unwrap();
    let mut cfg = BoostConfig::new(GeneratorSpec::Kde { bandwidth: 0.5 });
    cfg.rounds = 0;
    assert!(matches!(run_empirical(&d.points, &cfg), Err(Error::Config(_))));
    cfg.rounds = 2;
    cfg.minority = vec![1000];
    assert!(matches!(run_empirical(&d.points, &cfg), Err(Error::Config(_))));
    let bad: Result<BoostConfig, _> = serde_json::from_str(r#"{"generator": {"kind": "kde"}, "roundz": 3}"#);
    assert!(bad.is_err());
    let ok: BoostConfig = serde_json::from_str(r#"{"generator": {"kind": "gmm", "k": 2}}"#).unwrap();
    assert_eq!(ok.rounds, 24);
    assert_eq!(ok.delta, 0.25);
}
