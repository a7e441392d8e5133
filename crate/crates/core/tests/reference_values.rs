//! Known reference values: the three-mode 1D example, the KL table
//! example, and the bound formula anchors.

use modecover::bounds::{
    analytic_psi, delta_beta_analytic_1d, game_bound, imperfect_disc_bound, lemma1_bound, optimal_delta,
    theorem1_bound, TheoryParams,
};
use modecover::divergence::{divergence_numeric, mle_select, DivergenceKind, LogBase};
use modecover::synth::{fig1_reference, fig1_target, fig6_instance};
use modecover::{AnalyticDensity, GridSpec};
use rand::{Rng, SeedableRng};
use statrs::distribution::{ContinuousCDF, Normal};

fn wide_grid() -> GridSpec {
    GridSpec::line(-20.0, 20.0, 4000).unwrap()
}

/// Independent oracle: mass of a unit-variance 1D mixture on [lo, hi] via
/// the statrs normal CDF.
fn mixture_interval(comps: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    comps
        .iter()
        .map(|&(w, m)| {
            let n = Normal::new(m, 1.0).unwrap();
            // Use survival functions on the far side to keep tail precision.
            let upper = if lo > m { n.sf(lo) - n.sf(hi) } else { n.cdf(hi) - n.cdf(lo) };
            w * upper
        })
        .sum()
}

fn two_sided(d: &AnalyticDensity) -> f64 {
    d.interval_probability(&[(6.0, 14.0), (-14.0, -6.0)]).unwrap()
}

#[test]
fn three_mode_tv_and_kl() {
    let p = fig1_target();
    let q = fig1_reference();
    let g = wide_grid();
    let tv = divergence_numeric(&q, &p, DivergenceKind::Tv, &g, LogBase::Two).unwrap();
    assert!((tv.value - 0.100).abs() <= 0.005, "tv {}", tv.value);
    let kl = divergence_numeric(&q, &p, DivergenceKind::Kl, &g, LogBase::Two).unwrap();
    assert!(kl.value <= 0.16, "kl {}", kl.value);
    assert!((kl.value - 0.15200).abs() < 1e-4);
    assert!(!kl.saturated);
}

#[test]
fn three_mode_quadrature_converges() {
    let p = fig1_target();
    let q = fig1_reference();
    let g = wide_grid();
    for kind in [DivergenceKind::Tv, DivergenceKind::Kl] {
        let a = divergence_numeric(&q, &p, kind, &g, LogBase::Two).unwrap().value;
        let b = divergence_numeric(&q, &p, kind, &g.refined(), LogBase::Two).unwrap().value;
        assert!((a - b).abs() < 1e-4, "{kind:?}: {a} vs {b}");
    }
}

#[test]
fn three_mode_interval_masses() {
    let p = fig1_target();
    let q = fig1_reference();
    let pm = two_sided(&p);
    assert!((pm - 0.100).abs() <= 0.005, "{pm}");
    let comps = [(0.9, 0.0), (0.05, 10.0), (0.05, -10.0)];
    let oracle = mixture_interval(&comps, 6.0, 14.0) + mixture_interval(&comps, -14.0, -6.0);
    assert!((pm - oracle).abs() < 1e-12, "{pm} vs {oracle}");
    assert!((pm - 0.099_993_7).abs() < 1e-7);

    let qm = two_sided(&q);
    assert!(qm <= 1e-8, "{qm}");
    assert!((qm - 1.973e-9).abs() < 1e-11, "{qm}");
}

#[test]
fn three_mode_beta_at_quarter() {
    // G = Q = N(0,1) covers nearly all of Q's mass at δ = 1/4.
    let p = fig1_target();
    let q = fig1_reference();
    let beta = delta_beta_analytic_1d(&q, &p, &q, 0.25, &wide_grid()).unwrap();
    assert!(1.0 - beta < 1e-7, "{beta}");
    assert!(1.0 - beta > 0.0);
}

#[test]
fn kl_table() {
    let (p, g1, g2) = fig6_instance();
    let g = wide_grid();
    let kl = |a: &AnalyticDensity, b: &AnalyticDensity| {
        divergence_numeric(a, b, DivergenceKind::Kl, &g, LogBase::Two).unwrap().value
    };
    let table = [
        (kl(&p, &g1), 1.28),
        (kl(&p, &g2), 1.40),
        (kl(&g1, &p), 0.029),
        (kl(&g2, &p), 2.81),
    ];
    for (got, want) in table {
        assert!((got - want).abs() <= 0.05, "{got} vs {want}");
    }
    // Tighter check against values from an independent trapezoid evaluation.
    let oracle = [1.28125, 1.39581, 0.029146, 2.81003];
    for ((got, _), want) in table.iter().zip(oracle) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
}

#[test]
fn mle_picks_mode_collapsed_candidate() {
    let (p, g1, g2) = fig6_instance();
    assert_eq!(mle_select(&p, &[g1.clone(), g2.clone()], &wide_grid()).unwrap(), 0);
    assert_eq!(mle_select(&p, &[g2, g1], &wide_grid()).unwrap(), 1);
}

#[test]
fn subset_ratio_of_collapsed_candidate() {
    let (p, g1, g2) = fig6_instance();
    let pm = two_sided(&p);
    assert!((pm - 0.019_998_7).abs() < 1e-6, "{pm}");
    let ratio = two_sided(&g1) / pm;
    assert!(ratio >= 1e-7 / 3.0 && ratio <= 3e-7, "{ratio}");
    assert!((ratio - 9.87e-8).abs() < 1e-9);
    // The spread-out candidate covers everywhere.
    let psi = analytic_psi(&|x| g2.pdf(x), &p, &GridSpec::line(-14.0, 14.0, 2800).unwrap()).unwrap();
    assert!(psi > 1.0 / 3.0, "{psi}");
    assert!((psi - 0.346_939).abs() < 1e-5, "{psi}");
}

#[test]
fn bound_anchors_exact() {
    assert_eq!(lemma1_bound(0.25, 0.1), 0.4);
    assert_eq!(game_bound(0.25, 0.0), 0.125);
}

#[test]
fn bound_examples() {
    let ln2 = std::f64::consts::LN_2;
    assert!((theorem1_bound(0.25, 0.1, 0.01) - (1.0 - 0.6 / ln2 - 0.01) * 0.25).abs() < 1e-15);
    assert!((theorem1_bound(0.25, 0.1, 0.01) - 0.0311).abs() < 1e-4);
    let od = optimal_delta(0.1, 0.01);
    assert!(!od.clamped);
    assert!((od.delta - ((0.99 * ln2 - 0.1) / 4.0)).abs() < 1e-15);
    assert!((od.delta - 0.1466).abs() < 1e-4);
    assert!((theorem1_bound(0.1466, 0.1, 0.01) - 0.061_973).abs() < 1e-6);

    let mut tp = TheoryParams::new(0.2, 0.05, 0.01);
    tp.epsilon_prime = 0.2;
    tp.delta_prime = Some(0.2);
    tp.lambda = 0.9;
    let want = (1.0 - 0.65 / ln2 - 0.01) * 0.2 * 0.9;
    assert!((imperfect_disc_bound(&tp) - want).abs() < 1e-15);
    assert!((imperfect_disc_bound(&tp) - 0.009_404_6).abs() < 1e-7);
}

#[test]
fn optimal_delta_matches_scan() {
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 50 {
        let gamma = r.random_range(0.0..0.3);
        let eta = r.random_range(0.0..0.3);
        let od = optimal_delta(gamma, eta);
        if od.clamped {
            continue;
        }
        // Dense scan, then ternary refinement of the best bracket.
        let n = 100_000;
        let (mut best, mut best_v) = (0.0, f64::NEG_INFINITY);
        for i in 0..=n {
            let d = 0.5 * i as f64 / n as f64;
            let v = theorem1_bound(d, gamma, eta);
            if v > best_v {
                best = d;
                best_v = v;
            }
        }
        let (mut lo, mut hi) = ((best - 0.5 / n as f64).max(0.0), (best + 0.5 / n as f64).min(0.5));
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if theorem1_bound(m1, gamma, eta) < theorem1_bound(m2, gamma, eta) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let argmax = 0.5 * (lo + hi);
        assert!((argmax - od.delta).abs() < 1e-6, "γ={gamma} η={eta}: {argmax} vs {}", od.delta);
        checked += 1;
    }
}

#[test]
fn game_bound_argmax() {
    for gamma in [0.0, 0.1, 0.3, 0.5] {
        let want = (1.0 - gamma) / 4.0;
        let n = 200_000;
        let best = (0..=n)
            .map(|i| 0.5 * i as f64 / n as f64)
            .max_by(|a, b| game_bound(*a, gamma).partial_cmp(&game_bound(*b, gamma)).unwrap())
            .unwrap();
        assert!((best - want).abs() < 1e-5, "γ={gamma}: {best}");
    }
}
