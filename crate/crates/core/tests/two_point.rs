//! The two-point A/B reweighting example, in exact and empirical form.

use modecover::bounds::{delta_beta_exact, pointwise_psi};
use modecover::discriminator::{
    empirical_cover_test, epsilon_prime, train_discriminator, DiscriminatorSpec, FeatureSpec, IdealDiscriminator,
    LogisticConfig, RatioEstimator, DEFAULT_CLAMP,
};
use modecover::generators::{adversarial_make, PointMassGenerator, RegionSelector};
use modecover::{
    run_empirical, run_exact, BoostConfig, DiscreteDistribution, Generator, GeneratorSpec, Point, WeakGenerator,
    WeightedDataset,
};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};

type Q = Ratio<i64>;

fn a() -> Point {
    Point::scalar(0.0)
}
fn b() -> Point {
    Point::scalar(1.0)
}

fn target() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![a(), b()], vec![5.0 / 7.0, 2.0 / 7.0]).unwrap()
}

fn collapsed() -> DiscreteDistribution {
    DiscreteDistribution::new(vec![a(), b()], vec![1.0, 0.0]).unwrap()
}

fn seven_samples() -> Vec<Point> {
    let mut v = vec![a(); 5];
    v.extend([b(), b()]);
    v
}

/// Exact weight of each sample rebuilt from its doubling count: w0·2^d.
fn exact_weights(initial: &[Q], doublings: &[u32]) -> Vec<Q> {
    initial
        .iter()
        .zip(doublings)
        .map(|(w, &d)| *w * Q::from_integer(1i64 << d))
        .collect()
}

#[test]
fn collapsed_generator_from_adversary() {
    let (g, tv) = adversarial_make(&target(), 2.0 / 7.0, &[1]).unwrap();
    assert_eq!(g.mass(), &[1.0, 0.0]);
    assert!((tv - 2.0 / 7.0).abs() < 1e-15);
}

#[test]
fn exact_two_rounds() {
    let mut cfg = BoostConfig::new(GeneratorSpec::Schedule {
        rounds: vec![
            GeneratorSpec::Adversarial {
                gamma: 2.0 / 7.0,
                region: RegionSelector::Points { indices: vec![1] },
            },
            GeneratorSpec::Tabular,
        ],
    });
    cfg.rounds = 2;
    cfg.delta = 0.25;
    let run = run_exact(&target(), &cfg).unwrap();
    assert_eq!(run.trace.flags[0], vec![false, true]);
    assert_eq!(run.trace.records[0].n_doubled, 1);

    let init = [Q::new(5, 7), Q::new(2, 7)];
    let after_one: Vec<u32> = run.trace.flags[0].iter().map(|f| *f as u32).collect();
    let w = exact_weights(&init, &after_one);
    assert_eq!(w, vec![Q::new(5, 7), Q::new(4, 7)]);
    let total: Q = w.iter().sum();
    assert_eq!(w[0] / total, Q::new(5, 9));
    assert_eq!(w[1] / total, Q::new(4, 9));

    // Round-2 generator reproduces P_2.
    let g2 = run.mixture.generators()[1].masses_on(&target());
    assert!((g2[0] - 5.0 / 9.0).abs() < 1e-15 && (g2[1] - 4.0 / 9.0).abs() < 1e-15);

    // Mixture g*(B) = 2/9 ≥ δ·p(B); ψ̂ = min(1.0889, 0.7778).
    let gb = run.mixture.pdf(&b());
    assert!((gb - 2.0 / 9.0).abs() < 1e-15);
    assert!(gb >= 0.25 * 2.0 / 7.0);
    let rep = pointwise_psi(&run.mixture, &target(), 0.1).unwrap();
    assert!((rep.psi_hat - 7.0 / 9.0).abs() < 1e-12, "{}", rep.psi_hat);
    assert!((rep.ratios[0] - (1.0 + 5.0 / 9.0) / 2.0 * 7.0 / 5.0).abs() < 1e-12);
    assert_eq!(rep.worst_subset.indices, vec![1]);
}

#[test]
fn beta_of_collapsed_generator() {
    let g = PointMassGenerator::new(collapsed());
    let p = PointMassGenerator::new(target());
    let beta = delta_beta_exact(&|x| g.pdf(x), &|x| p.pdf(x), &target(), 0.25);
    assert!((beta - 5.0 / 7.0).abs() < 1e-15);
}

#[test]
fn ideal_discriminator_flags_exactly_b() {
    let ws = WeightedDataset::init_empirical(seven_samples()).unwrap();
    let round = ws.normalize().unwrap();
    let gen = Generator::PointMass(PointMassGenerator::new(collapsed()));
    let d = IdealDiscriminator::new(round, gen.clone(), DEFAULT_CLAMP);
    assert!((d.predict(&a()) - 5.0 / 12.0).abs() < 1e-15);
    assert!((d.ratio(&a()) - 1.4).abs() < 1e-12);
    assert_eq!(d.predict(&b()), 1.0 - DEFAULT_CLAMP);

    let flags = empirical_cover_test(&d, &ws, 0.25);
    assert_eq!(flags, vec![false, false, false, false, false, true, true]);
    let next = ws.double_weights(&flags).unwrap();
    let w = exact_weights(&[Q::new(1, 7); 7], next.doublings());
    let a_total: Q = w[..5].iter().sum();
    let b_total: Q = w[5..].iter().sum();
    assert_eq!(a_total, Q::new(5, 7));
    assert_eq!(b_total, Q::new(4, 7));
    assert_eq!(a_total / (a_total + b_total), Q::new(5, 9));

    // B is truly uncovered, so no flag is a false positive.
    let g: Vec<f64> = ws.points().iter().map(|x| gen.pdf(x)).collect();
    let p: Vec<f64> = ws.points().iter().map(|x| if x[0] == 0.0 { 5.0 / 7.0 } else { 2.0 / 7.0 }).collect();
    assert_eq!(epsilon_prime(&g, &p, &ws.masses(), &flags, 0.25), 0.0);
}

#[test]
fn empirical_loop_with_ideal_discriminator() {
    let mut cfg = BoostConfig::new(GeneratorSpec::Schedule {
        rounds: vec![
            GeneratorSpec::PointMass { table: collapsed() },
            GeneratorSpec::Tabular,
        ],
    });
    cfg.rounds = 2;
    cfg.discriminator = DiscriminatorSpec::Ideal { clamp: DEFAULT_CLAMP };
    let run = run_empirical(&seven_samples(), &cfg).unwrap();
    assert_eq!(run.trace.flags[0], vec![false, false, false, false, false, true, true]);
    assert_eq!(run.trace.records[0].n_doubled, 2);
    let m = run.trace.records[1].log2_w;
    assert!((m - (9.0f64 / 7.0).log2()).abs() < 1e-12);
}

/// Mean |D − p/(p+g)| over the two points for a logistic model trained on
/// `n` draws from P_1 against `n` draws from the collapsed generator,
/// averaged over a few seeds.
fn fit_error(n: usize) -> f64 {
    let cfg = LogisticConfig {
        features: FeatureSpec::Bins { grid: None, cells: 2 },
        ..LogisticConfig::default()
    };
    let pa = 5.0 / 7.0;
    let ideal_a = pa / (pa + 1.0);
    let ideal_b = 1.0 - DEFAULT_CLAMP;
    let seeds = 8;
    let mut total = 0.0;
    for seed in 0..seeds {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pos: Vec<Point> = (0..n).map(|_| if r.random::<f64>() < pa { a() } else { b() }).collect();
        let neg = vec![a(); n];
        let d = train_discriminator(&pos, &neg, &cfg, seed).unwrap();
        total += 0.5 * ((d.predict(&a()) - ideal_a).abs() + (d.predict(&b()) - ideal_b).abs());
    }
    total / seeds as f64
}

#[test]
fn logistic_discriminator_approaches_ideal() {
    let e3 = fit_error(1_000);
    let e4 = fit_error(10_000);
    assert!(e4 < e3, "{e4} !< {e3}");
}
