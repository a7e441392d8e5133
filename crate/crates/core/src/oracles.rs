//! Randomized and exhaustive checks of the coverage bounds on small discrete
//! instances. Every check is deterministic per seed; trials run in parallel
//! and are reduced in trial order.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::boost::{run_exact, BoostConfig};
use crate::bounds::{lemma1_bound, theorem1_bound, worst_subset, worst_subset_exhaustive};
use crate::dist::{DiscreteDistribution, Point, WeightedDataset};
use crate::error::Result;
use crate::generators::{adversarial_make, greedy_uncover_region, GeneratorSpec, RegionSelector, WeakGenerator};
use crate::rng::{self, Purpose};

/// Slack allowed on every theorem check.
pub const SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub suite: String,
    pub trials: usize,
    pub violations: usize,
    /// Smallest (observed − bound) over all trials; negative means a violation.
    pub worst_margin: f64,
    pub seed: u64,
    /// The first violating instance, verbatim.
    pub first_violation: Option<Value>,
    /// Suite-specific extras.
    #[serde(default)]
    pub extra: serde_json::Map<String, Value>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

struct TrialOutcome {
    margin: f64,
    violated: bool,
    instance: Value,
}

fn collect(suite: &str, seed: u64, outcomes: Vec<TrialOutcome>) -> OracleReport {
    let trials = outcomes.len();
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut first = None;
    for o in outcomes {
        worst = worst.min(o.margin);
        if o.violated {
            violations += 1;
            if first.is_none() {
                first = Some(o.instance);
            }
        }
    }
    OracleReport {
        suite: suite.to_string(),
        trials,
        violations,
        worst_margin: if trials == 0 { 0.0 } else { worst },
        seed,
        first_violation: first,
        extra: serde_json::Map::new(),
    }
}

/// Flat-Dirichlet masses over `k` points.
pub fn random_simplex<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

fn line_support(k: usize) -> Vec<Point> {
    (0..k).map(|i| Point::scalar(i as f64)).collect()
}

/// Lemma-1 style trial: random P, Q; G within TV γ of Q; β = Q-mass δ-covered
/// by G under P; violation when β < threshold − slack.
fn lemma1_trial(trial: usize, k: usize, delta: f64, gamma: f64, threshold: f64, seed: u64) -> Result<TrialOutcome> {
    let mut r = rng::stream(seed, trial as u64, Purpose::Trial);
    let p = random_simplex(k, &mut r);
    let q = random_simplex(k, &mut r);
    let qd = DiscreteDistribution::new(line_support(k), q.clone())?;
    let region = if trial % 2 == 0 {
        greedy_uncover_region(&q, Some(&p), gamma)
    } else {
        let sel_seed: u64 = r.random();
        RegionSelector::Random.indices(&qd, None, delta, gamma, sel_seed)?
    };
    let (g, tv) = adversarial_make(&qd, gamma, &region)?;
    let beta: f64 = (0..k).filter(|&i| g.mass()[i] >= delta * p[i]).map(|i| q[i]).sum();
    let margin = beta - threshold;
    Ok(TrialOutcome {
        margin,
        violated: beta < threshold - SLACK,
        instance: json!({
            "trial": trial, "p": p, "q": q, "g": g.mass(), "region": region,
            "tv": tv, "beta": beta, "threshold": threshold
        }),
    })
}

fn lemma1_suite(
    suite: &str,
    trials: usize,
    k: usize,
    delta: f64,
    gamma: f64,
    threshold: f64,
    seed: u64,
) -> Result<OracleReport> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| lemma1_trial(t, k, delta, gamma, threshold, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = collect(suite, seed, outcomes);
    rep.extra.insert("delta".into(), json!(delta));
    rep.extra.insert("gamma".into(), json!(gamma));
    rep.extra.insert("threshold".into(), json!(threshold));
    rep.extra.insert("support_size".into(), json!(k));
    Ok(rep)
}

/// Certifies Pr_Q[g ≥ δp] ≥ 1 − 2δ − γ whenever TV(G, Q) ≤ γ.
pub fn check_lemma1(trials: usize, support_size: usize, delta: f64, gamma: f64, seed: u64) -> Result<OracleReport> {
    lemma1_suite("lemma1", trials, support_size, delta, gamma, lemma1_bound(delta, gamma), seed)
}

/// The same trials against a threshold raised by `raise`; used to show the
/// check can fail.
pub fn check_lemma1_tightened(
    trials: usize,
    support_size: usize,
    delta: f64,
    gamma: f64,
    raise: f64,
    seed: u64,
) -> Result<OracleReport> {
    let t = lemma1_bound(delta, gamma) + raise;
    lemma1_suite("lemma1_tightened", trials, support_size, delta, gamma, t, seed)
}

/// δ = 1/4, γ = 0.1 against the constant 0.4.
pub fn check_eq3(trials: usize, seed: u64) -> Result<OracleReport> {
    lemma1_suite("eq3", trials, 10, 0.25, 0.1, 0.4, seed)
}

/// Largest doubling set with round mass at most ε, chosen greedily by
/// descending mass.
fn knapsack_flags(mass: &[f64], eps: f64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..mass.len()).collect();
    order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));
    let mut flags = vec![false; mass.len()];
    let mut acc = 0.0;
    for i in order {
        if acc + mass[i] <= eps + 1e-15 {
            acc += mass[i];
            flags[i] = true;
        }
    }
    flags
}

/// Certifies log2 W_{T+1} ≤ T·log2(1+ε) when every round doubles at most ε of
/// the round mass, and the per-round identity W_{t+1} = W_t·(1 + doubled mass).
pub fn check_weight_dynamics(
    trials: usize,
    support_size: usize,
    rounds: usize,
    delta: f64,
    eps: f64,
    seed: u64,
) -> Result<OracleReport> {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(TrialOutcome, f64)> {
            let mut r = rng::stream(seed, trial as u64, Purpose::Trial);
            let p = random_simplex(support_size, &mut r);
            let target = DiscreteDistribution::new(line_support(support_size), p.clone())?;
            let mut ws = WeightedDataset::init_exact(&target);
            let mut identity_err: f64 = 0.0;
            for _ in 0..rounds {
                let mass = ws.masses();
                let flags = knapsack_flags(&mass, eps);
                let doubled: f64 = mass.iter().zip(&flags).filter(|(_, f)| **f).map(|(m, _)| m).sum();
                let next = ws.double_weights(&flags)?;
                let expected = ws.log2_total() + doubled.ln_1p() / std::f64::consts::LN_2;
                identity_err = identity_err.max((next.log2_total() - expected).abs());
                ws = next;
            }
            let limit = rounds as f64 * eps.ln_1p() / std::f64::consts::LN_2;
            let margin = limit - ws.log2_total();
            Ok((
                TrialOutcome {
                    margin,
                    violated: ws.log2_total() > limit + 1e-9 || identity_err > 1e-9,
                    instance: json!({
                        "trial": trial, "p": p, "log2_w_final": ws.log2_total(),
                        "limit": limit, "identity_error": identity_err
                    }),
                },
                identity_err,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_identity = outcomes.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    let mut rep = collect("dynamics", seed, outcomes.into_iter().map(|(o, _)| o).collect());
    rep.extra.insert("rounds".into(), json!(rounds));
    rep.extra.insert("epsilon".into(), json!(eps));
    rep.extra.insert("delta".into(), json!(delta));
    rep.extra.insert("max_identity_error".into(), json!(max_identity));
    Ok(rep)
}

/// Runs the exact loop with an adversarial generator at TV budget γ and checks
/// G*(S) ≥ bound·P(S) on every subset with P(S) ≥ 2^(−ηT). Targets alternate
/// between uniform and random. On uniform targets the prefix worst-subset
/// search must match exhaustive enumeration.
pub fn check_theorem1_exhaustive(
    support_size: usize,
    rounds: usize,
    delta: f64,
    gamma: f64,
    eta: f64,
    trials: usize,
    seed: u64,
) -> Result<OracleReport> {
    if support_size > 16 {
        return Err(crate::error::Error::config("exhaustive check supports at most 16 points"));
    }
    let bound = theorem1_bound(delta, gamma, eta);
    let mass_lb = (-eta * rounds as f64).exp2();
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<(TrialOutcome, bool, f64)> {
            let mut r = rng::stream(seed, trial as u64, Purpose::Trial);
            let uniform = trial % 2 == 0;
            let p = if uniform {
                vec![1.0 / support_size as f64; support_size]
            } else {
                random_simplex(support_size, &mut r)
            };
            let target = DiscreteDistribution::from_weights(line_support(support_size), &p)?;
            let mut cfg = BoostConfig::new(GeneratorSpec::Adversarial {
                gamma,
                region: RegionSelector::GreedyUncover,
            });
            cfg.rounds = rounds;
            cfg.delta = delta;
            cfg.eta = eta;
            cfg.seed = r.random();
            let run = run_exact(&target, &cfg)?;
            let g: Vec<f64> = target.support().iter().map(|x| run.mixture.pdf(x)).collect();
            let pm = target.mass();

            let mut margin = f64::INFINITY;
            let mut worst_set = 0u32;
            for s in 1u32..(1u32 << support_size) {
                let (mut ps, mut gs) = (0.0, 0.0);
                for i in 0..support_size {
                    if s >> i & 1 == 1 {
                        ps += pm[i];
                        gs += g[i];
                    }
                }
                if ps >= mass_lb {
                    let m = gs - bound * ps;
                    if m < margin {
                        margin = m;
                        worst_set = s;
                    }
                }
            }
            let ratios: Vec<f64> = g.iter().zip(pm).map(|(a, b)| a / b).collect();
            let prefix = worst_subset(&ratios, pm, mass_lb)?;
            let exhaustive = worst_subset_exhaustive(&ratios, pm, mass_lb)?;
            let mismatch = uniform && (prefix.ratio - exhaustive.ratio).abs() > 1e-12;
            let gap = prefix.ratio - exhaustive.ratio;
            let max_tv = run.trace.max_tv().unwrap_or(0.0);
            Ok((
                TrialOutcome {
                    margin,
                    violated: margin < -SLACK,
                    instance: json!({
                        "trial": trial, "p": pm, "mixture_mass": g, "worst_subset_bits": worst_set,
                        "bound": bound, "max_tv": max_tv, "seed": cfg.seed
                    }),
                },
                mismatch,
                gap,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mismatches = outcomes.iter().filter(|(_, m, _)| *m).count();
    let max_gap = outcomes.iter().map(|(_, _, g)| *g).fold(0.0, f64::max);
    let mut rep = collect("theorem1", seed, outcomes.into_iter().map(|(o, _, _)| o).collect());
    rep.violations += mismatches;
    rep.extra.insert("bound".into(), json!(bound));
    rep.extra.insert("vacuous".into(), json!(bound <= 0.0));
    rep.extra.insert("mass_lower_bound".into(), json!(mass_lb));
    rep.extra.insert("prefix_mismatches".into(), json!(mismatches));
    rep.extra.insert("max_prefix_gap".into(), json!(max_gap));
    Ok(rep)
}
