//! Coverage definitions, coverage measurement on mixtures, and closed-form
//! coverage bounds.

use std::f64::consts::LN_2;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::boost::{GeneratorMixture, RoundTrace};
use crate::dist::{log2_sum_exp2, sq_dist, AnalyticDensity, DiscreteDistribution, GridSpec, Point};
use crate::error::{Error, Result};
use crate::generators::{KdeGenerator, WeakGenerator};

/// Every scalar the bound formulas take.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub delta: f64,
    pub gamma: f64,
    pub eta: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub epsilon_prime: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default)]
    pub delta_prime: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl TheoryParams {
    pub fn new(delta: f64, gamma: f64, eta: f64) -> Self {
        TheoryParams {
            delta,
            gamma,
            eta,
            epsilon: 0.0,
            epsilon_prime: 0.0,
            lambda: 1.0,
            delta_prime: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("epsilon", self.epsilon),
            ("epsilon_prime", self.epsilon_prime),
            ("lambda", self.lambda),
            ("delta_prime", self.delta_prime.unwrap_or(self.delta)),
        ];
        match unit.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
            Some((name, v)) => Err(Error::config(format!("{name} = {v} is outside [0, 1]"))),
            None => Ok(()),
        }
    }
}

/// A bound value with a flag for the non-informative (≤ 0) case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub vacuous: bool,
}

impl Bound {
    pub fn of(value: f64) -> Self {
        Bound {
            value,
            vacuous: value <= 0.0,
        }
    }
}

pub fn is_delta_covered(g: f64, p: f64, delta: f64) -> bool {
    g >= delta * p
}

/// G(S)/P(S).
pub fn subset_cover_ratio(g_mass: f64, p_mass: f64) -> Result<f64> {
    if p_mass <= 0.0 {
        return Err(Error::UndefinedSubset);
    }
    Ok(g_mass / p_mass)
}

/// Fraction of Q-mass that G δ-covers under P, for a discrete Q.
pub fn delta_beta_exact(
    g: &dyn Fn(&[f64]) -> f64,
    p: &dyn Fn(&[f64]) -> f64,
    q: &DiscreteDistribution,
    delta: f64,
) -> f64 {
    q.support()
        .iter()
        .zip(q.mass())
        .filter(|(x, _)| is_delta_covered(g(x), p(x), delta))
        .map(|(_, m)| m)
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Monte-Carlo version of [`delta_beta_exact`] over draws from a sampler.
pub fn delta_beta_monte_carlo(
    g: &dyn Fn(&[f64]) -> f64,
    p: &dyn Fn(&[f64]) -> f64,
    q: &dyn WeakGenerator,
    delta: f64,
    n_samples: usize,
    rng: &mut dyn RngCore,
) -> MonteCarloEstimate {
    let draws = q.sample(n_samples, rng);
    let hits = draws.iter().filter(|x| is_delta_covered(g(x), p(x), delta)).count();
    let n = n_samples.max(1) as f64;
    let value = hits as f64 / n;
    MonteCarloEstimate {
        value,
        std_error: (value * (1.0 - value) / n).sqrt(),
        samples: n_samples,
    }
}

/// Analytic β for 1D analytic G, P, Q: Q-mass of the set {g ≥ δp}, integrated
/// on a grid with the trapezoid rule.
pub fn delta_beta_analytic_1d(
    g: &AnalyticDensity,
    p: &AnalyticDensity,
    q: &AnalyticDensity,
    delta: f64,
    grid: &GridSpec,
) -> Result<f64> {
    if grid.dim() != 1 {
        return Err(Error::Unsupported("1D only".into()));
    }
    let nodes = grid.nodes(0);
    let w = grid.trapezoid_weights(0);
    let uncovered: f64 = nodes
        .iter()
        .zip(&w)
        .filter(|(x, _)| !is_delta_covered(g.pdf(&[**x]), p.pdf(&[**x]), delta))
        .map(|(x, w)| q.pdf(&[*x]) * w)
        .sum();
    Ok(1.0 - uncovered)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstSubset {
    pub indices: Vec<usize>,
    pub ratio: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub psi_hat: f64,
    pub worst_subset: WorstSubset,
    pub ratios: Vec<f64>,
}

/// ψ̂ = min over the support of g*(x)/p(x), with the worst subset of at least
/// `mass_lb` target mass.
pub fn pointwise_psi(
    mixture: &GeneratorMixture,
    target: &DiscreteDistribution,
    mass_lb: f64,
) -> Result<CoverageReport> {
    let g = mixture.pdf_many(target.support());
    coverage_report(&g, &target.densities(), target.mass(), mass_lb)
}

/// Builds a report from mixture densities `g`, target densities `p` and target
/// masses at the same points.
pub fn coverage_report(g: &[f64], p: &[f64], mass: &[f64], mass_lb: f64) -> Result<CoverageReport> {
    if g.len() != p.len() || g.len() != mass.len() || g.is_empty() {
        return Err(Error::contract("coverage inputs must be aligned and non-empty"));
    }
    let ratios: Vec<f64> = g
        .iter()
        .zip(p)
        .map(|(gv, pv)| if *pv > 0.0 { gv / pv } else { f64::INFINITY })
        .collect();
    let psi_hat = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = worst_subset(&ratios, mass, mass_lb)?;
    Ok(CoverageReport {
        psi_hat,
        worst_subset: worst,
        ratios,
    })
}

/// ψ̂ on an empirical sample, with p replaced by the histogram density of the
/// sample on `grid`.
pub fn empirical_psi(mixture: &GeneratorMixture, points: &[Point], grid: &GridSpec) -> Result<CoverageReport> {
    let p = crate::boost::grid_density(grid, points);
    let g = mixture.pdf_many(points);
    let n = points.len() as f64;
    coverage_report(&g, &p, &vec![1.0 / n; points.len()], 1.0 / n)
}

/// min over grid nodes of g(x)/p(x) for a mixture against an analytic target.
pub fn analytic_psi(g: &dyn Fn(&[f64]) -> f64, p: &AnalyticDensity, grid: &GridSpec) -> Result<f64> {
    if grid.dim() != p.dim() {
        return Err(Error::contract("grid and density dimensions differ"));
    }
    let mut best = f64::INFINITY;
    let n = grid.cells + 1;
    let total = n.pow(grid.dim() as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut x = vec![0.0; grid.dim()];
        for k in (0..grid.dim()).rev() {
            x[k] = grid.lo[k] + (rem % n) as f64 * grid.width(k);
            rem /= n;
        }
        let pv = p.pdf(&x);
        if pv > 0.0 {
            best = best.min(g(&x) / pv);
        }
    }
    Ok(best)
}

/// Prefix search over points sorted by ascending ratio: among prefixes with
/// cumulative mass ≥ `mass_lb`, the one with the smallest G(S)/P(S).
pub fn worst_subset(ratios: &[f64], mass: &[f64], mass_lb: f64) -> Result<WorstSubset> {
    if !(mass_lb > 0.0 && mass_lb <= 1.0 + 1e-12) {
        return Err(Error::config("mass lower bound must be in (0, 1]"));
    }
    let mut order: Vec<usize> = (0..ratios.len()).filter(|&i| mass[i] > 0.0).collect();
    order.sort_by(|&a, &b| ratios[a].total_cmp(&ratios[b]).then(a.cmp(&b)));
    let mut best: Option<(usize, f64, f64)> = None;
    let (mut pm, mut gm) = (0.0, 0.0);
    for (k, &i) in order.iter().enumerate() {
        pm += mass[i];
        gm += ratios[i] * mass[i];
        if pm >= mass_lb - 1e-12 {
            let r = gm / pm;
            if best.is_none_or(|(_, br, _)| r < br) {
                best = Some((k + 1, r, pm));
            }
        }
    }
    let (len, ratio, m) = best.ok_or(Error::UndefinedSubset)?;
    let mut indices = order[..len].to_vec();
    indices.sort_unstable();
    Ok(WorstSubset {
        indices,
        ratio,
        mass: m,
    })
}

/// Exhaustive minimum of G(S)/P(S) over all subsets with P(S) ≥ `mass_lb`.
pub fn worst_subset_exhaustive(ratios: &[f64], mass: &[f64], mass_lb: f64) -> Result<WorstSubset> {
    let n = ratios.len();
    if n > 24 {
        return Err(Error::Unsupported("exhaustive search is limited to 24 points".into()));
    }
    let mut best: Option<(u32, f64, f64)> = None;
    for s in 1u32..(1u32 << n) {
        let (mut pm, mut gm) = (0.0, 0.0);
        for i in 0..n {
            if s >> i & 1 == 1 {
                pm += mass[i];
                gm += ratios[i] * mass[i];
            }
        }
        if pm > 0.0 && pm >= mass_lb - 1e-12 {
            let r = gm / pm;
            if best.is_none_or(|(_, br, _)| r < br) {
                best = Some((s, r, pm));
            }
        }
    }
    let (s, ratio, m) = best.ok_or(Error::UndefinedSubset)?;
    Ok(WorstSubset {
        indices: (0..n).filter(|i| s >> i & 1 == 1).collect(),
        ratio,
        mass: m,
    })
}

pub fn lemma1_bound(delta: f64, gamma: f64) -> f64 {
    1.0 - 2.0 * delta - gamma
}

pub fn lemma2_bound(delta: f64, epsilon: f64, eta: f64) -> f64 {
    (1.0 - epsilon / LN_2 - eta) * delta
}

pub fn theorem1_bound(delta: f64, gamma: f64, eta: f64) -> f64 {
    (1.0 - (gamma + 2.0 * delta) / LN_2 - eta) * delta
}

pub fn imperfect_disc_bound(p: &TheoryParams) -> f64 {
    let dp = p.delta_prime.unwrap_or(p.delta);
    (1.0 - (p.gamma + 2.0 * p.delta + p.epsilon_prime) / LN_2 - p.eta) * dp * p.lambda
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalDelta {
    pub delta: f64,
    /// The unclamped formula left [0, 0.5].
    pub clamped: bool,
}

/// The δ maximizing the theorem bound, clamped to [0, 0.5].
pub fn optimal_delta(gamma: f64, eta: f64) -> OptimalDelta {
    let raw = ((1.0 - eta) * LN_2 - gamma) / 4.0;
    let delta = raw.clamp(0.0, 0.5);
    OptimalDelta {
        delta,
        clamped: delta != raw,
    }
}

pub fn game_bound(delta: f64, gamma: f64) -> f64 {
    (1.0 - 2.0 * delta - gamma) * delta
}

/// c·T·log2|G|/ε.
pub fn generalization_sample_size(epsilon: f64, rounds: f64, log2_family_size: f64, c: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) || rounds < 1.0 || log2_family_size <= 0.0 || c <= 0.0 {
        return Err(Error::config(
            "need epsilon in (0, 1], rounds >= 1, log2 family size > 0 and c > 0",
        ));
    }
    Ok(c * rounds * log2_family_size / epsilon)
}

/// Number of modes with more than zero and at least `frac·N/M` of the samples
/// within 3σ0 of their center.
pub fn mode_coverage_count(samples: &[Point], centers: &[Point], sigma0: f64, frac: f64) -> usize {
    mode_hits(samples, centers, sigma0)
        .iter()
        .filter(|&&c| c > 0 && c as f64 >= frac * samples.len() as f64 / centers.len() as f64)
        .count()
}

/// Sample counts within 3σ0 of each center.
pub fn mode_hits(samples: &[Point], centers: &[Point], sigma0: f64) -> Vec<usize> {
    let r2 = (3.0 * sigma0).powi(2);
    centers
        .iter()
        .map(|c| samples.iter().filter(|x| sq_dist(x, c) <= r2).count())
        .collect()
}

/// Whether a single mode is covered by the counting rule.
pub fn mode_covered(samples: &[Point], center: &Point, sigma0: f64, n_modes: usize, frac: f64) -> bool {
    let hits = mode_hits(samples, std::slice::from_ref(center), sigma0)[0];
    hits > 0 && hits as f64 >= frac * samples.len() as f64 / n_modes as f64
}

/// Share of total weight held by `minority` in each round, rebuilt from the
/// trace's initial weights and doubling flags.
pub fn minority_weight_ratio(trace: &RoundTrace, minority: &[usize]) -> Result<Vec<f64>> {
    let n = trace.initial_log2_weights.len();
    if let Some(i) = minority.iter().find(|&&i| i >= n) {
        return Err(Error::config(format!("minority index {i} out of range")));
    }
    let mut lw = trace.initial_log2_weights.clone();
    let mut out = Vec::with_capacity(trace.flags.len());
    for flags in &trace.flags {
        let total = log2_sum_exp2(&lw);
        let sub: Vec<f64> = minority.iter().map(|&i| lw[i]).collect();
        out.push((log2_sum_exp2(&sub) - total).exp2());
        for (w, f) in lw.iter_mut().zip(flags) {
            if *f {
                *w += 1.0;
            }
        }
    }
    Ok(out)
}

/// Mean natural-log KDE density of `eval` under a Gaussian KDE on `model_samples`.
pub fn kde_mean_loglik(model_samples: &[Point], eval: &[Point], bandwidth: f64) -> Result<f64> {
    if model_samples.is_empty() || eval.is_empty() {
        return Err(Error::config("KDE likelihood needs model samples and evaluation points"));
    }
    let kde = KdeGenerator::from_samples(model_samples.to_vec(), bandwidth)?;
    use rayon::prelude::*;
    let lls: Vec<f64> = eval.par_iter().map(|x| kde.ln_pdf(x)).collect();
    Ok(lls.iter().sum::<f64>() / eval.len() as f64)
}
