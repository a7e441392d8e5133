//! Logistic density-ratio estimation between the round distribution and the
//! round generator, the empirical doubling test, and discriminator diagnostics.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist::{sq_dist, DiscreteDistribution, GridSpec, Point, WeightedDataset};
use crate::error::{Error, Result};
use crate::generators::{Generator, PointMassGenerator, WeakGenerator, AUTO_GRID_PAD};
use crate::kmeans::{kmeanspp, lloyd};
use crate::rng::{self, Purpose};

pub const DEFAULT_CLAMP: f64 = 1e-6;
pub const DEFAULT_L2: f64 = 1e-4;

/// Anything that outputs D(x), the probability that x came from the round
/// distribution rather than the generator.
pub trait RatioEstimator {
    fn predict(&self, x: &[f64]) -> f64;

    /// Estimated g_t(x)/p_t(x) = 1/D(x) − 1.
    fn ratio(&self, x: &[f64]) -> f64 {
        1.0 / self.predict(x) - 1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FeatureSpec {
    /// Standardized coordinates plus a bias.
    Affine,
    /// Gaussian bumps at k-means centers of the pooled sample, plus a bias.
    Rbf {
        #[serde(default = "default_centers")]
        centers: usize,
    },
    /// One indicator per grid cell. Without a grid, a padded bounding box of the
    /// full dataset with `cells` per axis is used.
    Bins {
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default = "default_cells")]
        cells: usize,
    },
}

impl Default for FeatureSpec {
    fn default() -> Self {
        FeatureSpec::Rbf {
            centers: default_centers(),
        }
    }
}

fn default_centers() -> usize {
    64
}
fn default_cells() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimizerSpec {
    /// Damped Newton with backtracking line search.
    Newton {
        #[serde(default = "default_newton_iter")]
        max_iter: usize,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    /// Full-batch gradient descent on the mean loss; the step is halved whenever
    /// it would increase the loss.
    GradientDescent {
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default = "default_step_size")]
        step_size: f64,
    },
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec::Newton {
            max_iter: default_newton_iter(),
            tol: default_tol(),
        }
    }
}

fn default_newton_iter() -> usize {
    100
}
fn default_tol() -> f64 {
    1e-10
}
fn default_steps() -> usize {
    500
}
fn default_step_size() -> f64 {
    0.1
}
fn default_l2() -> f64 {
    DEFAULT_L2
}
fn default_clamp() -> f64 {
    DEFAULT_CLAMP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticConfig {
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default)]
    pub optimizer: OptimizerSpec,
    #[serde(default = "default_l2")]
    pub l2: f64,
    #[serde(default = "default_clamp")]
    pub clamp: f64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            features: FeatureSpec::default(),
            optimizer: OptimizerSpec::default(),
            l2: DEFAULT_L2,
            clamp: DEFAULT_CLAMP,
        }
    }
}

impl LogisticConfig {
    pub fn validate(&self) -> Result<()> {
        validate_clamp(self.clamp)?;
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(Error::config("discriminator.l2 must be >= 0"));
        }
        match &self.features {
            FeatureSpec::Rbf { centers } if *centers == 0 => {
                return Err(Error::config("discriminator.features.centers must be >= 1"))
            }
            FeatureSpec::Bins { grid, cells } => {
                if let Some(g) = grid {
                    g.validate()?;
                }
                if *cells < 2 {
                    return Err(Error::config("discriminator.features.cells must be >= 2"));
                }
            }
            _ => {}
        }
        match &self.optimizer {
            OptimizerSpec::Newton { max_iter, .. } if *max_iter == 0 => {
                Err(Error::config("discriminator.optimizer.max_iter must be >= 1"))
            }
            OptimizerSpec::GradientDescent { step_size, .. } if !(*step_size > 0.0) => {
                Err(Error::config("discriminator.optimizer.step_size must be positive"))
            }
            _ => Ok(()),
        }
    }
}

fn validate_clamp(clamp: f64) -> Result<()> {
    if !(clamp > 0.0 && clamp <= 0.01) {
        return Err(Error::config("discriminator.clamp must be in (0, 0.01]"));
    }
    Ok(())
}

/// Discriminator configuration for empirical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiscriminatorSpec {
    Logistic(LogisticConfig),
    /// D = p_t/(p_t + g_t) from the exact round masses and the generator pdf.
    /// Only meaningful when both are on the same measure (e.g. point-mass generators).
    Ideal {
        #[serde(default = "default_clamp")]
        clamp: f64,
    },
}

impl Default for DiscriminatorSpec {
    fn default() -> Self {
        DiscriminatorSpec::Logistic(LogisticConfig::default())
    }
}

impl DiscriminatorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DiscriminatorSpec::Logistic(c) => c.validate(),
            DiscriminatorSpec::Ideal { clamp } => validate_clamp(*clamp),
        }
    }

    /// Fixes the automatic bin grid once for a run.
    pub fn resolve(&self, points: &[Point]) -> Result<DiscriminatorSpec> {
        Ok(match self {
            DiscriminatorSpec::Logistic(c) => match &c.features {
                FeatureSpec::Bins { grid: None, cells } => {
                    let mut c = c.clone();
                    c.features = FeatureSpec::Bins {
                        grid: Some(GridSpec::bounding(points, *cells, AUTO_GRID_PAD)?),
                        cells: *cells,
                    };
                    DiscriminatorSpec::Logistic(c)
                }
                _ => self.clone(),
            },
            other => other.clone(),
        })
    }
}

/// Everything a trainer sees in one empirical round.
pub struct RoundData<'a> {
    pub round: usize,
    pub seed: u64,
    /// The exact round distribution over the (merged) dataset points.
    pub positives: &'a DiscreteDistribution,
    /// Draws from the round generator.
    pub negatives: &'a [Point],
    pub generator: &'a Generator,
    /// Dataset size n; positive weights are scaled to sum to n.
    pub n: usize,
}

pub trait DiscriminatorTrainer {
    fn train(&self, data: &RoundData<'_>) -> Result<TrainedDiscriminator>;
}

pub enum TrainedDiscriminator {
    Logistic(Discriminator),
    Ideal(IdealDiscriminator),
}

impl RatioEstimator for TrainedDiscriminator {
    fn predict(&self, x: &[f64]) -> f64 {
        match self {
            TrainedDiscriminator::Logistic(d) => d.predict(x),
            TrainedDiscriminator::Ideal(d) => d.predict(x),
        }
    }
}

impl DiscriminatorTrainer for DiscriminatorSpec {
    fn train(&self, data: &RoundData<'_>) -> Result<TrainedDiscriminator> {
        let failed = |e: Error| Error::DiscriminatorFailed {
            round: data.round,
            reason: e.to_string(),
        };
        match self {
            DiscriminatorSpec::Ideal { clamp } => Ok(TrainedDiscriminator::Ideal(
                IdealDiscriminator::new(data.positives.clone(), data.generator.clone(), *clamp),
            )),
            DiscriminatorSpec::Logistic(cfg) => {
                if data.negatives.is_empty() {
                    return Err(failed(Error::config("no generator samples")));
                }
                let scale = data.n as f64;
                let pos_w: Vec<f64> = data.positives.mass().iter().map(|m| m * scale).collect();
                let neg = DiscreteDistribution::from_samples(data.negatives).map_err(failed)?;
                let neg_w: Vec<f64> = neg
                    .mass()
                    .iter()
                    .map(|m| m * data.negatives.len() as f64)
                    .collect();
                train_logistic(
                    data.positives.support(),
                    &pos_w,
                    neg.support(),
                    &neg_w,
                    cfg,
                    data.seed,
                )
                .map(TrainedDiscriminator::Logistic)
                .map_err(failed)
            }
        }
    }
}

/// Exact-density discriminator D = p_t/(p_t + g), clamped.
pub struct IdealDiscriminator {
    round: PointMassGenerator,
    generator: Generator,
    clamp: f64,
}

impl IdealDiscriminator {
    pub fn new(round: DiscreteDistribution, generator: Generator, clamp: f64) -> Self {
        IdealDiscriminator {
            round: PointMassGenerator::new(round),
            generator,
            clamp,
        }
    }
}

impl RatioEstimator for IdealDiscriminator {
    fn predict(&self, x: &[f64]) -> f64 {
        let p = self.round.pdf(x);
        let g = self.generator.pdf(x);
        let d = if p + g > 0.0 { p / (p + g) } else { 0.5 };
        d.clamp(self.clamp, 1.0 - self.clamp)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureMap {
    Affine { mean: Vec<f64>, scale: Vec<f64> },
    Rbf { centers: Vec<Vec<f64>>, scale: f64 },
    Bins { grid: GridSpec },
}

impl FeatureMap {
    fn len(&self) -> usize {
        match self {
            FeatureMap::Affine { mean, .. } => mean.len() + 1,
            FeatureMap::Rbf { centers, .. } => centers.len() + 1,
            FeatureMap::Bins { grid } => grid.n_bins(),
        }
    }

    /// Dense features; the last entry is the unpenalized bias (not for bins).
    fn dense(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeatureMap::Affine { mean, scale } => {
                let mut f: Vec<f64> = x
                    .iter()
                    .zip(mean)
                    .zip(scale)
                    .map(|((v, m), s)| (v - m) / s)
                    .collect();
                f.push(1.0);
                f
            }
            FeatureMap::Rbf { centers, scale } => {
                let inv = 1.0 / (2.0 * scale * scale);
                let mut f: Vec<f64> = centers.iter().map(|c| (-sq_dist(c, x) * inv).exp()).collect();
                f.push(1.0);
                f
            }
            FeatureMap::Bins { .. } => unreachable!("bins use the indicator path"),
        }
    }
}

/// Trained logistic discriminator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discriminator {
    pub features: FeatureMap,
    pub weights: Vec<f64>,
    pub clamp: f64,
    /// Regularized training loss after each optimizer iteration (first entry at the start).
    pub loss_trace: Vec<f64>,
}

impl Discriminator {
    pub fn logit(&self, x: &[f64]) -> f64 {
        match &self.features {
            FeatureMap::Bins { grid } => self.weights[grid.bin_index_clamped(x)],
            map => map.dense(x).iter().zip(&self.weights).map(|(f, w)| f * w).sum(),
        }
    }
}

impl RatioEstimator for Discriminator {
    fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x)).clamp(self.clamp, 1.0 - self.clamp)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Trains with unit weights on both classes.
pub fn train_discriminator(
    pos: &[Point],
    neg: &[Point],
    cfg: &LogisticConfig,
    seed: u64,
) -> Result<Discriminator> {
    train_logistic(pos, &vec![1.0; pos.len()], neg, &vec![1.0; neg.len()], cfg, seed)
}

/// Minimizes Σ a_i·logloss_i + l2/2·‖w‖² (bias excluded) over the labeled union,
/// positives labeled 1 and negatives 0, with per-example weights a_i.
pub fn train_logistic(
    pos: &[Point],
    pos_w: &[f64],
    neg: &[Point],
    neg_w: &[f64],
    cfg: &LogisticConfig,
    seed: u64,
) -> Result<Discriminator> {
    cfg.validate()?;
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::config("both classes need at least one sample"));
    }
    if pos.len() != pos_w.len() || neg.len() != neg_w.len() {
        return Err(Error::contract("sample and weight counts differ"));
    }
    let xs: Vec<&Point> = pos.iter().chain(neg).collect();
    let ys: Vec<f64> = std::iter::repeat_n(1.0, pos.len())
        .chain(std::iter::repeat_n(0.0, neg.len()))
        .collect();
    let ws: Vec<f64> = pos_w.iter().chain(neg_w).copied().collect();

    let features = build_features(&cfg.features, &xs, &ws, seed)?;
    if let FeatureMap::Bins { grid } = &features {
        let (weights, loss_trace) = fit_bins(grid, &xs, &ys, &ws, cfg.l2);
        return Ok(Discriminator {
            features,
            weights,
            clamp: cfg.clamp,
            loss_trace,
        });
    }

    let phi: Vec<Vec<f64>> = xs.iter().map(|x| features.dense(x)).collect();
    let p = features.len();
    let problem = Problem {
        phi: &phi,
        ys: &ys,
        ws: &ws,
        l2: cfg.l2,
        p,
    };
    let (weights, loss_trace) = match &cfg.optimizer {
        OptimizerSpec::Newton { max_iter, tol } => problem.newton(*max_iter, *tol)?,
        OptimizerSpec::GradientDescent { steps, step_size } => problem.gradient_descent(*steps, *step_size),
    };
    Ok(Discriminator {
        features,
        weights,
        clamp: cfg.clamp,
        loss_trace,
    })
}

fn build_features(spec: &FeatureSpec, xs: &[&Point], ws: &[f64], seed: u64) -> Result<FeatureMap> {
    let d = xs[0].dim();
    match spec {
        FeatureSpec::Affine => {
            let total: f64 = ws.iter().sum();
            let mut mean = vec![0.0; d];
            for (x, w) in xs.iter().zip(ws) {
                for k in 0..d {
                    mean[k] += w * x[k] / total;
                }
            }
            let mut var = vec![0.0; d];
            for (x, w) in xs.iter().zip(ws) {
                for k in 0..d {
                    var[k] += w * (x[k] - mean[k]).powi(2) / total;
                }
            }
            let scale = var.iter().map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 }).collect();
            Ok(FeatureMap::Affine { mean, scale })
        }
        FeatureSpec::Rbf { centers } => {
            let pooled = DiscreteDistribution::from_weighted_samples(
                &xs.iter().map(|p| (*p).clone()).collect::<Vec<_>>(),
                ws,
            )?;
            let k = (*centers).min(pooled.len());
            let mut last_err = None;
            for attempt in 0..3u64 {
                let mut r = rng::stream(seed, attempt, Purpose::Discriminator);
                match kmeanspp(pooled.support(), pooled.mass(), k, &mut r) {
                    Ok(idx) => {
                        let start = idx.iter().map(|&i| pooled.support()[i].to_vec()).collect();
                        let cs = lloyd(pooled.support(), pooled.mass(), start, 10);
                        let scale = median_pairwise(&cs);
                        if scale > 0.0 && scale.is_finite() {
                            return Ok(FeatureMap::Rbf { centers: cs, scale });
                        }
                        if cs.len() == 1 {
                            return Ok(FeatureMap::Rbf { centers: cs, scale: 1.0 });
                        }
                        last_err = Some(Error::Degenerate("RBF centers coincide".into()));
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            Err(last_err.expect("at least one attempt"))
        }
        FeatureSpec::Bins { grid, cells } => {
            let grid = match grid {
                Some(g) => g.clone(),
                None => {
                    let pts: Vec<Point> = xs.iter().map(|p| (*p).clone()).collect();
                    GridSpec::bounding(&pts, *cells, AUTO_GRID_PAD)?
                }
            };
            if grid.dim() != d {
                return Err(Error::contract("bin grid and data dimensions differ"));
            }
            Ok(FeatureMap::Bins { grid })
        }
    }
}

fn median_pairwise(cs: &[Vec<f64>]) -> f64 {
    let mut d: Vec<f64> = Vec::new();
    for i in 0..cs.len() {
        for j in i + 1..cs.len() {
            d.push(sq_dist(&cs[i], &cs[j]).sqrt());
        }
    }
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    let m = d.len();
    if m % 2 == 1 {
        d[m / 2]
    } else {
        0.5 * (d[m / 2 - 1] + d[m / 2])
    }
}

/// Per-bin logits: each bin is an independent 1D problem
/// max P·ln σ(w) + N·ln(1 − σ(w)) − l2/2·w².
fn fit_bins(grid: &GridSpec, xs: &[&Point], ys: &[f64], ws: &[f64], l2: f64) -> (Vec<f64>, Vec<f64>) {
    let nb = grid.n_bins();
    let mut pos = vec![0.0; nb];
    let mut neg = vec![0.0; nb];
    for ((x, y), w) in xs.iter().zip(ys).zip(ws) {
        let b = grid.bin_index_clamped(x);
        if *y > 0.5 {
            pos[b] += w;
        } else {
            neg[b] += w;
        }
    }
    let loss = |w: &[f64]| -> f64 {
        (0..nb)
            .map(|b| pos[b] * softplus(-w[b]) + neg[b] * softplus(w[b]) + 0.5 * l2 * w[b] * w[b])
            .sum()
    };
    let mut weights = vec![0.0; nb];
    let start = loss(&weights);
    for b in 0..nb {
        weights[b] = solve_bin(pos[b], neg[b], l2);
    }
    let end = loss(&weights);
    (weights, vec![start, end])
}

fn solve_bin(pos: f64, neg: f64, l2: f64) -> f64 {
    if pos == 0.0 && neg == 0.0 {
        return 0.0;
    }
    if l2 == 0.0 && (pos == 0.0 || neg == 0.0) {
        // unbounded optimum; saturate far past any clamp
        return if pos > 0.0 { 50.0 } else { -50.0 };
    }
    let f = |w: f64| pos * softplus(-w) + neg * softplus(w) + 0.5 * l2 * w * w;
    let mut w = if pos > 0.0 && neg > 0.0 { (pos / neg).ln() } else { 0.0 };
    for _ in 0..200 {
        let s = sigmoid(w);
        let g = -pos * (1.0 - s) + neg * s + l2 * w;
        let h = (pos + neg) * s * (1.0 - s) + l2;
        let mut step = g / h;
        let f0 = f(w);
        while f(w - step) > f0 && step.abs() > 1e-300 {
            step *= 0.5;
        }
        w -= step;
        if step.abs() < 1e-12 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

struct Problem<'a> {
    phi: &'a [Vec<f64>],
    ys: &'a [f64],
    ws: &'a [f64],
    l2: f64,
    p: usize,
}

impl Problem<'_> {
    fn penalty(&self, w: &[f64]) -> f64 {
        0.5 * self.l2 * w[..self.p - 1].iter().map(|v| v * v).sum::<f64>()
    }

    fn loss(&self, w: &[f64]) -> f64 {
        let data: f64 = self
            .phi
            .iter()
            .zip(self.ys)
            .zip(self.ws)
            .map(|((f, y), a)| {
                let z: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
                a * if *y > 0.5 { softplus(-z) } else { softplus(z) }
            })
            .sum();
        data + self.penalty(w)
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.p];
        for ((f, y), a) in self.phi.iter().zip(self.ys).zip(self.ws) {
            let z: f64 = f.iter().zip(w).map(|(a, b)| a * b).sum();
            let r = a * (sigmoid(z) - y);
            for (gk, fk) in g.iter_mut().zip(f) {
                *gk += r * fk;
            }
        }
        for k in 0..self.p - 1 {
            g[k] += self.l2 * w[k];
        }
        g
    }

    fn newton(&self, max_iter: usize, tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let p = self.p;
        let mut w = vec![0.0; p];
        let mut loss = self.loss(&w);
        let mut trace = vec![loss];
        for _ in 0..max_iter {
            let g = self.gradient(&w);
            let mut h = DMatrix::<f64>::zeros(p, p);
            for ((f, _), a) in self.phi.iter().zip(self.ys).zip(self.ws) {
                let z: f64 = f.iter().zip(&w).map(|(a, b)| a * b).sum();
                let s = sigmoid(z);
                let c = a * s * (1.0 - s);
                if c == 0.0 {
                    continue;
                }
                for i in 0..p {
                    let ci = c * f[i];
                    for j in 0..=i {
                        h[(i, j)] += ci * f[j];
                    }
                }
            }
            for i in 0..p {
                for j in 0..i {
                    h[(j, i)] = h[(i, j)];
                }
                // l2 on weights, a tiny ridge on the bias keeps H positive definite
                h[(i, i)] += if i + 1 < p { self.l2 } else { 0.0 } + 1e-10;
            }
            let gv = DVector::from_vec(g.clone());
            let step = match h.cholesky() {
                Some(ch) => ch.solve(&gv),
                None => gv.clone(),
            };
            let decrease: f64 = step.dot(&gv);
            if decrease <= 0.0 {
                break;
            }
            let mut t = 1.0;
            let mut accepted = None;
            while t > 1e-12 {
                let cand: Vec<f64> = w.iter().zip(step.iter()).map(|(wi, si)| wi - t * si).collect();
                let l = self.loss(&cand);
                if l <= loss - 1e-4 * t * decrease {
                    accepted = Some((cand, l));
                    break;
                }
                t *= 0.5;
            }
            let Some((cand, l)) = accepted else { break };
            let improvement = loss - l;
            w = cand;
            loss = l;
            trace.push(loss);
            if improvement <= tol * (1.0 + loss.abs()) || 0.5 * decrease < tol {
                break;
            }
        }
        Ok((w, trace))
    }

    fn gradient_descent(&self, steps: usize, step_size: f64) -> (Vec<f64>, Vec<f64>) {
        let total: f64 = self.ws.iter().sum();
        let mut w = vec![0.0; self.p];
        let mut loss = self.loss(&w);
        let mut trace = vec![loss];
        let mut eta = step_size;
        for _ in 0..steps {
            let g = self.gradient(&w);
            loop {
                let cand: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - eta * gi / total).collect();
                let l = self.loss(&cand);
                if l <= loss {
                    w = cand;
                    loss = l;
                    break;
                }
                eta *= 0.5;
                if eta < 1e-12 {
                    break;
                }
            }
            trace.push(loss);
        }
        (w, trace)
    }
}

/// Empirical doubling test: flag point i when ratio(x_i)·w_i/W < δ/n.
pub fn empirical_cover_test(d: &dyn RatioEstimator, ws: &WeightedDataset, delta: f64) -> Vec<bool> {
    let n = ws.len() as f64;
    let threshold = delta / n;
    ws.points()
        .iter()
        .zip(ws.masses())
        .map(|(x, m)| d.ratio(x) * m < threshold)
        .collect()
}

/// Quality of the doubling decisions measured against exact densities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminatorDiagnostics {
    /// Round-distribution mass of points that were truly δ-covered yet doubled.
    pub epsilon_prime: f64,
    /// Worst per-point ratio of δ′-covered rounds to not-doubled rounds, capped at 1.
    pub lambda_min: f64,
    /// Target-weighted mean of the same per-point ratio.
    pub lambda_mean: f64,
    pub delta_prime: f64,
}

/// Running tallies for the per-point λ ratio across rounds.
#[derive(Clone, Debug, Default)]
pub struct LambdaTally {
    covered_prime: Vec<u32>,
    not_doubled: Vec<u32>,
}

impl LambdaTally {
    pub fn new(n: usize) -> Self {
        LambdaTally {
            covered_prime: vec![0; n],
            not_doubled: vec![0; n],
        }
    }

    pub fn record(&mut self, covered_prime: &[bool], doubled: &[bool]) {
        for i in 0..self.covered_prime.len() {
            self.covered_prime[i] += covered_prime[i] as u32;
            self.not_doubled[i] += (!doubled[i]) as u32;
        }
    }

    pub fn per_point(&self) -> Vec<f64> {
        self.covered_prime
            .iter()
            .zip(&self.not_doubled)
            .map(|(&c, &n)| if n == 0 { 1.0 } else { (c as f64 / n as f64).min(1.0) })
            .collect()
    }
}

/// ε′ for one round: round mass of points with g ≥ δ·p that were flagged.
pub fn epsilon_prime(g: &[f64], p: &[f64], round_mass: &[f64], flags: &[bool], delta: f64) -> f64 {
    (0..flags.len())
        .filter(|&i| flags[i] && g[i] >= delta * p[i])
        .map(|i| round_mass[i])
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// Diagnostics for a single round from exact generator and target densities at
/// the dataset points.
pub fn diagnostics(
    flags: &[bool],
    g: &[f64],
    p: &[f64],
    ws: &WeightedDataset,
    delta: f64,
    delta_prime: f64,
) -> Result<DiscriminatorDiagnostics> {
    let n = ws.len();
    if flags.len() != n || g.len() != n || p.len() != n {
        return Err(Error::contract("diagnostic inputs must align with the dataset"));
    }
    let masses = ws.masses();
    let eps = epsilon_prime(g, p, &masses, flags, delta);
    let mut tally = LambdaTally::new(n);
    let covered: Vec<bool> = (0..n).map(|i| g[i] >= delta_prime * p[i]).collect();
    tally.record(&covered, flags);
    let lam = tally.per_point();
    let (lambda_min, lambda_mean) = summarize_lambda(&lam, p);
    Ok(DiscriminatorDiagnostics {
        epsilon_prime: eps,
        lambda_min,
        lambda_mean,
        delta_prime,
    })
}

/// Minimum and `weights`-weighted mean of per-point λ values.
pub fn summarize_lambda(lam: &[f64], weights: &[f64]) -> (f64, f64) {
    let min = lam.iter().copied().fold(1.0, f64::min);
    let total: f64 = weights.iter().sum();
    let mean = if total > 0.0 {
        lam.iter().zip(weights).map(|(l, w)| l * w).sum::<f64>() / total
    } else {
        lam.iter().sum::<f64>() / lam.len().max(1) as f64
    };
    (min, mean.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand_distr::{Distribution, Normal};

    fn cluster(center: f64, n: usize, seed: u64) -> Vec<Point> {
        let normal = Normal::new(center, 1.0).unwrap();
        let mut r = seeded(seed);
        (0..n).map(|_| Point::scalar(normal.sample(&mut r))).collect()
    }

    #[test]
    fn indistinguishable_classes() {
        let pts = cluster(0.0, 200, 1);
        for cfg in [
            LogisticConfig::default(),
            LogisticConfig {
                features: FeatureSpec::Affine,
                ..Default::default()
            },
        ] {
            let d = train_discriminator(&pts, &pts, &cfg, 5).unwrap();
            for x in &pts {
                assert!((d.predict(x) - 0.5).abs() < 0.05);
            }
        }
    }

    #[test]
    fn separable_clusters() {
        let pos = cluster(10.0, 100, 2);
        let neg = cluster(-10.0, 100, 3);
        let cfg = LogisticConfig {
            features: FeatureSpec::Affine,
            ..Default::default()
        };
        let d = train_discriminator(&pos, &neg, &cfg, 0).unwrap();
        assert!(pos.iter().all(|x| d.predict(x) > 0.95));
        assert!(neg.iter().all(|x| d.predict(x) < 0.05));
        for w in d.loss_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn gradient_descent_is_monotone() {
        let pos = cluster(1.0, 100, 4);
        let neg = cluster(-1.0, 100, 5);
        let cfg = LogisticConfig {
            optimizer: OptimizerSpec::GradientDescent {
                steps: 500,
                step_size: 0.1,
            },
            ..Default::default()
        };
        let d = train_discriminator(&pos, &neg, &cfg, 0).unwrap();
        assert_eq!(d.loss_trace.len(), 501);
        for w in d.loss_trace.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn ratio_from_probability() {
        struct Fixed(f64);
        impl RatioEstimator for Fixed {
            fn predict(&self, _: &[f64]) -> f64 {
                self.0
            }
        }
        assert_eq!(Fixed(0.5).ratio(&[0.0]), 1.0);
        assert!((Fixed(5.0 / 12.0).ratio(&[0.0]) - 1.4).abs() < 1e-15);
        assert!((Fixed(1.0 - 1e-6).ratio(&[0.0]) - 1e-6).abs() < 1e-11);
    }

    #[test]
    fn bin_solution_matches_closed_form_without_penalty() {
        let w = solve_bin(3.0, 1.0, 0.0);
        assert!((sigmoid(w) - 0.75).abs() < 1e-12);
        assert!(solve_bin(2.0, 0.0, 1e-4) > 5.0);
    }
}
