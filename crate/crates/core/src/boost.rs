//! The multiplicative-weights loops: exact densities and the empirical
//! (discriminator-driven) variant, producing a uniform generator mixture and a
//! per-round trace.

use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discriminator::{
    empirical_cover_test, epsilon_prime, summarize_lambda, DiscriminatorSpec, DiscriminatorTrainer,
    LambdaTally, RoundData,
};
use crate::dist::{AnalyticDensity, DiscreteDistribution, GridSpec, Point, WeightedDataset};
use crate::divergence::{tv_discrete_union, tv_masses};
use crate::error::{Error, Result};
use crate::generators::{
    FitContext, Generator, GeneratorFitter, GeneratorSpec, WeakGenerator, AUTO_GRID_PAD,
};
use crate::rng::{self, Purpose};

/// Target density used to judge true coverage in empirical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceDensity {
    /// 1/n per sample (counting measure).
    EmpiricalPmf,
    /// Histogram density of the dataset on a grid (automatic when absent).
    Grid {
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default = "default_cells")]
        cells: usize,
    },
    Analytic { density: AnalyticDensity },
}

fn default_cells() -> usize {
    64
}

impl ReferenceDensity {
    /// Reference density at every dataset point.
    pub fn evaluate(&self, points: &[Point]) -> Result<Vec<f64>> {
        match self {
            ReferenceDensity::EmpiricalPmf => {
                let pmf = DiscreteDistribution::from_samples(points)?;
                let lookup = crate::generators::PointMassGenerator::new(pmf);
                Ok(points.iter().map(|x| lookup.pdf(x)).collect())
            }
            ReferenceDensity::Grid { grid, cells } => {
                let grid = match grid {
                    Some(g) => g.clone(),
                    None => GridSpec::bounding(points, *cells, AUTO_GRID_PAD)?,
                };
                Ok(grid_density(&grid, points))
            }
            ReferenceDensity::Analytic { density } => Ok(points.iter().map(|x| density.pdf(x)).collect()),
        }
    }
}

/// Histogram density of equally weighted `points` on `grid`, evaluated at each point.
pub fn grid_density(grid: &GridSpec, points: &[Point]) -> Vec<f64> {
    let mut counts = vec![0usize; grid.n_bins()];
    let bins: Vec<usize> = points.iter().map(|x| grid.bin_index_clamped(x)).collect();
    for &b in &bins {
        counts[b] += 1;
    }
    let scale = 1.0 / (points.len() as f64 * grid.cell_volume());
    bins.iter().map(|&b| counts[b] as f64 * scale).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoostConfig {
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Subset-mass exponent; only used when reporting bounds.
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub discriminator: DiscriminatorSpec,
    /// Size of the weighted resample each empirical round (defaults to n).
    #[serde(default)]
    pub resample_size: Option<usize>,
    /// Point indices whose share of the weight is tracked each round.
    #[serde(default)]
    pub minority: Vec<usize>,
    /// Enables discriminator diagnostics in empirical runs.
    #[serde(default)]
    pub reference: Option<ReferenceDensity>,
    /// Coverage level for the λ diagnostic (defaults to δ).
    #[serde(default)]
    pub delta_prime: Option<f64>,
}

fn default_rounds() -> usize {
    24
}
fn default_delta() -> f64 {
    0.25
}
fn default_eta() -> f64 {
    0.01
}

impl BoostConfig {
    pub fn new(generator: GeneratorSpec) -> Self {
        BoostConfig {
            rounds: default_rounds(),
            delta: default_delta(),
            eta: default_eta(),
            seed: 0,
            generator,
            discriminator: DiscriminatorSpec::default(),
            resample_size: None,
            minority: Vec::new(),
            reference: None,
            delta_prime: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::config("rounds must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config("delta must be in (0, 1)"));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::config("eta must be in (0, 1)"));
        }
        if let Some(dp) = self.delta_prime {
            if !(dp > 0.0 && dp <= 1.0) {
                return Err(Error::config("delta_prime must be in (0, 1]"));
            }
        }
        if self.resample_size == Some(0) {
            return Err(Error::config("resample_size must be >= 1"));
        }
        self.generator.validate()?;
        self.discriminator.validate()
    }

    fn check_minority(&self, n: usize) -> Result<()> {
        match self.minority.iter().find(|&&i| i >= n) {
            Some(i) => Err(Error::config(format!("minority index {i} out of range for {n} points"))),
            None => Ok(()),
        }
    }
}

/// Uniform mixture of the round generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMixture {
    generators: Vec<Generator>,
}

impl GeneratorMixture {
    pub fn new(generators: Vec<Generator>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::config("mixture needs at least one generator"));
        }
        Ok(GeneratorMixture { generators })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Mixture density, failing when some member has no exact pdf.
    pub fn exact_pdf(&self, x: &[f64]) -> Result<f64> {
        if !self.supports_exact_pdf() {
            return Err(Error::Unsupported("a mixture member lacks an exact pdf".into()));
        }
        Ok(self.pdf(x))
    }

    /// Mixture densities at many points, computed in parallel.
    pub fn pdf_many(&self, xs: &[Point]) -> Vec<f64> {
        xs.par_iter().map(|x| self.pdf(x)).collect()
    }

    /// Truncates to the first `t` generators.
    pub fn prefix(&self, t: usize) -> Result<GeneratorMixture> {
        GeneratorMixture::new(self.generators[..t.min(self.generators.len())].to_vec())
    }
}

impl WeakGenerator for GeneratorMixture {
    fn pdf(&self, x: &[f64]) -> f64 {
        self.generators.iter().map(|g| g.pdf(x)).sum::<f64>() / self.generators.len() as f64
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        use rand::Rng;
        let t = self.generators.len();
        let members: Vec<usize> = (0..count).map(|_| rng.random_range(0..t)).collect();
        // One batch per member, then scatter back into draw order.
        let mut batches: Vec<std::vec::IntoIter<Point>> = (0..t)
            .map(|i| {
                let k = members.iter().filter(|&&m| m == i).count();
                let draws = if k == 0 { Vec::new() } else { self.generators[i].sample(k, rng) };
                draws.into_iter()
            })
            .collect();
        members
            .iter()
            .map(|&i| batches[i].next().expect("batch sized to member count"))
            .collect()
    }

    fn supports_exact_pdf(&self) -> bool {
        self.generators.iter().all(|g| g.supports_exact_pdf())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    /// log2 of the total weight at the start of the round.
    pub log2_w: f64,
    pub n_doubled: usize,
    /// Round-distribution mass of the doubled points.
    pub doubled_mass: f64,
    pub tv_gen_vs_pt: Option<f64>,
    pub minority_ratio: Option<f64>,
    pub epsilon_prime: Option<f64>,
    pub lambda_min: Option<f64>,
    pub lambda_mean: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub records: Vec<RoundRecord>,
    /// Doubling flags per round, aligned with the dataset points.
    pub flags: Vec<Vec<bool>>,
    pub initial_log2_weights: Vec<f64>,
    /// log2 of the total weight after the last round.
    pub final_log2_w: f64,
}

impl RoundTrace {
    pub fn max_tv(&self) -> Option<f64> {
        self.records
            .iter()
            .filter_map(|r| r.tv_gen_vs_pt)
            .fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }
}

pub struct BoostRun {
    pub mixture: GeneratorMixture,
    pub trace: RoundTrace,
    /// Weights after the last round.
    pub weights: WeightedDataset,
}

/// Boosting with exact densities on a finite support.
pub fn run_exact(target: &DiscreteDistribution, cfg: &BoostConfig) -> Result<BoostRun> {
    cfg.validate()?;
    let spec = cfg.generator.resolve(target.support())?;
    if !spec.exact_pdf() {
        return Err(Error::Unsupported("exact mode needs generators with exact pdfs".into()));
    }
    run_exact_with(target, cfg, &spec)
}

pub fn run_exact_with(
    target: &DiscreteDistribution,
    cfg: &BoostConfig,
    fitter: &dyn GeneratorFitter,
) -> Result<BoostRun> {
    cfg.check_minority(target.len())?;
    let support = target.support();
    let p: Vec<f64> = target.densities();
    let mut ws = WeightedDataset::init_exact(target);
    let initial_log2_weights = ws.log2_weight().to_vec();
    let mut generators = Vec::with_capacity(cfg.rounds);
    let mut records = Vec::with_capacity(cfg.rounds);
    let mut all_flags = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let round_mass = ws.masses();
        let round_dist = DiscreteDistribution::new(support.to_vec(), round_mass.clone())?
            .with_base_measure(target.base_measure())?;
        let ctx = FitContext {
            round: t,
            seed: rng::derive_seed(cfg.seed, t as u64, Purpose::Fit),
            target: Some(target),
            delta: cfg.delta,
        };
        let g = fitter.fit(&round_dist, &ctx)?;
        let g_vals: Vec<f64> = support.par_iter().map(|x| g.pdf(x)).collect();
        let flags: Vec<bool> = g_vals.iter().zip(&p).map(|(gv, pv)| *gv < cfg.delta * pv).collect();

        let g_mass: Vec<f64> = g_vals.iter().map(|v| v * target.base_measure()).collect();
        let off_support = (1.0 - g_mass.iter().sum::<f64>()).max(0.0);
        let tv = (tv_masses(&g_mass, &round_mass) + 0.5 * off_support).min(1.0);

        records.push(RoundRecord {
            round: t,
            log2_w: ws.log2_total(),
            n_doubled: flags.iter().filter(|f| **f).count(),
            doubled_mass: doubled_mass(&round_mass, &flags),
            tv_gen_vs_pt: Some(tv),
            minority_ratio: minority_share(&cfg.minority, &round_mass),
            epsilon_prime: None,
            lambda_min: None,
            lambda_mean: None,
        });
        ws = ws.double_weights(&flags)?;
        all_flags.push(flags);
        generators.push(g);
    }
    Ok(BoostRun {
        mixture: GeneratorMixture::new(generators)?,
        trace: RoundTrace {
            records,
            flags: all_flags,
            initial_log2_weights,
            final_log2_w: ws.log2_total(),
        },
        weights: ws,
    })
}

/// Boosting on an empirical sample with a discriminator-driven doubling test.
pub fn run_empirical(points: &[Point], cfg: &BoostConfig) -> Result<BoostRun> {
    cfg.validate()?;
    let spec = cfg.generator.resolve(points)?;
    let disc = cfg.discriminator.resolve(points)?;
    run_empirical_with(points, cfg, &spec, &disc)
}

pub fn run_empirical_with(
    points: &[Point],
    cfg: &BoostConfig,
    fitter: &dyn GeneratorFitter,
    trainer: &dyn DiscriminatorTrainer,
) -> Result<BoostRun> {
    if points.len() < 2 {
        return Err(Error::config("empirical boosting needs at least 2 points"));
    }
    cfg.check_minority(points.len())?;
    let n = points.len();
    let resample = cfg.resample_size.unwrap_or(n);
    let delta_prime = cfg.delta_prime.unwrap_or(cfg.delta);
    let reference = match &cfg.reference {
        Some(r) => Some(r.evaluate(points)?),
        None => None,
    };
    let mut tally = LambdaTally::new(n);

    let mut ws = WeightedDataset::init_empirical(points.to_vec())?;
    let initial_log2_weights = ws.log2_weight().to_vec();
    let mut generators = Vec::with_capacity(cfg.rounds);
    let mut records = Vec::with_capacity(cfg.rounds);
    let mut all_flags = Vec::with_capacity(cfg.rounds);

    for t in 1..=cfg.rounds {
        let masses = ws.masses();
        let round_dist = ws.normalize()?;

        let pick = WeightedIndex::new(&masses).map_err(|e| Error::FitFailed {
            round: t,
            reason: format!("cannot resample: {e}"),
        })?;
        let mut r = rng::stream(cfg.seed, t as u64, Purpose::Resample);
        let drawn: Vec<Point> = (0..resample).map(|_| points[pick.sample(&mut r)].clone()).collect();
        let train = DiscreteDistribution::from_samples(&drawn)?;

        let ctx = FitContext {
            round: t,
            seed: rng::derive_seed(cfg.seed, t as u64, Purpose::Fit),
            target: None,
            delta: cfg.delta,
        };
        let g = fitter.fit(&train, &ctx)?;
        let negatives = g.sample(n, &mut rng::stream(cfg.seed, t as u64, Purpose::GeneratorSamples));
        let d = trainer.train(&RoundData {
            round: t,
            seed: rng::derive_seed(cfg.seed, t as u64, Purpose::Discriminator),
            positives: &round_dist,
            negatives: &negatives,
            generator: &g,
            n,
        })?;
        let flags = empirical_cover_test(&d, &ws, cfg.delta);

        let (eps, lam_min, lam_mean) = match &reference {
            Some(p) if g.supports_exact_pdf() => {
                let g_vals: Vec<f64> = points.par_iter().map(|x| g.pdf(x)).collect();
                let eps = epsilon_prime(&g_vals, p, &masses, &flags, cfg.delta);
                let covered: Vec<bool> = g_vals.iter().zip(p).map(|(gv, pv)| *gv >= delta_prime * pv).collect();
                tally.record(&covered, &flags);
                let (lmin, lmean) = summarize_lambda(&tally.per_point(), &vec![1.0; n]);
                (Some(eps), Some(lmin), Some(lmean))
            }
            _ => (None, None, None),
        };

        records.push(RoundRecord {
            round: t,
            log2_w: ws.log2_total(),
            n_doubled: flags.iter().filter(|f| **f).count(),
            doubled_mass: doubled_mass(&masses, &flags),
            tv_gen_vs_pt: measured_tv(&g, &round_dist),
            minority_ratio: minority_share(&cfg.minority, &masses),
            epsilon_prime: eps,
            lambda_min: lam_min,
            lambda_mean: lam_mean,
        });
        ws = ws.double_weights(&flags)?;
        all_flags.push(flags);
        generators.push(g);
    }
    Ok(BoostRun {
        mixture: GeneratorMixture::new(generators)?,
        trace: RoundTrace {
            records,
            flags: all_flags,
            initial_log2_weights,
            final_log2_w: ws.log2_total(),
        },
        weights: ws,
    })
}

fn doubled_mass(mass: &[f64], flags: &[bool]) -> f64 {
    mass.iter().zip(flags).filter(|(_, f)| **f).map(|(m, _)| m).sum()
}

fn minority_share(minority: &[usize], mass: &[f64]) -> Option<f64> {
    (!minority.is_empty()).then(|| minority.iter().map(|&i| mass[i]).sum())
}

/// TV between a generator and a discrete round distribution where it is well
/// defined: bin masses for histograms, atom masses for tables.
pub fn measured_tv(g: &Generator, round: &DiscreteDistribution) -> Option<f64> {
    match g {
        Generator::Histogram(h) => {
            let mut binned = vec![0.0; h.grid.n_bins()];
            for (x, m) in round.support().iter().zip(round.mass()) {
                binned[h.grid.bin_index_clamped(x)] += m;
            }
            Some(tv_masses(&binned, &h.mass))
        }
        Generator::PointMass(pm) => Some(tv_discrete_union(pm.table(), round)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab(a: f64, b: f64) -> DiscreteDistribution {
        DiscreteDistribution::new(vec![Point::scalar(0.0), Point::scalar(1.0)], vec![a, b]).unwrap()
    }

    #[test]
    fn perfect_generator_single_round() {
        let p = ab(0.3, 0.7);
        let mut cfg = BoostConfig::new(GeneratorSpec::Tabular);
        cfg.rounds = 1;
        let run = run_exact(&p, &cfg).unwrap();
        assert_eq!(run.trace.records[0].n_doubled, 0);
        assert_eq!(run.mixture.pdf(&[0.0]), 0.3);
        assert_eq!(run.mixture.pdf(&[1.0]), 0.7);
    }

    #[test]
    fn mixture_averages() {
        let a = Generator::PointMass(crate::generators::PointMassGenerator::new(ab(0.2, 0.8)));
        let b = Generator::PointMass(crate::generators::PointMassGenerator::new(ab(0.4, 0.6)));
        let m = GeneratorMixture::new(vec![a.clone(), b]).unwrap();
        assert!((m.pdf(&[0.0]) - 0.3).abs() < 1e-15);
        let single = GeneratorMixture::new(vec![a]).unwrap();
        assert_eq!(single.pdf(&[1.0]), 0.8);
        assert!(m.sample(0, &mut rng::seeded(0)).is_empty());
        assert!(GeneratorMixture::new(vec![]).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = BoostConfig::new(GeneratorSpec::Tabular);
        cfg.delta = 1.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg: BoostConfig = serde_json::from_str(r#"{"generator":{"kind":"tabular"}}"#).unwrap();
        assert_eq!(cfg.rounds, 24);
        assert_eq!(cfg.delta, 0.25);
    }
}
