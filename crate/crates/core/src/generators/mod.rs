//! Weak density generators: fit to a round distribution, evaluate a pdf, sample.

mod adversarial;
mod fixed;
mod gmm;
mod histogram;
mod kde;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDistribution, GridSpec, Point};
use crate::error::{Error, Result};
use crate::rng;

pub use adversarial::{adversarial_make, greedy_uncover_region, RegionSelector};
pub use fixed::{FixedFamilyGenerator, PointMassGenerator};
pub use gmm::GmmGenerator;
pub use histogram::HistogramGenerator;
pub use kde::KdeGenerator;

/// A fitted density model.
pub trait WeakGenerator {
    fn pdf(&self, x: &[f64]) -> f64;

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point>;

    /// Whether `pdf` is the model's exact density (as opposed to an estimate).
    fn supports_exact_pdf(&self) -> bool {
        true
    }

    fn sample_seeded(&self, count: usize, seed: u64) -> Vec<Point> {
        self.sample(count, &mut rng::seeded(seed))
    }
}

/// Any fitted generator, serializable as a tagged JSON object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Histogram(HistogramGenerator),
    Gmm(GmmGenerator),
    Kde(KdeGenerator),
    FixedFamily(FixedFamilyGenerator),
    PointMass(PointMassGenerator),
}

impl Generator {
    fn inner(&self) -> &dyn WeakGenerator {
        match self {
            Generator::Histogram(g) => g,
            Generator::Gmm(g) => g,
            Generator::Kde(g) => g,
            Generator::FixedFamily(g) => g,
            Generator::PointMass(g) => g,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Generator::Histogram(_) => "histogram",
            Generator::Gmm(_) => "gmm",
            Generator::Kde(_) => "kde",
            Generator::FixedFamily(_) => "fixed_family",
            Generator::PointMass(_) => "point_mass",
        }
    }

    /// Mass vector on a discrete support using densities times the support's base measure.
    pub fn masses_on(&self, support: &DiscreteDistribution) -> Vec<f64> {
        let b = support.base_measure();
        support.support().iter().map(|x| self.pdf(x) * b).collect()
    }
}

impl WeakGenerator for Generator {
    fn pdf(&self, x: &[f64]) -> f64 {
        self.inner().pdf(x)
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        self.inner().sample(count, rng)
    }

    fn supports_exact_pdf(&self) -> bool {
        self.inner().supports_exact_pdf()
    }
}

/// What a fitter may know about the round besides its training distribution.
#[derive(Clone, Copy, Debug)]
pub struct FitContext<'a> {
    pub round: usize,
    pub seed: u64,
    /// The original target, when the run has one (exact mode).
    pub target: Option<&'a DiscreteDistribution>,
    pub delta: f64,
}

impl<'a> FitContext<'a> {
    pub fn new(round: usize, seed: u64) -> Self {
        FitContext {
            round,
            seed,
            target: None,
            delta: 0.25,
        }
    }
}

/// Produces the round generator from the round distribution.
pub trait GeneratorFitter {
    fn fit(&self, train: &DiscreteDistribution, ctx: &FitContext<'_>) -> Result<Generator>;
}

/// Generator configuration, as found in run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Histogram over a grid. Without an explicit grid, a padded bounding box of
    /// the full dataset with `cells` per axis is used. `max_bins` keeps only the
    /// heaviest bins, which caps the learner's capacity.
    Histogram {
        #[serde(default)]
        grid: Option<GridSpec>,
        #[serde(default = "default_cells")]
        cells: usize,
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        max_bins: Option<usize>,
    },
    Gmm {
        k: usize,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
        #[serde(default = "default_var_floor")]
        var_floor: f64,
        #[serde(default = "default_restarts")]
        restarts: usize,
    },
    Kde {
        #[serde(default = "default_bandwidth")]
        bandwidth: f64,
    },
    FixedFamily {
        candidates: Vec<crate::dist::AnalyticDensity>,
    },
    /// Reproduces the training distribution exactly.
    Tabular,
    /// Ignores the training data and returns a fixed table.
    PointMass { table: DiscreteDistribution },
    /// Moves `gamma` of mass off a region of the training distribution.
    Adversarial {
        gamma: f64,
        #[serde(default)]
        region: RegionSelector,
    },
    /// One spec per round; the last one repeats.
    Schedule { rounds: Vec<GeneratorSpec> },
}

fn default_cells() -> usize {
    64
}
fn default_alpha() -> f64 {
    1e-9
}
fn default_max_iter() -> usize {
    100
}
fn default_var_floor() -> f64 {
    1e-6
}
fn default_restarts() -> usize {
    3
}
fn default_bandwidth() -> f64 {
    0.1
}

/// Padding of the automatic histogram grid, as a fraction of the data extent.
pub const AUTO_GRID_PAD: f64 = 0.05;

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::Histogram {
                grid,
                cells,
                alpha,
                max_bins,
            } => {
                if let Some(g) = grid {
                    g.validate()?;
                }
                if *cells < 2 {
                    return Err(Error::config("histogram.cells must be >= 2"));
                }
                if !(0.0..1.0).contains(alpha) {
                    return Err(Error::config("histogram.alpha must be in [0, 1)"));
                }
                if *max_bins == Some(0) {
                    return Err(Error::config("histogram.max_bins must be >= 1"));
                }
            }
            GeneratorSpec::Gmm {
                k,
                max_iter,
                var_floor,
                restarts,
            } => {
                if *k == 0 || *max_iter == 0 || *restarts == 0 {
                    return Err(Error::config("gmm.k, gmm.max_iter and gmm.restarts must be >= 1"));
                }
                if !(*var_floor > 0.0) {
                    return Err(Error::config("gmm.var_floor must be positive"));
                }
            }
            GeneratorSpec::Kde { bandwidth } => {
                if !(*bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(Error::config("kde.bandwidth must be positive"));
                }
            }
            GeneratorSpec::FixedFamily { candidates } => {
                if candidates.is_empty() {
                    return Err(Error::config("fixed_family.candidates is empty"));
                }
            }
            GeneratorSpec::Tabular | GeneratorSpec::PointMass { .. } => {}
            GeneratorSpec::Adversarial { gamma, .. } => {
                if !(0.0..=1.0).contains(gamma) {
                    return Err(Error::config("adversarial.gamma must be in [0, 1]"));
                }
            }
            GeneratorSpec::Schedule { rounds } => {
                if rounds.is_empty() {
                    return Err(Error::config("schedule.rounds is empty"));
                }
                rounds.iter().try_for_each(GeneratorSpec::validate)?;
            }
        }
        Ok(())
    }

    /// Fixes data-dependent settings (the automatic histogram grid) once for a run.
    pub fn resolve(&self, points: &[Point]) -> Result<GeneratorSpec> {
        Ok(match self {
            GeneratorSpec::Histogram {
                grid: None,
                cells,
                alpha,
                max_bins,
            } => GeneratorSpec::Histogram {
                grid: Some(GridSpec::bounding(points, *cells, AUTO_GRID_PAD)?),
                cells: *cells,
                alpha: *alpha,
                max_bins: *max_bins,
            },
            GeneratorSpec::Schedule { rounds } => GeneratorSpec::Schedule {
                rounds: rounds
                    .iter()
                    .map(|r| r.resolve(points))
                    .collect::<Result<_>>()?,
            },
            other => other.clone(),
        })
    }

    /// True when every generator this spec can produce has an exact pdf.
    pub fn exact_pdf(&self) -> bool {
        match self {
            GeneratorSpec::Schedule { rounds } => rounds.iter().all(GeneratorSpec::exact_pdf),
            _ => true,
        }
    }

    fn for_round(&self, round: usize) -> &GeneratorSpec {
        match self {
            GeneratorSpec::Schedule { rounds } => {
                rounds[(round - 1).min(rounds.len() - 1)].for_round(round)
            }
            other => other,
        }
    }
}

impl GeneratorFitter for GeneratorSpec {
    fn fit(&self, train: &DiscreteDistribution, ctx: &FitContext<'_>) -> Result<Generator> {
        let failed = |e: Error| match e {
            Error::FitFailed { .. } => e,
            other => Error::FitFailed {
                round: ctx.round,
                reason: other.to_string(),
            },
        };
        match self.for_round(ctx.round) {
            GeneratorSpec::Histogram {
                grid,
                cells,
                alpha,
                max_bins,
            } => {
                let grid = match grid {
                    Some(g) => g.clone(),
                    None => GridSpec::bounding(train.support(), *cells, AUTO_GRID_PAD)
                        .map_err(failed)?,
                };
                HistogramGenerator::fit(train, grid, *alpha, *max_bins)
                    .map(Generator::Histogram)
                    .map_err(failed)
            }
            GeneratorSpec::Gmm {
                k,
                max_iter,
                var_floor,
                restarts,
            } => GmmGenerator::fit(train, *k, *max_iter, *var_floor, *restarts, ctx.seed)
                .map(Generator::Gmm)
                .map_err(failed),
            GeneratorSpec::Kde { bandwidth } => KdeGenerator::fit(train, *bandwidth)
                .map(Generator::Kde)
                .map_err(failed),
            GeneratorSpec::FixedFamily { candidates } => {
                FixedFamilyGenerator::fit(train, candidates.clone())
                    .map(Generator::FixedFamily)
                    .map_err(failed)
            }
            GeneratorSpec::Tabular => Ok(Generator::PointMass(PointMassGenerator::new(
                train.clone(),
            ))),
            GeneratorSpec::PointMass { table } => {
                let table = if table.base_measure() == train.base_measure() {
                    table.clone()
                } else {
                    table
                        .clone()
                        .with_base_measure(train.base_measure())
                        .map_err(failed)?
                };
                Ok(Generator::PointMass(PointMassGenerator::new(table)))
            }
            GeneratorSpec::Adversarial { gamma, region } => {
                let idx = region
                    .indices(train, ctx.target, ctx.delta, *gamma, ctx.seed)
                    .map_err(failed)?;
                let (dist, _) = adversarial_make(train, *gamma, &idx).map_err(failed)?;
                Ok(Generator::PointMass(PointMassGenerator::new(dist)))
            }
            GeneratorSpec::Schedule { .. } => unreachable!("for_round never returns a schedule"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_roundtrip() {
        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"kind":"histogram","cells":32}"#).unwrap();
        assert_eq!(
            spec,
            GeneratorSpec::Histogram {
                grid: None,
                cells: 32,
                alpha: 1e-9,
                max_bins: None
            }
        );
        let gmm: GeneratorSpec = serde_json::from_str(r#"{"kind":"gmm","k":3}"#).unwrap();
        gmm.validate().unwrap();
        assert!(serde_json::from_str::<GeneratorSpec>(r#"{"kind":"gmm","k":3,"bogus":1}"#).is_err());
        let kde: GeneratorSpec = serde_json::from_str(r#"{"kind":"kde"}"#).unwrap();
        assert_eq!(kde, GeneratorSpec::Kde { bandwidth: 0.1 });
    }

    #[test]
    fn schedule_repeats_last() {
        let s = GeneratorSpec::Schedule {
            rounds: vec![GeneratorSpec::Tabular, GeneratorSpec::Kde { bandwidth: 0.2 }],
        };
        assert_eq!(s.for_round(1), &GeneratorSpec::Tabular);
        assert_eq!(s.for_round(5), &GeneratorSpec::Kde { bandwidth: 0.2 });
    }
}
