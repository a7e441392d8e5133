//! Run configuration for the `boost` command.

use std::path::{Path, PathBuf};

use modecover::boost::ReferenceDensity;
use modecover::dist::discretize;
use modecover::io::read_dataset_path;
use modecover::synth::DatasetSpec;
use modecover::{AnalyticDensity, BoostConfig, DiscreteDistribution, GridSpec, Point};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    #[default]
    Empirical,
}

/// A finite target for exact runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetSpec {
    Discrete { distribution: DiscreteDistribution },
    /// An analytic density discretized on a grid (midpoint rule).
    Analytic { density: AnalyticDensity, grid: GridSpec },
}

impl TargetSpec {
    pub fn build(&self) -> CliResult<DiscreteDistribution> {
        match self {
            TargetSpec::Discrete { distribution } => Ok(distribution.clone()),
            TargetSpec::Analytic { density, grid } => Ok(discretize(density, grid)?),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageOptions {
    /// Density the mixture is compared against in empirical runs (grid
    /// histogram of the data by default).
    #[serde(default)]
    pub reference: Option<ReferenceDensity>,
    /// Smallest target mass of the reported worst subset (2^(−ηT) by default).
    #[serde(default)]
    pub mass_lb: Option<f64>,
    /// Fraction of the fair per-mode share needed to count a mode as covered.
    #[serde(default = "default_frac")]
    pub mode_frac: f64,
    /// Mixture samples drawn for mode counting (defaults to the dataset size).
    #[serde(default)]
    pub eval_samples: Option<usize>,
    /// Mode standard deviation for inputs without known centers.
    #[serde(default)]
    pub sigma0: Option<f64>,
}

fn default_frac() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Mode,
    /// Generated dataset.
    #[serde(default)]
    pub dataset: Option<DatasetSpec>,
    /// Seed for dataset generation (the boosting seed when absent).
    #[serde(default)]
    pub dataset_seed: Option<u64>,
    /// Dataset CSV, relative to the config file.
    #[serde(default)]
    pub input: Option<PathBuf>,
    /// Inline samples.
    #[serde(default)]
    pub points: Option<Vec<Point>>,
    /// Finite target (exact mode only).
    #[serde(default)]
    pub target: Option<TargetSpec>,
    pub boost: BoostConfig,
    /// Mode id whose points are tracked as the minority.
    #[serde(default)]
    pub minority_mode: Option<usize>,
    #[serde(default = "default_coverage")]
    pub coverage: CoverageOptions,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_coverage() -> CoverageOptions {
    CoverageOptions {
        mode_frac: default_frac(),
        ..CoverageOptions::default()
    }
}

/// Samples with whatever mode information the source provides.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub points: Vec<Point>,
    pub mode_ids: Option<Vec<usize>>,
    pub centers: Option<Vec<Point>>,
    pub sigma0: Option<f64>,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> CliResult<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(input), Some(dir)) = (&cfg.input, path.parent()) {
            if input.is_relative() {
                cfg.input = Some(dir.join(input));
            }
        }
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> CliResult<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let sources = [
            self.dataset.is_some(),
            self.input.is_some(),
            self.points.is_some(),
            self.target.is_some(),
        ];
        let count = sources.iter().filter(|s| **s).count();
        if count != 1 {
            return Err(CliError::config(
                "exactly one of dataset, input, points or target must be given",
            ));
        }
        if self.target.is_some() && self.mode != Mode::Exact {
            return Err(CliError::config("target is only valid with mode = exact"));
        }
        if let Some(p) = &self.input {
            if p.as_os_str().is_empty() {
                return Err(CliError::config("input path is empty"));
            }
        }
        if !(self.coverage.mode_frac > 0.0 && self.coverage.mode_frac <= 1.0) {
            return Err(CliError::config("coverage.mode_frac must be in (0, 1]"));
        }
        if let Some(lb) = self.coverage.mass_lb {
            if !(lb > 0.0 && lb <= 1.0) {
                return Err(CliError::config("coverage.mass_lb must be in (0, 1]"));
            }
        }
        if self.coverage.eval_samples == Some(0) {
            return Err(CliError::config("coverage.eval_samples must be >= 1"));
        }
        self.boost.validate()?;
        Ok(())
    }

    /// Loads or generates the samples. `None` for pure target configs.
    pub fn load_data(&self) -> CliResult<Option<LoadedData>> {
        if let Some(spec) = &self.dataset {
            let d = spec.generate(self.dataset_seed.unwrap_or(self.boost.seed))?;
            return Ok(Some(LoadedData {
                points: d.points,
                mode_ids: Some(d.mode_ids),
                centers: Some(d.centers),
                sigma0: Some(d.sigma0),
            }));
        }
        if let Some(path) = &self.input {
            let f = read_dataset_path(path)?;
            return Ok(Some(LoadedData {
                points: f.points,
                mode_ids: f.mode_ids,
                centers: None,
                sigma0: self.coverage.sigma0,
            }));
        }
        if let Some(points) = &self.points {
            if points.is_empty() {
                return Err(CliError::config("points is empty"));
            }
            modecover::dist::check_dims(points)?;
            return Ok(Some(LoadedData {
                points: points.clone(),
                mode_ids: None,
                centers: None,
                sigma0: None,
            }));
        }
        Ok(None)
    }
}
