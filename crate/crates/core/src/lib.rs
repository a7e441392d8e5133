//! Multiplicative-weights boosting of weak density generators with pointwise
//! mode-coverage guarantees, plus the bound formulas and oracles that check them.

pub mod boost;
pub mod bounds;
pub mod discriminator;
pub mod dist;
pub mod divergence;
pub mod error;
pub mod generators;
pub mod io;
pub mod kmeans;
pub mod oracles;
pub mod rng;
pub mod synth;

pub use boost::{run_empirical, run_exact, BoostConfig, BoostRun, GeneratorMixture, RoundRecord, RoundTrace};
pub use dist::{AnalyticDensity, DiscreteDistribution, GridSpec, Point, WeightedDataset};
pub use error::{Error, Result};
pub use generators::{Generator, GeneratorSpec, WeakGenerator};
