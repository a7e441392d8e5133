use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::WeakGenerator;
use crate::dist::{AnalyticDensity, DiscreteDistribution, Point};
use crate::error::{Error, Result};

/// Picks, from a fixed list of analytic densities, the one with the highest
/// weighted log-likelihood on the training distribution (equivalently the
/// lowest KL from the training distribution).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedFamilyGenerator {
    pub candidates: Vec<AnalyticDensity>,
    pub selected: usize,
    /// Weighted log-likelihood (nats) of each candidate.
    pub scores: Vec<f64>,
}

impl FixedFamilyGenerator {
    pub fn fit(train: &DiscreteDistribution, candidates: Vec<AnalyticDensity>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::config("candidate family is empty"));
        }
        let scores: Vec<f64> = candidates
            .iter()
            .map(|c| {
                train
                    .support()
                    .iter()
                    .zip(train.mass())
                    .filter(|(_, m)| **m > 0.0)
                    .map(|(x, m)| m * c.ln_pdf(x))
                    .sum()
            })
            .collect();
        let mut selected = 0;
        for (i, s) in scores.iter().enumerate() {
            if *s > scores[selected] {
                selected = i;
            }
        }
        Ok(FixedFamilyGenerator {
            candidates,
            selected,
            scores,
        })
    }

    pub fn density(&self) -> &AnalyticDensity {
        &self.candidates[self.selected]
    }
}

impl WeakGenerator for FixedFamilyGenerator {
    fn pdf(&self, x: &[f64]) -> f64 {
        self.density().pdf(x)
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        self.density().sample(count, rng)
    }
}

/// A finite table of atoms. Its pdf at a support point is the point's density
/// in the table and zero elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PointMassRepr", into = "PointMassRepr")]
pub struct PointMassGenerator {
    table: DiscreteDistribution,
    index: HashMap<Vec<u64>, usize>,
}

#[derive(Serialize, Deserialize)]
struct PointMassRepr {
    table: DiscreteDistribution,
}

impl From<PointMassRepr> for PointMassGenerator {
    fn from(r: PointMassRepr) -> Self {
        PointMassGenerator::new(r.table)
    }
}

impl From<PointMassGenerator> for PointMassRepr {
    fn from(g: PointMassGenerator) -> Self {
        PointMassRepr { table: g.table }
    }
}

impl PointMassGenerator {
    pub fn new(table: DiscreteDistribution) -> Self {
        let index = table
            .support()
            .iter()
            .enumerate()
            .map(|(i, p)| (p.key(), i))
            .collect();
        PointMassGenerator { table, index }
    }

    pub fn table(&self) -> &DiscreteDistribution {
        &self.table
    }
}

impl WeakGenerator for PointMassGenerator {
    fn pdf(&self, x: &[f64]) -> f64 {
        let key: Vec<u64> = x.iter().map(|&c| (c + 0.0).to_bits()).collect();
        self.index
            .get(&key)
            .map_or(0.0, |&i| self.table.density(i))
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        if count == 0 {
            return Vec::new();
        }
        let pick = WeightedIndex::new(self.table.mass()).expect("table has positive mass");
        (0..count)
            .map(|_| self.table.support()[pick.sample(rng)].clone())
            .collect()
    }
}
