use rand::distr::weighted::WeightedIndex;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::WeakGenerator;
use crate::dist::{sq_dist, DiscreteDistribution, Point};
use crate::error::{Error, Result};

/// Isotropic Gaussian kernel density over weighted centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdeGenerator {
    pub centers: Vec<Point>,
    pub weights: Vec<f64>,
    pub bandwidth: f64,
}

impl KdeGenerator {
    pub fn new(centers: Vec<Point>, weights: Vec<f64>, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::config("bandwidth must be positive"));
        }
        if centers.is_empty() || centers.len() != weights.len() {
            return Err(Error::config("KDE needs matching non-empty centers and weights"));
        }
        Ok(KdeGenerator {
            centers,
            weights,
            bandwidth,
        })
    }

    pub fn fit(train: &DiscreteDistribution, bandwidth: f64) -> Result<Self> {
        Self::new(train.support().to_vec(), train.mass().to_vec(), bandwidth)
    }

    /// Equal-weight KDE over raw samples.
    pub fn from_samples(samples: Vec<Point>, bandwidth: f64) -> Result<Self> {
        let n = samples.len();
        Self::new(samples, vec![1.0 / n.max(1) as f64; n], bandwidth)
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let d = x.len() as f64;
        let h2 = self.bandwidth * self.bandwidth;
        let log_norm = -0.5 * d * (2.0 * std::f64::consts::PI * h2).ln();
        let terms: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| w.ln() + log_norm - 0.5 * sq_dist(c, x) / h2)
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }
}

impl WeakGenerator for KdeGenerator {
    fn pdf(&self, x: &[f64]) -> f64 {
        self.ln_pdf(x).exp()
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        if count == 0 {
            return Vec::new();
        }
        let pick = WeightedIndex::new(&self.weights).expect("positive KDE weights");
        (0..count)
            .map(|_| {
                let c = &self.centers[pick.sample(rng)];
                let coords = c
                    .iter()
                    .map(|m| {
                        let z: f64 = StandardNormal.sample(rng);
                        m + self.bandwidth * z
                    })
                    .collect();
                Point::from_vec_unchecked(coords)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_height() {
        let k = KdeGenerator::from_samples(vec![Point::scalar(0.0)], 0.1).unwrap();
        assert!((k.pdf(&[0.0]) - 3.989_422_804_014_327).abs() < 1e-12);
        assert!(k.ln_pdf(&[5.0]) < -100.0);
    }
}
