use rand::distr::weighted::WeightedIndex;
use rand::{Rng, RngCore};
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use super::WeakGenerator;
use crate::dist::{DiscreteDistribution, GridSpec, Point};
use crate::error::{Error, Result};

/// Piecewise-constant density on a grid: each bin's mass spread uniformly over it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramGenerator {
    pub grid: GridSpec,
    /// Mass per bin, row-major over the grid cells.
    pub mass: Vec<f64>,
    pub alpha: f64,
}

impl HistogramGenerator {
    /// Bins the training mass, optionally keeps only the `max_bins` heaviest bins
    /// (ties to the lower bin index), then blends with the uniform floor `alpha`.
    pub fn fit(
        train: &DiscreteDistribution,
        grid: GridSpec,
        alpha: f64,
        max_bins: Option<usize>,
    ) -> Result<Self> {
        grid.validate()?;
        if train.dim() != grid.dim() {
            return Err(Error::contract("training data and grid dimensions differ"));
        }
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::config("alpha must be in [0, 1)"));
        }
        let nbins = grid.n_bins();
        let mut mass = vec![0.0; nbins];
        for (x, &m) in train.support().iter().zip(train.mass()) {
            mass[grid.bin_index_clamped(x)] += m;
        }
        if let Some(k) = max_bins.filter(|&k| k < nbins) {
            let mut order: Vec<usize> = (0..nbins).collect();
            order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]).then(a.cmp(&b)));
            for &b in &order[k..] {
                mass[b] = 0.0;
            }
        }
        let total: f64 = mass.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Degenerate("histogram received no mass".into()));
        }
        let floor = alpha / nbins as f64;
        for m in mass.iter_mut() {
            *m = (1.0 - alpha) * (*m / total) + floor;
        }
        Ok(HistogramGenerator { grid, mass, alpha })
    }

    pub fn bin_density(&self, bin: usize) -> f64 {
        self.mass[bin] / self.grid.cell_volume()
    }
}

impl WeakGenerator for HistogramGenerator {
    fn pdf(&self, x: &[f64]) -> f64 {
        match self.grid.bin_index(x) {
            Some(b) => self.bin_density(b),
            None => 0.0,
        }
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        if count == 0 {
            return Vec::new();
        }
        let pick = WeightedIndex::new(&self.mass).expect("histogram has positive mass");
        (0..count)
            .map(|_| {
                let lower = self.grid.bin_lower(pick.sample(rng));
                let coords = lower
                    .iter()
                    .enumerate()
                    .map(|(k, l)| l + rng.random::<f64>() * self.grid.width(k))
                    .collect();
                Point::from_vec_unchecked(coords)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn single_bin_density() {
        // bins of width 0.5 on [0, 2]
        let grid = GridSpec::line(0.0, 2.0, 4).unwrap();
        let train = DiscreteDistribution::new(vec![Point::scalar(0.7), Point::scalar(0.9)], vec![0.5, 0.5]).unwrap();
        let h = HistogramGenerator::fit(&train, grid, 0.0, None).unwrap();
        assert_eq!(h.pdf(&[0.6]), 2.0);
        assert_eq!(h.pdf(&[0.2]), 0.0);
        assert_eq!(h.pdf(&[1.9]), 0.0);
        assert_eq!(h.pdf(&[5.0]), 0.0);
        let s = h.sample(500, &mut seeded(3));
        assert!(s.iter().all(|p| (0.5..1.0).contains(&p[0])));
        assert!(h.sample(0, &mut seeded(3)).is_empty());
    }

    #[test]
    fn floor_and_capacity() {
        let grid = GridSpec::line(0.0, 4.0, 4).unwrap();
        let train = DiscreteDistribution::new(
            [0.5, 1.5, 2.5].iter().map(|&x| Point::scalar(x)).collect(),
            vec![0.5, 0.3, 0.2],
        )
        .unwrap();
        let h = HistogramGenerator::fit(&train, grid.clone(), 0.1, None).unwrap();
        assert!((h.pdf(&[3.5]) - 0.1 / 4.0).abs() < 1e-15);
        let capped = HistogramGenerator::fit(&train, grid, 0.0, Some(2)).unwrap();
        assert_eq!(capped.mass[2], 0.0);
        assert!((capped.mass[0] - 0.625).abs() < 1e-15);
    }
}
