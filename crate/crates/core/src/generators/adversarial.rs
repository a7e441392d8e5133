use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::divergence::tv_masses;
use crate::error::{Error, Result};
use crate::rng;

/// How an adversarial generator chooses the points it starves.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionSelector {
    /// Fixed support indices.
    Points { indices: Vec<usize> },
    /// Points with the smallest training-to-target mass ratio, in ascending order,
    /// until the region holds at least the TV budget.
    #[default]
    GreedyUncover,
    /// Each point independently with probability 1/2 (at least one point).
    Random,
}

impl RegionSelector {
    pub fn indices(
        &self,
        base: &DiscreteDistribution,
        target: Option<&DiscreteDistribution>,
        _delta: f64,
        gamma: f64,
        seed: u64,
    ) -> Result<Vec<usize>> {
        let n = base.len();
        match self {
            RegionSelector::Points { indices } => {
                if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
                    return Err(Error::config(format!(
                        "region index {bad} out of range for {n} points"
                    )));
                }
                Ok(indices.clone())
            }
            RegionSelector::GreedyUncover => {
                let reference = target.filter(|t| t.same_support(base)).map(|t| t.mass());
                Ok(greedy_uncover_region(base.mass(), reference, gamma))
            }
            RegionSelector::Random => {
                let mut r = rng::seeded(seed);
                let mut idx: Vec<usize> = (0..n).filter(|_| r.random::<bool>()).collect();
                if idx.is_empty() {
                    idx = sample_indices(&mut r, n, 1).into_vec();
                }
                Ok(idx)
            }
        }
    }
}

/// Indices sorted by ascending `base / reference` ratio (uniform reference when
/// absent), truncated at the first prefix whose base mass reaches `gamma`.
pub fn greedy_uncover_region(base: &[f64], reference: Option<&[f64]>, gamma: f64) -> Vec<usize> {
    let ratio = |i: usize| match reference {
        Some(p) if p[i] > 0.0 => base[i] / p[i],
        Some(_) => f64::INFINITY,
        None => base[i],
    };
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.sort_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)));
    let mut acc = 0.0;
    let mut region = Vec::new();
    for i in order {
        if acc >= gamma && !region.is_empty() {
            break;
        }
        acc += base[i];
        region.push(i);
    }
    region
}

/// Removes `gamma` mass from `region` proportionally and adds it to the other
/// points proportionally to their mass. When the region holds less than
/// `gamma`, all of its mass is moved. Returns the new distribution and its
/// total variation distance from `base`.
pub fn adversarial_make(
    base: &DiscreteDistribution,
    gamma: f64,
    region: &[usize],
) -> Result<(DiscreteDistribution, f64)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::config("TV budget must be in [0, 1]"));
    }
    let n = base.len();
    let mut inside = vec![false; n];
    for &i in region {
        if i >= n {
            return Err(Error::config(format!("region index {i} out of range")));
        }
        inside[i] = true;
    }
    let q = base.mass();
    let region_mass: f64 = (0..n).filter(|&i| inside[i]).map(|i| q[i]).sum();
    let outside_mass: f64 = (0..n).filter(|&i| !inside[i]).map(|i| q[i]).sum();
    let outside_count = inside.iter().filter(|b| !**b).count();
    let moved = if outside_count == 0 { 0.0 } else { gamma.min(region_mass) };

    let mut mass = q.to_vec();
    if moved > 0.0 {
        let keep = 1.0 - moved / region_mass;
        for i in 0..n {
            if inside[i] {
                mass[i] = if keep <= 0.0 { 0.0 } else { q[i] * keep };
            } else if outside_mass > 0.0 {
                mass[i] = q[i] + moved * q[i] / outside_mass;
            } else {
                mass[i] = moved / outside_count as f64;
            }
        }
    }
    let out = DiscreteDistribution::new(base.support().to_vec(), mass)?
        .with_base_measure(base.base_measure())?;
    let achieved = tv_masses(out.mass(), q);
    Ok((out, achieved))
}
