//! Points, discrete distributions, analytic Gaussian mixtures, grids, and the
//! multiplicative-weights state.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`DiscreteDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::config("point must have at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::config(format!("non-finite coordinate {c}")));
        }
        Ok(Point(coords))
    }

    /// Builds a point without validation. Callers guarantee finite coordinates.
    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Bitwise identity key (with `-0.0` folded onto `0.0`).
    pub fn key(&self) -> Vec<u64> {
        self.0.iter().map(|&c| (c + 0.0).to_bits()).collect()
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<[f64; 1]> for Point {
    fn from(c: [f64; 1]) -> Self {
        Point(c.to_vec())
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

pub fn check_dims(points: &[Point]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::config("point set is empty"))?;
    let d = first.dim();
    if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.dim() != d) {
        return Err(Error::config(format!(
            "point {i} has dimension {} but the set has dimension {d}",
            p.dim()
        )));
    }
    Ok(d)
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// log2(Σ 2^v) computed stably.
pub fn log2_sum_exp2(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values.iter().map(|v| (v - max).exp2()).sum();
    max + s.log2()
}

/// Finite-support distribution. `base_measure` is the reference measure carried by
/// each support point: 1 for counting measure, the cell volume for a quadrature grid.
/// Densities are `mass / base_measure`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    support: Vec<Point>,
    mass: Vec<f64>,
    #[serde(default = "one")]
    base_measure: f64,
}

fn one() -> f64 {
    1.0
}

impl DiscreteDistribution {
    pub fn new(support: Vec<Point>, mass: Vec<f64>) -> Result<Self> {
        if support.len() != mass.len() {
            return Err(Error::contract(format!(
                "support has {} points but {} masses",
                support.len(),
                mass.len()
            )));
        }
        check_dims(&support)?;
        if let Some(m) = mass.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::config(format!("invalid probability mass {m}")));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::config(format!("masses sum to {total}, not 1")));
        }
        let mut seen = HashMap::with_capacity(support.len());
        for (i, p) in support.iter().enumerate() {
            if let Some(j) = seen.insert(p.key(), i) {
                return Err(Error::config(format!(
                    "support points {j} and {i} coincide"
                )));
            }
        }
        Ok(DiscreteDistribution {
            support,
            mass,
            base_measure: 1.0,
        })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(support: Vec<Point>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::config("weights must have a positive finite sum"));
        }
        let mut mass: Vec<f64> = weights.iter().map(|w| w / total).collect();
        renormalize(&mut mass);
        Self::new(support, mass)
    }

    pub fn uniform(support: Vec<Point>) -> Result<Self> {
        let n = support.len();
        Self::from_weights(support, &vec![1.0; n])
    }

    /// Empirical distribution of a multiset of samples; duplicates are merged
    /// in first-occurrence order.
    pub fn from_samples(samples: &[Point]) -> Result<Self> {
        let ones = vec![1.0; samples.len()];
        Self::from_weighted_samples(samples, &ones)
    }

    /// Like [`from_samples`](Self::from_samples) with per-sample weights.
    pub fn from_weighted_samples(samples: &[Point], weights: &[f64]) -> Result<Self> {
        if samples.len() != weights.len() {
            return Err(Error::contract("sample and weight counts differ"));
        }
        check_dims(samples)?;
        let mut index: HashMap<Vec<u64>, usize> = HashMap::with_capacity(samples.len());
        let mut support = Vec::new();
        let mut acc = Vec::new();
        for (p, &w) in samples.iter().zip(weights) {
            match index.get(&p.key()) {
                Some(&j) => acc[j] += w,
                None => {
                    index.insert(p.key(), support.len());
                    support.push(p.clone());
                    acc.push(w);
                }
            }
        }
        Self::from_weights(support, &acc)
    }

    pub fn with_base_measure(mut self, base_measure: f64) -> Result<Self> {
        if !(base_measure > 0.0 && base_measure.is_finite()) {
            return Err(Error::config("base measure must be positive"));
        }
        self.base_measure = base_measure;
        Ok(self)
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn base_measure(&self) -> f64 {
        self.base_measure
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn density(&self, i: usize) -> f64 {
        self.mass[i] / self.base_measure
    }

    pub fn densities(&self) -> Vec<f64> {
        self.mass.iter().map(|m| m / self.base_measure).collect()
    }

    /// Index of the support point equal to `x`, if any.
    pub fn position(&self, x: &[f64]) -> Option<usize> {
        self.support.iter().position(|p| p.coords() == x)
    }

    /// Same support in the same order as `other`.
    pub fn same_support(&self, other: &DiscreteDistribution) -> bool {
        self.support == other.support
    }
}

/// Pushes the rounding residue of a near-normalized mass vector onto its
/// largest entry so the sum is 1 to the last ulp or so.
fn renormalize(mass: &mut [f64]) {
    let total: f64 = mass.iter().sum();
    if let Some((imax, _)) = mass
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
    {
        let fixed = mass[imax] + (1.0 - total);
        if fixed >= 0.0 {
            mass[imax] = fixed;
        }
    }
}

/// Standard normal density.
pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Upper tail Pr[Z > z].
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

/// Pr[lo ≤ X ≤ hi] for X ~ N(mean, sd²), evaluated on the side of the
/// distribution that avoids cancellation in the tails.
pub fn normal_interval(lo: f64, hi: f64, mean: f64, sd: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    let p = if a >= 0.0 {
        std_normal_sf(a) - std_normal_sf(b)
    } else if b <= 0.0 {
        std_normal_sf(-b) - std_normal_sf(-a)
    } else {
        1.0 - std_normal_sf(-a) - std_normal_sf(b)
    };
    p.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Diagonal of the covariance matrix.
    pub var: Vec<f64>,
}

/// Mixture of axis-aligned Gaussians with known parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnalyticDensityRepr", into = "AnalyticDensityRepr")]
pub struct AnalyticDensity {
    components: Vec<GaussianComponent>,
    /// ln of each component's normalizing constant, including its weight.
    log_coef: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct AnalyticDensityRepr {
    components: Vec<GaussianComponent>,
}

impl TryFrom<AnalyticDensityRepr> for AnalyticDensity {
    type Error = Error;

    fn try_from(r: AnalyticDensityRepr) -> Result<Self> {
        AnalyticDensity::new(r.components)
    }
}

impl From<AnalyticDensity> for AnalyticDensityRepr {
    fn from(d: AnalyticDensity) -> Self {
        AnalyticDensityRepr {
            components: d.components,
        }
    }
}

impl AnalyticDensity {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::config("mixture needs at least one component"))?;
        let d = first.mean.len();
        if d == 0 {
            return Err(Error::config("component mean is empty"));
        }
        let mut total = 0.0;
        for (k, c) in components.iter().enumerate() {
            if c.mean.len() != d || c.var.len() != d {
                return Err(Error::config(format!("component {k} has inconsistent dimension")));
            }
            if !(c.weight >= 0.0 && c.weight.is_finite()) {
                return Err(Error::config(format!("component {k} has invalid weight")));
            }
            if c.var.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::config(format!("component {k} has non-positive variance")));
            }
            if c.mean.iter().any(|m| !m.is_finite()) {
                return Err(Error::config(format!("component {k} has non-finite mean")));
            }
            total += c.weight;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::config(format!("component weights sum to {total}, not 1")));
        }
        let log_coef = components
            .iter()
            .map(|c| {
                let log_det: f64 = c.var.iter().map(|v| v.ln()).sum();
                c.weight.ln() - 0.5 * (d as f64 * (2.0 * PI).ln() + log_det)
            })
            .collect();
        Ok(AnalyticDensity {
            components,
            log_coef,
        })
    }

    /// 1D mixture of unit-variance Gaussians from `(weight, mean)` pairs.
    pub fn unit_variance_1d(parts: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            parts
                .iter()
                .map(|&(weight, mean)| GaussianComponent {
                    weight,
                    mean: vec![mean],
                    var: vec![1.0],
                })
                .collect(),
        )
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components[0].mean.len()
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.components
            .iter()
            .zip(&self.log_coef)
            .filter(|(c, _)| c.weight > 0.0)
            .map(|(c, lc)| (lc - 0.5 * mahalanobis(x, c)).exp())
            .sum()
    }

    pub fn ln_pdf(&self, x: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .components
            .iter()
            .zip(&self.log_coef)
            .filter(|(c, _)| c.weight > 0.0)
            .map(|(c, lc)| lc - 0.5 * mahalanobis(x, c))
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Vec<Point> {
        use rand::distr::weighted::WeightedIndex;
        use rand_distr::{Distribution, StandardNormal};
        let pick = WeightedIndex::new(self.components.iter().map(|c| c.weight))
            .expect("validated weights");
        (0..count)
            .map(|_| {
                let c = &self.components[pick.sample(rng)];
                let coords = c
                    .mean
                    .iter()
                    .zip(&c.var)
                    .map(|(m, v)| {
                        let z: f64 = StandardNormal.sample(rng);
                        m + v.sqrt() * z
                    })
                    .collect();
                Point::from_vec_unchecked(coords)
            })
            .collect()
    }

    /// Probability of a union of disjoint 1D intervals, from Gaussian CDF differences.
    pub fn interval_probability(&self, intervals: &[(f64, f64)]) -> Result<f64> {
        if self.dim() != 1 {
            return Err(Error::Unsupported(
                "interval probability is defined for 1D densities".into(),
            ));
        }
        let mut total = 0.0;
        for c in &self.components {
            let sd = c.var[0].sqrt();
            for &(lo, hi) in intervals {
                total += c.weight * normal_interval(lo, hi, c.mean[0], sd);
            }
        }
        Ok(total)
    }
}

fn mahalanobis(x: &[f64], c: &GaussianComponent) -> f64 {
    x.iter()
        .zip(&c.mean)
        .zip(&c.var)
        .map(|((xi, m), v)| (xi - m) * (xi - m) / v)
        .sum()
}

/// Axis-aligned box split into `cells` equal cells per axis. Histograms use the
/// cells as bins; quadrature uses the `cells + 1` nodes per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: usize,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: usize) -> Result<Self> {
        let g = GridSpec { lo, hi, cells };
        g.validate()?;
        Ok(g)
    }

    pub fn line(lo: f64, hi: f64, cells: usize) -> Result<Self> {
        Self::new(vec![lo], vec![hi], cells)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_empty() || self.lo.len() != self.hi.len() {
            return Err(Error::config("grid bounds must be non-empty and of equal length"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h) || !l.is_finite() || !h.is_finite()) {
            return Err(Error::config("grid requires lo < hi on every axis"));
        }
        if self.cells < 2 {
            return Err(Error::config("grid needs at least 2 cells per axis"));
        }
        Ok(())
    }

    /// Bounding box of `points`, padded by `pad` of its extent per axis.
    pub fn bounding(points: &[Point], cells: usize, pad: f64) -> Result<Self> {
        let d = check_dims(points)?;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in points {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in 0..d {
            let extent = (hi[k] - lo[k]).max(1e-6);
            lo[k] -= pad * extent;
            hi[k] += pad * extent;
            if hi[k] - lo[k] < 1e-6 {
                lo[k] -= 0.5;
                hi[k] += 0.5;
            }
        }
        Self::new(lo, hi, cells)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn n_bins(&self) -> usize {
        self.cells.pow(self.dim() as u32)
    }

    fn axis_cell(&self, axis: usize, v: f64) -> isize {
        ((v - self.lo[axis]) / self.width(axis)).floor() as isize
    }

    /// Bin containing `x`; the upper boundary belongs to the last cell.
    pub fn bin_index(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.dim() {
            if x[k] < self.lo[k] || x[k] > self.hi[k] {
                return None;
            }
            let c = self.axis_cell(k, x[k]).clamp(0, self.cells as isize - 1) as usize;
            idx = idx * self.cells + c;
        }
        Some(idx)
    }

    /// Bin containing `x`, with out-of-box coordinates clamped to the edge cells.
    pub fn bin_index_clamped(&self, x: &[f64]) -> usize {
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let c = self.axis_cell(k, x[k]).clamp(0, self.cells as isize - 1) as usize;
            idx = idx * self.cells + c;
        }
        idx
    }

    pub fn bin_cells(&self, mut idx: usize) -> Vec<usize> {
        let mut cells = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            cells[k] = idx % self.cells;
            idx /= self.cells;
        }
        cells
    }

    pub fn bin_lower(&self, idx: usize) -> Vec<f64> {
        self.bin_cells(idx)
            .iter()
            .enumerate()
            .map(|(k, &c)| self.lo[k] + c as f64 * self.width(k))
            .collect()
    }

    pub fn bin_center(&self, idx: usize) -> Point {
        let lower = self.bin_lower(idx);
        Point::from_vec_unchecked(
            lower
                .iter()
                .enumerate()
                .map(|(k, l)| l + 0.5 * self.width(k))
                .collect(),
        )
    }

    /// Quadrature nodes along `axis`.
    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        let w = self.width(axis);
        (0..=self.cells).map(|i| self.lo[axis] + i as f64 * w).collect()
    }

    /// Trapezoid-rule weights along one axis (same for every axis up to width).
    pub fn trapezoid_weights(&self, axis: usize) -> Vec<f64> {
        let w = self.width(axis);
        (0..=self.cells)
            .map(|i| if i == 0 || i == self.cells { 0.5 * w } else { w })
            .collect()
    }

    /// Same box at twice the resolution.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            cells: self.cells * 2,
        }
    }
}

/// Discretizes an analytic density onto the cell centers of `grid`
/// (midpoint rule, renormalized). The result carries the cell volume as its
/// base measure so that its densities approximate the analytic ones.
pub fn discretize(density: &AnalyticDensity, grid: &GridSpec) -> Result<DiscreteDistribution> {
    if density.dim() != grid.dim() {
        return Err(Error::contract("density and grid dimensions differ"));
    }
    let vol = grid.cell_volume();
    let mut support = Vec::new();
    let mut weights = Vec::new();
    for b in 0..grid.n_bins() {
        let c = grid.bin_center(b);
        let m = density.pdf(&c) * vol;
        if m > 0.0 {
            support.push(c);
            weights.push(m);
        }
    }
    DiscreteDistribution::from_weights(support, &weights)?.with_base_measure(vol)
}

/// The multiplicative-weights state: per-point weights stored as log2 values,
/// together with the integer number of doublings each point has received.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedDataset {
    points: Vec<Point>,
    log2_weight: Vec<f64>,
    doublings: Vec<u32>,
    round: usize,
    log2_total: f64,
}

impl WeightedDataset {
    /// Uniform weights 1/n over an empirical sample (duplicates stay separate).
    pub fn init_empirical(points: Vec<Point>) -> Result<Self> {
        check_dims(&points)?;
        let n = points.len();
        let lw = -(n as f64).log2();
        Ok(WeightedDataset {
            log2_weight: vec![lw; n],
            doublings: vec![0; n],
            points,
            round: 1,
            log2_total: 0.0,
        })
    }

    /// Weights equal to the target masses. Zero-mass points get weight -inf in log2.
    pub fn init_exact(target: &DiscreteDistribution) -> Self {
        let log2_weight: Vec<f64> = target.mass().iter().map(|m| m.log2()).collect();
        let log2_total = log2_sum_exp2(&log2_weight);
        WeightedDataset {
            points: target.support().to_vec(),
            doublings: vec![0; log2_weight.len()],
            log2_weight,
            round: 1,
            log2_total,
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn log2_weight(&self) -> &[f64] {
        &self.log2_weight
    }

    pub fn doublings(&self) -> &[u32] {
        &self.doublings
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn log2_total(&self) -> f64 {
        self.log2_total
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// w_t(x_i) / W_t for every point.
    pub fn masses(&self) -> Vec<f64> {
        self.log2_weight
            .iter()
            .map(|lw| (lw - self.log2_total).exp2())
            .collect()
    }

    /// The round distribution P_t, merging duplicate points.
    pub fn normalize(&self) -> Result<DiscreteDistribution> {
        DiscreteDistribution::from_weighted_samples(&self.points, &self.masses())
    }

    /// Doubles the weight of every flagged point and advances the round.
    pub fn double_weights(&self, doubled: &[bool]) -> Result<WeightedDataset> {
        if doubled.len() != self.points.len() {
            return Err(Error::contract(format!(
                "{} flags for {} points",
                doubled.len(),
                self.points.len()
            )));
        }
        let mut next = self.clone();
        for (i, &flag) in doubled.iter().enumerate() {
            if flag {
                next.log2_weight[i] += 1.0;
                next.doublings[i] += 1;
            }
        }
        next.log2_total = log2_sum_exp2(&next.log2_weight);
        next.round += 1;
        Ok(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pts(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::scalar(x)).collect()
    }

    #[test]
    fn empirical_init_is_uniform() {
        let ws = WeightedDataset::init_empirical(pts(&[0., 0., 0., 0., 0., 1., 1.])).unwrap();
        assert_eq!(ws.round(), 1);
        assert_eq!(ws.log2_total(), 0.0);
        for m in ws.masses() {
            assert_relative_eq!(m, 1.0 / 7.0, max_relative = 1e-15);
        }
        let one = WeightedDataset::init_empirical(pts(&[3.0])).unwrap();
        assert_eq!(one.masses(), vec![1.0]);
        let four = WeightedDataset::init_empirical(pts(&[1., 2., 3., 4.])).unwrap();
        assert!(four.log2_weight().iter().all(|&w| w == -2.0));
        assert!(four.masses().iter().all(|&m| m == 0.25));
    }

    #[test]
    fn empty_input_is_a_config_error() {
        assert!(matches!(
            WeightedDataset::init_empirical(vec![]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn exact_init_copies_target() {
        let p = DiscreteDistribution::new(pts(&[0., 1.]), vec![5. / 7., 2. / 7.]).unwrap();
        let ws = WeightedDataset::init_exact(&p);
        assert_relative_eq!(ws.masses()[0], 5. / 7., max_relative = 1e-15);
        assert_relative_eq!(ws.masses()[1], 2. / 7., max_relative = 1e-15);
        assert_relative_eq!(ws.log2_total(), 0.0, epsilon = 1e-15);

        let u = DiscreteDistribution::uniform(pts(&(0..10).map(f64::from).collect::<Vec<_>>())).unwrap();
        assert!(WeightedDataset::init_exact(&u).masses().iter().all(|m| (m - 0.1).abs() < 1e-15));

        let point = DiscreteDistribution::new(pts(&[4.0]), vec![1.0]).unwrap();
        assert_eq!(WeightedDataset::init_exact(&point).masses(), vec![1.0]);
    }

    #[test]
    fn multiset_round_after_doubling_b() {
        // five copies of A, two of B; B doubled
        let ws = WeightedDataset::init_empirical(pts(&[0., 0., 0., 0., 0., 1., 1.])).unwrap();
        let flags = [false, false, false, false, false, true, true];
        let next = ws.double_weights(&flags).unwrap();
        assert_eq!(next.round(), 2);
        assert_eq!(next.doublings(), &[0, 0, 0, 0, 0, 1, 1]);
        let p2 = next.normalize().unwrap();
        assert_eq!(p2.len(), 2);
        assert_relative_eq!(p2.mass()[0], 5. / 9., max_relative = 1e-15);
        assert_relative_eq!(p2.mass()[1], 4. / 9., max_relative = 1e-15);
        assert_relative_eq!(next.log2_total().exp2(), 9. / 7., max_relative = 1e-15);
    }

    #[test]
    fn normalize_hand_example() {
        let p = DiscreteDistribution::from_weights(pts(&[0., 1., 2.]), &[1., 2., 1.]).unwrap();
        let ws = WeightedDataset::init_exact(&p);
        let m = ws.normalize().unwrap();
        assert_eq!(m.mass(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn doubling_flags() {
        let ws = WeightedDataset::init_empirical(pts(&[0., 1., 2.])).unwrap();
        let same = ws.double_weights(&[false; 3]).unwrap();
        assert_eq!(same.log2_weight(), ws.log2_weight());
        assert_eq!(same.round(), 2);
        let all = ws.double_weights(&[true; 3]).unwrap();
        assert_eq!(all.masses(), ws.masses());
        assert!(matches!(ws.double_weights(&[true]), Err(Error::Contract(_))));
    }

    #[test]
    fn analytic_pdf_values() {
        let n01 = AnalyticDensity::unit_variance_1d(&[(1.0, 0.0)]).unwrap();
        assert_relative_eq!(n01.pdf(&[0.0]), 0.398_942_280_401_432_7, max_relative = 1e-14);
        let fig1 = AnalyticDensity::unit_variance_1d(&[(0.9, 0.0), (0.05, 10.0), (0.05, -10.0)]).unwrap();
        // side modes contribute 0.1 * φ(10) ~ 7.7e-24
        assert_relative_eq!(fig1.pdf(&[0.0]), 0.9 / (2.0 * PI).sqrt(), max_relative = 1e-14);
        let stacked = AnalyticDensity::unit_variance_1d(&[(0.3, 2.0), (0.7, 2.0)]).unwrap();
        assert_relative_eq!(stacked.pdf(&[2.0]), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(fig1.ln_pdf(&[3.0]), fig1.pdf(&[3.0]).ln(), max_relative = 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(DiscreteDistribution::new(pts(&[0., 1.]), vec![0.5, 0.6]).is_err());
        assert!(DiscreteDistribution::new(pts(&[0., 0.]), vec![0.5, 0.5]).is_err());
        assert!(DiscreteDistribution::new(pts(&[0., 1.]), vec![1.0]).is_err());
        assert!(DiscreteDistribution::new(pts(&[0., 1.]), vec![-0.1, 1.1]).is_err());
        assert!(Point::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn grid_binning() {
        let g = GridSpec::new(vec![0.0, 0.0], vec![2.0, 4.0], 4).unwrap();
        assert_eq!(g.n_bins(), 16);
        assert_eq!(g.cell_volume(), 0.5);
        assert_eq!(g.bin_index(&[0.1, 0.1]), Some(0));
        assert_eq!(g.bin_index(&[2.0, 4.0]), Some(15));
        assert_eq!(g.bin_index(&[2.1, 0.0]), None);
        assert_eq!(g.bin_index_clamped(&[2.1, -1.0]), 12);
        let c = g.bin_center(g.bin_index(&[1.2, 3.3]).unwrap());
        assert_eq!(c.coords(), &[1.25, 3.5]);
        assert!(GridSpec::line(1.0, 1.0, 4).is_err());
        assert!(GridSpec::line(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn tail_interval_precision() {
        // Φ(14) − Φ(6) relative accuracy matters for the 1e-9 side-mode masses
        let p = normal_interval(6.0, 14.0, 0.0, 1.0);
        assert_relative_eq!(p, 9.865_876_450_376_98e-10, max_relative = 1e-9);
        assert_relative_eq!(normal_interval(-1e300, 1e300, 0.0, 1.0), 1.0, epsilon = 1e-15);
    }
}
