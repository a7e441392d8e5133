//! Weighted k-means++ seeding and Lloyd refinement.

use rand::Rng;

use crate::dist::{sq_dist, Point};
use crate::error::{Error, Result};

/// Picks `k` distinct seed indices by weighted k-means++.
pub fn kmeanspp<R: Rng + ?Sized>(
    points: &[Point],
    weights: &[f64],
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if k == 0 || points.is_empty() {
        return Err(Error::config("k-means++ needs k >= 1 and at least one point"));
    }
    let first = pick(weights, rng)
        .ok_or_else(|| Error::Degenerate("all seeding weights are zero".into()))?;
    let mut chosen = vec![first];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while chosen.len() < k {
        let score: Vec<f64> = d2.iter().zip(weights).map(|(d, w)| d * w).collect();
        let next = pick(&score, rng).ok_or_else(|| {
            Error::Degenerate(format!(
                "only {} distinct weighted points available for {k} centers",
                chosen.len()
            ))
        })?;
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, &points[next]));
        }
    }
    Ok(chosen)
}

fn pick<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = scores.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = None;
    for (i, &s) in scores.iter().enumerate() {
        if s > 0.0 {
            last = Some(i);
            if u < s {
                return Some(i);
            }
            u -= s;
        }
    }
    last
}

pub fn nearest(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(c, x);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// Weighted Lloyd iterations from the given starting centers. Empty clusters keep
/// their previous center.
pub fn lloyd(points: &[Point], weights: &[f64], mut centers: Vec<Vec<f64>>, iters: usize) -> Vec<Vec<f64>> {
    let d = centers.first().map_or(0, |c| c.len());
    for _ in 0..iters {
        let mut sums = vec![vec![0.0; d]; centers.len()];
        let mut mass = vec![0.0; centers.len()];
        for (p, &w) in points.iter().zip(weights) {
            let j = nearest(&centers, p);
            mass[j] += w;
            for k in 0..d {
                sums[j][k] += w * p[k];
            }
        }
        let mut moved = false;
        for j in 0..centers.len() {
            if mass[j] > 0.0 {
                let c: Vec<f64> = sums[j].iter().map(|s| s / mass[j]).collect();
                if c != centers[j] {
                    moved = true;
                }
                centers[j] = c;
            }
        }
        if !moved {
            break;
        }
    }
    centers
}
