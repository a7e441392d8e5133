use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::WeakGenerator;
use crate::dist::{AnalyticDensity, DiscreteDistribution, GaussianComponent, Point};
use crate::error::{Error, Result};
use crate::kmeans::kmeanspp;
use crate::rng::{self, Purpose};

/// Diagonal-covariance Gaussian mixture fitted by weighted EM.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmmGenerator {
    pub density: AnalyticDensity,
    /// Weighted log-likelihood before each EM iteration of the kept restart, then the final value.
    pub loglik_trace: Vec<f64>,
}

impl GmmGenerator {
    pub fn fit(
        train: &DiscreteDistribution,
        k: usize,
        max_iter: usize,
        var_floor: f64,
        restarts: usize,
        seed: u64,
    ) -> Result<Self> {
        if k > train.len() {
            return Err(Error::config(format!(
                "{k} components requested but the training data has only {} distinct points",
                train.len()
            )));
        }
        let mut best: Option<(f64, Vec<GaussianComponent>, Vec<f64>)> = None;
        for r in 0..restarts.max(1) {
            let mut rng = rng::stream(seed, r as u64, Purpose::Fit);
            let (comps, trace) = em(train, k, max_iter, var_floor, &mut rng)?;
            let ll = *trace.last().expect("trace is non-empty");
            if best.as_ref().is_none_or(|(b, _, _)| ll > *b) {
                best = Some((ll, comps, trace));
            }
        }
        let (_, comps, loglik_trace) = best.expect("at least one restart");
        Ok(GmmGenerator {
            density: AnalyticDensity::new(comps)?,
            loglik_trace,
        })
    }
}

fn em(
    train: &DiscreteDistribution,
    k: usize,
    max_iter: usize,
    var_floor: f64,
    rng: &mut dyn RngCore,
) -> Result<(Vec<GaussianComponent>, Vec<f64>)> {
    let pts = train.support();
    let w = train.mass();
    let d = train.dim();
    let n = pts.len();

    let mut mean_all = vec![0.0; d];
    for (p, &m) in pts.iter().zip(w) {
        for j in 0..d {
            mean_all[j] += m * p[j];
        }
    }
    let mut var_all = vec![0.0; d];
    for (p, &m) in pts.iter().zip(w) {
        for j in 0..d {
            var_all[j] += m * (p[j] - mean_all[j]).powi(2);
        }
    }
    let init_var: Vec<f64> = var_all.iter().map(|v| v.max(var_floor)).collect();

    let seeds = kmeanspp(pts, w, k, rng)?;
    let mut comps: Vec<GaussianComponent> = seeds
        .iter()
        .map(|&i| GaussianComponent {
            weight: 1.0 / k as f64,
            mean: pts[i].to_vec(),
            var: init_var.clone(),
        })
        .collect();

    let mut trace = Vec::new();
    let mut resp = vec![0.0; n * k];
    for _ in 0..max_iter {
        let ll = e_step(pts, w, &comps, &mut resp);
        let converged = trace
            .last()
            .is_some_and(|&prev: &f64| ll - prev <= 1e-10 * (1.0 + ll.abs()));
        trace.push(ll);
        if converged {
            return Ok((comps, trace));
        }
        m_step(pts, w, &resp, &mut comps, var_floor);
    }
    let ll = e_step(pts, w, &comps, &mut resp);
    trace.push(ll);
    Ok((comps, trace))
}

/// Fills responsibilities and returns the weighted log-likelihood.
fn e_step(pts: &[Point], w: &[f64], comps: &[GaussianComponent], resp: &mut [f64]) -> f64 {
    let k = comps.len();
    let coef: Vec<f64> = comps
        .iter()
        .map(|c| {
            let log_det: f64 = c.var.iter().map(|v| v.ln()).sum();
            c.weight.ln() - 0.5 * (c.mean.len() as f64 * (2.0 * std::f64::consts::PI).ln() + log_det)
        })
        .collect();
    let mut ll = 0.0;
    for (i, p) in pts.iter().enumerate() {
        let row = &mut resp[i * k..(i + 1) * k];
        let mut max = f64::NEG_INFINITY;
        for (j, c) in comps.iter().enumerate() {
            let q: f64 = p
                .iter()
                .zip(&c.mean)
                .zip(&c.var)
                .map(|((x, m), v)| (x - m) * (x - m) / v)
                .sum();
            row[j] = coef[j] - 0.5 * q;
            max = max.max(row[j]);
        }
        let mut s = 0.0;
        for r in row.iter_mut() {
            *r = (*r - max).exp();
            s += *r;
        }
        for r in row.iter_mut() {
            *r /= s;
        }
        ll += w[i] * (max + s.ln());
    }
    ll
}

fn m_step(pts: &[Point], w: &[f64], resp: &[f64], comps: &mut [GaussianComponent], var_floor: f64) {
    let k = comps.len();
    let d = comps[0].mean.len();
    for (j, c) in comps.iter_mut().enumerate() {
        let mut nk = 0.0;
        let mut sum = vec![0.0; d];
        for (i, p) in pts.iter().enumerate() {
            let r = w[i] * resp[i * k + j];
            nk += r;
            for t in 0..d {
                sum[t] += r * p[t];
            }
        }
        if !(nk > 1e-300) {
            // empty component: drop its weight, keep its shape
            c.weight = 0.0;
            continue;
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / nk).collect();
        let mut var = vec![0.0; d];
        for (i, p) in pts.iter().enumerate() {
            let r = w[i] * resp[i * k + j];
            for t in 0..d {
                var[t] += r * (p[t] - mean[t]).powi(2);
            }
        }
        c.weight = nk;
        c.mean = mean;
        c.var = var.iter().map(|v| (v / nk).max(var_floor)).collect();
    }
    let total: f64 = comps.iter().map(|c| c.weight).sum();
    for c in comps.iter_mut() {
        c.weight /= total;
    }
}

impl WeakGenerator for GmmGenerator {
    fn pdf(&self, x: &[f64]) -> f64 {
        self.density.pdf(x)
    }

    fn sample(&self, count: usize, rng: &mut dyn RngCore) -> Vec<Point> {
        if count == 0 {
            return Vec::new();
        }
        self.density.sample(count, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{discretize, GridSpec};

    #[test]
    fn single_component_moment_match() {
        let p = AnalyticDensity::unit_variance_1d(&[(0.9, 0.0), (0.05, 10.0), (0.05, -10.0)]).unwrap();
        let train = discretize(&p, &GridSpec::line(-20.0, 20.0, 4000).unwrap()).unwrap();
        let g = GmmGenerator::fit(&train, 1, 100, 1e-6, 1, 0).unwrap();
        let c = &g.density.components()[0];
        assert!(c.mean[0].abs() < 1e-9);
        // E[x²] = 0.9·1 + 0.1·(1 + 100)
        assert!((c.var[0] - 11.0).abs() < 1e-3, "var {}", c.var[0]);
    }

    #[test]
    fn loglik_never_decreases() {
        let p = AnalyticDensity::unit_variance_1d(&[(0.5, -3.0), (0.3, 0.5), (0.2, 4.0)]).unwrap();
        let pts = p.sample(400, &mut crate::rng::seeded(9));
        let train = DiscreteDistribution::from_samples(&pts).unwrap();
        let g = GmmGenerator::fit(&train, 3, 100, 1e-6, 3, 4).unwrap();
        for w in g.loglik_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn too_many_components() {
        let train = DiscreteDistribution::uniform(vec![Point::scalar(0.0), Point::scalar(1.0)]).unwrap();
        assert!(matches!(GmmGenerator::fit(&train, 3, 10, 1e-6, 1, 0), Err(Error::Config(_))));
    }
}
