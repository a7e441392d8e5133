//! Total variation, KL, Jensen-Shannon and Hellinger distances, on discrete
//! distributions and on 1D/2D analytic densities by trapezoid quadrature.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{AnalyticDensity, DiscreteDistribution, GridSpec};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    Tv,
    Kl,
    Js,
    Hellinger,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Two,
    E,
}

impl LogBase {
    fn scale(self) -> f64 {
        match self {
            LogBase::Two => std::f64::consts::LOG2_E,
            LogBase::E => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub kind: DivergenceKind,
    pub value: f64,
    /// Present for KL and JS only.
    pub log_base: Option<LogBase>,
    /// Some KL integrand cell hit the cap.
    pub saturated: bool,
}

/// Densities below this are treated as zero in KL-type integrands.
pub const ZERO_DENSITY: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Upper clip on the KL integrand per node.
    pub kl_cap: f64,
    /// Fraction of each density's mass the grid must capture.
    pub min_coverage: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            kl_cap: 1e6,
            min_coverage: 0.9999,
        }
    }
}

/// 0.5·Σ|p_i − q_i| for two distributions over the same support in the same order.
pub fn tv_discrete(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if !p.same_support(q) {
        return Err(Error::contract(
            "total variation needs identical supports; use tv_discrete_union to zero-fill",
        ));
    }
    Ok(tv_masses(p.mass(), q.mass()))
}

/// Total variation over the union of both supports, zero-filling missing points.
pub fn tv_discrete_union(p: &DiscreteDistribution, q: &DiscreteDistribution) -> f64 {
    let (a, b) = aligned_masses(p, q);
    tv_masses(&a, &b)
}

/// Mass vectors of `p` and `q` over the union of their supports
/// (`p`'s points first, then `q`'s extra points).
pub fn aligned_masses(p: &DiscreteDistribution, q: &DiscreteDistribution) -> (Vec<f64>, Vec<f64>) {
    let mut index = std::collections::HashMap::new();
    for (i, x) in p.support().iter().enumerate() {
        index.insert(x.key(), i);
    }
    let mut a = p.mass().to_vec();
    let mut b = vec![0.0; a.len()];
    for (x, &m) in q.support().iter().zip(q.mass()) {
        match index.get(&x.key()) {
            Some(&i) => b[i] += m,
            None => {
                a.push(0.0);
                b.push(m);
            }
        }
    }
    (a, b)
}

pub fn tv_masses(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * s).min(1.0)
}

/// KL(p‖q) over aligned mass vectors; infinite if p puts mass where q has none.
pub fn kl_masses(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return f64::INFINITY;
        }
        s += a * (a / b).ln();
    }
    (s * base.scale()).max(0.0)
}

pub fn js_masses(p: &[f64], q: &[f64], base: LogBase) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    (0.5 * kl_masses(p, &m, base) + 0.5 * kl_masses(q, &m, base)).max(0.0)
}

/// Hellinger distance with H² = ½Σ(√p − √q)², so H ∈ [0, 1].
pub fn hellinger_masses(p: &[f64], q: &[f64]) -> f64 {
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2))
        .sum();
    (0.5 * s).sqrt().min(1.0)
}

/// Any divergence between two discrete distributions, over the union of supports.
pub fn divergence_discrete(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    kind: DivergenceKind,
    base: LogBase,
) -> DivergenceValue {
    let (a, b) = aligned_masses(p, q);
    let value = match kind {
        DivergenceKind::Tv => tv_masses(&a, &b),
        DivergenceKind::Kl => kl_masses(&a, &b, base),
        DivergenceKind::Js => js_masses(&a, &b, base),
        DivergenceKind::Hellinger => hellinger_masses(&a, &b),
    };
    DivergenceValue {
        kind,
        value,
        log_base: log_base_for(kind, base),
        saturated: false,
    }
}

fn log_base_for(kind: DivergenceKind, base: LogBase) -> Option<LogBase> {
    matches!(kind, DivergenceKind::Kl | DivergenceKind::Js).then_some(base)
}

/// Quadrature nodes and trapezoid weights over a 1D or 2D grid, flattened row-major.
fn quadrature(grid: &GridSpec) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let nodes0 = grid.nodes(0);
    let w0 = grid.trapezoid_weights(0);
    match grid.dim() {
        1 => Ok((nodes0.iter().map(|&x| vec![x]).collect(), w0)),
        2 => {
            let nodes1 = grid.nodes(1);
            let w1 = grid.trapezoid_weights(1);
            let mut pts = Vec::with_capacity(nodes0.len() * nodes1.len());
            let mut ws = Vec::with_capacity(pts.capacity());
            for (x, wx) in nodes0.iter().zip(&w0) {
                for (y, wy) in nodes1.iter().zip(&w1) {
                    pts.push(vec![*x, *y]);
                    ws.push(wx * wy);
                }
            }
            Ok((pts, ws))
        }
        d => Err(Error::Unsupported(format!(
            "quadrature divergences are limited to 1D and 2D, got {d}D"
        ))),
    }
}

/// Trapezoid-rule divergence between two analytic densities, `kind(a ‖ b)`.
pub fn divergence_numeric(
    a: &AnalyticDensity,
    b: &AnalyticDensity,
    kind: DivergenceKind,
    grid: &GridSpec,
    base: LogBase,
) -> Result<DivergenceValue> {
    divergence_numeric_with(a, b, kind, grid, base, &QuadratureOptions::default())
}

pub fn divergence_numeric_with(
    a: &AnalyticDensity,
    b: &AnalyticDensity,
    kind: DivergenceKind,
    grid: &GridSpec,
    base: LogBase,
    opts: &QuadratureOptions,
) -> Result<DivergenceValue> {
    if a.dim() != grid.dim() || b.dim() != grid.dim() {
        return Err(Error::contract("density and grid dimensions differ"));
    }
    let (nodes, weights) = quadrature(grid)?;
    // (ln a, ln b) per node, evaluated in parallel and reduced in node order
    let logs: Vec<(f64, f64)> = nodes
        .par_iter()
        .map(|x| (a.ln_pdf(x), b.ln_pdf(x)))
        .collect();

    let mass_a: f64 = logs.iter().zip(&weights).map(|((la, _), w)| la.exp() * w).sum();
    let mass_b: f64 = logs.iter().zip(&weights).map(|((_, lb), w)| lb.exp() * w).sum();
    for (which, m) in [("first", mass_a), ("second", mass_b)] {
        if m < opts.min_coverage {
            return Err(Error::QuadratureCoverage {
                which,
                captured: m,
                required: opts.min_coverage,
            });
        }
    }

    let mut saturated = false;
    let kl_term = |la: f64, lb: f64, saturated: &mut bool| -> f64 {
        let da = la.exp();
        if da < ZERO_DENSITY {
            return 0.0;
        }
        let v = da * (la - lb);
        if v > opts.kl_cap {
            *saturated = true;
            opts.kl_cap
        } else {
            v
        }
    };

    let mut acc = 0.0;
    for (&(la, lb), w) in logs.iter().zip(&weights) {
        let (da, db) = (la.exp(), lb.exp());
        let f = match kind {
            DivergenceKind::Tv => 0.5 * (da - db).abs(),
            DivergenceKind::Kl => kl_term(la, lb, &mut saturated),
            DivergenceKind::Js => {
                let lm = (0.5 * (da + db)).ln();
                0.5 * kl_term(la, lm, &mut saturated) + 0.5 * kl_term(lb, lm, &mut saturated)
            }
            DivergenceKind::Hellinger => 0.5 * (da.sqrt() - db.sqrt()).powi(2),
        };
        acc += f * w;
    }
    let value = match kind {
        DivergenceKind::Tv => acc.clamp(0.0, 1.0),
        DivergenceKind::Kl | DivergenceKind::Js => (acc * base.scale()).max(0.0),
        DivergenceKind::Hellinger => acc.max(0.0).sqrt().min(1.0),
    };
    Ok(DivergenceValue {
        kind,
        value,
        log_base: log_base_for(kind, base),
        saturated,
    })
}

/// Index of the candidate minimizing KL(target ‖ candidate); ties go to the lowest index.
pub fn mle_select(
    target: &AnalyticDensity,
    family: &[AnalyticDensity],
    grid: &GridSpec,
) -> Result<usize> {
    if family.is_empty() {
        return Err(Error::config("candidate family is empty"));
    }
    let mut best = (0, f64::INFINITY);
    for (i, cand) in family.iter().enumerate() {
        let kl = divergence_numeric(target, cand, DivergenceKind::Kl, grid, LogBase::Two)?.value;
        if kl < best.1 {
            best = (i, kl);
        }
    }
    Ok(best.0)
}
