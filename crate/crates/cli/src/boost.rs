//! The `boost` command: one configured run and its artifacts.

use std::collections::HashMap;
use std::path::Path;

use modecover::boost::ReferenceDensity;
use modecover::bounds::{coverage_report, mode_coverage_count, pointwise_psi, theorem1_bound, Bound, CoverageReport};
use modecover::dist::{log2_sum_exp2, sq_dist};
use modecover::io::write_trace;
use modecover::rng::{self, Purpose};
use modecover::{
    run_empirical, run_exact, BoostRun, DiscreteDistribution, Point, RoundTrace, WeakGenerator,
};
use serde::{Deserialize, Serialize};

use crate::config::{LoadedData, Mode, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json};

/// Round distributions are listed in the summary for supports up to this size.
pub const MAX_LISTED_SUPPORT: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundDistribution {
    pub round: usize,
    pub points: Vec<Point>,
    pub masses: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeCoverage {
    pub covered: usize,
    pub total: usize,
    pub frac: f64,
    pub samples: usize,
    pub sigma0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mode: Mode,
    pub n_points: usize,
    pub dim: usize,
    pub rounds: usize,
    pub delta: f64,
    pub eta: f64,
    pub seed: u64,
    pub psi_hat: f64,
    pub worst_subset_ratio: f64,
    pub worst_subset_mass: f64,
    pub mass_lower_bound: f64,
    /// Largest per-round TV between generator and round distribution, when measurable.
    pub max_tv: Option<f64>,
    /// The subset bound evaluated with γ = `max_tv`.
    pub theorem1_bound: Option<Bound>,
    pub doubled_per_round: Vec<usize>,
    pub final_log2_w: f64,
    pub minority_ratio: Option<Vec<f64>>,
    pub round_distributions: Option<Vec<RoundDistribution>>,
    pub mode_coverage: Option<ModeCoverage>,
}

pub struct BoostArtifacts {
    pub summary: Summary,
    pub run: BoostRun,
    pub report: CoverageReport,
}

/// Runs a validated configuration. `seed` overrides the configured seed.
pub fn execute(cfg: &RunConfig, seed: Option<u64>) -> CliResult<BoostArtifacts> {
    let mut cfg = cfg.clone();
    if let Some(s) = seed {
        cfg.boost.seed = s;
    }
    let data = cfg.load_data()?;
    let mut boost = cfg.boost.clone();
    if let Some(m) = cfg.minority_mode {
        if cfg.mode == Mode::Exact {
            return Err(CliError::config("minority_mode needs an empirical run"));
        }
        let ids = data
            .as_ref()
            .and_then(|d| d.mode_ids.as_ref())
            .ok_or_else(|| CliError::config("minority_mode needs data with mode ids"))?;
        if boost.minority.is_empty() {
            boost.minority = (0..ids.len()).filter(|&i| ids[i] == m).collect();
        }
        if boost.minority.is_empty() {
            return Err(CliError::config(format!("no points carry mode id {m}")));
        }
    }
    let mass_lb = cfg
        .coverage
        .mass_lb
        .unwrap_or_else(|| (-boost.eta * boost.rounds as f64).exp2());

    let (run, report, support, n_points, dim) = match cfg.mode {
        Mode::Exact => {
            let target = match (&cfg.target, &data) {
                (Some(t), _) => t.build()?,
                (None, Some(d)) => DiscreteDistribution::from_samples(&d.points)?,
                (None, None) => return Err(CliError::config("exact mode needs a target or samples")),
            };
            let run = run_exact(&target, &boost)?;
            let report = pointwise_psi(&run.mixture, &target, mass_lb)?;
            let (n, d) = (target.len(), target.dim());
            (run, report, target.support().to_vec(), n, d)
        }
        Mode::Empirical => {
            let d = data.as_ref().ok_or_else(|| CliError::config("empirical mode needs samples"))?;
            let run = run_empirical(&d.points, &boost)?;
            let reference = cfg
                .coverage
                .reference
                .clone()
                .unwrap_or(ReferenceDensity::Grid { grid: None, cells: 64 });
            let p = reference.evaluate(&d.points)?;
            let g = run.mixture.pdf_many(&d.points);
            let n = d.points.len();
            let report = coverage_report(&g, &p, &vec![1.0 / n as f64; n], mass_lb)?;
            (run, report, d.points.clone(), n, d.points[0].dim())
        }
    };

    let max_tv = run.trace.max_tv();
    let mode_coverage = match &data {
        Some(d) if d.mode_ids.is_some() => Some(count_modes(d, &run, &cfg, boost.seed)?),
        _ => None,
    };
    let minority_ratio = (!boost.minority.is_empty())
        .then(|| modecover::bounds::minority_weight_ratio(&run.trace, &boost.minority))
        .transpose()?;
    let summary = Summary {
        mode: cfg.mode,
        n_points,
        dim,
        rounds: boost.rounds,
        delta: boost.delta,
        eta: boost.eta,
        seed: boost.seed,
        psi_hat: report.psi_hat,
        worst_subset_ratio: report.worst_subset.ratio,
        worst_subset_mass: report.worst_subset.mass,
        mass_lower_bound: mass_lb,
        max_tv,
        theorem1_bound: max_tv.map(|g| Bound::of(theorem1_bound(boost.delta, g, boost.eta))),
        doubled_per_round: run.trace.records.iter().map(|r| r.n_doubled).collect(),
        final_log2_w: run.trace.final_log2_w,
        minority_ratio,
        round_distributions: round_distributions(&support, &run.trace),
        mode_coverage,
    };
    Ok(BoostArtifacts { summary, run, report })
}

/// Per-round distributions over the distinct points, rebuilt from the trace.
pub fn round_distributions(points: &[Point], trace: &RoundTrace) -> Option<Vec<RoundDistribution>> {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut distinct: Vec<Point> = Vec::new();
    let slot: Vec<usize> = points
        .iter()
        .map(|x| {
            *index.entry(x.key()).or_insert_with(|| {
                distinct.push(x.clone());
                distinct.len() - 1
            })
        })
        .collect();
    if distinct.len() > MAX_LISTED_SUPPORT {
        return None;
    }
    let mut lw = trace.initial_log2_weights.clone();
    let mut out = Vec::with_capacity(trace.flags.len());
    for (t, flags) in trace.flags.iter().enumerate() {
        let total = log2_sum_exp2(&lw);
        let mut masses = vec![0.0; distinct.len()];
        for (i, w) in lw.iter().enumerate() {
            masses[slot[i]] += (w - total).exp2();
        }
        out.push(RoundDistribution {
            round: t + 1,
            points: distinct.clone(),
            masses,
        });
        for (w, f) in lw.iter_mut().zip(flags) {
            if *f {
                *w += 1.0;
            }
        }
    }
    Some(out)
}

/// Mode centers and scale: known for generated data, estimated per mode id otherwise.
fn centers_and_scale(d: &LoadedData, sigma_override: Option<f64>) -> CliResult<(Vec<Point>, f64)> {
    let ids = d.mode_ids.as_ref().expect("caller checked mode ids");
    if let (Some(c), Some(s)) = (&d.centers, sigma_override.or(d.sigma0)) {
        return Ok((c.clone(), s));
    }
    let dim = d.points[0].dim();
    let modes = ids.iter().copied().max().unwrap_or(0) + 1;
    let mut sums = vec![vec![0.0; dim]; modes];
    let mut counts = vec![0usize; modes];
    for (x, &m) in d.points.iter().zip(ids) {
        counts[m] += 1;
        for k in 0..dim {
            sums[m][k] += x[k];
        }
    }
    let mut centers = vec![None; modes];
    for m in 0..modes {
        if counts[m] > 0 {
            let c: Vec<f64> = sums[m].iter().map(|s| s / counts[m] as f64).collect();
            centers[m] = Some(Point::new(c)?);
        }
    }
    let sigma = match sigma_override {
        Some(s) => s,
        None => {
            let ss: f64 = d
                .points
                .iter()
                .zip(ids)
                .map(|(x, &m)| sq_dist(x, centers[m].as_ref().expect("mode has points")))
                .sum();
            (ss / (d.points.len() * dim) as f64).sqrt()
        }
    };
    if !(sigma > 0.0) {
        return Err(CliError::config("cannot estimate a positive mode scale; set coverage.sigma0"));
    }
    Ok((centers.into_iter().flatten().collect(), sigma))
}

fn count_modes(d: &LoadedData, run: &BoostRun, cfg: &RunConfig, seed: u64) -> CliResult<ModeCoverage> {
    let (centers, sigma0) = centers_and_scale(d, cfg.coverage.sigma0)?;
    let n = cfg.coverage.eval_samples.unwrap_or(d.points.len());
    let samples = run
        .mixture
        .sample(n, &mut rng::stream(seed, 0, Purpose::Evaluation));
    Ok(ModeCoverage {
        covered: mode_coverage_count(&samples, &centers, sigma0, cfg.coverage.mode_frac),
        total: centers.len(),
        frac: cfg.coverage.mode_frac,
        samples: n,
        sigma0,
    })
}

/// Writes trace.csv, mixture.json, coverage_report.json and summary.json.
pub fn write_artifacts(out: &Path, art: &BoostArtifacts) -> CliResult<()> {
    ensure_dir(out)?;
    let trace_path = out.join("trace.csv");
    let f = std::fs::File::create(&trace_path)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", trace_path.display())))?;
    write_trace(f, &art.run.trace)?;
    write_json(out, "mixture.json", &art.run.mixture)?;
    write_json(out, "coverage_report.json", &art.report)?;
    write_json(out, "summary.json", &art.summary)?;
    Ok(())
}
