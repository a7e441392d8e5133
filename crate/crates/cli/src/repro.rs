//! Pinned-seed reproduction recipes. Each writes values.json plus CSVs.

use std::path::Path;

use modecover::bounds::{analytic_psi, mode_coverage_count, mode_covered, pointwise_psi};
use modecover::divergence::{divergence_numeric, mle_select, DivergenceKind, LogBase};
use modecover::generators::{RegionSelector, AUTO_GRID_PAD};
use modecover::io::write_trace;
use modecover::rng::{self, Purpose};
use modecover::synth::{fig1_reference, fig1_target, fig6_instance, ISOLATED_MODE};
use modecover::{
    run_empirical, run_exact, AnalyticDensity, BoostConfig, BoostRun, DiscreteDistribution, GeneratorMixture,
    GeneratorSpec, GridSpec, Point, WeakGenerator,
};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::boost;
use crate::config::{LoadedData, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, fmt, write_csv, write_json};

pub const RECIPES: [&str; 6] = ["fig1", "fig6", "appendix-b", "sine", "spiral", "grid-isolated"];

pub const APPENDIX_B_CONFIG: &str = include_str!("../../../configs/appendix_b.json");
pub const SINE_CONFIG: &str = include_str!("../../../configs/sine.json");
pub const SPIRAL_CONFIG: &str = include_str!("../../../configs/spiral.json");
pub const GRID_ISOLATED_CONFIG: &str = include_str!("../../../configs/grid_isolated.json");

/// Seeds of the spiral recipe.
pub const SPIRAL_SEEDS: [u64; 3] = [1, 2, 3];

type Q = Ratio<i64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// |value − expected| ≤ tol.
    Within { expected: f64, tol: f64 },
    AtMost { limit: f64 },
    AtLeast { limit: f64 },
    Below { limit: f64 },
    Above { limit: f64 },
    /// expected/factor ≤ value ≤ expected·factor.
    Factor { expected: f64, factor: f64 },
    /// Exact rational equality on the `exact` field.
    Exact { expected: String },
    /// Boolean condition stored as 1/0.
    Holds,
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub name: String,
    /// Null when the quantity was never reached (for example a round count).
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    pub check: Check,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Values {
    pub recipe: String,
    pub seed: u64,
    pub passed: bool,
    pub quantities: Vec<Quantity>,
}

#[derive(Default)]
struct Sheet(Vec<Quantity>);

impl Sheet {
    fn push(&mut self, name: &str, value: f64, check: Check) {
        let passed = match &check {
            Check::Within { expected, tol } => (value - expected).abs() <= *tol,
            Check::AtMost { limit } => value <= *limit,
            Check::AtLeast { limit } => value >= *limit,
            Check::Below { limit } => value < *limit,
            Check::Above { limit } => value > *limit,
            Check::Factor { expected, factor } => value >= expected / factor && value <= expected * factor,
            Check::Exact { .. } => unreachable!("use exact()"),
            Check::Holds => value == 1.0,
            Check::Info => true,
        };
        self.0.push(Quantity {
            name: name.to_string(),
            value,
            exact: None,
            check,
            passed,
        });
    }

    fn holds(&mut self, name: &str, cond: bool) {
        self.push(name, if cond { 1.0 } else { 0.0 }, Check::Holds);
    }

    fn info(&mut self, name: &str, value: f64) {
        self.push(name, value, Check::Info);
    }

    fn exact(&mut self, name: &str, got: Q, want: Q) {
        self.0.push(Quantity {
            name: name.to_string(),
            value: *got.numer() as f64 / *got.denom() as f64,
            exact: Some(got.to_string()),
            check: Check::Exact {
                expected: want.to_string(),
            },
            passed: got == want,
        });
    }
}

pub struct ReproOutput {
    pub values: Values,
}

pub fn run(recipe: &str, seed: Option<u64>, out: &Path) -> CliResult<ReproOutput> {
    ensure_dir(out)?;
    let (seed, sheet) = match recipe {
        "fig1" => (0, fig1(out)?),
        "fig6" => (0, fig6(out)?),
        "appendix-b" => {
            let s = seed.unwrap_or(1);
            (s, appendix_b(out, s)?)
        }
        "sine" => {
            let s = seed.unwrap_or(1);
            (s, sine(out, s)?)
        }
        "spiral" => (seed.unwrap_or(0), spiral(out, seed)?),
        "grid-isolated" => {
            let s = seed.unwrap_or(1);
            (s, grid_isolated(out, s)?)
        }
        other => {
            return Err(CliError::config(format!(
                "unknown recipe '{other}' (expected one of {})",
                RECIPES.join(", ")
            )))
        }
    };
    let values = Values {
        recipe: recipe.to_string(),
        seed,
        passed: sheet.0.iter().all(|q| q.passed),
        quantities: sheet.0,
    };
    write_json(out, "values.json", &values)?;
    Ok(ReproOutput { values })
}

fn wide_grid() -> CliResult<GridSpec> {
    Ok(GridSpec::line(-20.0, 20.0, 4000)?)
}

fn two_sided(d: &AnalyticDensity) -> CliResult<f64> {
    Ok(d.interval_probability(&[(6.0, 14.0), (-14.0, -6.0)])?)
}

fn density_csv(out: &Path, name: &str, header: &[&str], dens: &[&AnalyticDensity]) -> CliResult<()> {
    let grid = GridSpec::line(-15.0, 15.0, 600)?;
    let rows: Vec<Vec<String>> = grid
        .nodes(0)
        .into_iter()
        .map(|x| {
            let mut r = vec![fmt(x)];
            r.extend(dens.iter().map(|d| fmt(d.pdf(&[x]))));
            r
        })
        .collect();
    write_csv(out, name, header, &rows)
}

fn fig1(out: &Path) -> CliResult<Sheet> {
    let p = fig1_target();
    let q = fig1_reference();
    let g = wide_grid()?;
    let mut s = Sheet::default();
    let tv = divergence_numeric(&q, &p, DivergenceKind::Tv, &g, LogBase::Two)?;
    s.push("tv_q_p", tv.value, Check::Within { expected: 0.1, tol: 0.005 });
    let kl = divergence_numeric(&q, &p, DivergenceKind::Kl, &g, LogBase::Two)?;
    s.push("kl_q_p_bits", kl.value, Check::AtMost { limit: 0.16 });
    s.push("p_outer_mass", two_sided(&p)?, Check::Within { expected: 0.1, tol: 0.005 });
    s.push("q_outer_mass", two_sided(&q)?, Check::AtMost { limit: 1e-8 });
    density_csv(out, "densities.csv", &["x", "p", "q"], &[&p, &q])?;
    Ok(s)
}

fn fig6(out: &Path) -> CliResult<Sheet> {
    let (p, g1, g2) = fig6_instance();
    let g = wide_grid()?;
    let kl = |a: &AnalyticDensity, b: &AnalyticDensity| -> CliResult<f64> {
        Ok(divergence_numeric(a, b, DivergenceKind::Kl, &g, LogBase::Two)?.value)
    };
    let table = [
        ("kl_p_g1_bits", kl(&p, &g1)?, 1.28),
        ("kl_p_g2_bits", kl(&p, &g2)?, 1.40),
        ("kl_g1_p_bits", kl(&g1, &p)?, 0.029),
        ("kl_g2_p_bits", kl(&g2, &p)?, 2.81),
    ];
    let mut s = Sheet::default();
    for (name, v, want) in table {
        s.push(name, v, Check::Within { expected: want, tol: 0.05 });
    }
    let pick = mle_select(&p, &[g1.clone(), g2.clone()], &g)?;
    s.holds("mle_selects_g1", pick == 0);
    let ratio = two_sided(&g1)? / two_sided(&p)?;
    s.push("g1_outer_subset_ratio", ratio, Check::Factor { expected: 1e-7, factor: 3.0 });
    let psi = analytic_psi(&|x| g2.pdf(x), &p, &GridSpec::line(-14.0, 14.0, 2800)?)?;
    s.push("g2_pointwise_psi", psi, Check::Above { limit: 1.0 / 3.0 });
    density_csv(out, "densities.csv", &["x", "p", "g1", "g2"], &[&p, &g1, &g2])?;
    let rows: Vec<Vec<String>> = table
        .iter()
        .map(|(n, v, w)| vec![n.to_string(), fmt(*v), fmt(*w)])
        .collect();
    write_csv(out, "kl_table.csv", &["quantity", "computed_bits", "expected_bits"], &rows)?;
    Ok(s)
}

/// Exact weights w0·2^d of each sample after the first round.
fn round_one_weights(initial: &[Q], flags: &[bool]) -> Vec<Q> {
    initial
        .iter()
        .zip(flags)
        .map(|(w, f)| if *f { *w * 2 } else { *w })
        .collect()
}

fn appendix_b(out: &Path, seed: u64) -> CliResult<Sheet> {
    let cfg = RunConfig::from_json(APPENDIX_B_CONFIG)?;
    let art = boost::execute(&cfg, Some(seed))?;
    let points = cfg.points.clone().expect("bundled config has inline points");
    let is_b: Vec<bool> = points.iter().map(|x| x[0] == 1.0).collect();
    let flags = &art.run.trace.flags[0];
    let mut s = Sheet::default();
    s.holds("round1_flags_exactly_b", flags == &is_b);
    s.push(
        "round1_doubled",
        art.run.trace.records[0].n_doubled as f64,
        Check::Within { expected: 2.0, tol: 0.0 },
    );
    let n = points.len() as i64;
    let w = round_one_weights(&vec![Q::new(1, n); points.len()], flags);
    let a_total: Q = w.iter().zip(&is_b).filter(|(_, b)| !**b).map(|(w, _)| *w).sum();
    let b_total: Q = w.iter().zip(&is_b).filter(|(_, b)| **b).map(|(w, _)| *w).sum();
    s.exact("a_total_after_round1", a_total, Q::new(5, 7));
    s.exact("b_total_after_round1", b_total, Q::new(4, 7));
    s.exact("p2_a", a_total / (a_total + b_total), Q::new(5, 9));
    s.exact("p2_b", b_total / (a_total + b_total), Q::new(4, 9));
    if let Some(rd) = &art.summary.round_distributions {
        let r2 = &rd[1];
        for (x, m) in r2.points.iter().zip(&r2.masses) {
            s.info(if x[0] == 1.0 { "p2_b_float" } else { "p2_a_float" }, *m);
        }
    }
    s.info("psi_hat_empirical", art.report.psi_hat);
    boost::write_artifacts(out, &art)?;

    // The same two rounds with exact densities and a collapsing adversary.
    let target = DiscreteDistribution::new(
        vec![Point::scalar(0.0), Point::scalar(1.0)],
        vec![5.0 / 7.0, 2.0 / 7.0],
    )?;
    let mut ecfg = BoostConfig::new(GeneratorSpec::Schedule {
        rounds: vec![
            GeneratorSpec::Adversarial {
                gamma: 2.0 / 7.0,
                region: RegionSelector::Points { indices: vec![1] },
            },
            GeneratorSpec::Tabular,
        ],
    });
    ecfg.rounds = 2;
    ecfg.delta = 0.25;
    ecfg.seed = seed;
    let run = run_exact(&target, &ecfg)?;
    let w = round_one_weights(&[Q::new(5, 7), Q::new(2, 7)], &run.trace.flags[0]);
    s.exact("exact_a_weight_after_round1", w[0], Q::new(5, 7));
    s.exact("exact_b_weight_after_round1", w[1], Q::new(4, 7));
    s.exact("exact_p2_b", w[1] / (w[0] + w[1]), Q::new(4, 9));
    let rep = pointwise_psi(&run.mixture, &target, 0.25)?;
    s.push("exact_psi_hat", rep.psi_hat, Check::Within { expected: 7.0 / 9.0, tol: 1e-12 });

    let w1 = round_one_weights(&vec![Q::new(1, n); points.len()], flags);
    let rows: Vec<Vec<String>> = (0..points.len())
        .map(|i| {
            vec![
                i.to_string(),
                fmt(points[i][0]),
                if is_b[i] { "B" } else { "A" }.to_string(),
                (flags[i] as u8).to_string(),
                w1[i].to_string(),
            ]
        })
        .collect();
    write_csv(out, "weights.csv", &["index", "x", "label", "doubled_round1", "weight_after_round1"], &rows)?;
    Ok(s)
}

fn load(cfg_text: &str, seed: u64) -> CliResult<(RunConfig, LoadedData)> {
    let mut cfg = RunConfig::from_json(cfg_text)?;
    cfg.boost.seed = seed;
    let data = cfg.load_data()?.expect("bundled config generates data");
    Ok((cfg, data))
}

fn run_with_minority(cfg: &RunConfig, data: &LoadedData) -> CliResult<(BoostConfig, BoostRun)> {
    let mut b = cfg.boost.clone();
    if let (Some(m), Some(ids)) = (cfg.minority_mode, &data.mode_ids) {
        b.minority = (0..ids.len()).filter(|&i| ids[i] == m).collect();
    }
    let run = run_empirical(&data.points, &b)?;
    Ok((b, run))
}

fn save_trace(out: &Path, name: &str, run: &BoostRun) -> CliResult<()> {
    let f = std::fs::File::create(out.join(name))?;
    write_trace(f, &run.trace)?;
    Ok(())
}

/// Mixture mass on the grid bins that hold minor samples but no major ones,
/// over the data share of those bins. Exact for a histogram learner on the
/// same grid, whose density is constant per bin.
fn minor_only_share(mix: &GeneratorMixture, grid: &GridSpec, data: &LoadedData) -> CliResult<(f64, usize)> {
    let ids = data.mode_ids.as_ref().expect("generated data has mode ids");
    let mut major = vec![false; grid.n_bins()];
    let mut minor = vec![0usize; grid.n_bins()];
    for (x, &m) in data.points.iter().zip(ids) {
        let b = grid.bin_index_clamped(x);
        if m == 0 {
            major[b] = true;
        } else {
            minor[b] += 1;
        }
    }
    let bins: Vec<usize> = (0..grid.n_bins()).filter(|&b| minor[b] > 0 && !major[b]).collect();
    if bins.is_empty() {
        return Err(CliError::runtime("no grid bin holds only minor-mode samples"));
    }
    let count: usize = bins.iter().map(|&b| minor[b]).sum();
    let data_share = count as f64 / data.points.len() as f64;
    let gen_mass: f64 = bins.iter().map(|&b| mix.pdf(&grid.bin_center(b)) * grid.cell_volume()).sum();
    Ok((gen_mass / data_share, count))
}

fn sine(out: &Path, seed: u64) -> CliResult<Sheet> {
    let (cfg, data) = load(SINE_CONFIG, seed)?;
    let (b, run) = run_with_minority(&cfg, &data)?;
    let grid = GridSpec::bounding(&data.points, 64, AUTO_GRID_PAD)?;
    let p = modecover::boost::grid_density(&grid, &data.points);
    let minor = &b.minority;
    let g_final: Vec<f64> = minor.iter().map(|&i| run.mixture.pdf(&data.points[i])).collect();
    let single = run.mixture.prefix(1)?;
    let g_first: Vec<f64> = minor.iter().map(|&i| single.pdf(&data.points[i])).collect();
    let ratio_final: Vec<f64> = g_final.iter().zip(minor).map(|(g, &i)| g / p[i]).collect();
    let min_final = ratio_final.iter().copied().fold(f64::INFINITY, f64::min);

    let mut s = Sheet::default();
    s.info("n_points", data.points.len() as f64);
    s.info("n_minor", minor.len() as f64);
    s.push("final_min_minor_ratio", min_final, Check::AtLeast { limit: 0.05 });
    let (share, count) = minor_only_share(&single, &grid, &data)?;
    s.info("minor_only_samples", count as f64);
    s.push("baseline_minor_mass_over_data_share", share, Check::Below { limit: 0.1 });
    let (share_final, _) = minor_only_share(&run.mixture, &grid, &data)?;
    s.info("final_minor_mass_over_data_share", share_final);

    save_trace(out, "trace.csv", &run)?;
    let rows: Vec<Vec<String>> = minor
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let x = &data.points[i];
            vec![
                i.to_string(),
                fmt(x[0]),
                fmt(x[1]),
                fmt(p[i]),
                fmt(g_first[k]),
                fmt(g_final[k]),
            ]
        })
        .collect();
    write_csv(out, "minor_points.csv", &["index", "x", "y", "p_grid", "g_round1", "g_final"], &rows)?;
    Ok(s)
}

/// Mode counts of each prefix mixture, one fresh sample of size `n` per prefix.
fn prefix_counts(mix: &GeneratorMixture, seed: u64, n: usize, count: impl Fn(&[Point]) -> usize) -> CliResult<Vec<usize>> {
    (1..=mix.len())
        .map(|t| {
            let m = mix.prefix(t)?;
            let samples = m.sample(n, &mut rng::stream(seed, t as u64, Purpose::Evaluation));
            Ok(count(&samples))
        })
        .collect()
}

fn spiral(out: &Path, seed: Option<u64>) -> CliResult<Sheet> {
    let seeds: Vec<u64> = match seed {
        Some(s) => vec![s],
        None => SPIRAL_SEEDS.to_vec(),
    };
    let mut s = Sheet::default();
    let mut rows = Vec::new();
    for seed in seeds {
        let (cfg, data) = load(SPIRAL_CONFIG, seed)?;
        let (b, run) = run_with_minority(&cfg, &data)?;
        let centers = data.centers.clone().expect("generated data has centers");
        let sigma0 = data.sigma0.expect("generated data has a mode scale");
        let frac = cfg.coverage.mode_frac;
        let counts = prefix_counts(&run.mixture, seed, data.points.len(), |x| {
            mode_coverage_count(x, &centers, sigma0, frac)
        })?;
        let first = counts.iter().position(|&c| c == centers.len()).map(|i| (i + 1) as f64);
        s.push(
            &format!("seed{seed}_first_round_all_modes"),
            first.unwrap_or(f64::NAN),
            Check::AtMost { limit: b.rounds as f64 },
        );
        s.info(&format!("seed{seed}_modes_covered_final"), counts[counts.len() - 1] as f64);
        for (t, c) in counts.iter().enumerate() {
            rows.push(vec![seed.to_string(), (t + 1).to_string(), c.to_string()]);
        }
        save_trace(out, &format!("trace_seed{seed}.csv"), &run)?;
    }
    write_csv(out, "mode_coverage.csv", &["seed", "round", "modes_covered"], &rows)?;
    Ok(s)
}

fn grid_isolated(out: &Path, seed: u64) -> CliResult<Sheet> {
    let (cfg, data) = load(GRID_ISOLATED_CONFIG, seed)?;
    let (b, run) = run_with_minority(&cfg, &data)?;
    let centers = data.centers.clone().expect("generated data has centers");
    let sigma0 = data.sigma0.expect("generated data has a mode scale");
    let frac = cfg.coverage.mode_frac;
    let center = &centers[ISOLATED_MODE];
    let covered = prefix_counts(&run.mixture, seed, data.points.len(), |x| {
        mode_covered(x, center, sigma0, centers.len(), frac) as usize
    })?;
    let ratio = modecover::bounds::minority_weight_ratio(&run.trace, &b.minority)?;
    let first = covered.iter().position(|&c| c == 1);
    let mut s = Sheet::default();
    s.push(
        "first_round_isolated_covered",
        first.map(|i| (i + 1) as f64).unwrap_or(f64::NAN),
        Check::AtMost { limit: b.rounds as f64 },
    );
    let upto = first.map(|i| i + 1).unwrap_or(ratio.len()).min(ratio.len());
    let increasing = ratio[..upto].windows(2).all(|w| w[1] > w[0]);
    s.holds("minority_ratio_increasing_until_covered", first.is_some() && increasing);
    s.info("minority_ratio_round1", ratio[0]);
    s.info("minority_ratio_final", ratio[ratio.len() - 1]);
    save_trace(out, "trace.csv", &run)?;
    let rows: Vec<Vec<String>> = (0..ratio.len())
        .map(|t| vec![(t + 1).to_string(), fmt(ratio[t]), covered[t].to_string()])
        .collect();
    write_csv(out, "isolated_mode.csv", &["round", "minority_ratio", "isolated_covered"], &rows)?;
    Ok(s)
}
