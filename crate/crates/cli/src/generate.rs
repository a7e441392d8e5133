//! The `generate` command: synthetic datasets as CSV.

use std::path::Path;

use modecover::io::write_dataset;
use modecover::rng;
use modecover::synth::{fig1_target, fig6_instance, DatasetSpec};
use modecover::Point;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const KINDS: [&str; 6] = ["sine", "gauss-grid", "spiral", "grid-isolated", "fig1", "fig6"];

#[derive(Clone, Debug, Serialize)]
pub struct Generated {
    pub kind: String,
    pub n: usize,
    pub dim: usize,
    pub modes: Option<usize>,
    pub seed: u64,
}

/// Dataset spec for a named kind. `n` is the total sample count, except for
/// the sine kind where it sets the major-mode count.
pub fn spec_for(kind: &str, n: Option<usize>) -> CliResult<Option<DatasetSpec>> {
    let spec = match kind {
        "sine" => DatasetSpec::SinePlusGaussian {
            n_major: n.unwrap_or(40_000),
            ratio: 400,
            minor_center: [10.0, 0.0],
            minor_var: 1.0,
        },
        "gauss-grid" => DatasetSpec::GaussGrid {
            modes: 10,
            half_width: 15.0,
            var: 0.05,
            n: n.unwrap_or(10_000),
        },
        "spiral" => DatasetSpec::Spiral { n: n.unwrap_or(10_000) },
        "grid-isolated" => DatasetSpec::GridIsolated { n: n.unwrap_or(44_200) },
        "fig1" | "fig6" => return Ok(None),
        other => {
            return Err(CliError::config(format!(
                "unknown dataset kind '{other}' (expected one of {})",
                KINDS.join(", ")
            )))
        }
    };
    Ok(Some(spec))
}

pub fn run(kind: Option<&str>, spec: Option<DatasetSpec>, n: Option<usize>, seed: u64, out: &Path) -> CliResult<Generated> {
    if n == Some(0) {
        return Err(CliError::config("--n must be >= 1"));
    }
    let (label, spec) = match (kind, spec) {
        (Some(k), None) => (k.to_string(), spec_for(k, n)?),
        (None, Some(s)) => ("config".to_string(), Some(s)),
        _ => return Err(CliError::config("give exactly one of --kind or --config")),
    };
    let (points, mode_ids): (Vec<Point>, Option<Vec<usize>>) = match spec {
        Some(s) => {
            let d = s.generate(seed)?;
            (d.points, Some(d.mode_ids))
        }
        None => {
            // Analytic 1D targets: plain draws without mode labels.
            let density = if label == "fig1" { fig1_target() } else { fig6_instance().0 };
            (density.sample(n.unwrap_or(10_000), &mut rng::seeded(seed)), None)
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        crate::output::ensure_dir(dir)?;
    }
    let f = std::fs::File::create(out)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", out.display())))?;
    write_dataset(f, &points, mode_ids.as_deref())?;
    Ok(Generated {
        kind: label,
        n: points.len(),
        dim: points[0].dim(),
        modes: mode_ids.map(|ids| ids.iter().copied().max().map_or(0, |m| m + 1)),
        seed,
    })
}
