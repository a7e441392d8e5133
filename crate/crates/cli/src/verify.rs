//! The `verify` command: randomized and exhaustive bound checks.

use modecover::oracles::{
    check_eq3, check_lemma1, check_lemma1_tightened, check_theorem1_exhaustive, check_weight_dynamics, OracleReport,
};

use crate::error::{CliError, CliResult};

pub const SUITES: [&str; 4] = ["lemma1", "eq3", "dynamics", "theorem1"];

/// Overrides for the suite defaults. `None` keeps the default.
#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    pub trials: Option<usize>,
    pub seed: u64,
    pub support: Option<usize>,
    pub rounds: Option<usize>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    /// Raises the lemma1 threshold by this much (power check).
    pub raise: Option<f64>,
}

fn unit(name: &str, v: f64) -> CliResult<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(CliError::config(format!("--{name} must be in (0, 1], got {v}")))
    }
}

fn unused(suite: &str, flags: &[(&str, bool)]) -> CliResult<()> {
    match flags.iter().find(|(_, set)| *set) {
        Some((name, _)) => Err(CliError::config(format!("--{name} does not apply to suite {suite}"))),
        None => Ok(()),
    }
}

pub fn run(suite: &str, o: &SuiteOptions) -> CliResult<OracleReport> {
    if o.trials == Some(0) {
        return Err(CliError::config("--trials must be >= 1"));
    }
    if o.support.is_some_and(|k| k < 2) {
        return Err(CliError::config("--support must be >= 2"));
    }
    let report = match suite {
        "lemma1" => {
            unused(suite, &[("rounds", o.rounds.is_some()), ("eta", o.eta.is_some()), ("eps", o.eps.is_some())])?;
            let trials = o.trials.unwrap_or(1000);
            let k = o.support.unwrap_or(10);
            let delta = unit("delta", o.delta.unwrap_or(0.25))?;
            let gamma = unit("gamma", o.gamma.unwrap_or(0.1))?;
            match o.raise {
                Some(r) => check_lemma1_tightened(trials, k, delta, gamma, r, o.seed)?,
                None => check_lemma1(trials, k, delta, gamma, o.seed)?,
            }
        }
        "eq3" => {
            unused(
                suite,
                &[
                    ("support", o.support.is_some()),
                    ("rounds", o.rounds.is_some()),
                    ("delta", o.delta.is_some()),
                    ("gamma", o.gamma.is_some()),
                    ("eta", o.eta.is_some()),
                    ("eps", o.eps.is_some()),
                    ("raise", o.raise.is_some()),
                ],
            )?;
            check_eq3(o.trials.unwrap_or(1000), o.seed)?
        }
        "dynamics" => {
            unused(suite, &[("gamma", o.gamma.is_some()), ("eta", o.eta.is_some()), ("raise", o.raise.is_some())])?;
            let eps = o.eps.unwrap_or(0.3);
            if !(0.0..=1.0).contains(&eps) {
                return Err(CliError::config(format!("--eps must be in [0, 1], got {eps}")));
            }
            check_weight_dynamics(
                o.trials.unwrap_or(500),
                o.support.unwrap_or(16),
                o.rounds.unwrap_or(30),
                unit("delta", o.delta.unwrap_or(0.25))?,
                eps,
                o.seed,
            )?
        }
        "theorem1" => {
            unused(suite, &[("eps", o.eps.is_some()), ("raise", o.raise.is_some())])?;
            let k = o.support.unwrap_or(8);
            if k > 12 {
                return Err(CliError::config("--support must be <= 12 for exhaustive enumeration"));
            }
            let gamma = o.gamma.unwrap_or(0.1);
            if !(0.0..=1.0).contains(&gamma) {
                return Err(CliError::config(format!("--gamma must be in [0, 1], got {gamma}")));
            }
            check_theorem1_exhaustive(
                k,
                o.rounds.unwrap_or(24),
                unit("delta", o.delta.unwrap_or(0.25))?,
                gamma,
                unit("eta", o.eta.unwrap_or(0.2))?,
                o.trials.unwrap_or(100),
                o.seed,
            )?
        }
        other => {
            return Err(CliError::config(format!(
                "unknown suite '{other}' (expected one of {})",
                SUITES.join(", ")
            )))
        }
    };
    Ok(report)
}
