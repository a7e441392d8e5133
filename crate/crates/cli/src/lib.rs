//! Command-line front end. Every command prints one JSON line to stdout and
//! maps failures onto exit codes: 0 ok, 1 usage or config, 2 a failed check,
//! 3 runtime failure.

pub mod boost;
pub mod config;
pub mod error;
pub mod generate;
pub mod output;
pub mod repro;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "modecover", version, about = "Boosted mode-coverage runs, reproduction recipes and bound checks")]
pub struct Cli {
    /// Worker threads for parallel trials and density grids.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run boosting from a JSON config and write its artifacts.
    Boost(BoostArgs),
    /// Run a pinned reproduction recipe and compare against expected values.
    Repro(ReproArgs),
    /// Run a bound-checking suite.
    Verify(VerifyArgs),
    /// Write a synthetic dataset as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct BoostArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// fig1, fig6, appendix-b, sine, spiral or grid-isolated.
    pub name: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// lemma1, eq3, dynamics or theorem1.
    pub suite: String,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub support: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Raise the lemma1 threshold by this amount; violations are then expected.
    #[arg(long)]
    pub raise: Option<f64>,
    /// Also write the report to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub kind: Option<String>,
    /// JSON dataset spec, e.g. {"kind": "spiral", "n": 1000}.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// A finished command: its stdout line and exit code.
struct Outcome {
    line: Value,
    code: i32,
}

fn status(passed: bool) -> (&'static str, i32) {
    if passed {
        ("ok", EXIT_OK)
    } else {
        ("failed", EXIT_CHECK_FAILED)
    }
}

fn cmd_boost(a: &BoostArgs) -> CliResult<Outcome> {
    let started = SystemTime::now();
    let cfg = RunConfig::from_path(&a.config)?;
    let out = a
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out/boost"));
    let art = boost::execute(&cfg, a.seed)?;
    boost::write_artifacts(&out, &art)?;
    output::write_meta(&out, "boost", started)?;
    Ok(Outcome {
        line: json!({
            "command": "boost",
            "status": "ok",
            "out": out,
            "summary": art.summary,
        }),
        code: EXIT_OK,
    })
}

fn cmd_repro(a: &ReproArgs) -> CliResult<Outcome> {
    let started = SystemTime::now();
    if !repro::RECIPES.contains(&a.name.as_str()) {
        return Err(CliError::config(format!(
            "unknown recipe '{}' (expected one of {})",
            a.name,
            repro::RECIPES.join(", ")
        )));
    }
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("out").join(&a.name));
    let r = repro::run(&a.name, a.seed, &out)?;
    output::write_meta(&out, "repro", started)?;
    for q in r.values.quantities.iter().filter(|q| !q.passed) {
        eprintln!("{}: {} outside {:?}", q.name, q.value, q.check);
    }
    let (st, code) = status(r.values.passed);
    Ok(Outcome {
        line: json!({
            "command": "repro",
            "status": st,
            "out": out,
            "values": r.values,
        }),
        code,
    })
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<Outcome> {
    let opts = verify::SuiteOptions {
        trials: a.trials,
        seed: a.seed,
        support: a.support,
        rounds: a.rounds,
        delta: a.delta,
        gamma: a.gamma,
        eta: a.eta,
        eps: a.eps,
        raise: a.raise,
    };
    let report = verify::run(&a.suite, &opts)?;
    if let Some(path) = &a.out {
        let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(d) = dir {
            output::ensure_dir(d)?;
        }
        let name = path
            .file_name()
            .ok_or_else(|| CliError::config("--out must name a file"))?
            .to_string_lossy()
            .into_owned();
        output::write_json(dir.unwrap_or(std::path::Path::new(".")), &name, &report)?;
    }
    let (st, code) = status(report.passed());
    Ok(Outcome {
        line: json!({ "command": "verify", "status": st, "report": report }),
        code,
    })
}

fn cmd_generate(a: &GenerateArgs) -> CliResult<Outcome> {
    let spec = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
            Some(serde_json::from_str(&text).map_err(|e| CliError::config(format!("invalid dataset spec: {e}")))?)
        }
        None => None,
    };
    let g = generate::run(a.kind.as_deref(), spec, a.n, a.seed, &a.out)?;
    Ok(Outcome {
        line: json!({ "command": "generate", "status": "ok", "out": a.out, "dataset": g }),
        code: EXIT_OK,
    })
}

fn error_line(command: Option<&str>, code: i32, message: &str) -> Value {
    json!({ "command": command, "status": "error", "exit_code": code, "message": message })
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            eprint!("{e}");
            println!("{}", error_line(None, EXIT_CONFIG, &e.kind().to_string()));
            return EXIT_CONFIG;
        }
    };
    let name = match &cli.command {
        Command::Boost(_) => "boost",
        Command::Repro(_) => "repro",
        Command::Verify(_) => "verify",
        Command::Generate(_) => "generate",
    };
    let result = set_threads(cli.threads).and_then(|()| match &cli.command {
        Command::Boost(a) => cmd_boost(a),
        Command::Repro(a) => cmd_repro(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Generate(a) => cmd_generate(a),
    });
    match result {
        Ok(o) => {
            println!("{}", o.line);
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = e.exit_code();
            println!("{}", error_line(Some(name), code, &e.to_string()));
            code
        }
    }
}

fn set_threads(n: Option<usize>) -> CliResult<()> {
    match n {
        None => Ok(()),
        Some(0) => Err(CliError::config("--threads must be >= 1")),
        // A second call in the same process keeps the first pool.
        Some(n) => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
    }
}
