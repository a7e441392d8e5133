//! Python bindings. Structured values (configs, reports, traces) cross the
//! boundary as plain dicts and lists via JSON.

use modecover::bounds::{self, CoverageReport, TheoryParams};
use modecover::divergence::{divergence_discrete, DivergenceKind, LogBase};
use modecover::oracles::{self, OracleReport};
use modecover::rng;
use modecover::synth::DatasetSpec;
use modecover::{
    AnalyticDensity, BoostConfig, BoostRun, DiscreteDistribution, Error, GeneratorMixture, Point, WeakGenerator,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyString;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Unsupported(_) | Error::Csv(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Accepts a JSON string or any JSON-serializable Python object.
fn from_py<T: DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = obj.cast::<PyString>() {
        s.to_str()?.to_owned()
    } else {
        obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?
    };
    serde_json::from_str(&text).map_err(json_err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(json_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn points_of(rows: Vec<Vec<f64>>) -> PyResult<Vec<Point>> {
    rows.into_iter().map(|r| Point::new(r).map_err(to_py_err)).collect()
}

fn rows_of(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.coords().to_vec()).collect()
}

/// A finite-support distribution.
#[pyclass(name = "DiscreteDistribution", module = "pymodecover", from_py_object)]
#[derive(Clone)]
pub struct PyDiscrete {
    inner: DiscreteDistribution,
}

#[pymethods]
impl PyDiscrete {
    #[new]
    fn new(support: Vec<Vec<f64>>, mass: Vec<f64>) -> PyResult<Self> {
        let inner = DiscreteDistribution::new(points_of(support)?, mass).map_err(to_py_err)?;
        Ok(PyDiscrete { inner })
    }

    /// Empirical distribution of samples, duplicates merged.
    #[staticmethod]
    fn from_samples(samples: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = DiscreteDistribution::from_samples(&points_of(samples)?).map_err(to_py_err)?;
        Ok(PyDiscrete { inner })
    }

    #[getter]
    fn support(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.support())
    }

    #[getter]
    fn mass(&self) -> Vec<f64> {
        self.inner.mass().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("DiscreteDistribution(len={}, dim={})", self.inner.len(), self.inner.dim())
    }
}

/// Mixture of axis-aligned Gaussians.
#[pyclass(name = "AnalyticDensity", module = "pymodecover", from_py_object)]
#[derive(Clone)]
pub struct PyAnalytic {
    inner: AnalyticDensity,
}

#[pymethods]
impl PyAnalytic {
    /// `components` is a list of {"weight", "mean", "var"} dicts.
    #[new]
    fn new(components: &Bound<'_, PyAny>) -> PyResult<Self> {
        let comps = from_py(components)?;
        Ok(PyAnalytic {
            inner: AnalyticDensity::new(comps).map_err(to_py_err)?,
        })
    }

    fn pdf(&self, x: Vec<f64>) -> f64 {
        self.inner.pdf(&x)
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        rows_of(&self.inner.sample(n, &mut rng::seeded(seed)))
    }

    /// Mass of a union of disjoint 1D intervals.
    fn interval_probability(&self, intervals: Vec<(f64, f64)>) -> PyResult<f64> {
        self.inner.interval_probability(&intervals).map_err(to_py_err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }
}

/// Uniform mixture of the per-round generators.
#[pyclass(name = "GeneratorMixture", module = "pymodecover", from_py_object)]
#[derive(Clone)]
pub struct PyMixture {
    inner: GeneratorMixture,
}

#[pymethods]
impl PyMixture {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyMixture {
            inner: serde_json::from_str(text).map_err(json_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn pdf(&self, x: Vec<f64>) -> f64 {
        self.inner.pdf(&x)
    }

    fn pdf_many(&self, xs: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        Ok(self.inner.pdf_many(&points_of(xs)?))
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        rows_of(&self.inner.sample(n, &mut rng::seeded(seed)))
    }

    /// The first `t` generators as a mixture.
    fn prefix(&self, t: usize) -> PyResult<Self> {
        Ok(PyMixture {
            inner: self.inner.prefix(t).map_err(to_py_err)?,
        })
    }

    /// Generator kinds in round order.
    fn kinds(&self) -> Vec<&'static str> {
        self.inner.generators().iter().map(|g| g.kind()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Result of a boosting run.
#[pyclass(name = "BoostRun", module = "pymodecover")]
pub struct PyBoostRun {
    inner: BoostRun,
}

#[pymethods]
impl PyBoostRun {
    #[getter]
    fn mixture(&self) -> PyMixture {
        PyMixture {
            inner: self.inner.mixture.clone(),
        }
    }

    /// Per-round records as dicts.
    #[getter]
    fn records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.trace.records)
    }

    /// Doubling flags per round.
    #[getter]
    fn flags(&self) -> Vec<Vec<bool>> {
        self.inner.trace.flags.clone()
    }

    #[getter]
    fn final_log2_w(&self) -> f64 {
        self.inner.trace.final_log2_w
    }

    /// Doubling count of each point after the last round.
    #[getter]
    fn doublings(&self) -> Vec<u32> {
        self.inner.weights.doublings().to_vec()
    }

    /// Share of the weight held by `minority` points at the start of each round.
    fn minority_weight_ratio(&self, minority: Vec<usize>) -> PyResult<Vec<f64>> {
        bounds::minority_weight_ratio(&self.inner.trace, &minority).map_err(to_py_err)
    }
}

fn config_of(cfg: &Bound<'_, PyAny>) -> PyResult<BoostConfig> {
    let cfg: BoostConfig = from_py(cfg)?;
    cfg.validate().map_err(to_py_err)?;
    Ok(cfg)
}

/// Boosting with exact densities on a finite target.
#[pyfunction]
fn run_exact(py: Python<'_>, target: &PyDiscrete, config: &Bound<'_, PyAny>) -> PyResult<PyBoostRun> {
    let cfg = config_of(config)?;
    let target = target.inner.clone();
    let run = py.detach(move || modecover::run_exact(&target, &cfg)).map_err(to_py_err)?;
    Ok(PyBoostRun { inner: run })
}

/// Boosting on samples, with discriminator-estimated density ratios.
#[pyfunction]
fn run_empirical(py: Python<'_>, points: Vec<Vec<f64>>, config: &Bound<'_, PyAny>) -> PyResult<PyBoostRun> {
    let cfg = config_of(config)?;
    let points = points_of(points)?;
    let run = py.detach(move || modecover::run_empirical(&points, &cfg)).map_err(to_py_err)?;
    Ok(PyBoostRun { inner: run })
}

fn report_dict<'py>(py: Python<'py>, r: &CoverageReport) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, r)
}

/// Pointwise coverage of a mixture against a finite target.
#[pyfunction]
#[pyo3(signature = (mixture, target, mass_lb = 0.01))]
fn pointwise_psi<'py>(
    py: Python<'py>,
    mixture: &PyMixture,
    target: &PyDiscrete,
    mass_lb: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = bounds::pointwise_psi(&mixture.inner, &target.inner, mass_lb).map_err(to_py_err)?;
    report_dict(py, &r)
}

/// Coverage report from aligned mixture densities, target densities and masses.
#[pyfunction]
fn coverage_report<'py>(
    py: Python<'py>,
    g: Vec<f64>,
    p: Vec<f64>,
    mass: Vec<f64>,
    mass_lb: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let r = bounds::coverage_report(&g, &p, &mass, mass_lb).map_err(to_py_err)?;
    report_dict(py, &r)
}

#[pyfunction]
fn lemma1_bound(delta: f64, gamma: f64) -> f64 {
    bounds::lemma1_bound(delta, gamma)
}

#[pyfunction]
fn lemma2_bound(delta: f64, epsilon: f64, eta: f64) -> f64 {
    bounds::lemma2_bound(delta, epsilon, eta)
}

#[pyfunction]
fn theorem1_bound(delta: f64, gamma: f64, eta: f64) -> f64 {
    bounds::theorem1_bound(delta, gamma, eta)
}

#[pyfunction]
#[pyo3(signature = (delta, gamma, eta, epsilon_prime, lambda_, delta_prime = None))]
fn imperfect_disc_bound(
    delta: f64,
    gamma: f64,
    eta: f64,
    epsilon_prime: f64,
    lambda_: f64,
    delta_prime: Option<f64>,
) -> PyResult<f64> {
    let mut tp = TheoryParams::new(delta, gamma, eta);
    tp.epsilon_prime = epsilon_prime;
    tp.lambda = lambda_;
    tp.delta_prime = delta_prime;
    tp.validate().map_err(to_py_err)?;
    Ok(bounds::imperfect_disc_bound(&tp))
}

#[pyfunction]
fn game_bound(delta: f64, gamma: f64) -> f64 {
    bounds::game_bound(delta, gamma)
}

/// Returns (delta, clamped).
#[pyfunction]
fn optimal_delta(gamma: f64, eta: f64) -> (f64, bool) {
    let od = bounds::optimal_delta(gamma, eta);
    (od.delta, od.clamped)
}

fn kind_of(name: &str) -> PyResult<DivergenceKind> {
    Ok(match name {
        "tv" => DivergenceKind::Tv,
        "kl" => DivergenceKind::Kl,
        "js" => DivergenceKind::Js,
        "hellinger" => DivergenceKind::Hellinger,
        other => return Err(PyValueError::new_err(format!("unknown divergence '{other}'"))),
    })
}

/// Divergence between two finite distributions; `bits` selects log base 2.
#[pyfunction]
#[pyo3(signature = (p, q, kind, bits = false))]
fn divergence(p: &PyDiscrete, q: &PyDiscrete, kind: &str, bits: bool) -> PyResult<f64> {
    let base = if bits { LogBase::Two } else { LogBase::E };
    Ok(divergence_discrete(&p.inner, &q.inner, kind_of(kind)?, base).value)
}

fn oracle_dict<'py>(py: Python<'py>, r: modecover::Result<OracleReport>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &r.map_err(to_py_err)?)
}

#[pyfunction]
#[pyo3(signature = (trials = 1000, support_size = 10, delta = 0.25, gamma = 0.1, seed = 1))]
fn check_lemma1(
    py: Python<'_>,
    trials: usize,
    support_size: usize,
    delta: f64,
    gamma: f64,
    seed: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| oracles::check_lemma1(trials, support_size, delta, gamma, seed));
    oracle_dict(py, r)
}

#[pyfunction]
#[pyo3(signature = (trials = 1000, seed = 1))]
fn check_eq3(py: Python<'_>, trials: usize, seed: u64) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| oracles::check_eq3(trials, seed));
    oracle_dict(py, r)
}

#[pyfunction]
#[pyo3(signature = (trials = 500, support_size = 16, rounds = 30, delta = 0.25, eps = 0.3, seed = 1))]
fn check_weight_dynamics(
    py: Python<'_>,
    trials: usize,
    support_size: usize,
    rounds: usize,
    delta: f64,
    eps: f64,
    seed: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| oracles::check_weight_dynamics(trials, support_size, rounds, delta, eps, seed));
    oracle_dict(py, r)
}

#[pyfunction]
#[pyo3(signature = (support_size = 8, rounds = 24, delta = 0.25, gamma = 0.1, eta = 0.2, trials = 100, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn check_theorem1_exhaustive(
    py: Python<'_>,
    support_size: usize,
    rounds: usize,
    delta: f64,
    gamma: f64,
    eta: f64,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'_, PyAny>> {
    let r = py.detach(|| oracles::check_theorem1_exhaustive(support_size, rounds, delta, gamma, eta, trials, seed));
    oracle_dict(py, r)
}

/// Generates a dataset from a spec dict such as {"kind": "spiral", "n": 1000}.
/// Returns (points, mode_ids, centers, sigma0).
#[pyfunction]
#[allow(clippy::type_complexity)]
fn make_dataset(spec: &Bound<'_, PyAny>, seed: u64) -> PyResult<(Vec<Vec<f64>>, Vec<usize>, Vec<Vec<f64>>, f64)> {
    let spec: DatasetSpec = from_py(spec)?;
    let d = spec.generate(seed).map_err(to_py_err)?;
    Ok((rows_of(&d.points), d.mode_ids, rows_of(&d.centers), d.sigma0))
}

/// Number of modes holding at least frac·N/M samples within 3σ0 of their center.
#[pyfunction]
#[pyo3(signature = (samples, centers, sigma0, frac = 0.01))]
fn mode_coverage_count(samples: Vec<Vec<f64>>, centers: Vec<Vec<f64>>, sigma0: f64, frac: f64) -> PyResult<usize> {
    Ok(bounds::mode_coverage_count(
        &points_of(samples)?,
        &points_of(centers)?,
        sigma0,
        frac,
    ))
}

#[pymodule]
fn pymodecover(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDiscrete>()?;
    m.add_class::<PyAnalytic>()?;
    m.add_class::<PyMixture>()?;
    m.add_class::<PyBoostRun>()?;
    m.add_function(wrap_pyfunction!(run_exact, m)?)?;
    m.add_function(wrap_pyfunction!(run_empirical, m)?)?;
    m.add_function(wrap_pyfunction!(pointwise_psi, m)?)?;
    m.add_function(wrap_pyfunction!(coverage_report, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(lemma2_bound, m)?)?;
    m.add_function(wrap_pyfunction!(theorem1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(imperfect_disc_bound, m)?)?;
    m.add_function(wrap_pyfunction!(game_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_delta, m)?)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(check_lemma1, m)?)?;
    m.add_function(wrap_pyfunction!(check_eq3, m)?)?;
    m.add_function(wrap_pyfunction!(check_weight_dynamics, m)?)?;
    m.add_function(wrap_pyfunction!(check_theorem1_exhaustive, m)?)?;
    m.add_function(wrap_pyfunction!(make_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(mode_coverage_count, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
