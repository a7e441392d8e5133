//! Synthetic datasets and analytic targets.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dist::{AnalyticDensity, Point};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Points with their generating mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<Point>,
    pub mode_ids: Vec<usize>,
    /// Center of each mode, indexed by mode id.
    pub centers: Vec<Point>,
    /// Standard deviation of the Gaussian modes.
    pub sigma0: f64,
}

impl Dataset {
    pub fn indices_of_mode(&self, mode: usize) -> Vec<usize> {
        (0..self.points.len()).filter(|&i| self.mode_ids[i] == mode).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    SinePlusGaussian {
        #[serde(default = "default_n_major")]
        n_major: usize,
        #[serde(default = "default_ratio")]
        ratio: usize,
        #[serde(default = "default_minor_center")]
        minor_center: [f64; 2],
        #[serde(default = "one")]
        minor_var: f64,
    },
    GaussGrid {
        #[serde(default = "default_modes")]
        modes: usize,
        #[serde(default = "default_half_width")]
        half_width: f64,
        #[serde(default = "default_small_var")]
        var: f64,
        n: usize,
    },
    Spiral { n: usize },
    GridIsolated { n: usize },
}

fn default_n_major() -> usize {
    40_000
}
fn default_ratio() -> usize {
    400
}
fn default_minor_center() -> [f64; 2] {
    [10.0, 0.0]
}
fn one() -> f64 {
    1.0
}
fn default_modes() -> usize {
    10
}
fn default_half_width() -> f64 {
    15.0
}
fn default_small_var() -> f64 {
    0.05
}

impl DatasetSpec {
    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        match self {
            DatasetSpec::SinePlusGaussian {
                n_major,
                ratio,
                minor_center,
                minor_var,
            } => make_sine_dataset(*n_major, *ratio, *minor_center, *minor_var, seed),
            DatasetSpec::GaussGrid {
                modes,
                half_width,
                var,
                n,
            } => make_gauss_grid(*modes, *half_width, *var, *n, seed),
            DatasetSpec::Spiral { n } => make_spiral(*n, seed),
            DatasetSpec::GridIsolated { n } => make_grid_isolated(*n, seed),
        }
    }
}

/// Major mode on the curve y = x·sin(4x/π), x ~ U[−10, 10], plus a Gaussian
/// minor mode holding 1/`ratio` as many points. Mode 0 is the curve, mode 1
/// the Gaussian.
pub fn make_sine_dataset(
    n_major: usize,
    ratio: usize,
    minor_center: [f64; 2],
    minor_var: f64,
    seed: u64,
) -> Result<Dataset> {
    if ratio == 0 || n_major < ratio {
        return Err(Error::config("need ratio >= 1 and n_major >= ratio"));
    }
    if !(minor_var > 0.0) {
        return Err(Error::config("minor_var must be positive"));
    }
    let n_minor = (n_major as f64 / ratio as f64).round() as usize;
    let mut r = rng::stream(seed, 0, Purpose::Dataset);
    let mut points = Vec::with_capacity(n_major + n_minor);
    let mut mode_ids = Vec::with_capacity(n_major + n_minor);
    for _ in 0..n_major {
        let x = r.random_range(-10.0..=10.0);
        points.push(Point::from([x, sine_curve(x)]));
        mode_ids.push(0);
    }
    let sd = minor_var.sqrt();
    for _ in 0..n_minor {
        let (zx, zy): (f64, f64) = (StandardNormal.sample(&mut r), StandardNormal.sample(&mut r));
        points.push(Point::from([minor_center[0] + sd * zx, minor_center[1] + sd * zy]));
        mode_ids.push(1);
    }
    Ok(Dataset {
        points,
        mode_ids,
        centers: vec![Point::from([0.0, 0.0]), Point::from(minor_center)],
        sigma0: sd,
    })
}

pub fn sine_curve(x: f64) -> f64 {
    x * (4.0 * x / std::f64::consts::PI).sin()
}

/// Isotropic Gaussian modes around `centers`, samples assigned round-robin.
fn gaussian_modes(centers: Vec<Point>, var: f64, n: usize, seed: u64) -> Result<Dataset> {
    if centers.is_empty() {
        return Err(Error::config("need at least one mode"));
    }
    if !(var > 0.0) {
        return Err(Error::config("mode variance must be positive"));
    }
    let sd = var.sqrt();
    let mut r = rng::stream(seed, 1, Purpose::Dataset);
    let m = centers.len();
    let mut points = Vec::with_capacity(n);
    let mut mode_ids = Vec::with_capacity(n);
    for i in 0..n {
        let c = &centers[i % m];
        let coords = c
            .iter()
            .map(|v| {
                let z: f64 = StandardNormal.sample(&mut r);
                v + sd * z
            })
            .collect();
        points.push(Point::new(coords)?);
        mode_ids.push(i % m);
    }
    Ok(Dataset {
        points,
        mode_ids,
        centers,
        sigma0: sd,
    })
}

/// `modes` Gaussians with centers uniform in [−half_width, half_width]².
pub fn make_gauss_grid(modes: usize, half_width: f64, var: f64, n: usize, seed: u64) -> Result<Dataset> {
    if modes == 0 || !(half_width > 0.0) {
        return Err(Error::config("need modes >= 1 and a positive half width"));
    }
    let mut r = rng::stream(seed, 0, Purpose::Dataset);
    let centers = (0..modes)
        .map(|_| {
            Point::from([
                r.random_range(-half_width..=half_width),
                r.random_range(-half_width..=half_width),
            ])
        })
        .collect();
    gaussian_modes(centers, var, n, seed)
}

/// Center of spiral mode `i` (1-based): (cos(i/3)·i², sin(i/3)·i²), angle in radians.
pub fn spiral_center(i: usize) -> Point {
    let t = i as f64;
    Point::from([(t / 3.0).cos() * t * t, (t / 3.0).sin() * t * t])
}

pub fn spiral_centers() -> Vec<Point> {
    (1..=20).map(spiral_center).collect()
}

/// 20 unit-variance modes along a spiral.
pub fn make_spiral(n: usize, seed: u64) -> Result<Dataset> {
    gaussian_modes(spiral_centers(), 1.0, n, seed)
}

/// 21×21 unit-spaced grid on [−10, 10]² plus one mode at (100, 100), all with
/// variance 0.05. The isolated mode has id 441.
pub fn grid_isolated_centers() -> Vec<Point> {
    let mut c = Vec::with_capacity(442);
    for i in 0..21 {
        for j in 0..21 {
            c.push(Point::from([-10.0 + i as f64, -10.0 + j as f64]));
        }
    }
    c.push(Point::from([100.0, 100.0]));
    c
}

pub const ISOLATED_MODE: usize = 441;

pub fn make_grid_isolated(n: usize, seed: u64) -> Result<Dataset> {
    gaussian_modes(grid_isolated_centers(), 0.05, n, seed)
}

/// 0.9·N(0,1) + 0.05·N(10,1) + 0.05·N(−10,1).
pub fn fig1_target() -> AnalyticDensity {
    AnalyticDensity::unit_variance_1d(&[(0.9, 0.0), (0.05, 10.0), (0.05, -10.0)]).expect("valid mixture")
}

/// The reference N(0,1) compared against [`fig1_target`].
pub fn fig1_reference() -> AnalyticDensity {
    AnalyticDensity::unit_variance_1d(&[(1.0, 0.0)]).expect("valid density")
}

/// (P, G1, G2): P = 0.98·N(0,1) + 0.01·N(±10,1), G1 = N(0,1),
/// G2 = 0.34·N(0,1) + 0.33·N(±10,1).
pub fn fig6_instance() -> (AnalyticDensity, AnalyticDensity, AnalyticDensity) {
    let p = AnalyticDensity::unit_variance_1d(&[(0.98, 0.0), (0.01, 10.0), (0.01, -10.0)]);
    let g1 = AnalyticDensity::unit_variance_1d(&[(1.0, 0.0)]);
    let g2 = AnalyticDensity::unit_variance_1d(&[(0.34, 0.0), (0.33, 10.0), (0.33, -10.0)]);
    (
        p.expect("valid mixture"),
        g1.expect("valid density"),
        g2.expect("valid mixture"),
    )
}
