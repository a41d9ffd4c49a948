//! Reflected Brownian motion in the unit disk with absorption on the
//! window, simulated by Euler–Maruyama steps with segment–circle hit
//! detection and specular reflection.
//!
//! Each path draws from its own ChaCha8 stream selected by the path index,
//! and per-path outcomes are reduced in index order, so results do not
//! depend on the number of worker threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Default base time step.
pub const DEFAULT_TIME_STEP: f64 = 4e-4;
/// Default step refinement inside the window layer.
pub const DEFAULT_SUBSTEPS: u32 = 16;
/// Largest tolerated censored fraction.
pub const MAX_CENSORED_FRACTION: f64 = 0.01;

/// Initial position of every path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Start {
    Center,
    /// Point at polar coordinates `(r, θ)`.
    Point { r: f64, theta: f64 },
    /// Uniformly distributed over the disk.
    Uniform,
    /// The boundary point `θ = 0` opposite the window centre.
    Antipodal,
}

impl Start {
    fn validate(&self) -> Result<()> {
        match *self {
            Start::Point { r, theta } if !((0.0..=1.0).contains(&r) && theta.is_finite()) => {
                Err(Error::InvalidParameter(format!("start point needs r in [0, 1], got ({r}, {theta})")))
            }
            _ => Ok(()),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> [f64; 2] {
        match *self {
            Start::Center => [0.0, 0.0],
            Start::Point { r, theta } => [r * theta.cos(), r * theta.sin()],
            Start::Antipodal => [1.0, 0.0],
            Start::Uniform => {
                let r = rng.random::<f64>().sqrt();
                let t = 2.0 * PI * rng.random::<f64>();
                [r * t.cos(), r * t.sin()]
            }
        }
    }
}

/// Simulation parameters. Times are dimensionless (`R = D = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub time_step: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Censoring horizon; `None` selects `100·(log(2/eps) + 1/4)`.
    pub max_time: Option<f64>,
    pub start: Start,
    /// Refinement factor applied while a path is within
    /// `layer_factor·√time_step` of the window.
    pub substeps: u32,
    pub layer_factor: f64,
    /// Also absorb, with the Brownian-bridge crossing probability
    /// `exp(−d₀d₁/dt)`, steps whose endpoints both stay inside near the window.
    pub bridge: bool,
}

impl McConfig {
    pub fn new(time_step: f64, n_paths: usize, seed: u64, start: Start) -> Self {
        Self {
            time_step,
            n_paths,
            seed,
            max_time: None,
            start,
            substeps: DEFAULT_SUBSTEPS,
            layer_factor: 4.0,
            bridge: true,
        }
    }

    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = Some(max_time);
        self
    }

    fn horizon(&self, eps: f64) -> f64 {
        self.max_time.unwrap_or_else(|| 100.0 * ((2.0 / eps).ln() + 0.25).max(0.25))
    }

    fn validate(&self, eps: f64) -> Result<()> {
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::InvalidParameter(format!("time_step must be > 0, got {}", self.time_step)));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidParameter("n_paths must be ≥ 1".into()));
        }
        if self.substeps == 0 || !(self.layer_factor >= 0.0) {
            return Err(Error::InvalidParameter("substeps must be ≥ 1 and layer_factor ≥ 0".into()));
        }
        let horizon = self.horizon(eps);
        if !(horizon > self.time_step) {
            return Err(Error::InvalidParameter(format!(
                "max_time {horizon} must exceed time_step {}",
                self.time_step
            )));
        }
        self.start.validate()
    }
}

/// Mean absorption time over the non-censored paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_absorbed: usize,
    pub n_censored: usize,
}

/// Exit positions in the scaled window coordinate `α = (π − θ)/eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Every exit coordinate, sorted ascending.
    pub samples: Vec<f64>,
}

impl ExitHistogram {
    pub fn from_samples(mut samples: Vec<f64>, n_bins: usize) -> Self {
        let n_bins = n_bins.max(1);
        samples.sort_by(f64::total_cmp);
        let bin_edges: Vec<f64> = (0..=n_bins).map(|i| -1.0 + 2.0 * i as f64 / n_bins as f64).collect();
        let mut counts = vec![0u64; n_bins];
        for &a in &samples {
            let k = (((a + 1.0) / 2.0 * n_bins as f64).floor() as usize).min(n_bins - 1);
            counts[k] += 1;
        }
        Self { bin_edges, counts, samples }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Kolmogorov–Smirnov distance between the samples and `cdf`.
    pub fn ks_distance<F: Fn(f64) -> f64>(&self, cdf: F) -> f64 {
        let n = self.samples.len() as f64;
        self.samples
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Arcsine law `F(α) = 1/2 + arcsin(α)/π` on `[−1, 1]`.
pub fn arcsine_cdf(alpha: f64) -> f64 {
    0.5 + alpha.clamp(-1.0, 1.0).asin() / PI
}

/// Both outputs of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRun {
    pub estimate: McEstimate,
    pub exits: ExitHistogram,
}

/// Result of a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Inside([f64; 2]),
    /// Hit the window at `point` after `fraction` of the step.
    Absorbed { point: [f64; 2], fraction: f64 },
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Largest `t ∈ (0, 1]` with `|p + tΔ| = 1`, for `|p| ≤ 1` and `|p + Δ| > 1`.
fn exit_parameter(p: [f64; 2], d: [f64; 2]) -> f64 {
    let a = dot(d, d);
    let b = dot(p, d);
    let c = (dot(p, p) - 1.0).min(0.0);
    let disc = (b * b - a * c).max(0.0).sqrt();
    let t = if b <= 0.0 { (-b + disc) / a } else { -c / (b + disc) };
    t.clamp(0.0, 1.0)
}

const MAX_REFLECTIONS: usize = 32;

/// Advances `position` by `increment`, reflecting specularly off the
/// reflecting arc and stopping on the window.
pub fn step_reflect(position: [f64; 2], increment: [f64; 2], geom: &Geometry) -> StepOutcome {
    let mut p = position;
    let mut d = increment;
    let mut elapsed = 0.0;
    let mut remaining = 1.0;
    for _ in 0..MAX_REFLECTIONS {
        let q = [p[0] + d[0], p[1] + d[1]];
        if dot(q, q) <= 1.0 {
            return StepOutcome::Inside(q);
        }
        let t = exit_parameter(p, d);
        let mut c = [p[0] + t * d[0], p[1] + t * d[1]];
        let norm = dot(c, c).sqrt();
        c = [c[0] / norm, c[1] / norm];
        let at = elapsed + t * remaining;
        if geom.in_window(c[1].atan2(c[0])) {
            return StepOutcome::Absorbed { point: c, fraction: at };
        }
        let over = dot(q, c) - 1.0;
        let mirrored = [q[0] - 2.0 * over * c[0], q[1] - 2.0 * over * c[1]];
        elapsed = at;
        remaining *= 1.0 - t;
        p = c;
        d = [mirrored[0] - c[0], mirrored[1] - c[1]];
    }
    let r = dot(p, p).sqrt().max(1.0);
    StepOutcome::Inside([p[0] / r, p[1] / r])
}

/// Distance from `x` to the window arc.
fn distance_to_window(x: [f64; 2], eps: f64) -> f64 {
    let r = dot(x, x).sqrt();
    let theta = x[1].atan2(x[0]);
    if PI - theta.abs() <= eps {
        return 1.0 - r;
    }
    let end = [-(eps.cos()), eps.sin().copysign(x[1])];
    ((x[0] - end[0]).powi(2) + (x[1] - end[1]).powi(2)).sqrt()
}

#[derive(Debug, Clone, Copy)]
enum PathResult {
    Absorbed { time: f64, alpha: f64 },
    Censored,
}

fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_path(geom: &Geometry, cfg: &McConfig, horizon: f64, index: usize) -> PathResult {
    let mut rng = path_rng(cfg.seed, index);
    let mut x = cfg.start.sample(&mut rng);
    if dot(x, x) >= 1.0 && geom.in_window(x[1].atan2(x[0])) {
        return PathResult::Absorbed { time: 0.0, alpha: (PI - x[1].atan2(x[0]).rem_euclid(2.0 * PI)) / geom.eps };
    }
    let coarse = cfg.time_step;
    let fine = coarse / cfg.substeps as f64;
    let layer = cfg.layer_factor * coarse.sqrt();
    let (sd_coarse, sd_fine) = ((2.0 * coarse).sqrt(), (2.0 * fine).sqrt());
    let mut t = 0.0;
    while t < horizon {
        let (dt, sd) = if distance_to_window(x, geom.eps) < layer { (fine, sd_fine) } else { (coarse, sd_coarse) };
        let gx: f64 = rng.sample(StandardNormal);
        let gy: f64 = rng.sample(StandardNormal);
        match step_reflect(x, [sd * gx, sd * gy], geom) {
            StepOutcome::Inside(q) => {
                if cfg.bridge {
                    if let Some(alpha) = bridge_hit(x, q, dt, geom, &mut rng) {
                        return PathResult::Absorbed { time: t + 0.5 * dt, alpha };
                    }
                }
                x = q;
                t += dt;
            }
            StepOutcome::Absorbed { point, fraction } => {
                let theta = point[1].atan2(point[0]).rem_euclid(2.0 * PI);
                let alpha = ((PI - theta) / geom.eps).clamp(-1.0, 1.0);
                return PathResult::Absorbed { time: t + fraction * dt, alpha };
            }
        }
    }
    PathResult::Censored
}

/// Largest `d₀d₁/dt` for which the bridge test is attempted.
const BRIDGE_CUTOFF: f64 = 25.0;

/// Bridge crossing test for a step from `x` to `q` that ends inside the disk.
fn bridge_hit(x: [f64; 2], q: [f64; 2], dt: f64, geom: &Geometry, rng: &mut ChaCha8Rng) -> Option<f64> {
    let d0 = 1.0 - dot(x, x).sqrt();
    let d1 = 1.0 - dot(q, q).sqrt();
    let z = d0 * d1 / dt;
    if z > BRIDGE_CUTOFF {
        return None;
    }
    let mid = [0.5 * (x[0] + q[0]), 0.5 * (x[1] + q[1])];
    let theta = mid[1].atan2(mid[0]).rem_euclid(2.0 * PI);
    if !geom.in_window(theta) || rng.random::<f64>() >= (-z).exp() {
        return None;
    }
    Some(((PI - theta) / geom.eps).clamp(-1.0, 1.0))
}

/// Number of histogram bins used by [`simulate`].
pub const DEFAULT_BINS: usize = 40;

/// Runs `cfg.n_paths` paths on the current rayon pool.
pub fn simulate(geom: &Geometry, cfg: &McConfig) -> Result<McRun> {
    cfg.validate(geom.eps)?;
    let horizon = cfg.horizon(geom.eps);
    let results: Vec<PathResult> =
        (0..cfg.n_paths).into_par_iter().map(|i| run_path(geom, cfg, horizon, i)).collect();

    let mut times = Vec::with_capacity(results.len());
    let mut alphas = Vec::with_capacity(results.len());
    for r in &results {
        if let PathResult::Absorbed { time, alpha } = *r {
            times.push(time);
            alphas.push(alpha);
        }
    }
    let n_absorbed = times.len();
    let n_censored = results.len() - n_absorbed;
    if n_censored as f64 > MAX_CENSORED_FRACTION * results.len() as f64 {
        return Err(Error::ExcessiveCensoring { censored: n_censored, total: results.len() });
    }
    let n = n_absorbed as f64;
    let mean = times.iter().sum::<f64>() / n;
    let stderr = if n_absorbed > 1 {
        (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(McRun {
        estimate: McEstimate { mean, stderr, n_absorbed, n_censored },
        exits: ExitHistogram::from_samples(alphas, DEFAULT_BINS),
    })
}

/// Mean first passage time estimate.
pub fn simulate_mfpt(geom: &Geometry, cfg: &McConfig) -> Result<McEstimate> {
    Ok(simulate(geom, cfg)?.estimate)
}

/// Exit-position histogram over the absorbed paths.
pub fn simulate_exit_angles(geom: &Geometry, cfg: &McConfig) -> Result<ExitHistogram> {
    Ok(simulate(geom, cfg)?.exits)
}
