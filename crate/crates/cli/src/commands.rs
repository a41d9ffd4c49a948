//! Command parameters and their execution.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use narrow_escape::asymptotics::{self, FluxExpansion};
use narrow_escape::grid::{self, PolarGrid};
use narrow_escape::montecarlo::{self, McConfig, Start};
use narrow_escape::series::{compute_series, SeriesSolution};
use narrow_escape::Geometry;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::format::{g9, round9};
use crate::manifest::{sidecar_path, RunManifest};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Asymptotic,
    Series,
    Mc,
    Grid,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Asymptotic => "asymptotic",
            Method::Series => "series",
            Method::Mc => "mc",
            Method::Grid => "grid",
        })
    }
}

/// Starting point of the MFPT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum StartPoint {
    Center,
    Uniform,
    /// The antipode `(r, θ) = (1, 0)` of the window centre.
    Max,
    Point { r: f64, theta: f64 },
}

impl StartPoint {
    pub fn parse(kind: &str, r: Option<f64>, theta: Option<f64>) -> Result<Self, CliError> {
        match kind {
            "center" => Ok(StartPoint::Center),
            "uniform" => Ok(StartPoint::Uniform),
            "max" => Ok(StartPoint::Max),
            "point" => match (r, theta) {
                (Some(r), Some(theta)) if (0.0..=1.0).contains(&r) && theta.is_finite() => {
                    Ok(StartPoint::Point { r, theta })
                }
                _ => Err(CliError::Usage("--start point needs --r in [0, 1] and --theta".into())),
            },
            other => Err(CliError::Usage(format!("unknown start '{other}' (center|uniform|max|point)"))),
        }
    }
}

impl fmt::Display for StartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StartPoint::Center => f.write_str("center"),
            StartPoint::Uniform => f.write_str("uniform"),
            StartPoint::Max => f.write_str("max"),
            StartPoint::Point { r, theta } => write!(f, "point r={} theta={}", g9(*r), g9(*theta)),
        }
    }
}

/// Resolution settings shared by the numerical methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics {
    pub terms: usize,
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            terms: narrow_escape::DEFAULT_SERIES_TERMS,
            paths: 10_000,
            dt: montecarlo::DEFAULT_TIME_STEP,
            seed: 1,
            n_r: 128,
            n_theta: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfptParams {
    pub eps: f64,
    pub method: Method,
    pub start: StartPoint,
    pub radius: f64,
    pub diffusivity: f64,
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub eps: Vec<f64>,
    pub methods: Vec<Method>,
    pub starts: Vec<StartPoint>,
    pub numerics: Numerics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxParams {
    pub eps: f64,
    pub terms: usize,
    pub series_terms: usize,
    pub samples: usize,
}

/// A reproducible command with its full parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase")]
pub enum Command {
    Mfpt(MfptParams),
    Sweep(SweepParams),
    Flux(FluxParams),
}

impl Command {
    pub fn seed(&self) -> u64 {
        match self {
            Command::Mfpt(p) => p.numerics.seed,
            Command::Sweep(p) => p.numerics.seed,
            Command::Flux(_) => 0,
        }
    }
}

/// One evaluated MFPT.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub stderr: Option<f64>,
    pub order: String,
    pub warning: Option<String>,
    pub details: Value,
}

impl Evaluation {
    fn plain(value: f64, order: impl Into<String>) -> Self {
        Self { value, stderr: None, order: order.into(), warning: None, details: Value::Null }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Bilinear interpolation of the grid in `(r, θ)`.
fn grid_at(g: &PolarGrid, r: f64, theta: f64) -> f64 {
    let x = r * g.n_r as f64;
    let i = (x.floor() as usize).min(g.n_r - 1);
    let fr = x - i as f64;
    let y = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * g.n_theta as f64;
    let j = (y.floor() as usize).min(g.n_theta - 1);
    let ft = y - j as f64;
    let v = |i, j| g.value(i, j);
    (1.0 - fr) * ((1.0 - ft) * v(i, j) + ft * v(i, j + 1)) + fr * ((1.0 - ft) * v(i + 1, j) + ft * v(i + 1, j + 1))
}

/// Area average of the grid solution by the trapezoidal rule.
fn grid_mean(g: &PolarGrid) -> f64 {
    let h = g.h();
    let dtheta = 2.0 * PI / g.n_theta as f64;
    let mut total = 0.0;
    for i in 1..=g.n_r {
        let w = if i == g.n_r { 0.5 } else { 1.0 };
        let ring: f64 = (0..g.n_theta).map(|j| g.value(i, j)).sum();
        total += w * g.r(i) * ring * dtheta * h;
    }
    total / PI
}

/// Evaluates the dimensionless MFPT for one `(eps, method, start)`.
pub fn evaluate(eps: f64, method: Method, start: StartPoint, num: &Numerics) -> Result<Evaluation, CliError> {
    match method {
        Method::Asymptotic => {
            let v = match start {
                StartPoint::Center => asymptotics::mfpt_center(eps)?,
                StartPoint::Uniform => asymptotics::mfpt_uniform(eps)?,
                StartPoint::Max => asymptotics::mfpt_max(eps)?,
                StartPoint::Point { .. } => {
                    return Err(usage("the asymptotic method covers only center, uniform and max starts"))
                }
            };
            Ok(Evaluation { value: v.value, stderr: None, order: v.error_order, warning: v.warning, details: Value::Null })
        }
        Method::Series => {
            let s = compute_series(eps, num.terms)?;
            let value = match start {
                StartPoint::Center => s.v_center(),
                StartPoint::Uniform => s.v_uniform(),
                StartPoint::Max => s.eval_v(1.0, 0.0)?,
                StartPoint::Point { r, theta } => s.eval_v(r, theta)?,
            };
            Ok(Evaluation::plain(value, format!("N={}", num.terms)))
        }
        Method::Mc => {
            let start = match start {
                StartPoint::Center => Start::Center,
                StartPoint::Uniform => Start::Uniform,
                StartPoint::Max => Start::Antipodal,
                StartPoint::Point { r, theta } => Start::Point { r, theta },
            };
            let cfg = McConfig::new(num.dt, num.paths, num.seed, start);
            let est = montecarlo::simulate_mfpt(&Geometry::unit(eps)?, &cfg)?;
            Ok(Evaluation {
                value: est.mean,
                stderr: Some(est.stderr),
                order: "O(sqrt(dt))".into(),
                warning: None,
                details: json!({
                    "n_paths": num.paths,
                    "dt": round9(num.dt),
                    "n_absorbed": est.n_absorbed,
                    "n_censored": est.n_censored,
                }),
            })
        }
        Method::Grid => {
            let g = grid::solve_grid(eps, num.n_r, num.n_theta)?;
            let value = match start {
                StartPoint::Center => g.center(),
                StartPoint::Uniform => grid_mean(&g),
                StartPoint::Max => g.antipodal(),
                StartPoint::Point { r, theta } => grid_at(&g, r, theta),
            };
            Ok(Evaluation {
                details: json!({ "n_r": num.n_r, "n_theta": num.n_theta, "residual": round9(g.residual) }),
                ..Evaluation::plain(value, "O(h)")
            })
        }
    }
}

/// Leading and corrected small-window values for the three headline starts.
fn asymptotic_split(eps: f64, start: StartPoint) -> Value {
    if !(eps > 0.0 && eps < 1.0) {
        return Value::Null;
    }
    let constant = match start {
        StartPoint::Center => std::f64::consts::LN_2 + 0.25,
        StartPoint::Uniform => std::f64::consts::LN_2 + 0.125,
        StartPoint::Max => 2.0 * std::f64::consts::LN_2,
        StartPoint::Point { .. } => return Value::Null,
    };
    let leading = (1.0 / eps).ln();
    json!({ "leading": round9(leading), "corrected": round9(leading + constant) })
}

/// JSON record for `mfpt`.
pub fn mfpt_record(params: &MfptParams, manifest: &RunManifest) -> Result<Value, CliError> {
    let geom = Geometry::new(params.radius, params.diffusivity, params.eps.min(PI - f64::EPSILON))
        .map_err(|e| usage(e.to_string()))?;
    let ev = evaluate(params.eps, params.method, params.start, &params.numerics)?;
    let mut rec = json!({
        "quantity": "mfpt",
        "eps": round9(params.eps),
        "method": params.method,
        "start": params.start.to_string(),
        "value": round9(ev.value),
        "value_physical": round9(geom.rescale(ev.value)),
        "radius": round9(params.radius),
        "diffusivity": round9(params.diffusivity),
        "error_order": ev.order,
        "asymptotic": asymptotic_split(params.eps, params.start),
        "manifest": manifest,
    });
    let obj = rec.as_object_mut().expect("object");
    if let Some(se) = ev.stderr {
        obj.insert("stderr".into(), json!(round9(se)));
        obj.insert("stderr_physical".into(), json!(round9(geom.rescale(se))));
    }
    if let Some(w) = ev.warning {
        obj.insert("warning".into(), json!(w));
    }
    if !ev.details.is_null() {
        obj.insert("details".into(), ev.details);
    }
    Ok(rec)
}

pub const SWEEP_HEADER: [&str; 6] = ["eps", "method", "start", "value", "stderr", "order"];

/// Sweep CSV text, rows ordered by eps, then method, then start.
pub fn render_sweep(params: &SweepParams) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for &eps in &params.eps {
        for &method in &params.methods {
            for &start in &params.starts {
                let ev = evaluate(eps, method, start, &params.numerics)?;
                w.write_record([
                    g9(eps),
                    method.to_string(),
                    start.to_string(),
                    g9(ev.value),
                    ev.stderr.map(g9).unwrap_or_default(),
                    ev.order,
                ])?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 csv"))
}

pub const FLUX_HEADER: [&str; 3] = ["alpha", "f_asymptotic", "f_series"];

/// Largest `|α|` sampled by `flux`.
pub const FLUX_ALPHA_MAX: f64 = 0.999;

/// Flux CSV text and the JSON report body.
pub fn render_flux(params: &FluxParams) -> Result<(String, Value), CliError> {
    if params.samples < 2 {
        return Err(usage("flux needs --samples ≥ 2"));
    }
    let expansion = FluxExpansion::new(params.eps, params.terms)?;
    let series: SeriesSolution = compute_series(params.eps, params.series_terms)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(FLUX_HEADER)?;
    let n = params.samples;
    for k in 0..n {
        let alpha = FLUX_ALPHA_MAX * (2.0 * k as f64 - (n - 1) as f64) / (n - 1) as f64;
        let f_asym = expansion.eval(alpha)?;
        let f_series = series.flux_series(PI - params.eps * alpha)?;
        w.write_record([g9(alpha), g9(f_asym), g9(f_series)])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Other(e.to_string()))?;
    let conservation = expansion.conservation_integral()?;
    let report = json!({
        "quantity": "flux",
        "eps": round9(params.eps),
        "terms": params.terms,
        "series_terms": params.series_terms,
        "samples": n,
        "conservation": round9(conservation),
        "conservation_target": round9(-PI),
        "f_asymptotic_center": round9(expansion.eval(0.0)?),
        "f_series_center": round9(series.flux_series(PI)?),
        "f_asymptotic_0_99": round9(expansion.eval(0.99)?),
    });
    Ok((String::from_utf8(bytes).expect("utf-8 csv"), report))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn pretty(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Runs `manifest.command`, writing files under `out` where the command
/// produces one, and returns the text for standard output.
pub fn execute(manifest: &RunManifest, out: Option<&Path>) -> Result<String, CliError> {
    match &manifest.command {
        Command::Mfpt(p) => {
            let text = pretty(&mfpt_record(p, manifest)?);
            if let Some(path) = out {
                write_file(path, &text)?;
            }
            Ok(text)
        }
        Command::Sweep(p) => {
            let path = out.ok_or_else(|| usage("sweep needs --out"))?;
            let csv = render_sweep(p)?;
            write_file(path, &csv)?;
            let side = pretty(manifest);
            write_file(&sidecar_path(path), &side)?;
            Ok(side)
        }
        Command::Flux(p) => {
            let path = out.ok_or_else(|| usage("flux needs --out"))?;
            let (csv, mut report) = render_flux(p)?;
            write_file(path, &csv)?;
            write_file(&sidecar_path(path), &pretty(manifest))?;
            report.as_object_mut().expect("object").insert("manifest".into(), serde_json::to_value(manifest)?);
            Ok(pretty(&report))
        }
    }
}

/// Reads a manifest from a sidecar file or from any record embedding one.
pub fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    let mut v: Value = serde_json::from_str(&text)?;
    if let Some(m) = v.get_mut("manifest") {
        v = m.take();
    }
    Ok(serde_json::from_value(v)?)
}

/// Default output path when replaying a sidecar `X.manifest.json`: `X`.
pub fn replay_out(manifest_path: &Path) -> Option<std::path::PathBuf> {
    let s = manifest_path.to_str()?;
    s.strip_suffix(".manifest.json").map(Into::into)
}

/// Runs `f` on a pool of `threads` workers.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Other(e.to_string()))?;
    Ok(pool.install(f))
}
