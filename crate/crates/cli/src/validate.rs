//! Cross-method validation suite. Each criterion returns a measured
//! outcome; the `validate` command and the acceptance test both print them.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::time::{Duration, Instant};

use narrow_escape::asymptotics::{self, FluxExpansion, RayProfile};
use narrow_escape::grid::{self, compare_methods};
use narrow_escape::montecarlo::{self, arcsine_cdf, McConfig, Start};
use narrow_escape::series::{a0_exact, compute_series};
use narrow_escape::Geometry;

use crate::commands::{render_sweep, with_threads, Method, Numerics, StartPoint, SweepParams};
use crate::format::g9;
use crate::CliError;

/// `log 2 − 1/4`.
pub const MAX_MINUS_CENTER: f64 = 0.443_147_180_6;

pub const DEFAULT_EPS: [f64; 3] = [0.2, 0.1, 0.05];

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}. {}: {} ({:.2} s, budget {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }
}

fn timed(
    id: u8,
    name: &'static str,
    budget_s: u64,
    f: impl FnOnce() -> Result<(bool, String), CliError>,
) -> Outcome {
    let t = Instant::now();
    let (ok, measured) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    let elapsed = t.elapsed();
    let budget = Duration::from_secs(budget_s);
    let within = elapsed <= budget;
    let measured = if within { measured } else { format!("{measured}; over time budget") };
    Outcome { id, name, passed: ok && within, measured, elapsed, budget }
}

/// `log(1/eps) + log 2 + 1/4`.
pub fn center_formula(eps: f64) -> f64 {
    (1.0 / eps).ln() + LN_2 + 0.25
}

/// `log(1/eps) + log 2 + 1/8`.
pub fn uniform_formula(eps: f64) -> f64 {
    (1.0 / eps).ln() + LN_2 + 0.125
}

/// 1: series centre value against `reference` within `5·eps`.
pub fn center_mfpt(eps_list: &[f64], reference: fn(f64) -> f64) -> Outcome {
    timed(1, "center MFPT", 30, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for &eps in eps_list {
            let v = compute_series(eps, narrow_escape::DEFAULT_SERIES_TERMS)?.v_center();
            let d = (v - reference(eps)).abs();
            ok &= d <= 5.0 * eps;
            parts.push(format!("eps={} |d|={} (≤{})", g9(eps), g9(d), g9(5.0 * eps)));
        }
        Ok((ok, parts.join(", ")))
    })
}

/// 2: `a₀/2 + 1/8` against `reference` within `5·eps`.
pub fn uniform_mfpt(eps_list: &[f64], reference: fn(f64) -> f64) -> Outcome {
    timed(2, "uniform-average MFPT", 5, || {
        let mut ok = true;
        let mut parts = Vec::new();
        for &eps in eps_list {
            let d = (a0_exact(eps)? / 2.0 + 0.125 - reference(eps)).abs();
            ok &= d <= 5.0 * eps;
            parts.push(format!("eps={} |d|={} (≤{})", g9(eps), g9(d), g9(5.0 * eps)));
        }
        Ok((ok, parts.join(", ")))
    })
}

/// 3: `v(1, 0) − v(0)` against `log 2 − 1/4` within 0.02 at eps = 0.01.
pub fn max_mfpt() -> Outcome {
    timed(3, "max MFPT", 30, || {
        let s = compute_series(0.01, 512)?;
        let d = s.eval_v(1.0, 0.0)? - s.v_center();
        Ok((
            (d - MAX_MINUS_CENTER).abs() <= 0.02,
            format!("v_max - v_center = {} vs {} (±0.02)", g9(d), g9(MAX_MINUS_CENTER)),
        ))
    })
}

/// 4: exact vs outer ray profile within `10·eps`, inner vs outer value at
/// `δ₀ = −eps·log(eps/2)` within 15%.
pub fn ray_profile() -> Outcome {
    timed(4, "ray profile", 10, || {
        let eps = 0.01;
        let profile = RayProfile::new(eps)?;
        let mut ok = true;
        let mut parts = Vec::new();
        for r in [0.0, 0.25, 0.5, 0.75] {
            let d = (profile.exact(r)? - asymptotics::v_ray_outer(r, eps)?.value).abs();
            ok &= d <= 10.0 * eps;
            parts.push(format!("r={} |exact-outer|={}", g9(r), g9(d)));
        }
        let delta0 = -eps * (eps / 2.0).ln();
        let inner = asymptotics::v_ray_inner(delta0, eps)?.value;
        let outer = -(eps / 2.0).ln();
        let rel = (inner - outer).abs() / outer;
        ok &= rel <= 0.15;
        parts.push(format!("inner(delta0)/outer-1={}", g9(rel)));
        Ok((ok, parts.join(", ")))
    })
}

/// 5: flux at the window centre, conservation and evenness.
pub fn flux_profile() -> Outcome {
    timed(5, "flux profile", 5, || {
        let e = FluxExpansion::new(0.01, 64)?;
        let f0 = e.eval(0.0)?;
        let cons = e.conservation_integral()?;
        let even = (0..=1000).all(|k| {
            let a = 0.999 * k as f64 / 1000.0;
            matches!((e.eval(a), e.eval(-a)), (Ok(x), Ok(y)) if x.to_bits() == y.to_bits())
        });
        let ok = (f0 + 100.0).abs() <= 1.0 && (cons + PI).abs() <= 0.02 * PI && even;
        Ok((ok, format!("f(0)={} conservation={} even={even}", g9(f0), g9(cons))))
    })
}

/// Monte Carlo settings for criteria 6 and 8.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub paths: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { paths: 100_000, dt: montecarlo::DEFAULT_TIME_STEP, seed: 2024 }
    }
}

/// 6: Monte Carlo centre MFPT and exit-position law at eps = 0.1.
pub fn monte_carlo(mc: McSettings) -> Outcome {
    timed(6, "Monte Carlo concordance", 180, || {
        let eps = 0.1;
        let exact = asymptotics::v_ray_exact(0.0, eps)?;
        let run = montecarlo::simulate(&Geometry::unit(eps)?, &McConfig::new(mc.dt, mc.paths, mc.seed, Start::Center))?;
        let est = run.estimate;
        let tol = (3.0 * est.stderr).max(0.05 * exact);
        let ks = run.exits.ks_distance(arcsine_cdf);
        let ok = (est.mean - exact).abs() <= tol && ks <= 0.05;
        Ok((
            ok,
            format!(
                "mean={} ± {} vs {} (tol {}), KS={} (≤0.05), paths={}, censored={}",
                g9(est.mean),
                g9(est.stderr),
                g9(exact),
                g9(tol),
                g9(ks),
                mc.paths,
                est.n_censored
            ),
        ))
    })
}

/// 7: grid against series outside the window layer, maximum location and
/// flux balance at eps = 0.2 on 128×512.
pub fn grid_concordance() -> Outcome {
    timed(7, "grid concordance", 60, || {
        let eps = 0.2;
        let g = grid::solve_grid(eps, 128, 512)?;
        let s = compute_series(eps, 512)?;
        let rep = compare_methods(&g, &s)?;
        let at_antipode = g.max_location() == (g.n_r, 0);
        let flux = g.flux_balance();
        let ok = rep.max_relative <= 0.02 && at_antipode && (flux + PI).abs() <= 0.05 * PI;
        Ok((
            ok,
            format!(
                "max rel={} l2 rel={} over {} nodes beyond {} of the window centre, max at antipode={at_antipode}, flux={}",
                g9(rep.max_relative),
                g9(rep.l2_relative),
                rep.n_nodes,
                g9(rep.exclusion_radius),
                g9(flux)
            ),
        ))
    })
}

/// 8: fully absorbing boundary, `v(0) = 1/4` from grid and Monte Carlo.
pub fn fully_absorbing(mc: McSettings) -> Outcome {
    timed(8, "fully absorbing disk", 60, || {
        let g = grid::solve_grid(PI, 64, 256)?;
        let grid_err = (g.center() - 0.25).abs();
        let cfg = McConfig::new(mc.dt / 4.0, mc.paths, mc.seed, Start::Center);
        let est = montecarlo::simulate_mfpt(&Geometry::unit(PI - 0.01)?, &cfg)?;
        let mc_err = (est.mean - 0.25).abs();
        let ok = grid_err <= 1e-3 && mc_err <= 3.0 * est.stderr;
        Ok((
            ok,
            format!(
                "grid v(0)={} (|d|={}), mc v(0)={} ± {} at eps=pi-0.01",
                g9(g.center()),
                g9(grid_err),
                g9(est.mean),
                g9(est.stderr)
            ),
        ))
    })
}

/// 9: sweep output and Monte Carlo estimates identical on 1 and 8 workers.
pub fn determinism() -> Outcome {
    timed(9, "determinism", 120, || {
        let params = SweepParams {
            eps: vec![0.3, 0.2],
            methods: vec![Method::Asymptotic, Method::Series, Method::Mc],
            starts: vec![StartPoint::Center, StartPoint::Max],
            numerics: Numerics { paths: 400, dt: 1e-3, ..Numerics::default() },
        };
        let one = with_threads(1, || render_sweep(&params))??;
        let eight = with_threads(8, || render_sweep(&params))??;
        let geom = Geometry::unit(0.2)?;
        let cfg = McConfig::new(1e-3, 1000, 77, Start::Uniform);
        let a = with_threads(1, || montecarlo::simulate(&geom, &cfg))??;
        let b = with_threads(8, || montecarlo::simulate(&geom, &cfg))??;
        let same_mc = a.estimate.mean.to_bits() == b.estimate.mean.to_bits()
            && a.estimate.stderr.to_bits() == b.estimate.stderr.to_bits()
            && a.exits == b.exits;
        Ok((
            one == eight && same_mc,
            format!("sweep bytes identical={} ({} bytes), simulate identical={same_mc}", one == eight, one.len()),
        ))
    })
}

/// Options for the full suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub eps: Vec<f64>,
    pub mc: McSettings,
}

impl Default for Suite {
    fn default() -> Self {
        Self { eps: DEFAULT_EPS.to_vec(), mc: McSettings::default() }
    }
}

/// Runs every criterion in order, calling `report` as each finishes.
pub fn run_suite(suite: &Suite, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let steps: Vec<Box<dyn Fn() -> Outcome + '_>> = vec![
        Box::new(|| center_mfpt(&suite.eps, center_formula)),
        Box::new(|| uniform_mfpt(&suite.eps, uniform_formula)),
        Box::new(max_mfpt),
        Box::new(ray_profile),
        Box::new(flux_profile),
        Box::new(|| monte_carlo(suite.mc)),
        Box::new(grid_concordance),
        Box::new(|| fully_absorbing(suite.mc)),
        Box::new(determinism),
    ];
    steps
        .iter()
        .map(|step| {
            let o = step();
            report(&o);
            o
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dropping_log2_fails_center_criterion() {
        fn mutated(eps: f64) -> f64 {
            (1.0 / eps).ln() + 0.25
        }
        assert!(center_mfpt(&DEFAULT_EPS, center_formula).passed);
        let o = center_mfpt(&DEFAULT_EPS, mutated);
        assert!(!o.passed, "{o}");
    }

    #[test]
    fn outcome_line() {
        let o = Outcome {
            id: 3,
            name: "max MFPT",
            passed: true,
            measured: "x".into(),
            elapsed: Duration::from_millis(1500),
            budget: Duration::from_secs(30),
        };
        assert_eq!(o.to_string(), "[PASS] 3. max MFPT: x (1.50 s, budget 30 s)");
    }

    #[test]
    fn max_criterion_reports_gap() {
        let o = max_mfpt();
        assert!(o.passed, "{o}");
        assert!(o.measured.contains("0.443147181"));
    }
}
