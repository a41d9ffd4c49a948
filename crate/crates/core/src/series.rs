//! Cosine-series solution of the mixed boundary value problem.
//!
//! Writing `v = u + (1 − r²)/4`, the harmonic part is
//! `u(r, θ) = a₀/2 + Σ aₙ rⁿ cos nθ`. The coefficients follow from the Abel
//! inversion density `h₁` on `[0, π − eps)`:
//!
//! ```text
//! aₙ = (1/√2) ∫₀^{π−eps} h₁(t) [Pₙ(cos t) + Pₙ₋₁(cos t)] dt,   a₀ = √2 ∫₀^{π−eps} h₁(t) dt
//! ```

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::check_eps;
use crate::quadrature::{
    integrate_sqrt_singular, CompositeRule, LegendreSweep, QuadratureSpec, SingularEnd,
};

fn inner_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-11, rel_tol: 1e-11, max_subdivisions: 4000 }
}

/// Exact `a₀` for window half-angle `eps`:
/// `a₀ = (4/π) ∫₀^{cos(eps/2)} arccos√(s² + sin²(eps/2)) / √(s² + sin²(eps/2)) ds`.
pub fn a0_exact(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let a = (eps / 2.0).sin();
    let c = (eps / 2.0).cos();
    // 1 − (s² + a²) = (c − s)(c + s), so arccos ρ = arcsin √((c − s)(c + s)).
    let f = |s: f64| {
        let gap = (c - s).max(0.0);
        let rho = (s * s + a * a).sqrt();
        (gap * (c + s)).sqrt().asin() * gap.sqrt() / rho
    };
    let r = integrate_sqrt_singular(f, 0.0, c, SingularEnd::Right, &inner_spec())?;
    Ok(4.0 / PI * r.value)
}

/// The Abel inversion density `h₁(t)` for a fixed window.
///
/// Evaluated through the closed form of its antiderivative,
/// `Φ(t) = −2 log cos(t/2) + 2 log(1 + sin(t/2)) + k(t)` with `Φ′ = √2·h₁`,
/// where
/// `k(t) = −(4/π) ∫₀^{sin(t/2)} arcsin√(s² + cos²(t/2)) / √(s² + cos²(t/2)) ds`.
/// `k′` is obtained by differentiating under the integral sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H1Evaluator {
    eps: f64,
    spec: QuadratureSpec,
}

impl H1Evaluator {
    pub fn new(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self { eps, spec: inner_spec() })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Upper end `π − eps` of the support of `h₁`.
    pub fn support_end(&self) -> f64 {
        PI - self.eps
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t < self.support_end() {
            Ok(())
        } else {
            Err(Error::Domain(format!("h₁ is defined on [0, {}), got t = {t}", self.support_end())))
        }
    }

    /// `k(t)`.
    pub fn k(&self, t: f64) -> Result<f64> {
        let (sh, ch) = (t / 2.0).sin_cos();
        if sh <= 0.0 {
            return Ok(0.0);
        }
        // arcsin ρ = π/2 − arcsin √(1 − ρ²), 1 − ρ² = (S − s)(S + s)
        let f = |s: f64| {
            let gap = (sh - s).max(0.0);
            let rho = (s * s + ch * ch).sqrt();
            (FRAC_PI_2 - (gap * (sh + s)).sqrt().asin()) * gap.sqrt() / rho
        };
        let r = integrate_sqrt_singular(f, 0.0, sh, SingularEnd::Right, &self.spec)?;
        Ok(-4.0 / PI * r.value)
    }

    /// `k′(t)`.
    pub fn k_prime(&self, t: f64) -> Result<f64> {
        let (sh, ch) = (t / 2.0).sin_cos();
        if sh <= 0.0 {
            return Ok(-ch);
        }
        // ∂/∂c of arcsin(ρ)/ρ at fixed s, times c/ρ from ∂ρ/∂c; the
        // 1/√(1 − ρ²) factor is the endpoint singularity.
        let f = |s: f64| {
            let gap = (sh - s).max(0.0);
            let rho2 = s * s + ch * ch;
            let rho = rho2.sqrt();
            let asin_rho = FRAC_PI_2 - (gap * (sh + s)).sqrt().asin();
            ch / rho * (1.0 / (rho * (sh + s).sqrt()) - asin_rho * gap.sqrt() / rho2)
        };
        let r = integrate_sqrt_singular(f, 0.0, sh, SingularEnd::Right, &self.spec)?;
        Ok(-ch + 2.0 / PI * sh * r.value)
    }

    /// `Φ(t) = √2 ∫₀ᵗ h₁`.
    pub fn antiderivative(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t <= self.support_end()) {
            return Err(Error::Domain(format!("t = {t} outside [0, π − eps]")));
        }
        let (sh, ch) = (t / 2.0).sin_cos();
        Ok(-2.0 * ch.ln() + 2.0 * (1.0 + sh).ln() + self.k(t)?)
    }

    /// `h₁(t)` for `0 ≤ t < π − eps`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok((1.0 / (t / 2.0).cos() + self.k_prime(t)?) / SQRT_2)
    }
}

/// Truncated coefficient set `{a₀, a₁, …, a_N}` of the harmonic part `u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub eps: f64,
    pub n_terms: usize,
    pub a0: f64,
    /// `a[k]` holds `a_{k+1}`.
    pub a: Vec<f64>,
}

/// Points per Gauss–Legendre panel of the coefficient rule.
const PANEL_POINTS: usize = 20;

/// Panel edges over `[0, π − eps]`. Panels are narrow enough to resolve
/// `P_N(cos t)` and are graded geometrically towards `t = π`, where `h₁`
/// grows like `1/(π − t)`.
pub(crate) fn coefficient_mesh(eps: f64, n_terms: usize) -> Vec<f64> {
    let end = PI - eps;
    let max_width = (5.0 / (n_terms as f64 + 1.0)).min(0.2);
    let mut edges = vec![0.0];
    let mut t = 0.0;
    while end - t > 1e-14 {
        let w = max_width.min(0.5 * (PI - t)).min(end - t);
        t = if end - (t + w) < 1e-12 { end } else { t + w };
        edges.push(t);
    }
    edges
}

/// Computes `a₀` exactly and `a₁ … a_N` by Gauss–Legendre quadrature of the
/// `h₁`-weighted Legendre integrals. Panels are processed in parallel and
/// summed in a fixed order, so the result is independent of thread count.
pub fn compute_series(eps: f64, n_terms: usize) -> Result<SeriesSolution> {
    compute_series_with(eps, n_terms, PANEL_POINTS)
}

pub(crate) fn compute_series_with(eps: f64, n_terms: usize, points: usize) -> Result<SeriesSolution> {
    check_eps(eps)?;
    if n_terms < 1 {
        return Err(Error::InvalidParameter("n_terms must be ≥ 1".into()));
    }
    let h1 = H1Evaluator::new(eps)?;
    let a0 = a0_exact(eps)?;
    let edges = coefficient_mesh(eps, n_terms);

    let partials: Vec<Vec<f64>> = edges
        .par_windows(2)
        .map(|pair| -> Result<Vec<f64>> {
            let rule = CompositeRule::new(pair, points);
            let mut acc = vec![0.0; n_terms];
            for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                let weight = w * h1.eval(t)? / SQRT_2;
                let mut sweep = LegendreSweep::new(t.cos());
                let mut prev = sweep.next().expect("infinite sweep");
                for (slot, p) in acc.iter_mut().zip(sweep) {
                    *slot += weight * (p + prev);
                    prev = p;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut a = vec![0.0; n_terms];
    for part in &partials {
        for (dst, src) in a.iter_mut().zip(part) {
            *dst += src;
        }
    }
    Ok(SeriesSolution { eps, n_terms, a0, a })
}

/// `Σ_{n≥1} cₙ cos nθ` by Clenshaw's backward recurrence.
fn clenshaw_cos(coeffs: impl DoubleEndedIterator<Item = f64>, theta: f64) -> f64 {
    let x = theta.cos();
    let (mut b1, mut b2) = (0.0, 0.0);
    for c in coeffs.rev() {
        let b0 = c + 2.0 * x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    // b1 = b_1, b2 = b_2 after the loop
    b1 * x - b2
}

/// Reduces θ to `[0, π]` using evenness and 2π-periodicity.
fn fold_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        2.0 * PI - t
    } else {
        t
    }
}

impl SeriesSolution {
    /// Truncated `u(r, θ)`; exactly `a₀/2` at `r = 0`.
    pub fn eval_u(&self, r: f64, theta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("r must lie in [0, 1], got {r}")));
        }
        if r == 0.0 {
            return Ok(0.5 * self.a0);
        }
        let powers = self.a.iter().scan(1.0, |p, &an| {
            *p *= r;
            Some(an * *p)
        });
        let coeffs: Vec<f64> = powers.collect();
        Ok(0.5 * self.a0 + clenshaw_cos(coeffs.into_iter(), fold_angle(theta)))
    }

    /// Dimensionless MFPT `v = u + (1 − r²)/4`.
    pub fn eval_v(&self, r: f64, theta: f64) -> Result<f64> {
        Ok(self.eval_u(r, theta)? + 0.25 * (1.0 - r * r))
    }

    /// MFPT from the centre, `a₀/2 + 1/4`.
    pub fn v_center(&self) -> f64 {
        0.5 * self.a0 + 0.25
    }

    /// MFPT at the antipodal point `(1, 0)`, `a₀/2 + Σ aₙ`.
    pub fn v_antipodal(&self) -> f64 {
        0.5 * self.a0 + self.a.iter().rev().sum::<f64>()
    }

    /// MFPT averaged over a uniform start, `a₀/2 + 1/8`.
    pub fn v_uniform(&self) -> f64 {
        0.5 * self.a0 + 0.125
    }

    /// Boundary radial derivative `∂v/∂r(1, θ) = −1/2 + Σ n aₙ cos nθ` at any θ.
    ///
    /// The derivative series converges slowly because `aₙ` decays only like
    /// `n^{-3/2}`; terms carry Lanczos σ-factors `sinc(nπ/(N+1))` to damp the
    /// truncation ringing.
    pub fn boundary_derivative(&self, theta: f64) -> f64 {
        let n_max = self.a.len() as f64 + 1.0;
        let coeffs: Vec<f64> = self
            .a
            .iter()
            .enumerate()
            .map(|(k, an)| {
                let n = (k + 1) as f64;
                let x = PI * n / n_max;
                n * an * x.sin() / x
            })
            .collect();
        -0.5 + clenshaw_cos(coeffs.into_iter(), fold_angle(theta))
    }

    /// Flux `f(θ) = ∂v/∂r` on the absorbing arc `|θ − π| < eps`.
    pub fn flux_series(&self, theta: f64) -> Result<f64> {
        if crate::geometry::angular_distance_to_pi(theta) >= self.eps {
            return Err(Error::Domain(format!(
                "θ = {theta} is not on the absorbing arc |θ − π| < {}",
                self.eps
            )));
        }
        Ok(self.boundary_derivative(theta))
    }
}
