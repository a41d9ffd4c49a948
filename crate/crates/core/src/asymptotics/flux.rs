//! Flux profile across the window in the scaled coordinate
//! `α = (π − θ)/eps`, together with the Taylor-coefficient ledgers
//! `φ₂ₙ(a)` and `βₙ(a)` behind its boundary expansion.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::check_eps;
use crate::quadrature::{integrate, integrate_sqrt_singular, QuadratureSpec, SingularEnd};
use crate::series::a0_exact;

/// Switch point between the α² power series and the boundary expansion.
const POWER_SERIES_LIMIT: f64 = 0.5;

/// Largest `n` for which [`FluxExpansion::beta_exact`] is offered.
pub const BETA_EXACT_MAX: usize = 16;

/// Number of extra Taylor terms kept when `βₙ` integrands are summed near `s = 0`.
const TAYLOR_TAIL: usize = 32;

fn spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-11, max_subdivisions: 4000 }
}

/// `cₙ = (2n)!/(2ⁿn!)²` for `n = 0..len`.
pub(crate) fn central_ratios(len: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(len);
    let mut v = 1.0;
    for n in 0..len {
        c.push(v);
        v *= (2 * n + 1) as f64 / (2 * n + 2) as f64;
    }
    c
}

/// Truncated small-eps flux expansion for one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxExpansion {
    pub eps: f64,
    pub n_terms: usize,
    /// `a = sin(eps/2)`.
    pub a_half: f64,
}

impl FluxExpansion {
    pub fn new(eps: f64, n_terms: usize) -> Result<Self> {
        check_eps(eps)?;
        if n_terms == 0 {
            return Err(Error::InvalidParameter("flux expansion needs n_terms ≥ 1".into()));
        }
        Ok(Self { eps, n_terms, a_half: (eps / 2.0).sin() })
    }

    fn check_alpha(alpha: f64) -> Result<()> {
        if alpha.abs() < 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("flux expansion needs |alpha| < 1, got {alpha}")))
        }
    }

    /// Flux `∂v/∂n` at `θ = π − eps·α`.
    ///
    /// For `α² ≤ 1/2` the power series `−(1/eps) Σ cₙ α²ⁿ` is summed, otherwise
    /// the three-part boundary expansion
    ///
    /// ```text
    /// −α²/(eps√(1−α²))
    ///   − (1/eps) Σ [α²/c_{n+1} − 1/((2n+1)cₙ)] (1−α²)^{n+1/2}
    ///   − (π/(2eps)) Σ [cₙ − (2n+2)c_{n+1} α²] (1−α²)ⁿ
    /// ```
    ///
    /// truncated after `n_terms` terms.
    pub fn eval(&self, alpha: f64) -> Result<f64> {
        Self::check_alpha(alpha)?;
        let x2 = alpha * alpha;
        let n = self.n_terms;
        let c = central_ratios(n + 1);
        if x2 <= POWER_SERIES_LIMIT {
            let sum = c[..n].iter().rev().fold(0.0, |acc, &ck| acc * x2 + ck);
            return Ok(-sum / self.eps);
        }
        let w = 1.0 - x2;
        let sw = w.sqrt();
        let mut second = 0.0;
        let mut third = 0.0;
        let mut pow = 1.0;
        for k in 0..n {
            let kf = k as f64;
            second += (x2 / c[k + 1] - 1.0 / ((2.0 * kf + 1.0) * c[k])) * pow * sw;
            third += (c[k] - (2.0 * kf + 2.0) * c[k + 1] * x2) * pow;
            pow *= w;
        }
        Ok((-x2 / sw - second - PI / 2.0 * third) / self.eps)
    }

    /// `eps·f(α)`, the O(1) profile shape.
    pub fn eval_scaled(&self, alpha: f64) -> Result<f64> {
        Ok(self.eps * self.eval(alpha)?)
    }

    /// `eps ∫₋₁¹ f(α) dα`, the total flux through the window.
    pub fn conservation_integral(&self) -> Result<f64> {
        let tol = QuadratureSpec { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 4000 };
        let g = |a: f64| {
            self.eval_scaled(a).unwrap_or(f64::NAN) * (1.0 - a).sqrt()
        };
        let half = integrate_sqrt_singular(g, 0.0, 1.0, SingularEnd::Right, &tol)?.value;
        Ok(2.0 * half)
    }

    /// Taylor coefficients `φ₀, φ₂, …, φ₂₍ₘ₋₁₎` of
    /// `φ(a, s) = arccos√(s²+a²)/√(s²+a²)` in powers of `s²`.
    pub fn phi_coefficients(&self, m: usize) -> Vec<f64> {
        phi_coefficients(self.a_half, m)
    }

    /// Leading small-`a` form `(−1)ⁿ (π/2) cₙ / a^{2n+1}` of `φ₂ₙ`.
    pub fn phi_leading(&self, n: usize) -> f64 {
        let c = central_ratios(n + 1)[n];
        sign(n) * PI / 2.0 * c / self.a_half.powi(2 * n as i32 + 1)
    }

    /// `βₙ(a)`, the coefficients of `∫₀^{√(1−a²)} φ(a,s) s² ds/(s² + b²) = Σ βₙ bⁿ`.
    pub fn beta_exact(&self, n: usize) -> Result<f64> {
        if n > BETA_EXACT_MAX {
            return Err(Error::InvalidParameter(format!(
                "beta_exact is offered for n ≤ {BETA_EXACT_MAX}, got {n}"
            )));
        }
        let a = self.a_half;
        if n == 0 {
            return Ok(PI / 4.0 * a0_exact(self.eps)?);
        }
        let j = n / 2;
        if n % 2 == 1 {
            let phi = phi_coefficients(a, j + 1);
            return Ok(-sign(j) * PI / 2.0 * phi[j]);
        }
        let phi = phi_coefficients(a, j);
        let scaled = phi_scaled(a, j + TAYLOR_TAIL);
        let b = (1.0 - a * a).sqrt();
        let split = (a / 2.0).min(b);
        let near = |s: f64| {
            let t2 = (s / a).powi(2);
            scaled[j..].iter().rev().fold(0.0, |acc, &p| acc * t2 + p) / a.powi(2 * j as i32 + 1)
        };
        let head = |s: f64| {
            let y = s * s;
            phi[..j].iter().rev().fold(0.0, |acc, &p| acc * y + p)
        };
        let far = |s: f64| {
            let gap = (b - s).max(0.0);
            let rho = (s * s + a * a).sqrt();
            let phi_s = (gap * (b + s)).sqrt().asin() / rho;
            (phi_s - head(s)) / s.powi(2 * j as i32)
        };
        let integral = integrate(near, 0.0, split, &spec())?.value + integrate(far, split, b, &spec())?.value;
        let mut tail = 0.0;
        for (k, &p) in phi[..j].iter().enumerate() {
            let m = (2 * (j - k) - 1) as f64;
            tail += p / (m * b.powf(m));
        }
        Ok(sign(j) * (integral - tail))
    }

    /// Leading small-`a` forms: `β_{2j+1} ≈ −(π²/4) c_j / a^{2j+1}` and
    /// `β_{2j} ≈ (π/2) / ((2j − 1) c_{j−1} a^{2j})` for `j ≥ 1`.
    pub fn beta_leading(&self, n: usize) -> Result<f64> {
        let a = self.a_half;
        let c = central_ratios(n / 2 + 1);
        match n {
            0 => Ok(PI / 4.0 * 2.0 * (-(a.ln()))),
            _ if n % 2 == 1 => Ok(-PI * PI / 4.0 * c[n / 2] / a.powi(n as i32)),
            _ => {
                let j = n / 2;
                Ok(PI / 2.0 / ((2 * j - 1) as f64 * c[j - 1] * a.powi(n as i32)))
            }
        }
    }
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 { 1.0 } else { -1.0 }
}

/// Taylor coefficients of `arccos√(y + a²)/√(y + a²)` in `y = s²`.
pub(crate) fn phi_coefficients(a: f64, m: usize) -> Vec<f64> {
    phi_scaled(a, m).into_iter().enumerate().map(|(n, p)| p / a.powi(2 * n as i32 + 1)).collect()
}

/// `φ₂ₙ(a)·a^{2n+1}`, which stays O(1) as `a → 0`.
fn phi_scaled(a: f64, m: usize) -> Vec<f64> {
    let b = (1.0 - a * a).sqrt();
    let ratio = (a / b).powi(2);
    let c = central_ratios(m);
    // (y + a²)^{-1/2} and (b² − y)^{-1/2}, coefficient k scaled by a^{2k+1} and a^{2k}
    let big_a: Vec<f64> = (0..m).map(|k| sign(k) * c[k]).collect();
    let mut big_b = Vec::with_capacity(m);
    let mut pb = 1.0 / b;
    for &ck in &c {
        big_b.push(ck * pb);
        pb *= ratio;
    }
    // arccos√(y + a²) with Y′ = −½ A B, coefficient k scaled by a^{2k}
    let mut y = vec![0.0; m];
    if m > 0 {
        y[0] = a.acos();
    }
    for k in 0..m.saturating_sub(1) {
        let ab: f64 = (0..=k).map(|i| big_a[i] * big_b[k - i]).sum();
        y[k + 1] = -0.5 * a * ab / (k + 1) as f64;
    }
    (0..m).map(|n| (0..=n).map(|i| y[i] * big_a[n - i]).sum()).collect()
}

/// Flux `∂v/∂n` at `θ = π − eps·α` from the small-eps expansion with
/// `n_terms` terms.
pub fn flux_asymptotic(alpha: f64, eps: f64, n_terms: usize) -> Result<f64> {
    FluxExpansion::new(eps, n_terms)?.eval(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn phi_direct(a: f64, s: f64) -> f64 {
        let rho = (s * s + a * a).sqrt();
        rho.acos() / rho
    }

    #[test]
    fn center_value() {
        for n in [30, 64, 100] {
            let f = flux_asymptotic(0.0, 0.01, n).unwrap();
            assert!((f + 100.0).abs() <= 1.0, "n={n}: {f}");
        }
        assert_eq!(flux_asymptotic(0.0, 0.01, 64).unwrap(), -100.0);
    }

    #[test]
    fn domain() {
        assert!(flux_asymptotic(1.0, 0.01, 64).is_err());
        assert!(flux_asymptotic(-1.2, 0.01, 64).is_err());
        assert!(FluxExpansion::new(0.01, 0).is_err());
    }

    #[test]
    fn endpoint_singularity() {
        let eps = 0.01;
        for a in [0.999, 0.9999, -0.999, -0.9999] {
            let g = (1.0 - a * a as f64).sqrt() * flux_asymptotic(a, eps, 64).unwrap();
            assert!((g * eps + 1.0).abs() <= 0.05, "alpha={a}: {g}");
        }
    }

    #[test]
    fn boundary_expansion_resums_to_inverse_sqrt() {
        // both branches reduce to −1/(eps√(1−α²)) once the truncation error is negligible
        let e = FluxExpansion::new(0.05, 64).unwrap();
        for i in 0..100 {
            let a = -0.995 + 0.0199 * i as f64;
            let f = e.eval(a).unwrap();
            let closed = -1.0 / (0.05 * (1.0 - a * a).sqrt());
            assert!((f - closed).abs() <= 1e-9 * closed.abs(), "alpha={a}");
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        let e = FluxExpansion::new(0.02, 64).unwrap();
        let x = POWER_SERIES_LIMIT.sqrt();
        let lo = e.eval(x - 1e-12).unwrap();
        let hi = e.eval(x + 1e-12).unwrap();
        assert!((lo - hi).abs() < 1e-8 * lo.abs());
    }

    #[test]
    fn conservation() {
        let c = FluxExpansion::new(0.01, 64).unwrap().conservation_integral().unwrap();
        assert!((c + PI).abs() <= 0.02 * PI, "{c}");
    }

    proptest! {
        #[test]
        fn even_in_alpha(alpha in -0.9999f64..0.9999, eps in 0.001f64..0.3, n in 1usize..80) {
            let e = FluxExpansion::new(eps, n).unwrap();
            prop_assert_eq!(e.eval(alpha).unwrap(), e.eval(-alpha).unwrap());
        }

        #[test]
        fn negative_everywhere(alpha in -0.9999f64..0.9999, eps in 0.001f64..0.3) {
            prop_assert!(flux_asymptotic(alpha, eps, 64).unwrap() < 0.0);
        }
    }

    #[test]
    fn phi_closed_forms() {
        for a in [0.01, 0.1, 0.4] {
            let p = phi_coefficients(a, 2);
            let b = (1.0 - a * a as f64).sqrt();
            assert_abs_diff_eq!(p[0], a.acos() / a, epsilon = 1e-14 * p[0].abs());
            let phi2 = -(a.acos() / (2.0 * a.powi(3)) + 1.0 / (2.0 * a * a * b));
            assert_abs_diff_eq!(p[1], phi2, epsilon = 1e-12 * phi2.abs());
        }
    }

    #[test]
    fn phi_taylor_reproduces_function() {
        for a in [0.05, 0.2] {
            let p = phi_coefficients(a, 60);
            for s in [0.1 * a, 0.3 * a, 0.5 * a] {
                let y = s * s;
                let series = p.iter().rev().fold(0.0, |acc, &c| acc * y + c);
                let direct = phi_direct(a, s);
                assert!((series - direct).abs() <= 1e-12 * direct.abs(), "a={a} s={s}");
            }
        }
    }

    #[test]
    fn phi_leading_order() {
        let e = FluxExpansion::new(2.0 * 1e-4f64.asin(), 8).unwrap();
        let p = e.phi_coefficients(8);
        for (n, &pn) in p.iter().enumerate() {
            let ratio = pn / e.phi_leading(n);
            assert!((ratio - 1.0).abs() < 1e-3 * (n + 1) as f64, "n={n}: {ratio}");
        }
    }

    #[test]
    fn beta_low_orders() {
        let e = FluxExpansion::new(0.1, 8).unwrap();
        let a = e.a_half;
        assert_abs_diff_eq!(e.beta_exact(1).unwrap(), -PI * a.acos() / (2.0 * a), epsilon = 1e-12);
        assert_abs_diff_eq!(e.beta_exact(0).unwrap(), PI / 4.0 * a0_exact(0.1).unwrap(), epsilon = 1e-14);
        // β₂ = −∫₀^b (φ − φ₀)/s² ds + φ₀/b, evaluated by a plain adaptive rule
        let b = (1.0 - a * a).sqrt();
        let phi0 = a.acos() / a;
        let spec = QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 4000 };
        let i = integrate(|s| if s == 0.0 { 0.0 } else { (phi_direct(a, s) - phi0) / (s * s) }, 0.0, b, &spec)
            .unwrap()
            .value;
        assert_abs_diff_eq!(e.beta_exact(2).unwrap(), -i + phi0 / b, epsilon = 1e-8);
        assert!(e.beta_exact(BETA_EXACT_MAX + 1).is_err());
    }

    #[test]
    fn beta_series_reproduces_integral() {
        // Σ βₙ bⁿ against ∫₀^{√(1−a²)} φ s²/(s² + b²) ds for b well inside the radius a
        let e = FluxExpansion::new(0.2, 8).unwrap();
        let a = e.a_half;
        let top = (1.0 - a * a).sqrt();
        let betas: Vec<f64> = (0..=BETA_EXACT_MAX).map(|n| e.beta_exact(n).unwrap()).collect();
        let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-12, max_subdivisions: 4000 };
        for frac in [0.1, 0.25] {
            let b = frac * a;
            let direct = integrate(|s| phi_direct(a, s) * s * s / (s * s + b * b), 0.0, top, &spec).unwrap().value;
            let series = betas.iter().rev().fold(0.0, |acc, &c| acc * b + c);
            assert!((series - direct).abs() <= 1e-8 * direct.abs(), "b={b}: {series} vs {direct}");
        }
    }

    #[test]
    fn beta_leading_order() {
        let e = FluxExpansion::new(2.0 * 1e-4f64.asin(), 8).unwrap();
        for n in 1..=8 {
            let ratio = e.beta_exact(n).unwrap() / e.beta_leading(n).unwrap();
            assert!((ratio - 1.0).abs() < 0.01, "n={n}: {ratio}");
        }
    }
}
