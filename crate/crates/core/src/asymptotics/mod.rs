//! Closed-form small-window asymptotics: the headline MFPT values, the
//! profile along the ray `θ = π` through the window centre, the boundary
//! layer, and the flux profile across the window.

mod flux;

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::check_eps;
use crate::quadrature::{integrate_sqrt_singular, QuadratureSpec, SingularEnd};
use crate::series::a0_exact;

pub use flux::{flux_asymptotic, FluxExpansion};

/// Above this half-angle the small-window expansions are flagged.
pub const ASYMPTOTIC_EPS_LIMIT: f64 = 0.3;

/// A closed-form value with its remainder order and an optional validity
/// warning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub value: f64,
    pub error_order: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl AsymptoticValue {
    fn new(value: f64, error_order: &str, warning: Option<String>) -> Self {
        Self { value, error_order: error_order.to_owned(), warning }
    }
}

fn check_small_eps(eps: f64) -> Result<Option<String>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("small-window asymptotics need 0 < eps < 1, got {eps}")));
    }
    Ok((eps > ASYMPTOTIC_EPS_LIMIT)
        .then(|| format!("eps = {eps} > {ASYMPTOTIC_EPS_LIMIT}: outside the asymptotic regime")))
}

/// `log(1/eps) + log 2`, the common leading part.
fn log_term(eps: f64) -> f64 {
    -(eps / 2.0).ln()
}

/// MFPT from the centre: `log(1/eps) + log 2 + 1/4`.
pub fn mfpt_center(eps: f64) -> Result<AsymptoticValue> {
    let warning = check_small_eps(eps)?;
    Ok(AsymptoticValue::new(log_term(eps) + 0.25, "O(eps)", warning))
}

/// MFPT averaged over a uniform initial point: `log(1/eps) + log 2 + 1/8`.
pub fn mfpt_uniform(eps: f64) -> Result<AsymptoticValue> {
    let warning = check_small_eps(eps)?;
    Ok(AsymptoticValue::new(log_term(eps) + 0.125, "O(eps)", warning))
}

/// Maximal MFPT, attained at the antipode of the window centre:
/// `log(1/eps) + 2 log 2`.
pub fn mfpt_max(eps: f64) -> Result<AsymptoticValue> {
    let warning = check_small_eps(eps)?;
    Ok(AsymptoticValue::new(log_term(eps) + LN_2, "O(eps)", warning))
}

/// Principal eigenvalue of the mixed problem estimated as `1/Eτ` with the
/// uniformly averaged MFPT.
pub fn lambda0_estimate(eps: f64) -> Result<f64> {
    Ok(1.0 / mfpt_uniform(eps)?.value)
}

/// Representative boundary-layer width `eps·log(1/eps)`.
pub fn boundary_layer_width(eps: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(-eps * eps.ln())
}

fn ray_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-11, max_subdivisions: 4000 }
}

/// Exact MFPT along the ray `θ = π` from the one-dimensional arccos-kernel
/// quadrature:
///
/// ```text
/// v(r) = (1 − r²)/4 + (1 − r) a₀ / (2√D)
///        − 8r(1 − r)/(π√D) ∫₀^{cos(eps/2)} arccos√(s²+a²) s² ds / ((D + 4rs²)√(s²+a²))
/// ```
///
/// with `a = sin(eps/2)` and `D = 1 − 2r cos eps + r²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayProfile {
    eps: f64,
    a0: f64,
}

impl RayProfile {
    pub fn new(eps: f64) -> Result<Self> {
        Ok(Self { eps, a0: a0_exact(eps)? })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn exact(&self, r: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("r must lie in [0, 1], got {r}")));
        }
        if r == 1.0 {
            return Ok(0.0);
        }
        let a = (self.eps / 2.0).sin();
        let c = (self.eps / 2.0).cos();
        let d = 1.0 - 2.0 * r * self.eps.cos() + r * r;
        let base = 0.25 * (1.0 - r * r) + (1.0 - r) * self.a0 / (2.0 * d.sqrt());
        if r == 0.0 {
            return Ok(base);
        }
        let f = |s: f64| {
            let gap = (c - s).max(0.0);
            let rho = (s * s + a * a).sqrt();
            let arccos_rho = (gap * (c + s)).sqrt().asin();
            arccos_rho * gap.sqrt() * s * s / ((d + 4.0 * r * s * s) * rho)
        };
        let integral = integrate_sqrt_singular(f, 0.0, c, SingularEnd::Right, &ray_spec())?.value;
        Ok(base - 8.0 * r * (1.0 - r) / (PI * d.sqrt()) * integral)
    }
}

/// Exact ray profile `v(r, π)`; see [`RayProfile`].
pub fn v_ray_exact(r: f64, eps: f64) -> Result<f64> {
    RayProfile::new(eps)?.exact(r)
}

/// `q(r) = (8r/π) ∫₀¹ s·arcsin(s) / ((1 − r)² + 4rs²) ds`, with
/// `q(0) = 0` and `q(1) = log 2`.
pub fn q_function(r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("q(r) needs r in [0, 1], got {r}")));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let m = (1.0 - r) * (1.0 - r);
    let f = |s: f64| {
        let gap = (1.0 - s).max(0.0);
        let asin_s = std::f64::consts::FRAC_PI_2 - (gap * (1.0 + s)).sqrt().asin();
        let denom = m + 4.0 * r * s * s;
        // s·arcsin(s)/denom → arcsin(s)/(4s) → 1/4 as s → 0 when r = 1
        let core = if denom == 0.0 { 0.25 } else { s * asin_s / denom };
        core * gap.sqrt()
    };
    let v = integrate_sqrt_singular(f, 0.0, 1.0, SingularEnd::Right, &ray_spec())?.value;
    Ok(8.0 * r / PI * v)
}

/// Outer expansion of the ray profile, valid for `1 − r ≫ √eps`:
/// `−log(eps/2) + log(1 − r) − log(1 + r) + (1 − r²)/4 + q(r)`.
///
/// Flags `1 − r < 3√eps`.
pub fn v_ray_outer(r: f64, eps: f64) -> Result<AsymptoticValue> {
    check_eps(eps)?;
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("outer expansion needs r in [0, 1), got {r}")));
    }
    let value = log_term(eps) + (1.0 - r).ln() - (1.0 + r).ln() + 0.25 * (1.0 - r * r) + q_function(r)?;
    let warning = (1.0 - r < 3.0 * eps.sqrt())
        .then(|| format!("1 - r = {} < 3·√eps: inside the boundary layer", 1.0 - r));
    Ok(AsymptoticValue::new(value, "O(eps)", warning))
}

/// Inner (boundary-layer) solution `δ/eps` at depth `δ = 1 − r` below the
/// window centre. Flags `δ > √eps/3`.
pub fn v_ray_inner(delta: f64, eps: f64) -> Result<AsymptoticValue> {
    check_eps(eps)?;
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("depth delta must be ≥ 0, got {delta}")));
    }
    let warning = (delta > eps.sqrt() / 3.0)
        .then(|| format!("delta = {delta} > √eps/3: outside the boundary layer"));
    Ok(AsymptoticValue::new(delta / eps, "O(delta, delta^2/eps)", warning))
}
