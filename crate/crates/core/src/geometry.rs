use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A disk of radius `R` with diffusivity `D` and an absorbing arc of
/// half-angle `eps` centred at `θ = π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub radius: f64,
    pub diffusivity: f64,
    pub eps: f64,
}

impl Geometry {
    pub fn new(radius: f64, diffusivity: f64, eps: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be > 0, got {radius}")));
        }
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "diffusivity must be > 0, got {diffusivity}"
            )));
        }
        check_eps(eps)?;
        Ok(Self { radius, diffusivity, eps })
    }

    /// Unit disk with unit diffusivity.
    pub fn unit(eps: f64) -> Result<Self> {
        Self::new(1.0, 1.0, eps)
    }

    /// Converts a dimensionless time to physical units, `value·R²/D`.
    pub fn rescale(&self, value: f64) -> f64 {
        rescale(value, self)
    }

    /// Fraction of the circumference that is absorbing, `eps/π`.
    pub fn absorbing_fraction(&self) -> f64 {
        self.eps / PI
    }

    /// True when `θ` lies on the absorbing arc `|θ − π| < eps`.
    pub fn in_window(&self, theta: f64) -> bool {
        angular_distance_to_pi(theta) < self.eps
    }
}

pub fn rescale(value: f64, geom: &Geometry) -> f64 {
    value * geom.radius * geom.radius / geom.diffusivity
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < PI {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must lie in (0, π), got {eps}")))
    }
}

/// `|θ − π|` with `θ` reduced to `[0, 2π)`.
pub(crate) fn angular_distance_to_pi(theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    (t - PI).abs()
}
