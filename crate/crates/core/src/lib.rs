//! Mean first passage times for Brownian motion in the unit disk whose
//! boundary is reflecting except for a small absorbing arc centred at
//! `θ = π`.
//!
//! Three independent routes to the same quantities are provided:
//!
//! * [`series`]: the semi-analytic cosine-series solution of the mixed
//!   Neumann–Dirichlet problem, with coefficients obtained from the Abel
//!   inversion density `h₁`.
//! * [`asymptotics`]: closed-form small-window expansions (centre, uniform
//!   average, maximum, ray profile, boundary layer and flux profile).
//! * [`montecarlo`] and [`grid`]: a reflected Brownian motion simulator and a
//!   finite-difference solver on a polar grid, used as oracles.
//!
//! All quantities are dimensionless (unit disk, unit diffusivity). Use
//! [`Geometry::rescale`] to convert to physical time `R²/D`.
//!
//! The window half-angle `eps` is the angular half-width of the absorbing arc,
//! so the arc occupies `|θ − π| < eps` and has length `2·eps` on the unit
//! circle. The length ratio `|∂Ωₐ|/|∂Ω|` is `eps/π`.

pub mod asymptotics;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod montecarlo;
pub mod quadrature;
pub mod series;

pub use error::{Error, Result};
pub use geometry::Geometry;
pub use quadrature::{QuadratureResult, QuadratureSpec};
pub use series::{H1Evaluator, SeriesSolution};
pub use asymptotics::{AsymptoticValue, FluxExpansion, RayProfile};
pub use montecarlo::{ExitHistogram, McConfig, McEstimate, McRun, Start};
pub use grid::{ComparisonReport, PolarGrid};

/// Default number of cosine terms kept in the series solution.
pub const DEFAULT_SERIES_TERMS: usize = 512;

/// Default truncation of the boundary flux expansion.
pub const DEFAULT_FLUX_TERMS: usize = 64;
