//! Finite-difference solution of the mixed problem on a polar grid.
//!
//! Nodes sit at `r_i = i/n_r` and `θ_j = 2πj/n_θ`. Interior rows use the
//! 5-point polar Laplacian, the pole is closed by the averaging row
//! `(4/h²)(mean_j v₁ⱼ − v₀) = −1`, window nodes are pinned to zero and the
//! remaining boundary nodes carry the one-sided second-order Neumann row
//! `(3vₙ − 4vₙ₋₁ + vₙ₋₂)/(2h) = 0`.
//!
//! The system is solved directly. For fixed boundary values the interior
//! decouples into one tridiagonal system per Fourier mode, which reduces the
//! whole problem to a dense system on the boundary nodes. That system is
//! folded by the reflection `j ↔ n_θ − j`, so the solution is exactly
//! symmetric.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::angular_distance_to_pi;
use crate::series::SeriesSolution;

/// Smallest accepted radial resolution.
pub const MIN_N_R: usize = 32;
/// Smallest accepted angular resolution.
pub const MIN_N_THETA: usize = 128;
/// Fewest window nodes for which the window counts as resolved.
pub const MIN_WINDOW_NODES: usize = 8;

/// Discrete MFPT on the polar grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub eps: f64,
    pub n_r: usize,
    pub n_theta: usize,
    /// `(n_r + 1) × n_theta` values, row `i` holding radius `r_i`; row 0
    /// repeats the pole value.
    pub values: Vec<f64>,
    /// Largest row residual, with every row scaled by `h²`.
    pub residual: f64,
}

fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut b = diag[0];
    c[0] = upper[0] / b;
    rhs[0] /= b;
    for i in 1..n {
        b = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / b } else { 0.0 };
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// `cos(2πm/n)` for `m = 0..n` with `table[m] == table[n − m]` exactly.
fn cos_table(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n];
    for m in 0..=n / 2 {
        let c = (2.0 * PI * m as f64 / n as f64).cos();
        t[m] = c;
        t[(n - m) % n] = c;
    }
    t
}

struct Radial {
    h: f64,
    n_r: usize,
}

impl Radial {
    fn r(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Response `w_0..w_{n_r}` of mode `k` with eigenvalue `lambda` to the
    /// data `w_{n_r} = boundary` and source `source` in every row.
    fn solve_mode(&self, k: usize, lambda: f64, boundary: f64, source: f64) -> Vec<f64> {
        let n = self.n_r;
        let h2 = self.h * self.h;
        let first = if k == 0 { 0 } else { 1 };
        let len = n - first;
        let (mut lo, mut di, mut up, mut rhs) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![source; len]);
        for (row, i) in (first..n).enumerate() {
            if i == 0 {
                di[row] = -4.0 / h2;
                up[row] = 4.0 / h2;
                continue;
            }
            let r = self.r(i);
            let a = 1.0 / h2 - 1.0 / (2.0 * r * self.h);
            let c = 1.0 / h2 + 1.0 / (2.0 * r * self.h);
            lo[row] = a;
            di[row] = -2.0 / h2 - lambda / (r * r);
            up[row] = c;
            if i + 1 == n {
                rhs[row] -= c * boundary;
                up[row] = 0.0;
            }
        }
        thomas(&lo, &di, &up, &mut rhs);
        let mut w = vec![0.0; n + 1];
        w[first..n].copy_from_slice(&rhs);
        w[n] = boundary;
        w
    }
}

/// Window membership `|θ_j − π| ≤ eps` for every angular node.
fn window_mask(eps: f64, n_theta: usize) -> Vec<bool> {
    (0..n_theta)
        .map(|j| angular_distance_to_pi(2.0 * PI * j as f64 / n_theta as f64) <= eps + 1e-12)
        .collect()
}

/// Solves the mixed problem for window half-angle `eps ∈ (0, π]`.
pub fn solve_grid(eps: f64, n_r: usize, n_theta: usize) -> Result<PolarGrid> {
    if !(eps > 0.0 && eps <= PI) {
        return Err(Error::InvalidParameter(format!("grid eps must lie in (0, π], got {eps}")));
    }
    if n_r < MIN_N_R || n_theta < MIN_N_THETA || n_theta % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "grid needs n_r ≥ {MIN_N_R} and even n_theta ≥ {MIN_N_THETA}, got {n_r}×{n_theta}"
        )));
    }
    let window = window_mask(eps, n_theta);
    let n_window = window.iter().filter(|&&w| w).count();
    if n_window == 0 {
        return Err(Error::SingularSystem(format!("no boundary node lies in the window (eps = {eps})")));
    }
    if n_window < MIN_WINDOW_NODES {
        return Err(Error::InvalidParameter(format!(
            "{n_window} window nodes; at least {MIN_WINDOW_NODES} are needed to resolve eps = {eps}"
        )));
    }

    let n = n_theta;
    let half = n / 2;
    let radial = Radial { h: 1.0 / n_r as f64, n_r };
    let dtheta = 2.0 * PI / n as f64;
    let cos = cos_table(n);

    // particular solution with zero boundary data, then unit responses per mode
    let particular = radial.solve_mode(0, 0.0, 0.0, -1.0);
    let responses: Vec<Vec<f64>> = (0..=half)
        .map(|k| {
            let lambda = (2.0 * (k as f64 * dtheta / 2.0).sin() / dtheta).powi(2);
            radial.solve_mode(k, lambda, 1.0, 0.0)
        })
        .collect();
    let kernel = |i: usize| -> Vec<f64> {
        (0..n)
            .map(|m| {
                (0..n).map(|k| responses[k.min(n - k)][i] * cos[(k * m) % n]).sum::<f64>() / n as f64
            })
            .collect()
    };
    let k1 = kernel(n_r - 1);
    let k2 = kernel(n_r - 2);

    // boundary system on the folded unknowns g_0..g_{n/2}
    let dim = half + 1;
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for j in 0..dim {
        if window[j] {
            mat[(j, j)] = 1.0;
            continue;
        }
        for l in 0..dim {
            let mut coeff = -4.0 * k1[(j + n - l) % n] + k2[(j + n - l) % n];
            if l != 0 && l != half {
                coeff += -4.0 * k1[(j + l) % n] + k2[(j + l) % n];
            }
            mat[(j, l)] = coeff;
        }
        mat[(j, j)] += 3.0;
        rhs[j] = 4.0 * particular[n_r - 1] - particular[n_r - 2];
    }
    let g_half = mat
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("boundary system is singular".into()))?;
    let g: Vec<f64> = (0..n).map(|j| g_half[j.min(n - j)]).collect();

    // interior by convolution with the mode kernels, mirrored for exact symmetry
    let g_hat: Vec<f64> = (0..=half).map(|k| (0..n).map(|l| g[l] * cos[(k * l) % n]).sum()).collect();
    let mut values = vec![0.0; (n_r + 1) * n];
    for i in 0..=n_r {
        let row = &mut values[i * n..(i + 1) * n];
        if i == n_r {
            row.copy_from_slice(&g);
            continue;
        }
        if i == 0 {
            let v0 = particular[0] + responses[0][0] * g_hat[0] / n as f64;
            row.fill(v0);
            continue;
        }
        let modes: Vec<f64> = (0..n).map(|k| responses[k.min(n - k)][i] * g_hat[k.min(n - k)]).collect();
        for j in 0..=half {
            let s: f64 = (0..n).map(|k| modes[k] * cos[(k * j) % n]).sum();
            row[j] = particular[i] + s / n as f64;
        }
        for j in half + 1..n {
            row[j] = row[n - j];
        }
    }

    let mut grid = PolarGrid { eps, n_r, n_theta, values, residual: 0.0 };
    grid.residual = grid.max_residual(&window);
    Ok(grid)
}

impl PolarGrid {
    pub fn h(&self) -> f64 {
        1.0 / self.n_r as f64
    }

    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j % self.n_theta]
    }

    pub fn center(&self) -> f64 {
        self.value(0, 0)
    }

    /// Value at `(r, θ) = (1, 0)`.
    pub fn antipodal(&self) -> f64 {
        self.value(self.n_r, 0)
    }

    pub fn window_nodes(&self) -> Vec<usize> {
        window_mask(self.eps, self.n_theta).iter().enumerate().filter(|(_, &w)| w).map(|(j, _)| j).collect()
    }

    /// `(i, j)` of the largest value; ties resolve to the first in row-major order.
    pub fn max_location(&self) -> (usize, usize) {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
        (idx / self.n_theta, idx % self.n_theta)
    }

    /// One-sided outward derivative `∂v/∂r` at boundary node `j`.
    pub fn boundary_derivative(&self, j: usize) -> f64 {
        let n = self.n_r;
        (3.0 * self.value(n, j) - 4.0 * self.value(n - 1, j) + self.value(n - 2, j)) / (2.0 * self.h())
    }

    /// Total outward flux through the window nodes, `Σ ∂v/∂r · dθ`.
    pub fn flux_balance(&self) -> f64 {
        let dtheta = 2.0 * PI / self.n_theta as f64;
        self.window_nodes().into_iter().map(|j| self.boundary_derivative(j) * dtheta).sum()
    }

    fn max_residual(&self, window: &[bool]) -> f64 {
        let n = self.n_theta;
        let h = self.h();
        let h2 = h * h;
        let dtheta = 2.0 * PI / n as f64;
        let mean1 = (0..n).map(|j| self.value(1, j)).sum::<f64>() / n as f64;
        let mut worst = ((4.0 / h2) * (mean1 - self.center()) + 1.0).abs() * h2;
        for i in 1..self.n_r {
            let r = self.r(i);
            for j in 0..n {
                let v = self.value(i, j);
                let (vp, vm) = (self.value(i + 1, j), self.value(i - 1, j));
                let (vr, vl) = (self.value(i, j + 1), self.value(i, j + n - 1));
                let lap = (vp - 2.0 * v + vm) / h2 + (vp - vm) / (2.0 * r * h) + (vr - 2.0 * v + vl) / (r * r * dtheta * dtheta);
                worst = worst.max((lap + 1.0).abs() * h2);
            }
        }
        for (j, &w) in window.iter().enumerate() {
            let row = if w { self.value(self.n_r, j) } else { self.boundary_derivative(j) * 2.0 * h };
            worst = worst.max(row.abs());
        }
        worst
    }
}

/// Grid-vs-series differences away from the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub eps: f64,
    /// Nodes closer than this to the window centre `(−1, 0)` are excluded.
    pub exclusion_radius: f64,
    pub n_nodes: usize,
    pub max_relative: f64,
    pub l2_relative: f64,
    pub center_grid: f64,
    pub center_series: f64,
    pub antipodal_grid: f64,
    pub antipodal_series: f64,
    /// `log(1/eps) + 2 log 2`.
    pub antipodal_asymptotic: f64,
}

/// Distance from the window centre beyond which nodes enter the comparison:
/// the window half-width plus the layer width `eps·log(1/eps)`.
pub fn exclusion_radius(eps: f64) -> f64 {
    eps + (eps * (1.0 / eps).ln()).max(0.0)
}

/// Compares `grid` with `series` on every node farther than
/// [`exclusion_radius`] from the window centre.
pub fn compare_methods(grid: &PolarGrid, series: &SeriesSolution) -> Result<ComparisonReport> {
    if (grid.eps - series.eps).abs() > 1e-15 {
        return Err(Error::InvalidParameter(format!(
            "grid eps {} differs from series eps {}",
            grid.eps, series.eps
        )));
    }
    let cut = exclusion_radius(grid.eps);
    let (mut worst, mut num, mut den, mut count) = (0.0f64, 0.0, 0.0, 0usize);
    for i in 0..=grid.n_r {
        let r = grid.r(i);
        for j in 0..grid.n_theta {
            let th = grid.theta(j);
            let (x, y) = (r * th.cos(), r * th.sin());
            if (x + 1.0).hypot(y) <= cut {
                continue;
            }
            let s = series.eval_v(r, th)?;
            let d = grid.value(i, j) - s;
            worst = worst.max((d / s).abs());
            num += d * d;
            den += s * s;
            count += 1;
            if i == 0 {
                break;
            }
        }
    }
    let antipodal_asymptotic = (1.0 / grid.eps).ln() + 2.0 * std::f64::consts::LN_2;
    Ok(ComparisonReport {
        eps: grid.eps,
        exclusion_radius: cut,
        n_nodes: count,
        max_relative: worst,
        l2_relative: (num / den).sqrt(),
        center_grid: grid.center(),
        center_series: series.v_center(),
        antipodal_grid: grid.antipodal(),
        antipodal_series: series.eval_v(1.0, 0.0)?,
        antipodal_asymptotic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::compute_series;

    #[test]
    fn fully_absorbing_disk() {
        let g = solve_grid(PI, 32, 128).unwrap();
        assert!((g.center() - 0.25).abs() < 1e-12);
        for i in 0..=32 {
            let r = g.r(i);
            assert!((g.value(i, 5) - (1.0 - r * r) / 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_grids() {
        assert!(matches!(solve_grid(0.3, 16, 128), Err(Error::InvalidParameter(_))));
        assert!(matches!(solve_grid(0.3, 32, 129), Err(Error::InvalidParameter(_))));
        assert!(matches!(solve_grid(0.1, 32, 128), Err(Error::InvalidParameter(_))));
        assert!(solve_grid(0.0, 32, 128).is_err());
    }

    #[test]
    fn residual_symmetry_and_sign() {
        let g = solve_grid(0.3, 48, 256).unwrap();
        assert!(g.residual <= 1e-8, "{}", g.residual);
        for i in 0..=g.n_r {
            for j in 1..g.n_theta {
                assert_eq!(g.value(i, j).to_bits(), g.value(i, g.n_theta - j).to_bits());
            }
        }
        assert!(g.values.iter().all(|&v| v >= -1e-12));
        assert!(g.window_nodes().iter().all(|&j| g.value(g.n_r, j) == 0.0));
    }

    #[test]
    fn maximum_at_antipode() {
        for eps in [0.3, 0.2] {
            let g = solve_grid(eps, 64, 256).unwrap();
            assert_eq!(g.max_location(), (g.n_r, 0));
        }
    }

    #[test]
    fn flux_balance() {
        let g = solve_grid(0.2, 64, 256).unwrap();
        assert!((g.flux_balance() + PI).abs() <= 0.05 * PI, "{}", g.flux_balance());
    }

    #[test]
    fn coarse_center_against_series() {
        let s = compute_series(0.3, 512).unwrap();
        let g = solve_grid(0.3, 64, 256).unwrap();
        assert!((g.center() - s.v_center()).abs() <= 0.05 * s.v_center());
    }

    #[test]
    fn comparison_outside_layer() {
        let s = compute_series(0.2, 512).unwrap();
        let g = solve_grid(0.2, 64, 256).unwrap();
        let a = compare_methods(&g, &s).unwrap();
        let b = compare_methods(&g, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.max_relative <= 0.02 && a.l2_relative <= a.max_relative, "{a:?}");
        assert!(a.n_nodes > 1000);
        assert!((a.antipodal_grid - a.antipodal_series).abs() <= 0.02 * a.antipodal_series);
        assert!(compare_methods(&solve_grid(0.3, 64, 256).unwrap(), &s).is_err());
    }

    fn aligned_center_error(m: usize, n_r: usize, n_theta: usize) -> f64 {
        let eps = (m as f64 + 0.5) * 2.0 * PI / n_theta as f64;
        let s = compute_series(eps, 1024).unwrap();
        solve_grid(eps, n_r, n_theta).unwrap().center() - s.v_center()
    }

    #[test]
    fn first_order_refinement_with_fixed_edge_offset() {
        // eps placed halfway between nodes at every level near 0.3
        let e1 = aligned_center_error(12, 64, 256);
        let e2 = aligned_center_error(24, 128, 512);
        let ratio = e1 / e2;
        assert!((1.7..2.3).contains(&ratio), "{e1} {e2} {ratio}");
    }

    #[test]
    #[ignore = "window-edge quantization and the mixed-condition corner limit the centre error to first order"]
    fn second_order_refinement() {
        let s = compute_series(0.3, 1024).unwrap();
        let err = |n_r, n_theta| (solve_grid(0.3, n_r, n_theta).unwrap().center() - s.v_center()).abs();
        let (e1, e2, e3) = (err(64, 256), err(128, 512), err(256, 1024));
        assert!(e1 / e2 > 3.0 && e2 / e3 > 3.0, "{e1} {e2} {e3}");
    }
}
