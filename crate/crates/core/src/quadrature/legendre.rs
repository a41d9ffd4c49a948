use std::f64::consts::PI;

use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;

/// Legendre polynomial `P_n(x)` by the upward three-term recurrence
/// `(k+1)P_{k+1} = (2k+1)x P_k − k P_{k−1}`.
pub fn legendre_p(n: usize, x: f64) -> Result<f64> {
    let x = clamp_domain(x)?;
    Ok(legendre_pair(n, x).0)
}

fn clamp_domain(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 + DOMAIN_SLACK {
        return Err(Error::Domain(format!("Legendre argument must satisfy |x| ≤ 1, got {x}")));
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Returns `(P_n(x), P_{n−1}(x))`, with `P_{−1} := 0`.
pub(crate) fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Iterator over `P_0(x), P_1(x), …` without bound.
#[derive(Debug, Clone)]
pub struct LegendreSweep {
    x: f64,
    k: usize,
    prev: f64,
    cur: f64,
}

impl LegendreSweep {
    pub fn new(x: f64) -> Self {
        Self { x, k: 0, prev: 0.0, cur: 1.0 }
    }
}

impl Iterator for LegendreSweep {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let k = self.k as f64;
        let next = ((2.0 * k + 1.0) * self.x * self.cur - k * self.prev) / (k + 1.0);
        self.prev = self.cur;
        self.cur = next;
        self.k += 1;
        Some(out)
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, pm) = legendre_pair(n, x);
            dp = nf * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (p, pm) = legendre_pair(n, x);
        if (x * x - 1.0).abs() > 0.0 {
            dp = nf * (x * p - pm) / (x * x - 1.0);
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn low_orders() {
        assert_eq!(legendre_p(0, 0.3).unwrap(), 1.0);
        assert_eq!(legendre_p(1, 0.3).unwrap(), 0.3);
    }

    #[test]
    fn degree_five_matches_explicit_polynomial() {
        // P_5 = (63x⁵ − 70x³ + 15x)/8, expanded by hand from the recurrence.
        let x: f64 = 0.7;
        let explicit = (63.0 * x.powi(5) - 70.0 * x.powi(3) + 15.0 * x) / 8.0;
        assert_abs_diff_eq!(legendre_p(5, x).unwrap(), explicit, epsilon = 1e-15);
    }

    #[test]
    fn endpoint_values() {
        for n in [0, 1, 7, 100, 513] {
            assert_abs_diff_eq!(legendre_p(n, 1.0).unwrap(), 1.0, epsilon = 1e-12);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(legendre_p(n, -1.0).unwrap(), sign, epsilon = 1e-12);
        }
    }

    #[test]
    fn out_of_domain() {
        assert!(matches!(legendre_p(3, 1.1), Err(Error::Domain(_))));
        assert!(legendre_p(3, f64::NAN).is_err());
        assert!(legendre_p(3, 1.0 + 1e-14).is_ok());
    }

    #[test]
    fn recurrence_consistency() {
        for &x in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
            let p: Vec<f64> = LegendreSweep::new(x).take(202).collect();
            for n in 1..=200 {
                let nf = n as f64;
                let lhs = (nf + 1.0) * p[n + 1];
                let rhs = (2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1];
                assert!((lhs - rhs).abs() <= 1e-12, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn sweep_matches_pointwise() {
        let p: Vec<f64> = LegendreSweep::new(0.37).take(40).collect();
        for (n, v) in p.iter().enumerate() {
            assert_eq!(*v, legendre_p(n, 0.37).unwrap());
        }
    }

    #[test]
    fn generating_function() {
        for &x in &[-0.9, -0.4, 0.0, 0.5, 0.9] {
            for &t in &[0.1, 1.0, 2.0, 3.0] {
                let c = f64::cos(t);
                let mut pow = 1.0;
                let mut sum = 0.0;
                for p in LegendreSweep::new(c).take(201) {
                    sum += p * pow;
                    pow *= x;
                }
                let exact = 1.0 / (1.0 - 2.0 * x * c + x * x).sqrt();
                assert!((sum - exact).abs() < 1e-8, "x={x} t={t}: {sum} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_rule_integrates_polynomials() {
        for n in [1, 2, 5, 20, 33] {
            let (x, w) = gauss_legendre(n);
            assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert_abs_diff_eq!(approx, exact, epsilon = 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }
}
