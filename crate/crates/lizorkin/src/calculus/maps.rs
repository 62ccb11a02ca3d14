//! Bi-Lipschitz test maps with closed-form derivatives.

use super::faa::DerivativeTable;
use super::inverse::JetTable;
use super::multi_index::MultiIndex;
use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub enum MapFamily {
    Identity { d: usize },
    /// `(x, y + lambda x)`
    Shear { lambda: f64 },
    /// `z + a sin(b x) sin(b y) (1, 1)`
    Perturbation { a: f64, b: f64 },
    /// `x + c x |x|^tau` on the line
    Power { c: f64, tau: f64 },
    /// `x + c x^3` on the line
    Cubic { c: f64 },
    /// `A z` with a 2x2 matrix, row-major
    Linear { a: [[f64; 2]; 2] },
}

fn sin_deriv(z: f64, n: u32) -> f64 {
    (z + n as f64 * FRAC_PI_2).sin()
}

/// n-th derivative of `x |x|^tau`, i.e. of `sign(x) |x|^p` with `p = 1 + tau`.
fn signed_power_deriv(x: f64, tau: f64, n: u32) -> f64 {
    let p = 1.0 + tau;
    if n == 0 {
        return x * x.abs().powf(tau);
    }
    let mut falling = 1.0;
    for i in 0..n {
        falling *= p - i as f64;
    }
    let sign = if n % 2 == 0 { x.signum() } else { 1.0 };
    falling * x.abs().powf(p - n as f64) * sign
}

impl MapFamily {
    /// Map with condition number 2: `diag(1, 2)` rotated by 30 degrees.
    pub fn linear_cond2() -> Self {
        let (s, c) = (std::f64::consts::FRAC_PI_6).sin_cos();
        let r = [[c, -s], [s, c]];
        let dg = [1.0, 2.0];
        let mut a = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                // R diag R^T
                a[i][j] = (0..2).map(|l| r[i][l] * dg[l] * r[j][l]).sum();
            }
        }
        MapFamily::Linear { a }
    }

    pub fn dim(&self) -> usize {
        match self {
            MapFamily::Identity { d } => *d,
            MapFamily::Power { .. } | MapFamily::Cubic { .. } => 1,
            _ => 2,
        }
    }

    pub fn name(&self) -> String {
        match self {
            MapFamily::Identity { .. } => "identity".into(),
            MapFamily::Shear { lambda } => format!("shear({lambda})"),
            MapFamily::Perturbation { a, b } => format!("perturbation({a},{b})"),
            MapFamily::Power { c, tau } => format!("power({c},{tau})"),
            MapFamily::Cubic { c } => format!("cubic({c})"),
            MapFamily::Linear { .. } => "linear".into(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|mu| self.derivative(mu, &MultiIndex::zeros(self.dim()), x))
            .collect()
    }

    /// `D^alpha f_mu(x)` (0-based component).
    pub fn derivative(&self, mu: usize, alpha: &MultiIndex, x: &[f64]) -> f64 {
        let n = alpha.order();
        let is_unit = |slot: usize| n == 1 && alpha.get(slot) == 1;
        match self {
            MapFamily::Identity { .. } => {
                if n == 0 {
                    x[mu]
                } else if is_unit(mu) {
                    1.0
                } else {
                    0.0
                }
            }
            MapFamily::Shear { lambda } => match (mu, n) {
                (0, 0) => x[0],
                (1, 0) => x[1] + lambda * x[0],
                (0, 1) if is_unit(0) => 1.0,
                (1, 1) if is_unit(0) => *lambda,
                (1, 1) if is_unit(1) => 1.0,
                _ => 0.0,
            },
            MapFamily::Linear { a } => match n {
                0 => a[mu][0] * x[0] + a[mu][1] * x[1],
                1 => a[mu][if is_unit(0) { 0 } else { 1 }],
                _ => 0.0,
            },
            MapFamily::Perturbation { a, b } => {
                let s = b.powi(n as i32)
                    * sin_deriv(b * x[0], alpha.get(0))
                    * sin_deriv(b * x[1], alpha.get(1));
                let base = if n == 0 {
                    x[mu]
                } else if is_unit(mu) {
                    1.0
                } else {
                    0.0
                };
                base + a * s
            }
            MapFamily::Power { c, tau } => {
                let base = match n {
                    0 => x[0],
                    1 => 1.0,
                    _ => 0.0,
                };
                base + c * signed_power_deriv(x[0], *tau, n)
            }
            MapFamily::Cubic { c } => {
                let t = x[0];
                match n {
                    0 => t + c * t * t * t,
                    1 => 1.0 + 3.0 * c * t * t,
                    2 => 6.0 * c * t,
                    3 => 6.0 * c,
                    _ => 0.0,
                }
            }
        }
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|mu| {
                (0..d)
                    .map(|m| self.derivative(mu, &MultiIndex::unit(d, m), x))
                    .collect()
            })
            .collect()
    }

    /// Derivative tables of every component at `x`, orders `1..=order`.
    pub fn jet(&self, x: &[f64], order: u32) -> JetTable {
        let d = self.dim();
        (0..d)
            .map(|mu| {
                let mut t = DerivativeTable::new();
                for alpha in MultiIndex::all_up_to(d, order) {
                    if !alpha.is_zero() {
                        let v = self.derivative(mu, &alpha, x);
                        t.insert(alpha, v);
                    }
                }
                t
            })
            .collect()
    }

    /// `f^{-1}(y)`, closed form where available, Newton otherwise.
    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        match self {
            MapFamily::Identity { .. } => Ok(y.to_vec()),
            MapFamily::Shear { lambda } => Ok(vec![y[0], y[1] - lambda * y[0]]),
            MapFamily::Linear { a } => {
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                Ok(vec![
                    (a[1][1] * y[0] - a[0][1] * y[1]) / det,
                    (-a[1][0] * y[0] + a[0][0] * y[1]) / det,
                ])
            }
            MapFamily::Cubic { c } if *c > 0.0 => {
                // Cardano for t^3 + t / c - y / c = 0
                let p = 1.0 / c;
                let q = -y[0] / c;
                let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
                Ok(vec![(-q / 2.0 + disc).cbrt() + (-q / 2.0 - disc).cbrt()])
            }
            _ => self.newton_inverse(y, y),
        }
    }

    pub fn newton_inverse(&self, y: &[f64], start: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        let mut x = start.to_vec();
        for _ in 0..NEWTON_MAX_ITER {
            let fx = self.eval(&x);
            let r: Vec<f64> = (0..d).map(|i| fx[i] - y[i]).collect();
            if r.iter().map(|v| v.abs()).fold(0.0, f64::max) <= NEWTON_TOL {
                return Ok(x);
            }
            let j = self.jacobian(&x);
            let step = if d == 1 {
                vec![r[0] / j[0][0]]
            } else {
                let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                vec![
                    (j[1][1] * r[0] - j[0][1] * r[1]) / det,
                    (-j[1][0] * r[0] + j[0][0] * r[1]) / det,
                ]
            };
            for i in 0..d {
                x[i] -= step[i];
            }
        }
        Err(Error::NoConvergence(format!(
            "Newton inverse of {} at {:?}",
            self.name(),
            y
        )))
    }
}

/// Largest and smallest singular values of a 1x1 or 2x2 matrix.
pub fn singular_values(m: &[Vec<f64>]) -> (f64, f64) {
    if m.len() == 1 {
        let v = m[0][0].abs();
        return (v, v);
    }
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s1 = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let root = (s1 * s1 - 4.0 * det * det).max(0.0).sqrt();
    let max = ((s1 + root) / 2.0).sqrt();
    let min = ((s1 - root) / 2.0).max(0.0).sqrt();
    (max, min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shear_roundtrip() {
        let m = MapFamily::Shear { lambda: 0.5 };
        let y = m.eval(&[0.3, 0.2]);
        assert!((y[1] - 0.35).abs() < 1e-15);
        let x = m.inverse(&y).unwrap();
        assert!((x[0] - 0.3).abs() < 1e-15 && (x[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn cubic_closed_form_inverse() {
        let m = MapFamily::Cubic { c: 0.1 };
        for &x in &[0.0, 0.2, 0.5, 0.999] {
            let y = m.eval(&[x]);
            let back = m.inverse(&y).unwrap();
            assert!((back[0] - x).abs() < 1e-13, "{x} {back:?}");
        }
    }

    #[test]
    fn perturbation_newton_inverse() {
        let m = MapFamily::Perturbation {
            a: 0.1,
            b: std::f64::consts::PI,
        };
        let x = [0.37, 0.81];
        let y = m.eval(&x);
        let back = m.inverse(&y).unwrap();
        assert!((back[0] - x[0]).abs() < 1e-11 && (back[1] - x[1]).abs() < 1e-11);
        let (_, smin) = singular_values(&m.jacobian(&x));
        assert!(smin > 0.2);
    }

    #[test]
    fn power_map_derivatives_match_differences() {
        let m = MapFamily::Power { c: 0.5, tau: 1.5 };
        let h = 1e-5;
        for &x in &[-0.6, 0.3, 0.8] {
            for n in 1..=2u32 {
                let a = MultiIndex::new(vec![n]);
                let lower = MultiIndex::new(vec![n - 1]);
                let fd = (m.derivative(0, &lower, &[x + h]) - m.derivative(0, &lower, &[x - h]))
                    / (2.0 * h);
                assert!((fd - m.derivative(0, &a, &[x])).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn linear_condition_number() {
        let m = MapFamily::linear_cond2();
        let (smax, smin) = singular_values(&m.jacobian(&[0.0, 0.0]));
        assert!((smax / smin - 2.0).abs() < 1e-12);
    }
}
