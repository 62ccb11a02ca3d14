//! Partition of unity subordinate to the dilated exterior cubes `(11/10) Q`.

use crate::error::{Error, Result};
use crate::geometry::domain::MAX_DIM;
use crate::geometry::WhitneyCovering;

/// Relative half-width of the dilated support: `(11/10) Q`.
pub const DILATION: f64 = 1.1;

fn smoothstep(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

fn smoothstep_deriv(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        6.0 * t * (1.0 - t)
    }
}

/// Profile in `r = |x - c| / (l/2)`: 1 on `[0, 1]`, C^1 decay to 0 at 1.1.
pub fn profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= DILATION {
        0.0
    } else {
        smoothstep((DILATION - r) / (DILATION - 1.0))
    }
}

fn profile_deriv(r: f64) -> f64 {
    -smoothstep_deriv((DILATION - r) / (DILATION - 1.0)) / (DILATION - 1.0)
}

/// Un-normalized tensor bump of an exterior cube at `x`, with its gradient.
pub fn raw_bump(center: &[f64], side: f64, x: &[f64]) -> (f64, [f64; MAX_DIM]) {
    let d = x.len();
    let half = 0.5 * side;
    let mut vals = [0.0; MAX_DIM];
    let mut ders = [0.0; MAX_DIM];
    for a in 0..d {
        let off = x[a] - center[a];
        let r = off.abs() / half;
        vals[a] = profile(r);
        ders[a] = profile_deriv(r) * off.signum() / half;
    }
    let value: f64 = vals[..d].iter().product();
    let mut grad = [0.0; MAX_DIM];
    for a in 0..d {
        grad[a] = ders[a] * (0..d).filter(|&b| b != a).map(|b| vals[b]).product::<f64>();
    }
    (value, grad)
}

/// `psi_Q = phi_Q / sum_S phi_S` over the exterior covering.
#[derive(Clone, Debug)]
pub struct BumpPartition<'a> {
    pub cov: &'a WhitneyCovering,
}

impl<'a> BumpPartition<'a> {
    pub fn new(cov: &'a WhitneyCovering) -> Result<BumpPartition<'a>> {
        if cov.exterior.is_empty() {
            return Err(Error::Coverage("the exterior covering is empty".into()));
        }
        Ok(BumpPartition { cov })
    }

    /// Exterior cubes whose dilated support holds `x`, with raw bump values
    /// and gradients.
    fn raw_terms(&self, x: &[f64]) -> Vec<(usize, f64, [f64; MAX_DIM])> {
        let d = self.cov.dim();
        let set = &self.cov.exterior;
        let mut out = Vec::new();
        for g in 0..=self.cov.max_generation {
            let base = self.cov.lattice.locate(g, x);
            // (11/10) Q reaches at most into the neighboring cells
            let mut off = [-1i64; MAX_DIM];
            for a in d..MAX_DIM {
                off[a] = 0;
            }
            loop {
                let mut c = base;
                for a in 0..d {
                    c[a] += off[a];
                }
                if let Some(i) = set.lookup(g, c) {
                    let q = &set.cubes[i];
                    let (v, grad) = raw_bump(&q.center()[..d], q.side, x);
                    if v > 0.0 {
                        out.push((i, v, grad));
                    }
                }
                let mut a = 0;
                loop {
                    if a == d {
                        break;
                    }
                    off[a] += 1;
                    if off[a] <= 1 {
                        break;
                    }
                    off[a] = -1;
                    a += 1;
                }
                if a == d {
                    break;
                }
            }
        }
        out
    }

    /// `(Q, psi_Q(x))` for every cube with `psi_Q(x) > 0`.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        let terms = self.raw_terms(x);
        let total: f64 = terms.iter().map(|t| t.1).sum();
        if total == 0.0 {
            return Err(Error::Coverage(format!(
                "point {x:?} lies in no dilated exterior cube"
            )));
        }
        Ok(terms.into_iter().map(|(i, v, _)| (i, v / total)).collect())
    }

    /// `(Q, psi_Q(x), grad psi_Q(x))` by the quotient rule.
    pub fn weights_with_gradient(&self, x: &[f64]) -> Result<Vec<(usize, f64, [f64; MAX_DIM])>> {
        let d = x.len();
        let terms = self.raw_terms(x);
        let total: f64 = terms.iter().map(|t| t.1).sum();
        if total == 0.0 {
            return Err(Error::Coverage(format!(
                "point {x:?} lies in no dilated exterior cube"
            )));
        }
        let mut gsum = [0.0; MAX_DIM];
        for t in &terms {
            for a in 0..d {
                gsum[a] += t.2[a];
            }
        }
        Ok(terms
            .into_iter()
            .map(|(i, v, g)| {
                let mut grad = [0.0; MAX_DIM];
                for a in 0..d {
                    grad[a] = g[a] / total - v * gsum[a] / (total * total);
                }
                (i, v / total, grad)
            })
            .collect())
    }

    /// `max_Q l(Q) |grad psi_Q|` over the given points (points outside every
    /// support are skipped).
    pub fn gradient_constant(&self, points: &[Vec<f64>]) -> f64 {
        let set = &self.cov.exterior;
        let mut worst: f64 = 0.0;
        for x in points {
            if let Ok(ws) = self.weights_with_gradient(x) {
                for (i, _, g) in ws {
                    let n = g[..x.len()].iter().map(|v| v * v).sum::<f64>().sqrt();
                    worst = worst.max(set.cubes[i].side * n);
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, WhitneyOptions};

    #[test]
    fn profile_shape() {
        assert_eq!(profile(0.5), 1.0);
        assert_eq!(profile(1.0), 1.0);
        assert_eq!(profile(1.1), 0.0);
        assert!((profile(1.05) - 0.5).abs() < 1e-15);
        let h = 1e-7;
        for r in [1.02, 1.05, 1.09] {
            let fd = (profile(r + h) - profile(r - h)) / (2.0 * h);
            assert!((fd - profile_deriv(r)).abs() < 1e-5);
        }
    }

    #[test]
    fn partition_sums_to_one() {
        let cov = WhitneyCovering::build(
            &Domain::builtin("square").unwrap(),
            &WhitneyOptions {
                max_generation: 8,
                ..Default::default()
            },
        )
        .unwrap();
        let bumps = BumpPartition::new(&cov).unwrap();
        let mut n = 0;
        for i in 0..200 {
            let t = i as f64 / 200.0;
            let x = [-0.03 + 0.001 * (i % 7) as f64, t];
            if let Ok(ws) = bumps.weights(&x) {
                n += 1;
                let s: f64 = ws.iter().map(|w| w.1).sum();
                assert!((s - 1.0).abs() < 1e-12);
                assert!(ws.iter().all(|w| w.1 >= 0.0 && w.1 <= 1.0));
            }
        }
        assert!(n > 150);
        // gradient of the partition sums to zero
        let ws = bumps.weights_with_gradient(&[-0.021, 0.4]).unwrap();
        let gx: f64 = ws.iter().map(|w| w.2[0]).sum();
        assert!(gx.abs() < 1e-9);
    }
}
