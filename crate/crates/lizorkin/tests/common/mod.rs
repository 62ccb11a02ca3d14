//! Shared oracles for the integration tests.
#![allow(dead_code)]

use lizorkin::calculus::{eval_chain_derivative, DerivativeTable, MultiIndex};
use lizorkin::geometry::WhitneyCovering;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Truncated multivariate Taylor series: `coef[alpha] = D^alpha u / alpha!`
/// for `|alpha| <= order`, in `dim` variables. Plain forward-mode jets, no
/// chain-rule bookkeeping.
#[derive(Clone, Debug)]
pub struct Jet {
    pub dim: usize,
    pub order: u32,
    pub index: Vec<MultiIndex>,
    pub coef: Vec<f64>,
}

impl Jet {
    pub fn constant(dim: usize, order: u32, c: f64) -> Jet {
        let index = MultiIndex::all_up_to(dim, order);
        let mut coef = vec![0.0; index.len()];
        coef[0] = c;
        Jet { dim, order, index, coef }
    }

    /// The coordinate `x_slot` expanded at `x0`.
    pub fn variable(dim: usize, order: u32, slot: usize, x0: f64) -> Jet {
        let mut j = Jet::constant(dim, order, x0);
        if order >= 1 {
            let e = MultiIndex::unit(dim, slot);
            let pos = j.index.iter().position(|a| *a == e).unwrap();
            j.coef[pos] = 1.0;
        }
        j
    }

    fn pos(&self, a: &[u32]) -> Option<usize> {
        self.index.iter().position(|b| b.as_slice() == a)
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let mut r = self.clone();
        for (a, b) in r.coef.iter_mut().zip(&o.coef) {
            *a += b;
        }
        r
    }

    pub fn scale(&self, c: f64) -> Jet {
        let mut r = self.clone();
        r.coef.iter_mut().for_each(|v| *v *= c);
        r
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let mut r = Jet::constant(self.dim, self.order, 0.0);
        for (i, a) in self.index.iter().enumerate() {
            if self.coef[i] == 0.0 {
                continue;
            }
            for (j, b) in o.index.iter().enumerate() {
                if a.order() + b.order() > self.order {
                    continue;
                }
                let sum: Vec<u32> = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x + y).collect();
                let k = r.pos(&sum).unwrap();
                r.coef[k] += self.coef[i] * o.coef[j];
            }
        }
        r
    }

    /// `D^alpha` at the expansion point.
    pub fn derivative(&self, alpha: &MultiIndex) -> f64 {
        self.coef[self.pos(alpha.as_slice()).unwrap()] * alpha.factorial()
    }
}

/// Polynomial `sum c_e x^e` in `n` variables.
#[derive(Clone, Debug)]
pub struct Poly {
    pub n: usize,
    pub terms: Vec<(Vec<u32>, f64)>,
}

impl Poly {
    pub fn random(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> Poly {
        let terms = MultiIndex::all_up_to(n, degree)
            .into_iter()
            .map(|e| (e.as_slice().to_vec(), rng.gen_range(-1.0..1.0)))
            .collect();
        Poly { n, terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, v)| v.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// Evaluates the polynomial on jets.
    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        let mut acc = Jet::constant(x[0].dim, x[0].order, 0.0);
        for (e, c) in &self.terms {
            let mut m = Jet::constant(x[0].dim, x[0].order, *c);
            for (a, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    m = m.mul(&x[a]);
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// All derivatives up to `order` at `x0`, via jets.
    pub fn table(&self, x0: &[f64], order: u32) -> DerivativeTable {
        let vars: Vec<Jet> = (0..self.n).map(|a| Jet::variable(self.n, order, a, x0[a])).collect();
        let j = self.eval_jet(&vars);
        let mut t = DerivativeTable::new();
        for a in MultiIndex::all_up_to(self.n, order) {
            t.insert(a.clone(), j.derivative(&a));
        }
        t
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

/// Relative change `|b - a| / |a|`.
pub fn drift(a: f64, b: f64) -> f64 {
    (b - a).abs() / a.abs()
}

/// `C_W l <= l + dist(Q, boundary) <= 4 C_W l`, with the distance measured
/// independently against dense boundary samples (slits included). Sampling
/// overestimates the distance by at most half the spacing.
pub fn sandwich_violations(cov: &WhitneyCovering) -> usize {
    let spacing = cov.lattice.side(cov.max_generation) / 8.0;
    let pts = cov.domain.boundary_samples(spacing);
    let mut bad = 0;
    for q in &cov.interior.cubes {
        let dist = pts.iter().map(|p| q.dist_to_point(p)).fold(f64::INFINITY, f64::min);
        let big_d = q.side + dist;
        let tol = 0.5 * spacing + 1e-12;
        if big_d < cov.cw * q.side - tol || big_d > 4.0 * cov.cw * q.side + tol {
            bad += 1;
        }
    }
    bad
}

/// Direct evaluation of the seminorm of `f(x) = x` on (0, 1) with
/// `s = 1/2, p = q = 2, u = 1`: loops over `x`, over a fine logarithmic `t`
/// grid and over every sample `y` in the ball, on a grid four times finer.
pub fn brute_force_identity(h: f64, rho: f64) -> f64 {
    let hf = h / 4.0;
    let n = (1.0 / hf).round() as usize;
    let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * hf).collect();
    // midpoint rule in log t over (rho 2^-14, rho)
    let nt = 140;
    let (a, b) = ((rho * 2f64.powi(-14)).ln(), rho.ln());
    let dlog = (b - a) / nt as f64;
    let sigma = 0.5;
    let mut outer = 0.0;
    for &x in &xs {
        let mut inner = 0.0;
        for m in 0..nt {
            let t = (a + (m as f64 + 0.5) * dlog).exp();
            let (mut sum, mut count) = (0.0, 0usize);
            for &y in &xs {
                if (x - y).abs() < t {
                    sum += (x - y).abs();
                    count += 1;
                }
            }
            let avg = sum / count as f64;
            inner += (avg / t.powf(sigma)).powi(2) * dlog;
        }
        outer += inner * hf;
    }
    outer.sqrt()
}

/// Worst relative error of the chain-rule expansion against jets over all
/// orders `1 <= |alpha| <= 4`, for one random pair `g: R^D -> R`,
/// `f: R^d -> R^D`.
pub fn worst_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let d = r.gen_range(1..=2);
    let big_d = r.gen_range(1..=2);
    let g = Poly::random(&mut r, big_d, 4);
    let f: Vec<Poly> = (0..big_d).map(|_| Poly::random(&mut r, d, 3)).collect();
    let x0: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();

    let y0: Vec<f64> = f.iter().map(|p| p.eval(&x0)).collect();
    let g_table = g.table(&y0, 4);
    let f_tables: Vec<_> = f.iter().map(|p| p.table(&x0, 4)).collect();
    let vars: Vec<_> = (0..d).map(|a| Jet::variable(d, 4, a, x0[a])).collect();
    let inner: Vec<_> = f.iter().map(|p| p.eval_jet(&vars)).collect();
    let composed = g.eval_jet(&inner);

    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        for alpha in MultiIndex::all_of_order(d, k) {
            let got = eval_chain_derivative(&g_table, &f_tables, &alpha).unwrap();
            worst = worst.max(rel_err(got, composed.derivative(&alpha)));
        }
    }
    worst
}
