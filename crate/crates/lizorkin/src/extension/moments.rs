//! The moment-matching projection `P_Q^k f`: the polynomial of degree at
//! most `k` whose derivative means `(D^beta P)_Q`, `|beta| <= k`, equal those
//! of `f`.

use crate::calculus::MultiIndex;
use crate::error::{Error, Result};
use crate::geometry::domain::MAX_DIM;
use crate::geometry::DyadicCube;
use crate::spaces::SampledFunction;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

pub const MAX_MOMENT_ORDER: u32 = 3;

/// `sum_gamma c_gamma z^gamma` with `z = (x - center) / scale`.
#[derive(Clone, Debug, Serialize)]
pub struct MomentPolynomial {
    pub k: u32,
    pub dim: usize,
    pub center: Vec<f64>,
    pub scale: f64,
    pub terms: Vec<(MultiIndex, f64)>,
    pub generation: u32,
    pub coords: Vec<i64>,
    /// Largest relative residual of the moment equations.
    pub residual: f64,
}

fn falling(e: u32, m: u32) -> f64 {
    (0..m).map(|i| (e - i) as f64).product()
}

fn monomial_deriv(z: f64, e: u32, m: u32) -> f64 {
    if m > e {
        0.0
    } else {
        falling(e, m) * z.powi((e - m) as i32)
    }
}

impl MomentPolynomial {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.derivative(&MultiIndex::zeros(self.dim), x)
    }

    /// `D^beta P(x)` in physical coordinates.
    pub fn derivative(&self, beta: &MultiIndex, x: &[f64]) -> f64 {
        let d = self.dim;
        let mut z = [0.0; MAX_DIM];
        for a in 0..d {
            z[a] = (x[a] - self.center[a]) / self.scale;
        }
        let mut total = 0.0;
        for (g, c) in &self.terms {
            let mut v = *c;
            for a in 0..d {
                v *= monomial_deriv(z[a], g.get(a), beta.get(a));
                if v == 0.0 {
                    break;
                }
            }
            total += v;
        }
        total / self.scale.powi(beta.order() as i32)
    }

    pub fn coefficient(&self, gamma: &MultiIndex) -> f64 {
        self.terms
            .iter()
            .find(|(g, _)| g == gamma)
            .map_or(0.0, |t| t.1)
    }
}

/// `int_{za}^{zb} (d/dz)^m z^e dz`.
fn exact_moment(e: u32, m: u32, za: f64, zb: f64) -> f64 {
    if m > e {
        return 0.0;
    }
    if m == 0 {
        let p = (e + 1) as i32;
        return (zb.powi(p) - za.powi(p)) / (e + 1) as f64;
    }
    monomial_deriv(zb, e, m - 1) - monomial_deriv(za, e, m - 1)
}

/// 1-D weights `w_j` on sample positions `z_j` (cells of width `hz`) such
/// that `sum_j w_j g(z_j) = int_{-1/2}^{1/2} g^(m) dz` for every polynomial
/// of degree at most `degree`. Among such weights, the ones closest to the
/// midpoint rule (for `m = 0`) or to zero (for `m >= 1`) are returned.
pub fn axis_weights(z: &[f64], hz: f64, m: u32, degree: u32) -> Option<Vec<f64>> {
    let n = z.len();
    let cols = degree as usize + 1;
    if n < cols {
        return None;
    }
    let base: Vec<f64> = z
        .iter()
        .map(|&zj| {
            if m == 0 {
                let lo = (zj - 0.5 * hz).max(-0.5);
                let hi = (zj + 0.5 * hz).min(0.5);
                (hi - lo).max(0.0)
            } else {
                0.0
            }
        })
        .collect();
    let v = DMatrix::from_fn(n, cols, |j, e| z[j].powi(e as i32));
    let target = DVector::from_fn(cols, |e, _| exact_moment(e as u32, m, -0.5, 0.5));
    let rhs = &target - v.transpose() * DVector::from_vec(base.clone());
    let gram = v.transpose() * &v;
    let lambda = gram.lu().solve(&rhs)?;
    let corr = &v * lambda;
    Some(base.iter().zip(corr.iter()).map(|(b, c)| b + c).collect())
}

/// Sample block used for one cube: per-axis grid index ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub start: Vec<usize>,
    pub len: Vec<usize>,
}

fn window_present(f: &SampledFunction, w: &Window) -> bool {
    let d = f.dim();
    let total: usize = w.len.iter().product();
    let mut idx = [0usize; MAX_DIM];
    for flat in 0..total {
        let mut rem = flat;
        for a in 0..d {
            idx[a] = w.start[a] + rem % w.len[a];
            rem /= w.len[a];
        }
        if !f.is_present(f.grid.index_of(&idx)) {
            return false;
        }
    }
    true
}

/// Grid cells whose centres lie in the closed cube, per axis.
fn cells_in_cube(f: &SampledFunction, q: &DyadicCube) -> Option<Window> {
    let d = f.dim();
    let mut start = Vec::with_capacity(d);
    let mut len = Vec::with_capacity(d);
    for a in 0..d {
        let lo = f.grid.coordinate(a, q.lo[a]).ceil().max(0.0);
        let hi = f.grid.coordinate(a, q.hi(a)).floor().min(f.grid.n[a] as f64 - 1.0);
        if hi < lo {
            return None;
        }
        start.push(lo as usize);
        len.push((hi - lo) as usize + 1);
    }
    Some(Window { start, len })
}

/// Samples of `Q` itself when it holds at least `k + 2` present cells per
/// axis; otherwise the nearest fully present block of `k + 2` cells per axis
/// around `Q` (shifted by at most `k + 2` cells).
pub fn sampling_window(f: &SampledFunction, q: &DyadicCube, k: u32) -> Option<Window> {
    let d = f.dim();
    let need = k as usize + 2;
    if let Some(w) = cells_in_cube(f, q) {
        if w.len.iter().all(|&l| l >= need) && window_present(f, &w) {
            return Some(w);
        }
    }
    let c = q.center();
    let mut base = Vec::with_capacity(d);
    for a in 0..d {
        if f.grid.n[a] < need {
            return None;
        }
        let first = f.grid.coordinate(a, c[a]) - (need as f64 - 1.0) / 2.0;
        base.push(first.round() as i64);
    }
    let reach = need as i64;
    let mut best: Option<(i64, Vec<i64>, Window)> = None;
    let span = 2 * reach + 1;
    for flat in 0..span.pow(d as u32) {
        let mut shift = vec![0i64; d];
        let mut rem = flat;
        for s in shift.iter_mut() {
            *s = rem % span - reach;
            rem /= span;
        }
        let cost: i64 = shift.iter().map(|s| s.abs()).sum();
        if best.as_ref().is_some_and(|b| b.0 < cost || (b.0 == cost && b.1 <= shift)) {
            continue;
        }
        let mut start = Vec::with_capacity(d);
        let mut ok = true;
        for a in 0..d {
            let s = base[a] + shift[a];
            if s < 0 || s as usize + need > f.grid.n[a] {
                ok = false;
                break;
            }
            start.push(s as usize);
        }
        if !ok {
            continue;
        }
        let w = Window {
            start,
            len: vec![need; d],
        };
        if window_present(f, &w) {
            best = Some((cost, shift, w));
        }
    }
    best.map(|b| b.2)
}

fn describe(q: &DyadicCube) -> String {
    format!("generation {} coords {:?}", q.generation, q.coords_slice())
}

/// Projection from an explicit sample window.
pub fn project_window(f: &SampledFunction, q: &DyadicCube, k: u32, w: &Window) -> Result<MomentPolynomial> {
    if k > MAX_MOMENT_ORDER {
        return Err(Error::Capability(format!(
            "moment projection of degree {k} (at most {MAX_MOMENT_ORDER})"
        )));
    }
    if f.arity != 1 {
        return Err(Error::InvalidArgument("moment projection needs a scalar function".into()));
    }
    let d = f.dim();
    let degree = k + 1;
    let c = q.center();
    let hz = f.h() / q.side;
    // per axis, per derivative order: weights on the window samples
    let mut weights: Vec<Vec<Vec<f64>>> = Vec::with_capacity(d);
    for a in 0..d {
        let z: Vec<f64> = (0..w.len[a])
            .map(|j| {
                let x = f.grid.lo[a] + ((w.start[a] + j) as f64 + 0.5) * f.h();
                (x - c[a]) / q.side
            })
            .collect();
        let mut per_m = Vec::with_capacity(k as usize + 1);
        for m in 0..=k {
            per_m.push(axis_weights(&z, hz, m, degree).ok_or_else(|| Error::Conditioning {
                cube: describe(q),
                detail: format!("singular quadrature system on axis {a}"),
            })?);
        }
        weights.push(per_m);
    }
    let basis = MultiIndex::all_up_to(d, k);
    let nb = basis.len();
    let total: usize = w.len.iter().product();
    let mut samples = Vec::with_capacity(total);
    let mut idx = [0usize; MAX_DIM];
    let mut local = [0usize; MAX_DIM];
    for flat in 0..total {
        let mut rem = flat;
        for a in 0..d {
            local[a] = rem % w.len[a];
            idx[a] = w.start[a] + local[a];
            rem /= w.len[a];
        }
        let gi = f.grid.index_of(&idx);
        if !f.is_present(gi) {
            return Err(Error::Resolution(format!(
                "sample window of cube {} has absent points",
                describe(q)
            )));
        }
        samples.push((local, f.scalar(gi)));
    }
    let mut a_mat = DMatrix::zeros(nb, nb);
    let mut b_vec = DVector::zeros(nb);
    for (r, beta) in basis.iter().enumerate() {
        for (col, gamma) in basis.iter().enumerate() {
            a_mat[(r, col)] = (0..d)
                .map(|a| exact_moment(gamma.get(a), beta.get(a), -0.5, 0.5))
                .product::<f64>();
        }
        let mut s = 0.0;
        for (local, v) in &samples {
            let mut wt = 1.0;
            for a in 0..d {
                wt *= weights[a][beta.get(a) as usize][local[a]];
            }
            s += wt * v;
        }
        b_vec[r] = s;
    }
    let sol = a_mat.clone().lu().solve(&b_vec).ok_or_else(|| Error::Conditioning {
        cube: describe(q),
        detail: "singular moment matrix".into(),
    })?;
    let res = &a_mat * &sol - &b_vec;
    let scale = b_vec.amax().max(f64::MIN_POSITIVE);
    let residual = res.amax() / scale;
    Ok(MomentPolynomial {
        k,
        dim: d,
        center: c[..d].to_vec(),
        scale: q.side,
        terms: basis.into_iter().zip(sol.iter().copied()).collect(),
        generation: q.generation,
        coords: q.coords_slice().to_vec(),
        residual,
    })
}

/// `P_Q^k f` from the samples inside `Q`, which must number at least `k + 2`
/// per axis and all be present.
pub fn moment_projection(f: &SampledFunction, q: &DyadicCube, k: u32) -> Result<MomentPolynomial> {
    let need = k as usize + 2;
    let w = cells_in_cube(f, q)
        .filter(|w| w.len.iter().all(|&l| l >= need))
        .ok_or_else(|| {
            Error::Resolution(format!(
                "cube {} holds fewer than {need} samples per axis at h = {}",
                describe(q),
                f.h()
            ))
        })?;
    project_window(f, q, k, &w)
}

/// `P_Q^k f` with the window policy of [`sampling_window`].
pub fn moment_projection_windowed(f: &SampledFunction, q: &DyadicCube, k: u32) -> Result<MomentPolynomial> {
    let w = sampling_window(f, q, k).ok_or_else(|| {
        Error::Resolution(format!(
            "no fully present block of {} samples per axis near cube {}",
            k + 2,
            describe(q)
        ))
    })?;
    project_window(f, q, k, &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Domain, Lattice};

    #[test]
    fn square_on_unit_interval() {
        let d = Domain::builtin("interval").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 64.0, |x| x[0] * x[0]).unwrap();
        let q = Lattice::new(&[0.0], 1.0).cube(0, [0, 0, 0]);
        let p = moment_projection(&f, &q, 1).unwrap();
        for x in [0.0, 0.25, 0.9] {
            assert!((p.eval(&[x]) - (x - 1.0 / 6.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_is_sample_mean() {
        let d = Domain::builtin("square").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 32.0, |x| (3.0 * x[0]).sin() + x[1].exp()).unwrap();
        let q = Lattice::new(&[0.0, 0.0], 1.0).cube(2, [1, 2, 0]);
        let p = moment_projection(&f, &q, 0).unwrap();
        let w = cells_in_cube(&f, &q).unwrap();
        assert_eq!(w.len, vec![8, 8]);
        let mut s = 0.0;
        for i in f.present_indices() {
            if q.contains_point(&f.point(i)[..2]) {
                s += f.scalar(i);
            }
        }
        assert!((p.eval(&[0.3, 0.6]) - s / 64.0).abs() < 1e-13);
    }

    #[test]
    fn weights_are_exact() {
        let z: Vec<f64> = (0..5).map(|j| -0.4 + 0.2 * j as f64).collect();
        for m in 0..=3 {
            let w = axis_weights(&z, 0.2, m, 4).unwrap();
            for e in 0..=4 {
                let got: f64 = w.iter().zip(&z).map(|(w, z)| w * z.powi(e)).sum();
                assert!((got - exact_moment(e as u32, m, -0.5, 0.5)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sub_grid_cube_uses_window() {
        let d = Domain::builtin("square").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 16.0, |x| 1.0 + x[0] - 2.0 * x[1]).unwrap();
        let q = Lattice::new(&[0.0, 0.0], 1.0).cube(7, [0, 5, 0]);
        assert!(moment_projection(&f, &q, 1).is_err());
        let p = moment_projection_windowed(&f, &q, 1).unwrap();
        let c = q.center();
        assert!((p.eval(&c[..2]) - (1.0 + c[0] - 2.0 * c[1])).abs() < 1e-12);
    }
}
