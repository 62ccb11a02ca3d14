//! Centred second-order derivative stencils and first differences on
//! sampled functions.

use super::multi_index::MultiIndex;
use crate::error::{Error, Result};
use crate::geometry::domain::MAX_DIM;
use crate::spaces::SampledFunction;

pub const MAX_FD_ORDER: u32 = 4;

/// 1-D centred stencil for the `n`-th derivative as (offset, weight) pairs,
/// weights already divided by `h^n`.
fn stencil_1d(n: u32, h: f64) -> Vec<(i64, f64)> {
    match n {
        0 => vec![(0, 1.0)],
        1 => vec![(-1, -0.5 / h), (1, 0.5 / h)],
        2 => {
            let w = 1.0 / (h * h);
            vec![(-1, w), (0, -2.0 * w), (1, w)]
        }
        3 => {
            let w = 0.5 / (h * h * h);
            vec![(-2, -w), (-1, 2.0 * w), (1, -2.0 * w), (2, w)]
        }
        4 => {
            let w = 1.0 / h.powi(4);
            vec![(-2, w), (-1, -4.0 * w), (0, 6.0 * w), (1, -4.0 * w), (2, w)]
        }
        _ => unreachable!("order checked by caller"),
    }
}

/// Tensor-product stencil for `D^alpha`.
fn stencil(alpha: &MultiIndex, h: f64) -> Vec<([i64; MAX_DIM], f64)> {
    let mut out = vec![([0i64; MAX_DIM], 1.0)];
    for a in 0..alpha.len() {
        let s = stencil_1d(alpha.get(a), h);
        let mut next = Vec::with_capacity(out.len() * s.len());
        for (off, w) in &out {
            for &(o, v) in &s {
                let mut off2 = *off;
                off2[a] = o;
                next.push((off2, w * v));
            }
        }
        out = next;
    }
    out
}

/// Ordered `k`-tuples of axes, the component layout of `nabla^k f`.
pub fn derivative_tuples(d: usize, k: u32) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..d).map(move |a| {
                    let mut t2 = t.clone();
                    t2.push(a);
                    t2
                })
            })
            .collect();
    }
    out
}

pub fn tuple_multi_index(d: usize, tuple: &[usize]) -> MultiIndex {
    let mut v = vec![0u32; d];
    for &a in tuple {
        v[a] += 1;
    }
    MultiIndex::new(v)
}

/// `nabla^k f` with `arity * d^k` components (input component outermost,
/// then axis tuples in lexicographic order). Points without a complete
/// centred stencil inside the sample set are absent.
pub fn finite_diff(f: &SampledFunction, k: u32) -> Result<SampledFunction> {
    if k > MAX_FD_ORDER {
        return Err(Error::Capability(format!(
            "finite differences of order {k} (at most {MAX_FD_ORDER})"
        )));
    }
    if k == 0 {
        return Ok(f.clone());
    }
    let d = f.dim();
    let h = f.h();
    let tuples = derivative_tuples(d, k);
    let alphas: Vec<MultiIndex> = MultiIndex::all_of_order(d, k);
    let stencils: Vec<_> = alphas.iter().map(|a| stencil(a, h)).collect();
    let slot: Vec<usize> = tuples
        .iter()
        .map(|t| {
            let m = tuple_multi_index(d, t);
            alphas.iter().position(|a| *a == m).unwrap()
        })
        .collect();
    let width = tuples.len();
    let out_arity = f.arity * width;
    let n = f.len();
    let mut values = vec![0.0; n * out_arity];
    let mut present = vec![false; n];
    let mut per_alpha = vec![0.0; alphas.len() * f.arity];
    'points: for i in 0..n {
        if !f.is_present(i) {
            continue;
        }
        for (ai, st) in stencils.iter().enumerate() {
            for c in 0..f.arity {
                per_alpha[ai * f.arity + c] = 0.0;
            }
            for (off, w) in st {
                let j = match f.grid.shifted(i, &off[..d]) {
                    Some(j) if f.is_present(j) => j,
                    _ => continue 'points,
                };
                let v = f.value(j);
                for c in 0..f.arity {
                    per_alpha[ai * f.arity + c] += w * v[c];
                }
            }
        }
        present[i] = true;
        for c in 0..f.arity {
            for (t, &ai) in slot.iter().enumerate() {
                values[i * out_arity + c * width + t] = per_alpha[ai * f.arity + c];
            }
        }
    }
    if !present.iter().any(|&p| p) {
        return Err(Error::Resolution(format!(
            "no grid point of {} has a complete order-{k} stencil at h = {h}",
            f.domain
        )));
    }
    SampledFunction::new(f.grid.clone(), &f.domain, out_arity, values, present)
}

/// `Delta_h f(x) = f(x + h) - f(x)` at points where both samples are present;
/// `offset` is physical and must be a multiple of the grid spacing.
pub fn delta_h(f: &SampledFunction, offset: &[f64]) -> Result<SampledFunction> {
    let cells = f.grid.offset_cells(offset)?;
    let mut values = vec![0.0; f.len() * f.arity];
    let mut present = vec![false; f.len()];
    for i in 0..f.len() {
        if !f.is_present(i) {
            continue;
        }
        if let Some(j) = f.grid.shifted(i, &cells) {
            if f.is_present(j) {
                present[i] = true;
                let (a, b) = (f.value(j), f.value(i));
                for c in 0..f.arity {
                    values[i * f.arity + c] = a[c] - b[c];
                }
            }
        }
    }
    SampledFunction::new(f.grid.clone(), &f.domain, f.arity, values, present)
}

/// `prod g_i(x + h)` expanded over `nu in {0,1}^l` as products of differences
/// `Delta_h g_r(x)` (where `nu_r = 1`) and values `g_e(x)` (where `nu_e = 0`).
pub fn product_difference_expansion(values: &[f64], differences: &[f64]) -> f64 {
    let l = values.len();
    assert_eq!(l, differences.len());
    assert!(l < 63, "too many factors");
    (0u64..(1 << l))
        .map(|nu| {
            (0..l)
                .map(|r| if (nu >> r) & 1 == 1 { differences[r] } else { values[r] })
                .product::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    #[test]
    fn derivative_of_square_is_exact() {
        let d = Domain::builtin("interval").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 64.0, |x| x[0] * x[0]).unwrap();
        let g = finite_diff(&f, 1).unwrap();
        assert_eq!(g.count_present(), f.count_present() - 2);
        for i in g.present_indices() {
            let x = g.point(i)[0];
            assert!((g.scalar(i) - 2.0 * x).abs() < 1e-12);
        }
    }

    #[test]
    fn hessian_of_xy() {
        let d = Domain::builtin("square").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 16.0, |x| x[0] * x[1]).unwrap();
        let g = finite_diff(&f, 2).unwrap();
        assert_eq!(g.arity, 4);
        for i in g.present_indices() {
            let v = g.value(i);
            for (got, want) in v.iter().zip([0.0, 1.0, 1.0, 0.0]) {
                assert!((got - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn third_and_fourth_order_on_polynomials() {
        let d = Domain::builtin("interval").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 32.0, |x| x[0].powi(4)).unwrap();
        let g3 = finite_diff(&f, 3).unwrap();
        let g4 = finite_diff(&f, 4).unwrap();
        for i in g4.present_indices() {
            let x = g3.point(i)[0];
            // the third-order stencil is exact up to h^2 x terms
            assert!((g3.scalar(i) - 24.0 * x).abs() < 1e-6);
            assert!((g4.scalar(i) - 24.0).abs() < 1e-6);
        }
        assert!(finite_diff(&f, 5).is_err());
    }

    #[test]
    fn delta_of_identity() {
        let d = Domain::builtin("interval").unwrap();
        let f = SampledFunction::from_scalar(&d, 0.05, |x| x[0]).unwrap();
        let g = delta_h(&f, &[0.1]).unwrap();
        assert_eq!(g.count_present(), 18);
        for i in g.present_indices() {
            assert!((g.scalar(i) - 0.1).abs() < 1e-15);
        }
        assert!(delta_h(&f, &[0.07]).is_err());
    }

    #[test]
    fn product_rule_for_two_factors() {
        let (g1, g2, d1, d2) = (0.3f64, -1.7f64, 0.25f64, 0.5f64);
        let lhs = (g1 + d1) * (g2 + d2);
        assert!((product_difference_expansion(&[g1, g2], &[d1, d2]) - lhs).abs() < 1e-15);
        let delta_prod = lhs - g1 * g2;
        assert!((delta_prod - (d1 * d2 + d1 * g2 + g1 * d2)).abs() < 1e-15);
    }
}
