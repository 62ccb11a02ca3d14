//! Derivatives of the inverse Jacobian `g = Df^{-1} = adj(Df) / det(Df)`
//! for `f: R^d -> R^d`, `d ∈ {1, 2}`, written as sums of
//! `c * prod_l D^{gamma_l} f_{mu_l} / det(Df)^k` with a common power `k`.

use super::faa::{eval_chain_derivative, DerivativeTable};
use super::multi_index::MultiIndex;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// A factor `D^gamma f_mu` with `|gamma| >= 1` (0-based component).
pub type Factor = (usize, MultiIndex);

#[derive(Clone, Debug, PartialEq)]
pub struct InverseTerm {
    pub coefficient: i64,
    /// Sorted factors; first-order ones are entries of `Df`.
    pub factors: Vec<Factor>,
}

impl InverseTerm {
    /// Exponents `beta` of the first-derivative entries, indexed
    /// `[component][slot]`, after `gamma_count` factors are set aside as the
    /// `D^{gamma_l} f_{mu_l}` group.
    pub fn split(&self, gamma_count: usize) -> (Vec<Vec<u32>>, Vec<Factor>) {
        let d = self.factors.first().map_or(1, |f| f.1.len());
        let mut higher: Vec<Factor> = self
            .factors
            .iter()
            .filter(|f| f.1.order() >= 2)
            .cloned()
            .collect();
        let mut firsts: Vec<Factor> = self
            .factors
            .iter()
            .filter(|f| f.1.order() == 1)
            .cloned()
            .collect();
        while higher.len() < gamma_count && !firsts.is_empty() {
            higher.push(firsts.remove(0));
        }
        let mut beta = vec![vec![0u32; d]; d];
        for (mu, g) in &firsts {
            let slot = g.as_slice().iter().position(|&a| a == 1).unwrap_or(0);
            beta[*mu][slot] += 1;
        }
        (beta, higher)
    }
}

/// All entries `D^alpha g_ij` for one `alpha`.
#[derive(Clone, Debug)]
pub struct InverseExpansion {
    pub alpha: MultiIndex,
    pub d: usize,
    /// Common power of `det(Df)` in every denominator: `|alpha| + 1`.
    pub det_power: u32,
    /// `entries[i][j]` lists the terms of `D^alpha g_ij`.
    pub entries: Vec<Vec<Vec<InverseTerm>>>,
}

type Poly = BTreeMap<Vec<Factor>, i64>;

fn det_poly(d: usize) -> Poly {
    let mut p = Poly::new();
    if d == 1 {
        p.insert(vec![(0, MultiIndex::unit(1, 0))], 1);
    } else {
        p.insert(vec![(0, MultiIndex::unit(2, 0)), (1, MultiIndex::unit(2, 1))], 1);
        p.insert(vec![(0, MultiIndex::unit(2, 1)), (1, MultiIndex::unit(2, 0))], -1);
    }
    p
}

fn cofactor(d: usize, i: usize, j: usize) -> Poly {
    let mut p = Poly::new();
    if d == 1 {
        p.insert(Vec::new(), 1);
        return p;
    }
    // inverse of [[a, b], [c, e]] is [[e, -b], [-c, a]] / det
    let (comp, slot, sign) = match (i, j) {
        (0, 0) => (1, 1, 1),
        (0, 1) => (0, 1, -1),
        (1, 0) => (1, 0, -1),
        _ => (0, 0, 1),
    };
    p.insert(vec![(comp, MultiIndex::unit(2, slot))], sign);
    p
}

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (fa, ca) in a {
        for (fb, cb) in b {
            let mut f = fa.clone();
            f.extend(fb.iter().cloned());
            f.sort();
            *out.entry(f).or_insert(0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// `∂_slot` of a polynomial in derivatives of `f`.
fn diff(p: &Poly, slot: usize) -> Poly {
    let mut out = Poly::new();
    for (factors, c) in p {
        for l in 0..factors.len() {
            let mut f = factors.clone();
            f[l].1 = f[l].1.with_added(slot);
            f.sort();
            *out.entry(f).or_insert(0) += c;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn add_into(target: &mut Poly, p: &Poly, scale: i64) {
    for (f, c) in p {
        *target.entry(f.clone()).or_insert(0) += c * scale;
    }
    target.retain(|_, c| *c != 0);
}

/// Symbolic expansion of `D^alpha g_ij` for every `i, j`.
pub fn inverse_derivative_expansion(alpha: &MultiIndex, d: usize) -> Result<InverseExpansion> {
    if !(1..=2).contains(&d) {
        return Err(Error::Capability(format!("dimension {d} is not supported")));
    }
    if alpha.len() != d {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} has {} slots, expected {d}",
            alpha.len()
        )));
    }
    if alpha.order() > 5 {
        return Err(Error::Capability(format!("order {} exceeds 5", alpha.order())));
    }
    let det = det_poly(d);
    let k = alpha.order() + 1;
    let mut entries = vec![vec![Vec::new(); d]; d];
    for (i, row) in entries.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // numerator polynomials keyed by current power of det
            let mut state: BTreeMap<u32, Poly> = BTreeMap::new();
            state.insert(1, cofactor(d, i, j));
            for slot in alpha.slots() {
                let mut next: BTreeMap<u32, Poly> = BTreeMap::new();
                let ddet = diff(&det, slot);
                for (&n, p) in &state {
                    add_into(next.entry(n).or_default(), &diff(p, slot), 1);
                    add_into(next.entry(n + 1).or_default(), &mul(p, &ddet), -(n as i64));
                }
                state = next;
            }
            let mut total = Poly::new();
            for (n, p) in state {
                let mut q = p;
                for _ in n..k {
                    q = mul(&q, &det);
                }
                add_into(&mut total, &q, 1);
            }
            *cell = total
                .into_iter()
                .map(|(factors, coefficient)| InverseTerm { coefficient, factors })
                .collect();
        }
    }
    Ok(InverseExpansion {
        alpha: alpha.clone(),
        d,
        det_power: k,
        entries,
    })
}

/// Values `D^gamma f_mu(x)` for `1 <= |gamma| <= order`.
pub type JetTable = Vec<DerivativeTable>;

fn first_derivatives(f: &JetTable, d: usize) -> Result<Vec<Vec<f64>>> {
    let mut jac = vec![vec![0.0; d]; d];
    for (mu, row) in jac.iter_mut().enumerate() {
        for (m, v) in row.iter_mut().enumerate() {
            let a = MultiIndex::unit(d, m);
            *v = f[mu]
                .get(&a)
                .ok_or_else(|| Error::IncompleteInput(format!("D^{a} f_{}", mu + 1)))?;
        }
    }
    Ok(jac)
}

fn determinant(jac: &[Vec<f64>]) -> f64 {
    if jac.len() == 1 {
        jac[0][0]
    } else {
        jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
    }
}

impl InverseExpansion {
    /// Evaluates every `D^alpha g_ij(x)` from derivatives of `f` at `x`.
    pub fn evaluate(&self, f: &JetTable) -> Result<Vec<Vec<f64>>> {
        let jac = first_derivatives(f, self.d)?;
        let det = determinant(&jac);
        if det == 0.0 {
            return Err(Error::InvalidArgument("singular Jacobian".into()));
        }
        let scale = det.powi(self.det_power as i32);
        let mut out = vec![vec![0.0; self.d]; self.d];
        for (i, row) in self.entries.iter().enumerate() {
            for (j, terms) in row.iter().enumerate() {
                let mut s = 0.0;
                for t in terms {
                    let mut v = t.coefficient as f64;
                    for (mu, g) in &t.factors {
                        v *= f[*mu].get(g).ok_or_else(|| {
                            Error::IncompleteInput(format!("D^{g} f_{}", mu + 1))
                        })?;
                    }
                    s += v;
                }
                out[i][j] = s / scale;
            }
        }
        Ok(out)
    }
}

/// Derivatives of `f^{-1}` at `y = f(x)` up to `order`, built from the
/// derivatives of `f` at `x` through `D(f^{-1}) = g ∘ f^{-1}` and the
/// chain rule. Returns one table per component.
pub fn inverse_map_derivatives(f: &JetTable, d: usize, order: u32) -> Result<JetTable> {
    if f.len() != d {
        return Err(Error::InvalidArgument("component count must equal d".into()));
    }
    if order == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    // D^beta g_ij(x) for |beta| <= order - 1
    let mut g_tables: Vec<Vec<DerivativeTable>> = vec![vec![DerivativeTable::new(); d]; d];
    for beta in MultiIndex::all_up_to(d, order - 1) {
        let exp = inverse_derivative_expansion(&beta, d)?;
        let vals = exp.evaluate(f)?;
        for i in 0..d {
            for j in 0..d {
                g_tables[i][j].insert(beta.clone(), vals[i][j]);
            }
        }
    }
    let mut inv: JetTable = vec![DerivativeTable::new(); d];
    for m in 1..=order {
        for alpha in MultiIndex::all_of_order(d, m) {
            let j = alpha.as_slice().iter().position(|&a| a > 0).unwrap();
            let rest = alpha.with_removed(j).unwrap();
            for i in 0..d {
                let v = if rest.is_zero() {
                    g_tables[i][j].get(&MultiIndex::zeros(d)).unwrap()
                } else {
                    eval_chain_derivative(&g_tables[i][j], &inv, &rest)?
                };
                inv[i].insert(alpha.clone(), v);
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_1d(vals: &[f64]) -> JetTable {
        let mut t = DerivativeTable::new();
        for (k, v) in vals.iter().enumerate() {
            t.insert(MultiIndex::new(vec![k as u32 + 1]), *v);
        }
        vec![t]
    }

    #[test]
    fn one_dimensional_second_derivative() {
        // f(x) = x + x^3 / 10
        let x: f64 = 0.7;
        let f = table_1d(&[1.0 + 0.3 * x * x, 0.6 * x, 0.6]);
        let inv = inverse_map_derivatives(&f, 1, 2).unwrap();
        let f1 = 1.0 + 0.3 * x * x;
        let want = -(0.6 * x) / f1.powi(3);
        let got = inv[0].get(&MultiIndex::new(vec![2])).unwrap();
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn shape_of_terms() {
        for d in 1..=2 {
            for alpha in MultiIndex::all_up_to(d, 3) {
                let exp = inverse_derivative_expansion(&alpha, d).unwrap();
                let k = exp.det_power as usize;
                for row in &exp.entries {
                    for terms in row {
                        for t in terms {
                            assert_eq!(t.factors.len(), d * k - 1);
                            let (beta, gammas) = t.split(k - 1);
                            let bsum: u32 = beta.iter().flatten().sum();
                            assert_eq!(bsum as usize, (d - 1) * k);
                            let gsum: u32 = gammas.iter().map(|g| g.1.order()).sum();
                            assert_eq!(gammas.len(), k - 1);
                            assert_eq!(gsum as usize, 2 * k - 2);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn first_order_inverts_jacobian() {
        let jac = [[1.3, 0.4], [-0.2, 0.9]];
        let mut f = vec![DerivativeTable::new(), DerivativeTable::new()];
        for mu in 0..2 {
            for m in 0..2 {
                f[mu].insert(MultiIndex::unit(2, m), jac[mu][m]);
            }
        }
        let g = inverse_derivative_expansion(&MultiIndex::zeros(2), 2)
            .unwrap()
            .evaluate(&f)
            .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: f64 = (0..2).map(|l| g[i][l] * jac[l][j]).sum();
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((s - e).abs() < 1e-14);
            }
        }
    }
}
