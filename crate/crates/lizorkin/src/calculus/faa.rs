//! Multivariate Faà di Bruno expansion for `D^k (g ∘ f)` with
//! `f: R^d -> R^D` and `g: R^D -> R`.
//!
//! Terms are generated by differentiating `g(f(x))` one slot at a time and
//! collecting equal monomials. Inner factors are kept sorted by component
//! and then by multi-index, so each monomial has one canonical key and the
//! component list of a term is exactly `m(i)` of its outer multi-index.

use super::multi_index::{m_vector, MultiIndex};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

pub const MAX_ORDER: u32 = 6;

/// One monomial `C * D^i g(f(x)) * prod_l D^{alpha_l} f^{m_l}(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaaTerm {
    pub constant: u64,
    pub outer: MultiIndex,
    pub inner: Vec<MultiIndex>,
    /// 1-based component of `f` hit by each inner factor; equals `m(outer)`.
    pub assignment: Vec<usize>,
}

type Key = (MultiIndex, Vec<(usize, MultiIndex)>);

type Memo = RwLock<HashMap<(MultiIndex, usize), Arc<Vec<FaaTerm>>>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Terms of `D^order (g ∘ f)`; `order` has `d` slots and `g` takes `big_d`
/// arguments.
pub fn faa_terms(order: &MultiIndex, d: usize, big_d: usize) -> Result<Arc<Vec<FaaTerm>>> {
    if d == 0 || big_d == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if order.len() != d {
        return Err(Error::InvalidArgument(format!(
            "order {order} has {} slots, expected {d}",
            order.len()
        )));
    }
    let m = order.order();
    if m == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    if m > MAX_ORDER {
        return Err(Error::Capability(format!(
            "derivative order {m} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    let key = (order.clone(), big_d);
    if let Some(hit) = memo().read().expect("faa memo poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let terms = Arc::new(generate(order, d, big_d));
    let mut table = memo().write().expect("faa memo poisoned");
    Ok(table.entry(key).or_insert(terms).clone())
}

fn generate(order: &MultiIndex, d: usize, big_d: usize) -> Vec<FaaTerm> {
    let mut current: BTreeMap<Key, u64> = BTreeMap::new();
    current.insert((MultiIndex::zeros(big_d), Vec::new()), 1);
    for slot in order.slots() {
        let mut next: BTreeMap<Key, u64> = BTreeMap::new();
        for ((outer, factors), c) in &current {
            // derivative of D^i g(f(x)) by chain rule
            for j in 0..big_d {
                let mut nf = factors.clone();
                nf.push((j, MultiIndex::unit(d, slot)));
                nf.sort();
                *next.entry((outer.with_added(j), nf)).or_insert(0) += c;
            }
            // derivative of each inner factor
            for l in 0..factors.len() {
                let mut nf = factors.clone();
                nf[l].1 = nf[l].1.with_added(slot);
                nf.sort();
                *next.entry((outer.clone(), nf)).or_insert(0) += c;
            }
        }
        current = next;
    }
    current
        .into_iter()
        .map(|((outer, factors), constant)| {
            let assignment = m_vector(&outer);
            debug_assert_eq!(
                assignment,
                factors.iter().map(|(j, _)| j + 1).collect::<Vec<_>>()
            );
            FaaTerm {
                constant,
                inner: factors.into_iter().map(|(_, a)| a).collect(),
                outer,
                assignment,
            }
        })
        .collect()
}

/// Partial derivatives of a scalar function at one point, keyed by
/// multi-index.
#[derive(Clone, Debug, Default)]
pub struct DerivativeTable {
    values: HashMap<MultiIndex, f64>,
}

impl DerivativeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, alpha: MultiIndex, value: f64) {
        self.values.insert(alpha, value);
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<f64> {
        self.values.get(alpha).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates `D^order (g ∘ f)(x)` from the derivatives of `g` at `f(x)`
/// and of each component of `f` at `x`.
pub fn eval_chain_derivative(
    g: &DerivativeTable,
    f: &[DerivativeTable],
    order: &MultiIndex,
) -> Result<f64> {
    let terms = faa_terms(order, order.len(), f.len())?;
    let mut total = 0.0;
    for term in terms.iter() {
        let gv = g
            .get(&term.outer)
            .ok_or_else(|| Error::IncompleteInput(format!("D^{} g", term.outer)))?;
        let mut prod = term.constant as f64 * gv;
        for (alpha, &comp) in term.inner.iter().zip(&term.assignment) {
            let fv = f[comp - 1]
                .get(alpha)
                .ok_or_else(|| Error::IncompleteInput(format!("D^{alpha} f^{comp}")))?;
            prod *= fv;
        }
        total += prod;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_third_order() {
        // (g∘f)''' = g''' f'^3 + 3 g'' f' f'' + g' f'''
        let terms = faa_terms(&MultiIndex::new(vec![3]), 1, 1).unwrap();
        let mut constants: Vec<u64> = terms.iter().map(|t| t.constant).collect();
        constants.sort();
        assert_eq!(constants, vec![1, 1, 3]);
        for t in terms.iter() {
            let s: u32 = t.inner.iter().map(|a| a.order()).sum();
            assert_eq!(s, 3);
            assert!(t.inner.iter().all(|a| !a.is_zero()));
            assert_eq!(t.inner.len() as u32, t.outer.order());
        }
    }

    #[test]
    fn mixed_second_order_in_two_dimensions() {
        let terms = faa_terms(&MultiIndex::new(vec![1, 1]), 2, 2).unwrap();
        // four g'' terms (with the cross term split by component) and two g' terms
        let second: u64 = terms
            .iter()
            .filter(|t| t.outer.order() == 2)
            .map(|t| t.constant)
            .sum();
        assert_eq!(second, 4);
        assert_eq!(terms.iter().filter(|t| t.outer.order() == 1).count(), 2);
        for t in terms.iter() {
            assert_eq!(t.assignment, m_vector(&t.outer));
        }
    }

    #[test]
    fn order_limits() {
        assert!(matches!(
            faa_terms(&MultiIndex::new(vec![7]), 1, 1),
            Err(Error::Capability(_))
        ));
        assert!(faa_terms(&MultiIndex::new(vec![0, 0]), 2, 1).is_err());
        assert!(faa_terms(&MultiIndex::new(vec![6]), 1, 1).is_ok());
    }

    #[test]
    fn missing_derivative_is_reported() {
        let mut g = DerivativeTable::new();
        g.insert(MultiIndex::new(vec![1]), 1.0);
        let mut f = DerivativeTable::new();
        f.insert(MultiIndex::new(vec![1]), 2.0);
        let err = eval_chain_derivative(&g, &[f], &MultiIndex::new(vec![2])).unwrap_err();
        assert!(matches!(err, Error::IncompleteInput(_)));
    }

    #[test]
    fn exp_of_square() {
        // h(x) = exp(x^2): h'' = (2 + 4x^2) exp(x^2)
        let x: f64 = 0.3;
        let e = (x * x).exp();
        let mut g = DerivativeTable::new();
        for k in 0..=2 {
            g.insert(MultiIndex::new(vec![k]), e);
        }
        let mut f = DerivativeTable::new();
        f.insert(MultiIndex::new(vec![1]), 2.0 * x);
        f.insert(MultiIndex::new(vec![2]), 2.0);
        let v = eval_chain_derivative(&g, &[f], &MultiIndex::new(vec![2])).unwrap();
        assert!((v - (2.0 + 4.0 * x * x) * e).abs() < 1e-14);
    }
}
