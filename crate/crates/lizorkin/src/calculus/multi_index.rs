use serde::{Deserialize, Serialize};
use std::fmt;

/// Multi-index over `len` slots.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    pub fn unit(len: usize, slot: usize) -> Self {
        let mut v = vec![0; len];
        v[slot] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|alpha|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, slot: usize) -> u32 {
        self.0[slot]
    }

    pub fn with_added(&self, slot: usize) -> Self {
        let mut v = self.0.clone();
        v[slot] += 1;
        MultiIndex(v)
    }

    pub fn with_removed(&self, slot: usize) -> Option<Self> {
        if self.0[slot] == 0 {
            return None;
        }
        let mut v = self.0.clone();
        v[slot] -= 1;
        Some(MultiIndex(v))
    }

    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// The slot sequence that differentiates in `self`: slot 0 repeated
    /// `alpha_0` times, then slot 1, ...
    pub fn slots(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.order() as usize);
        for (i, &a) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat(i).take(a as usize));
        }
        out
    }

    /// All multi-indices of exactly order `k` over `len` slots, in
    /// lexicographically decreasing order of the leading slot.
    pub fn all_of_order(len: usize, k: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; len];
        fill(&mut cur, 0, k, &mut out);
        out
    }

    /// All multi-indices with order `<= k`, graded by order.
    pub fn all_up_to(len: usize, k: u32) -> Vec<MultiIndex> {
        (0..=k).flat_map(|j| Self::all_of_order(len, j)).collect()
    }
}

fn fill(cur: &mut Vec<u32>, slot: usize, left: u32, out: &mut Vec<MultiIndex>) {
    if cur.is_empty() {
        if left == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if slot + 1 == cur.len() {
        cur[slot] = left;
        out.push(MultiIndex(cur.clone()));
        cur[slot] = 0;
        return;
    }
    for a in (0..=left).rev() {
        cur[slot] = a;
        fill(cur, slot + 1, left - a, out);
    }
    cur[slot] = 0;
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        MultiIndex(v.to_vec())
    }
}

/// `m(i)`: slot numbers (1-based) repeated according to `i`, so that
/// `m((3,2)) = (1,1,1,2,2)`.
pub fn m_vector(i: &MultiIndex) -> Vec<usize> {
    i.slots().into_iter().map(|s| s + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_vector_examples() {
        assert_eq!(m_vector(&MultiIndex::new(vec![3, 2])), vec![1, 1, 1, 2, 2]);
        assert_eq!(m_vector(&MultiIndex::new(vec![4, 0, 1])), vec![1, 1, 1, 1, 3]);
        assert!(m_vector(&MultiIndex::new(vec![0, 0])).is_empty());
    }

    #[test]
    fn enumeration_counts() {
        // binomial(k + d - 1, d - 1)
        assert_eq!(MultiIndex::all_of_order(2, 3).len(), 4);
        assert_eq!(MultiIndex::all_of_order(3, 2).len(), 6);
        assert_eq!(MultiIndex::all_up_to(2, 3).len(), 10);
        assert_eq!(MultiIndex::all_of_order(1, 4), vec![MultiIndex::new(vec![4])]);
    }

    #[test]
    fn factorial_and_slots() {
        let a = MultiIndex::new(vec![2, 3]);
        assert_eq!(a.factorial(), 12.0);
        assert_eq!(a.slots(), vec![0, 0, 1, 1, 1]);
        assert_eq!(a.order(), 5);
    }
}
