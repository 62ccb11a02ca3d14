//! Chains of neighboring Whitney cubes and their admissibility constant.

use super::cube::DyadicCube;
use super::whitney::{CubeSet, WhitneyCovering};
use crate::error::{Error, Result};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Exponents `gamma` of the entering weight `l(Q)^gamma` tried by the chain
/// search. `1` is the geometric length, `0` counts hops.
pub const WEIGHT_EXPONENTS: [f64; 3] = [1.0, 0.5, 0.0];

#[derive(Clone, Debug, Serialize)]
pub struct Chain {
    /// Indices into the interior cube set, from `Q` to `S`.
    pub cubes: Vec<usize>,
    pub central: usize,
    pub epsilon: f64,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// `l([Q, S])`, the sum of side lengths.
    pub fn length(&self, set: &CubeSet) -> f64 {
        self.cubes.iter().map(|&i| set.cubes[i].side).sum()
    }

    pub fn central_cube<'a>(&self, set: &'a CubeSet) -> &'a DyadicCube {
        &set.cubes[self.cubes[self.central]]
    }
}

/// Largest `epsilon` for which the chain is admissible, and the central index
/// attaining it.
pub fn certify(set: &CubeSet, path: &[usize]) -> (f64, usize) {
    let m = path.len();
    let c = |j: usize| &set.cubes[path[j]];
    let first = c(0);
    let last = c(m - 1);
    let total: f64 = path.iter().map(|&i| set.cubes[i].side).sum();
    let eps_len = first.long_distance(last) / total;

    let mut prefix = vec![0.0; m];
    let mut run = f64::INFINITY;
    for j in 0..m {
        run = run.min(c(j).side / first.long_distance(c(j)));
        prefix[j] = run;
    }
    let mut suffix = vec![0.0; m];
    let mut run = f64::INFINITY;
    for j in (0..m).rev() {
        run = run.min(c(j).side / c(j).long_distance(last));
        suffix[j] = run;
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for j in 0..m {
        let v = prefix[j].min(suffix[j]);
        if v > best.0 {
            best = (v, j);
        }
    }
    (eps_len.min(best.0), best.1)
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths with entering weight `l^gamma`; returns the
/// predecessor array (`usize::MAX` for the source and unreachable nodes) and
/// reachability.
pub fn shortest_path_tree(set: &CubeSet, source: usize, gamma: f64) -> (Vec<usize>, Vec<bool>) {
    let n = set.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State {
        cost: 0.0,
        node: source,
    });
    while let Some(State { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        for &nb in set.neighbors(node) {
            let next = cost + set.cubes[nb].side.powf(gamma);
            if next < dist[nb] {
                dist[nb] = next;
                pred[nb] = node;
                heap.push(State {
                    cost: next,
                    node: nb,
                });
            }
        }
    }
    let reached = dist.iter().map(|d| d.is_finite()).collect();
    (pred, reached)
}

pub fn path_to(pred: &[usize], source: usize, target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut cur = target;
    while cur != source {
        cur = pred[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

/// Best certified chain between two interior cubes (by index).
pub fn find_chain_indices(cov: &WhitneyCovering, q: usize, s: usize) -> Result<Option<Chain>> {
    let set = &cov.interior;
    if q >= set.len() || s >= set.len() {
        return Err(Error::InvalidArgument(format!(
            "cube index out of range ({q}, {s}) for {} cubes",
            set.len()
        )));
    }
    let mut best: Option<Chain> = None;
    for gamma in WEIGHT_EXPONENTS {
        let (pred, reached) = shortest_path_tree(set, q, gamma);
        if !reached[s] {
            return Ok(None);
        }
        let path = path_to(&pred, q, s);
        let (epsilon, central) = certify(set, &path);
        if best.as_ref().map_or(true, |b| epsilon > b.epsilon) {
            best = Some(Chain {
                cubes: path,
                central,
                epsilon,
            });
        }
    }
    Ok(best)
}

/// Best certified chain between two interior cubes; both must belong to the
/// interior covering.
pub fn find_chain(cov: &WhitneyCovering, q: &DyadicCube, s: &DyadicCube) -> Result<Option<Chain>> {
    let find = |c: &DyadicCube| {
        cov.interior.lookup(c.generation, c.coords).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "cube generation {} coords {:?} is not in the interior covering",
                c.generation,
                c.coords_slice()
            ))
        })
    };
    find_chain_indices(cov, find(q)?, find(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::Domain;
    use crate::geometry::whitney::WhitneyOptions;

    fn square() -> WhitneyCovering {
        WhitneyCovering::build(
            &Domain::builtin("square").unwrap(),
            &WhitneyOptions {
                max_generation: 6,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn single_cube_chain() {
        let cov = square();
        let c = find_chain_indices(&cov, 0, 0).unwrap().unwrap();
        assert_eq!(c.cubes, vec![0]);
        // D(Q, Q) = 2 l(Q) caps the growth condition at 1/2
        assert!((c.epsilon - 0.5).abs() < 1e-15);
    }

    #[test]
    fn neighbor_chain() {
        let cov = square();
        let set = &cov.interior;
        let (i, j) = (0..set.len())
            .flat_map(|i| set.neighbors(i).iter().map(move |&j| (i, j)))
            .find(|&(i, j)| set.cubes[i].side == set.cubes[j].side)
            .unwrap();
        let c = find_chain_indices(&cov, i, j).unwrap().unwrap();
        assert_eq!(c.cubes, vec![i, j]);
        assert!((c.length(set) - set.cubes[i].long_distance(&set.cubes[j])).abs() < 1e-15);
    }

    #[test]
    fn chains_are_connected_and_bounded() {
        let cov = square();
        let set = &cov.interior;
        let n = set.len();
        for (a, b) in [(0, n - 1), (3, n / 2), (n / 3, 2 * n / 3)] {
            let c = find_chain_indices(&cov, a, b).unwrap().unwrap();
            for w in c.cubes.windows(2) {
                assert!(set.neighbors(w[0]).contains(&w[1]));
            }
            let d = set.cubes[a].long_distance(&set.cubes[b]);
            assert!(c.length(set) <= d / c.epsilon * (1.0 + 1e-12));
            assert!(c.central_cube(set).side >= c.epsilon * set.cubes[c.cubes[0]].long_distance(c.central_cube(set)) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn foreign_cube_is_rejected() {
        let cov = square();
        let bogus = cov.lattice.cube(30, [0, 0, 0]);
        assert!(find_chain(&cov, &bogus, &cov.interior.cubes[0]).is_err());
    }
}
