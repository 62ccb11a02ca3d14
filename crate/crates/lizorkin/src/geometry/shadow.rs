//! Shadows `SH_rho(P)` and the summation constants attached to them.

use super::chain::Chain;
use super::cube::DyadicCube;
use super::whitney::{CubeIndex, CubeSet, WhitneyCovering};
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct Shadow {
    pub anchor: usize,
    pub rho: f64,
    /// Interior cubes contained in `B(x_P, rho l(P))`, ascending.
    pub cubes: Vec<usize>,
}

impl Shadow {
    pub fn contains(&self, i: usize) -> bool {
        self.cubes.binary_search(&i).is_ok()
    }

    /// Measure of `sh_rho(P)`.
    pub fn volume(&self, set: &CubeSet) -> f64 {
        self.cubes.iter().map(|&i| set.cubes[i].volume()).sum()
    }
}

pub fn in_shadow(q: &DyadicCube, p: &DyadicCube, rho: f64) -> bool {
    q.far_dist_to_point(&p.center()) < rho * p.side
}

pub fn shadow_of(cov: &WhitneyCovering, index: &CubeIndex, anchor: usize, rho: f64) -> Shadow {
    let set = &cov.interior;
    let p = &set.cubes[anchor];
    let mut cubes = index.in_ball(&set.cubes, &p.center(), rho * p.side);
    cubes.sort_unstable();
    Shadow { anchor, rho, cubes }
}

/// Worst ratios of the shadow sums over the interior covering:
/// `sum_{L : Q in SH(L)} l(L)^-s` against `l(Q)^-s`, the truncated companion
/// `sum_{L : Q in SH(L), l(L) <= r} l(L)^s` against `r^s`, and
/// `sum_{S in SH(Q)} l(S)^d` against `l(Q)^d`.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ShadowSums {
    pub rho: f64,
    pub s: f64,
    pub inverse_sum: f64,
    pub truncated_sum: f64,
    pub volume_sum: f64,
}

pub fn shadow_sums(cov: &WhitneyCovering, rho: f64, s: f64) -> ShadowSums {
    let set = &cov.interior;
    let n = set.len();
    let d = cov.dim() as i32;
    let index = CubeIndex::new(&set.cubes);
    // owners[q] lists the sides of every L whose shadow holds q
    let mut owners: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut volume_sum: f64 = 0.0;
    for l in 0..n {
        let sh = shadow_of(cov, &index, l, rho);
        let side = set.cubes[l].side;
        let mut vol = 0.0;
        for &q in &sh.cubes {
            owners[q].push(side);
            vol += set.cubes[q].volume();
        }
        volume_sum = volume_sum.max(vol / side.powi(d));
    }
    let mut inverse_sum: f64 = 0.0;
    let mut truncated_sum: f64 = 0.0;
    for q in 0..n {
        let lq = set.cubes[q].side;
        let sides = &mut owners[q];
        let inv: f64 = sides.iter().map(|l| l.powf(-s)).sum();
        inverse_sum = inverse_sum.max(inv * lq.powf(s));
        // the worst truncation radius is one of the owner sides
        sides.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        for &l in sides.iter() {
            acc += l.powf(s);
            truncated_sum = truncated_sum.max(acc / l.powf(s));
        }
    }
    ShadowSums {
        rho,
        s,
        inverse_sum,
        truncated_sum,
        volume_sum,
    }
}

/// Smallest `rho` for which both shadow properties hold on the given chains:
/// the endpoints lie in the shadow of every chain cube, and every chain cube
/// lies in the shadow of the central cube.
pub fn rho_epsilon(set: &CubeSet, chains: &[Chain]) -> f64 {
    let mut rho: f64 = 1.0;
    for ch in chains {
        let first = &set.cubes[ch.cubes[0]];
        let last = &set.cubes[*ch.cubes.last().unwrap()];
        let central = ch.central_cube(set);
        let xc = central.center();
        for &i in &ch.cubes {
            let p = &set.cubes[i];
            let xp = p.center();
            rho = rho.max(first.far_dist_to_point(&xp) / p.side);
            rho = rho.max(last.far_dist_to_point(&xp) / p.side);
            rho = rho.max(p.far_dist_to_point(&xc) / central.side);
        }
    }
    // containment is strict
    rho * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::domain::Domain;
    use crate::geometry::whitney::WhitneyOptions;

    #[test]
    fn anchor_is_in_its_own_shadow() {
        let cov = WhitneyCovering::build(
            &Domain::builtin("square").unwrap(),
            &WhitneyOptions {
                max_generation: 6,
                ..Default::default()
            },
        )
        .unwrap();
        let idx = CubeIndex::new(&cov.interior.cubes);
        for p in 0..cov.interior.len() {
            let sh = shadow_of(&cov, &idx, p, 2f64.sqrt() * 1.0001);
            assert!(sh.contains(p));
            for &q in &sh.cubes {
                assert!(in_shadow(&cov.interior.cubes[q], &cov.interior.cubes[p], sh.rho));
            }
        }
        let far = &cov.interior.cubes[0];
        let p = &cov.interior.cubes[cov.interior.len() - 1];
        if far.dist_to_point(&p.center()) > 3.0 * p.side + p.diam() {
            assert!(!in_shadow(far, p, 3.0));
        }
    }
}
