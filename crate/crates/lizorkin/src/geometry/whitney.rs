//! Whitney coverings of a domain (`W0`) and of the complement of its closure
//! (`W2`), the subfamilies `W1`, `W3`, `W4`, and the symmetrization map
//! `W3 -> W1`.

use super::cube::{DyadicCube, Lattice};
use super::domain::{BBox, BoxClass, Domain, Side, MAX_DIM};
use crate::error::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Family {
    W0,
    W1,
    W2,
    W3,
    W4,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::W0 => "W0",
            Family::W1 => "W1",
            Family::W2 => "W2",
            Family::W3 => "W3",
            Family::W4 => "W4",
        }
    }
}

#[derive(Clone, Debug)]
pub struct WhitneyOptions {
    pub cw: f64,
    pub max_generation: u32,
    /// Defaults to `delta / 100`.
    pub l0: Option<f64>,
    /// `W1` keeps interior cubes with `l <= c0 * l0`.
    pub c0: f64,
    /// Partners satisfy `D(Q, Q*) <= symmetrization_c * l(Q)`.
    pub symmetrization_c: f64,
    /// Width of the exterior region around the bounding box; defaults to
    /// `5 * l0`.
    pub exterior_margin: Option<f64>,
}

impl Default for WhitneyOptions {
    fn default() -> Self {
        WhitneyOptions {
            cw: DEFAULT_CW,
            max_generation: 7,
            l0: None,
            c0: 10.0,
            symmetrization_c: 50.0,
            exterior_margin: None,
        }
    }
}

pub const DEFAULT_CW: f64 = 3.0;

/// Cubes of one covering with lookup and adjacency.
#[derive(Clone, Debug, Default)]
pub struct CubeSet {
    pub cubes: Vec<DyadicCube>,
    /// Distance of each cube to the boundary used by its sweep.
    pub boundary_dist: Vec<f64>,
    index: HashMap<(u32, [i64; MAX_DIM]), usize>,
    adjacency: Vec<Vec<usize>>,
}

impl CubeSet {
    fn new(mut entries: Vec<(DyadicCube, f64)>) -> CubeSet {
        entries.sort_by(|a, b| {
            (a.0.generation, a.0.coords)
                .cmp(&(b.0.generation, b.0.coords))
        });
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, (c, _))| ((c.generation, c.coords), i))
            .collect();
        let (cubes, boundary_dist) = entries.into_iter().unzip();
        let mut set = CubeSet {
            cubes,
            boundary_dist,
            index,
            adjacency: Vec::new(),
        };
        set.adjacency = (0..set.cubes.len()).map(|i| set.find_neighbors(i)).collect();
        set
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn lookup(&self, generation: u32, coords: [i64; MAX_DIM]) -> Option<usize> {
        self.index.get(&(generation, coords)).copied()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    fn generation_range(&self) -> (u32, u32) {
        let lo = self.cubes.iter().map(|c| c.generation).min().unwrap_or(0);
        let hi = self.cubes.iter().map(|c| c.generation).max().unwrap_or(0);
        (lo, hi)
    }

    fn find_neighbors(&self, i: usize) -> Vec<usize> {
        let q = &self.cubes[i];
        let d = q.dim;
        let (gmin, gmax) = self.generation_range();
        let lo_g = q.generation.saturating_sub(3).max(gmin);
        let hi_g = (q.generation + 3).min(gmax);
        let mut out = Vec::new();
        for g in lo_g..=hi_g {
            let side = q.side * 2f64.powi(q.generation as i32 - g as i32);
            let mut lo = [0i64; MAX_DIM];
            let mut hi = [0i64; MAX_DIM];
            // cells of generation g meeting the closed cube
            let scale = 2f64.powi(g as i32 - q.generation as i32);
            for a in 0..d {
                let l = q.coords[a] as f64 * scale;
                let h = (q.coords[a] + 1) as f64 * scale;
                lo[a] = (l - 1.0).floor() as i64;
                hi[a] = h.ceil() as i64;
                if side > q.side {
                    lo[a] = (l.floor() as i64) - 1;
                    hi[a] = (h.ceil() as i64) + 1;
                }
            }
            let mut c = lo;
            loop {
                if let Some(j) = self.lookup(g, c) {
                    if j != i && q.touches(&self.cubes[j]) && !out.contains(&j) {
                        out.push(j);
                    }
                }
                let mut a = 0;
                loop {
                    if a == d {
                        out.sort_unstable();
                        break;
                    }
                    c[a] += 1;
                    if c[a] <= hi[a] {
                        break;
                    }
                    c[a] = lo[a];
                    a += 1;
                }
                if a == d {
                    break;
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Uncovered {
    pub interior_cubes: usize,
    pub interior_volume: f64,
    pub exterior_cubes: usize,
    pub exterior_volume: f64,
}

#[derive(Clone, Debug)]
pub struct WhitneyCovering {
    pub domain: Domain,
    pub lattice: Lattice,
    pub cw: f64,
    pub max_generation: u32,
    pub l0: f64,
    pub c0: f64,
    pub symmetrization_c: f64,
    pub exterior_region: BBox,
    pub interior: CubeSet,
    pub exterior: CubeSet,
    pub interior_family: Vec<Family>,
    pub exterior_family: Vec<Family>,
    /// Symmetrized partner (index into `interior`) of each exterior cube in `W3`.
    pub partner: Vec<Option<usize>>,
    /// `W3` cubes for which no partner was found.
    pub dropped: usize,
    pub uncovered: Uncovered,
}

struct Sweep {
    accepted: Vec<(DyadicCube, f64)>,
    uncovered_cubes: usize,
    uncovered_volume: f64,
    first_rejected: Option<DyadicCube>,
}

fn overlaps(c: &DyadicCube, region: &BBox) -> bool {
    (0..c.dim).all(|a| c.lo[a] < region.hi[a] && c.hi(a) > region.lo[a])
}

fn sweep(
    domain: &Domain,
    lattice: &Lattice,
    side: Side,
    region: &BBox,
    a_const: f64,
    max_generation: u32,
) -> Sweep {
    let d = lattice.dim;
    let want = match side {
        Side::Interior => BoxClass::Inside,
        Side::Exterior => BoxClass::Outside,
    };
    let lo = lattice.locate(0, &region.lo);
    let mut hi = [0i64; MAX_DIM];
    for a in 0..d {
        hi[a] = ((region.hi[a] - lattice.origin[a]) / lattice.root_side).ceil() as i64 - 1;
    }
    let mut level = Vec::new();
    let mut c = lo;
    'outer: loop {
        level.push(lattice.cube(0, c));
        let mut a = 0;
        loop {
            if a == d {
                break 'outer;
            }
            c[a] += 1;
            if c[a] <= hi[a] {
                break;
            }
            c[a] = lo[a];
            a += 1;
        }
    }
    let mut out = Sweep {
        accepted: Vec::new(),
        uncovered_cubes: 0,
        uncovered_volume: 0.0,
        first_rejected: None,
    };
    let mut generation = 0;
    while !level.is_empty() {
        let mut next = Vec::new();
        for q in level {
            if !overlaps(&q, region) {
                continue;
            }
            let (class, dist) = domain.classify_box(&q.lo[..d], q.side, side);
            if class == want && dist >= a_const * q.side {
                out.accepted.push((q, dist));
                continue;
            }
            if class != want && class != BoxClass::Straddle {
                continue;
            }
            if generation < max_generation {
                next.extend(q.children(lattice));
            } else {
                out.uncovered_cubes += 1;
                out.uncovered_volume += q.volume();
                if class == want && out.first_rejected.is_none() {
                    out.first_rejected = Some(q);
                }
            }
        }
        level = next;
        generation += 1;
    }
    out
}

fn describe(c: &DyadicCube) -> String {
    format!(
        "generation {} coords {:?} side {}",
        c.generation,
        c.coords_slice(),
        c.side
    )
}

impl WhitneyCovering {
    pub fn build(domain: &Domain, opts: &WhitneyOptions) -> Result<WhitneyCovering> {
        if !(opts.cw > 0.0) || !opts.cw.is_finite() {
            return Err(Error::InvalidArgument(format!("C_W = {}", opts.cw)));
        }
        if domain.measure() <= 0.0 {
            return Err(Error::InvalidDomain(format!("{} has empty interior", domain.name)));
        }
        let d = domain.dim();
        let lattice = Lattice::new(&domain.bbox.lo, domain.bbox.max_extent());
        let l0 = opts.l0.unwrap_or(domain.delta / 100.0);
        let margin = opts.exterior_margin.unwrap_or(5.0 * l0);
        let region = domain.bbox.expanded(margin);
        let a_const = (opts.cw - 1.0).max(0.0);

        let inner = sweep(
            domain,
            &lattice,
            Side::Interior,
            &domain.bbox,
            a_const,
            opts.max_generation,
        );
        if inner.accepted.is_empty() {
            let witness = inner
                .first_rejected
                .map(|c| describe(&c))
                .unwrap_or_else(|| "none".into());
            return Err(Error::InfeasibleConstant(format!(
                "C_W = {} admits no interior cube up to generation {}; first rejected cube: {}",
                opts.cw, opts.max_generation, witness
            )));
        }
        let outer = sweep(
            domain,
            &lattice,
            Side::Exterior,
            &region,
            a_const,
            opts.max_generation,
        );
        for (c, dist) in inner.accepted.iter().chain(&outer.accepted) {
            let big_d = c.side + dist;
            let tol = 1e-12 * c.side;
            if big_d < opts.cw * c.side - tol || big_d > 4.0 * opts.cw * c.side + tol {
                return Err(Error::InfeasibleConstant(format!(
                    "cube {} has D(Q, boundary) = {big_d}, outside [{}, {}]",
                    describe(c),
                    opts.cw * c.side,
                    4.0 * opts.cw * c.side
                )));
            }
        }
        let uncovered = Uncovered {
            interior_cubes: inner.uncovered_cubes,
            interior_volume: inner.uncovered_volume,
            exterior_cubes: outer.uncovered_cubes,
            exterior_volume: outer.uncovered_volume,
        };
        let interior = CubeSet::new(inner.accepted);
        let exterior = CubeSet::new(outer.accepted);

        let interior_family = interior
            .cubes
            .iter()
            .map(|c| {
                if c.side <= opts.c0 * l0 * (1.0 + 1e-12) {
                    Family::W1
                } else {
                    Family::W0
                }
            })
            .collect::<Vec<_>>();
        let in_w3: Vec<bool> = exterior.cubes.iter().map(|c| c.side < 10.0 * l0).collect();
        let exterior_family = (0..exterior.len())
            .map(|i| {
                if !in_w3[i] {
                    Family::W2
                } else if exterior.neighbors(i).iter().all(|&j| in_w3[j]) {
                    Family::W4
                } else {
                    Family::W3
                }
            })
            .collect::<Vec<_>>();

        let mut cov = WhitneyCovering {
            domain: domain.clone(),
            lattice,
            cw: opts.cw,
            max_generation: opts.max_generation,
            l0,
            c0: opts.c0,
            symmetrization_c: opts.symmetrization_c,
            exterior_region: region,
            interior,
            exterior,
            interior_family,
            exterior_family,
            partner: Vec::new(),
            dropped: 0,
            uncovered,
        };
        let _ = d;
        cov.partner = (0..cov.exterior.len())
            .map(|i| if in_w3[i] { cov.find_partner(i) } else { None })
            .collect();
        cov.dropped = (0..cov.exterior.len())
            .filter(|&i| in_w3[i] && cov.partner[i].is_none())
            .count();
        Ok(cov)
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn in_w1(&self, i: usize) -> bool {
        self.interior_family[i] == Family::W1
    }

    pub fn in_w3(&self, i: usize) -> bool {
        matches!(self.exterior_family[i], Family::W3 | Family::W4)
    }

    /// Nearest `W1` cube of equal side within `D <= C l(Q)`; ties go to the
    /// smallest lattice coordinates.
    fn find_partner(&self, i: usize) -> Option<usize> {
        let q = self.exterior.cubes[i];
        let d = q.dim;
        let limit = self.symmetrization_c * q.side;
        let max_ring = self.symmetrization_c.ceil() as i64;
        let mut best: Option<(f64, [i64; MAX_DIM], usize)> = None;
        for r in 0..=max_ring {
            // every cell on ring r is at distance >= (r - 1) l
            let ring_min = 2.0 * q.side + ((r - 1).max(0) as f64) * q.side;
            if ring_min > limit {
                break;
            }
            if let Some((bd, _, _)) = best {
                if ring_min > bd {
                    break;
                }
            }
            for_each_ring_cell(d, q.coords, r, |c| {
                if let Some(j) = self.interior.lookup(q.generation, c) {
                    if !self.in_w1(j) {
                        return;
                    }
                    let s = &self.interior.cubes[j];
                    let dd = q.long_distance(s);
                    if dd > limit {
                        return;
                    }
                    let better = match best {
                        None => true,
                        Some((bd, bc, _)) => dd < bd || (dd == bd && c < bc),
                    };
                    if better {
                        best = Some((dd, c, j));
                    }
                }
            });
        }
        best.map(|b| b.2)
    }

    /// Number of `W3` cubes sharing each partner; its maximum bounds the
    /// overlap of the symmetrization map.
    pub fn partner_overlap(&self) -> usize {
        let mut count: HashMap<usize, usize> = HashMap::new();
        for p in self.partner.iter().flatten() {
            *count.entry(*p).or_insert(0) += 1;
        }
        count.values().copied().max().unwrap_or(0)
    }

    /// Hash of the emitted cube list, used for run provenance.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.domain.name.as_bytes());
        h.update(self.cw.to_le_bytes());
        h.update(self.max_generation.to_le_bytes());
        for (tag, set) in [(b'i', &self.interior), (b'e', &self.exterior)] {
            for c in &set.cubes {
                h.update([tag]);
                h.update(c.generation.to_le_bytes());
                for v in c.coords_slice() {
                    h.update(v.to_le_bytes());
                }
            }
        }
        h.finalize()
            .iter()
            .take(16)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Largest side ratio between neighboring cubes in either covering.
    pub fn max_neighbor_ratio(&self) -> f64 {
        let mut worst: f64 = 1.0;
        for set in [&self.interior, &self.exterior] {
            for i in 0..set.len() {
                for &j in set.neighbors(i) {
                    worst = worst.max(set.cubes[i].side / set.cubes[j].side);
                }
            }
        }
        worst
    }

    /// Line-delimited JSON, interior cubes first.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Partner<'a> {
            generation: u32,
            coords: &'a [i64],
        }
        #[derive(Serialize)]
        struct Record<'a> {
            generation: u32,
            coords: &'a [i64],
            side: f64,
            center: Vec<f64>,
            family: &'static str,
            partner: Option<Partner<'a>>,
        }
        let d = self.dim();
        for (i, c) in self.interior.cubes.iter().enumerate() {
            let r = Record {
                generation: c.generation,
                coords: c.coords_slice(),
                side: c.side,
                center: c.center()[..d].to_vec(),
                family: self.interior_family[i].tag(),
                partner: None,
            };
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n")?;
        }
        for (i, c) in self.exterior.cubes.iter().enumerate() {
            let partner = self.partner[i].map(|j| {
                let p = &self.interior.cubes[j];
                Partner {
                    generation: p.generation,
                    coords: p.coords_slice(),
                }
            });
            let r = Record {
                generation: c.generation,
                coords: c.coords_slice(),
                side: c.side,
                center: c.center()[..d].to_vec(),
                family: self.exterior_family[i].tag(),
                partner,
            };
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Calls `f` on every lattice cell at Chebyshev distance exactly `r`.
pub(crate) fn for_each_ring_cell<F: FnMut([i64; MAX_DIM])>(
    d: usize,
    center: [i64; MAX_DIM],
    r: i64,
    mut f: F,
) {
    if r == 0 {
        f(center);
        return;
    }
    let mut off = [-r; MAX_DIM];
    for a in d..MAX_DIM {
        off[a] = 0;
    }
    loop {
        if (0..d).any(|a| off[a].abs() == r) {
            let mut c = center;
            for a in 0..d {
                c[a] += off[a];
            }
            f(c);
        }
        let mut a = 0;
        loop {
            if a == d {
                return;
            }
            off[a] += 1;
            if off[a] <= r {
                break;
            }
            off[a] = -r;
            a += 1;
        }
    }
}

/// Bucket grid over cube centers for ball queries.
#[derive(Clone, Debug)]
pub struct CubeIndex {
    dim: usize,
    lo: [f64; MAX_DIM],
    bucket: f64,
    n: [usize; MAX_DIM],
    buckets: Vec<Vec<usize>>,
}

impl CubeIndex {
    pub fn new(cubes: &[DyadicCube]) -> CubeIndex {
        let dim = cubes.first().map_or(1, |c| c.dim);
        let mut lo = [f64::INFINITY; MAX_DIM];
        let mut hi = [f64::NEG_INFINITY; MAX_DIM];
        for c in cubes {
            let m = c.center();
            for a in 0..dim {
                lo[a] = lo[a].min(m[a]);
                hi[a] = hi[a].max(m[a]);
            }
        }
        let extent = (0..dim).map(|a| hi[a] - lo[a]).fold(0.0, f64::max).max(1e-12);
        let per_axis = ((cubes.len() as f64).powf(1.0 / dim as f64)).clamp(1.0, 256.0);
        let bucket = extent / per_axis;
        let mut n = [1usize; MAX_DIM];
        for a in 0..dim {
            n[a] = ((hi[a] - lo[a]) / bucket).floor() as usize + 1;
        }
        let total: usize = n[..dim].iter().product();
        let mut buckets = vec![Vec::new(); total];
        let mut idx = CubeIndex {
            dim,
            lo,
            bucket,
            n,
            buckets: Vec::new(),
        };
        for (i, c) in cubes.iter().enumerate() {
            let b = idx.bucket_of(&c.center());
            buckets[b].push(i);
        }
        idx.buckets = buckets;
        idx
    }

    fn axis_bucket(&self, a: usize, v: f64) -> usize {
        (((v - self.lo[a]) / self.bucket).floor().max(0.0) as usize).min(self.n[a] - 1)
    }

    fn bucket_of(&self, p: &[f64]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            flat += self.axis_bucket(a, p[a]) * stride;
            stride *= self.n[a];
        }
        flat
    }

    /// Indices of cubes whose center lies within `radius` of `p` (a superset
    /// filter; callers refine).
    pub fn candidates(&self, p: &[f64], radius: f64) -> Vec<usize> {
        let d = self.dim;
        let mut lo = [0usize; MAX_DIM];
        let mut hi = [0usize; MAX_DIM];
        for a in 0..d {
            lo[a] = self.axis_bucket(a, p[a] - radius);
            hi[a] = self.axis_bucket(a, p[a] + radius);
        }
        let mut out = Vec::new();
        let mut c = lo;
        loop {
            let mut flat = 0;
            let mut stride = 1;
            for a in 0..d {
                flat += c[a] * stride;
                stride *= self.n[a];
            }
            out.extend_from_slice(&self.buckets[flat]);
            let mut a = 0;
            loop {
                if a == d {
                    return out;
                }
                c[a] += 1;
                if c[a] <= hi[a] {
                    break;
                }
                c[a] = lo[a];
                a += 1;
            }
        }
    }

    /// Cubes contained in the open ball `B(p, radius)`.
    pub fn in_ball(&self, cubes: &[DyadicCube], p: &[f64], radius: f64) -> Vec<usize> {
        self.candidates(p, radius)
            .into_iter()
            .filter(|&i| cubes[i].far_dist_to_point(p) < radius)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(name: &str, cw: f64, max_gen: u32) -> WhitneyCovering {
        let d = Domain::builtin(name).unwrap();
        WhitneyCovering::build(
            &d,
            &WhitneyOptions {
                cw,
                max_generation: max_gen,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn interval_with_unit_constant() {
        let cov = cover("interval", 1.0, 12);
        // geometric accumulation: two cubes per generation from 2 on
        let mut per_gen = HashMap::new();
        for c in &cov.interior.cubes {
            *per_gen.entry(c.generation).or_insert(0) += 1;
        }
        for g in 2..=12 {
            assert_eq!(per_gen.get(&g), Some(&2), "generation {g}");
        }
        let total: f64 = cov.interior.cubes.iter().map(|c| c.side).sum();
        assert!((total + cov.uncovered.interior_volume - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ring_cells() {
        let mut n = 0;
        for_each_ring_cell(2, [0, 0, 0], 2, |_| n += 1);
        assert_eq!(n, 16);
        let mut n = 0;
        for_each_ring_cell(1, [5, 0, 0], 3, |_| n += 1);
        assert_eq!(n, 2);
    }

    #[test]
    fn square_neighbors_and_partners() {
        let cov = cover("square", DEFAULT_CW, 8);
        assert!(cov.max_neighbor_ratio() <= 2.0);
        assert_eq!(cov.dropped, 0);
        for (i, p) in cov.partner.iter().enumerate() {
            if cov.in_w3(i) {
                let j = p.unwrap();
                let q = &cov.exterior.cubes[i];
                let s = &cov.interior.cubes[j];
                assert_eq!(q.side, s.side);
                assert!(q.long_distance(s) <= cov.symmetrization_c * q.side);
            }
        }
    }

    #[test]
    fn infeasible_constant_is_reported() {
        let d = Domain::builtin("square").unwrap();
        let err = WhitneyCovering::build(
            &d,
            &WhitneyOptions {
                cw: 200.0,
                max_generation: 5,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InfeasibleConstant(_)));
    }

    #[test]
    fn ball_index_matches_scan() {
        let cov = cover("lshape", DEFAULT_CW, 7);
        let cubes = &cov.interior.cubes;
        let idx = CubeIndex::new(cubes);
        for (p, r) in [([0.3, 0.2], 0.1), ([0.5, 0.5], 0.3), ([0.05, 0.9], 0.02)] {
            let mut a = idx.in_ball(cubes, &p, r);
            a.sort();
            let b: Vec<usize> = (0..cubes.len())
                .filter(|&i| cubes[i].far_dist_to_point(&p) < r)
                .collect();
            assert_eq!(a, b);
        }
    }
}
