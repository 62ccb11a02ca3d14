use super::domain::MAX_DIM;

/// Dyadic lattice anchored at `origin` whose generation-0 cell has side
/// `root_side`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    pub dim: usize,
    pub origin: [f64; MAX_DIM],
    pub root_side: f64,
}

impl Lattice {
    pub fn new(origin: &[f64], root_side: f64) -> Lattice {
        let mut o = [0.0; MAX_DIM];
        o[..origin.len()].copy_from_slice(origin);
        Lattice {
            dim: origin.len(),
            origin: o,
            root_side,
        }
    }

    pub fn side(&self, generation: u32) -> f64 {
        self.root_side * 0.5f64.powi(generation as i32)
    }

    pub fn cube(&self, generation: u32, coords: [i64; MAX_DIM]) -> DyadicCube {
        let side = self.side(generation);
        let mut lo = [0.0; MAX_DIM];
        for a in 0..self.dim {
            lo[a] = self.origin[a] + coords[a] as f64 * side;
        }
        DyadicCube {
            dim: self.dim,
            generation,
            coords,
            lo,
            side,
        }
    }

    /// Coordinates of the generation-`g` cell containing `p` (half-open).
    pub fn locate(&self, generation: u32, p: &[f64]) -> [i64; MAX_DIM] {
        let side = self.side(generation);
        let mut c = [0i64; MAX_DIM];
        for a in 0..self.dim {
            c[a] = ((p[a] - self.origin[a]) / side).floor() as i64;
        }
        c
    }
}

/// Closed cube `lo + [0, side]^d` of the lattice.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicCube {
    pub dim: usize,
    pub generation: u32,
    pub coords: [i64; MAX_DIM],
    pub lo: [f64; MAX_DIM],
    pub side: f64,
}

impl DyadicCube {
    pub fn center(&self) -> [f64; MAX_DIM] {
        let mut c = [0.0; MAX_DIM];
        for a in 0..self.dim {
            c[a] = self.lo[a] + 0.5 * self.side;
        }
        c
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.lo[axis] + self.side
    }

    pub fn diam(&self) -> f64 {
        self.side * (self.dim as f64).sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn children(&self, lattice: &Lattice) -> Vec<DyadicCube> {
        let g = self.generation + 1;
        (0..(1usize << self.dim))
            .map(|bits| {
                let mut c = [0i64; MAX_DIM];
                for a in 0..self.dim {
                    c[a] = 2 * self.coords[a] + ((bits >> a) & 1) as i64;
                }
                lattice.cube(g, c)
            })
            .collect()
    }

    /// Euclidean distance between the closed cubes.
    pub fn dist(&self, other: &DyadicCube) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let gap = (other.lo[a] - self.hi(a))
                .max(self.lo[a] - other.hi(a))
                .max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }

    /// `D(Q, S) = l(Q) + l(S) + dist(Q, S)`.
    pub fn long_distance(&self, other: &DyadicCube) -> f64 {
        self.side + other.side + self.dist(other)
    }

    pub fn dist_to_point(&self, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let gap = (self.lo[a] - p[a]).max(p[a] - self.hi(a)).max(0.0);
            s += gap * gap;
        }
        s.sqrt()
    }

    /// Largest distance from `p` to a point of the cube.
    pub fn far_dist_to_point(&self, p: &[f64]) -> f64 {
        let mut s = 0.0;
        for a in 0..self.dim {
            let g = (p[a] - self.lo[a]).abs().max((self.hi(a) - p[a]).abs());
            s += g * g;
        }
        s.sqrt()
    }

    /// Closed cubes share at least a point.
    pub fn touches(&self, other: &DyadicCube) -> bool {
        let tol = 1e-12 * self.side.min(other.side);
        (0..self.dim).all(|a| self.lo[a] <= other.hi(a) + tol && other.lo[a] <= self.hi(a) + tol)
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        (0..self.dim).all(|a| self.lo[a] <= p[a] && p[a] <= self.hi(a))
    }

    pub fn coords_slice(&self) -> &[i64] {
        &self.coords[..self.dim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_distance_examples() {
        let lat = Lattice::new(&[0.0, 0.0], 1.0);
        let q = lat.cube(0, [0, 0, 0]);
        assert_eq!(q.long_distance(&q), 2.0);
        let s = lat.cube(0, [1, 0, 0]);
        assert_eq!(q.long_distance(&s), 2.0);
        assert!(q.touches(&s));
        // unit cubes centred at 0 and (10, 0): gap 9
        let a = DyadicCube {
            lo: [-0.5, -0.5, 0.0],
            ..q
        };
        let b = DyadicCube {
            lo: [9.5, -0.5, 0.0],
            ..q
        };
        assert!((a.long_distance(&b) - 11.0).abs() < 1e-14);
    }

    #[test]
    fn children_tile_parent() {
        let lat = Lattice::new(&[0.0, 0.0], 1.0);
        let q = lat.cube(2, [1, 3, 0]);
        let kids = q.children(&lat);
        assert_eq!(kids.len(), 4);
        let vol: f64 = kids.iter().map(|c| c.volume()).sum();
        assert!((vol - q.volume()).abs() < 1e-15);
        for k in &kids {
            assert_eq!(lat.locate(2, &k.center()[..2]), q.coords);
        }
    }
}
