use crate::error::{Error, Result};
use crate::geometry::domain::{BBox, MAX_DIM};
use serde::{Deserialize, Serialize};

/// Cell-centred uniform grid: point `i` sits at `lo + (i + 1/2) h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub lo: Vec<f64>,
    pub h: f64,
    pub n: Vec<usize>,
}

impl Grid {
    pub fn new(lo: &[f64], h: f64, n: &[usize]) -> Result<Grid> {
        if lo.is_empty() || lo.len() > MAX_DIM || lo.len() != n.len() {
            return Err(Error::InvalidArgument(format!(
                "grid with {} origins and {} sizes",
                lo.len(),
                n.len()
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidArgument(format!("grid spacing {h}")));
        }
        Ok(Grid {
            dim: lo.len(),
            lo: lo.to_vec(),
            h,
            n: n.to_vec(),
        })
    }

    /// Cells of side `h` tiling the box (the last cell may overhang by less
    /// than `h`).
    pub fn over_bbox(bbox: &BBox, h: f64) -> Result<Grid> {
        let n: Vec<usize> = (0..bbox.dim())
            .map(|a| {
                let cells = (bbox.hi[a] - bbox.lo[a]) / h;
                let r = cells.round();
                (if (cells - r).abs() < 1e-9 { r } else { cells.ceil() }).max(1.0) as usize
            })
            .collect();
        Grid::new(&bbox.lo, h, &n)
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bbox(&self) -> BBox {
        BBox {
            lo: self.lo.clone(),
            hi: (0..self.dim)
                .map(|a| self.lo[a] + self.n[a] as f64 * self.h)
                .collect(),
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn index_of(&self, multi: &[usize]) -> usize {
        let mut flat = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            flat += multi[a] * stride;
            stride *= self.n[a];
        }
        flat
    }

    pub fn multi_index(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut m = [0usize; MAX_DIM];
        for a in 0..self.dim {
            m[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        m
    }

    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let m = self.multi_index(flat);
        let mut p = [0.0; MAX_DIM];
        for a in 0..self.dim {
            p[a] = self.lo[a] + (m[a] as f64 + 0.5) * self.h;
        }
        p
    }

    /// Flat index of `flat + offset` (in cells), if it stays on the grid.
    pub fn shifted(&self, flat: usize, offset: &[i64]) -> Option<usize> {
        let m = self.multi_index(flat);
        let mut out = 0;
        let mut stride = 1;
        for a in 0..self.dim {
            let v = m[a] as i64 + offset[a];
            if v < 0 || v >= self.n[a] as i64 {
                return None;
            }
            out += v as usize * stride;
            stride *= self.n[a];
        }
        Some(out)
    }

    /// Fractional cell coordinate of `x` along `axis` (cell centres are integers).
    pub fn coordinate(&self, axis: usize, x: f64) -> f64 {
        (x - self.lo[axis]) / self.h - 0.5
    }

    /// Converts a physical offset to whole cells; it must be a multiple of `h`.
    pub fn offset_cells(&self, offset: &[f64]) -> Result<Vec<i64>> {
        if offset.len() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "offset of length {} on a {}-dimensional grid",
                offset.len(),
                self.dim
            )));
        }
        offset
            .iter()
            .map(|&o| {
                let c = o / self.h;
                let r = c.round();
                if (c - r).abs() > 1e-9 * r.abs().max(1.0) {
                    Err(Error::InvalidArgument(format!(
                        "offset {o} is not a multiple of the grid spacing {}",
                        self.h
                    )))
                } else {
                    Ok(r as i64)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_round_trip() {
        let g = Grid::new(&[0.0, -1.0], 0.25, &[4, 8]).unwrap();
        assert_eq!(g.len(), 32);
        for i in 0..g.len() {
            assert_eq!(g.index_of(&g.multi_index(i)), i);
        }
        let p = g.point(g.index_of(&[1, 2]));
        assert_eq!(&p[..2], &[0.375, -0.375]);
        assert_eq!(g.shifted(0, &[-1, 0]), None);
        assert_eq!(g.shifted(0, &[1, 1]), Some(5));
        assert_eq!(g.offset_cells(&[0.5, -0.25]).unwrap(), vec![2, -1]);
        assert!(g.offset_cells(&[0.1, 0.0]).is_err());
    }

    #[test]
    fn unit_square_grid() {
        let b = BBox {
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        };
        let g = Grid::over_bbox(&b, 1.0 / 64.0).unwrap();
        assert_eq!(g.n, vec![64, 64]);
        assert_eq!(g.bbox(), b);
    }
}
