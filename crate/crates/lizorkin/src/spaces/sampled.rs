use super::grid::Grid;
use crate::error::{Error, Result};
use crate::geometry::domain::{BBox, Domain, MAX_DIM};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Scalar or fixed-arity vector samples on a grid; absent points carry no
/// value (stored as 0).
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    pub grid: Grid,
    pub arity: usize,
    pub domain: String,
    values: Vec<f64>,
    present: Vec<bool>,
    pub provenance: Option<serde_json::Value>,
}

impl SampledFunction {
    pub fn new(
        grid: Grid,
        domain: &str,
        arity: usize,
        values: Vec<f64>,
        present: Vec<bool>,
    ) -> Result<SampledFunction> {
        if arity == 0 {
            return Err(Error::InvalidArgument("arity 0".into()));
        }
        if present.len() != grid.len() || values.len() != grid.len() * arity {
            return Err(Error::InvalidArgument(format!(
                "{} values and {} mask entries for {} points of arity {arity}",
                values.len(),
                present.len(),
                grid.len()
            )));
        }
        let mut values = values;
        for (i, &p) in present.iter().enumerate() {
            if !p {
                values[i * arity..(i + 1) * arity].fill(0.0);
            }
        }
        Ok(SampledFunction {
            grid,
            arity,
            domain: domain.to_string(),
            values,
            present,
            provenance: None,
        })
    }

    /// Samples `f` at the grid points of the bounding box that lie in the
    /// domain.
    pub fn from_fn<F>(domain: &Domain, h: f64, arity: usize, f: F) -> Result<SampledFunction>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let grid = Grid::over_bbox(&domain.bbox, h)?;
        Self::on_grid(grid, domain, arity, f)
    }

    pub fn on_grid<F>(grid: Grid, domain: &Domain, arity: usize, f: F) -> Result<SampledFunction>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let d = grid.dim;
        let mut values = vec![0.0; grid.len() * arity];
        let mut present = vec![false; grid.len()];
        for i in 0..grid.len() {
            let p = grid.point(i);
            if domain.contains(&p[..d]) {
                present[i] = true;
                let v = f(&p[..d]);
                values[i * arity..(i + 1) * arity].copy_from_slice(&v[..arity]);
            }
        }
        Self::new(grid, &domain.name, arity, values, present)
    }

    pub fn from_scalar<F>(domain: &Domain, h: f64, f: F) -> Result<SampledFunction>
    where
        F: Fn(&[f64]) -> f64,
    {
        Self::from_fn(domain, h, 1, |x| vec![f(x)])
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn h(&self) -> f64 {
        self.grid.h
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn is_present(&self, i: usize) -> bool {
        self.present[i]
    }

    pub fn mask(&self) -> &[bool] {
        &self.present
    }

    pub fn count_present(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn present_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.present[i]).collect()
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.arity..(i + 1) * self.arity]
    }

    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.present[i].then(|| self.value(i))
    }

    pub fn scalar(&self, i: usize) -> f64 {
        self.values[i * self.arity]
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.values
    }

    pub fn set(&mut self, i: usize, v: &[f64]) {
        self.present[i] = true;
        self.values[i * self.arity..(i + 1) * self.arity].copy_from_slice(v);
    }

    pub fn unset(&mut self, i: usize) {
        self.present[i] = false;
        self.values[i * self.arity..(i + 1) * self.arity].fill(0.0);
    }

    /// Euclidean length of the value at `i`.
    pub fn magnitude(&self, i: usize) -> f64 {
        let v = self.value(i);
        if v.len() == 1 {
            v[0].abs()
        } else {
            v.iter().map(|x| x * x).sum::<f64>().sqrt()
        }
    }

    pub fn point(&self, i: usize) -> [f64; MAX_DIM] {
        self.grid.point(i)
    }

    pub fn map_values<F: Fn(f64) -> f64>(&self, f: F) -> SampledFunction {
        let mut out = self.clone();
        for i in 0..self.len() {
            if self.present[i] {
                for c in 0..self.arity {
                    out.values[i * self.arity + c] = f(self.values[i * self.arity + c]);
                }
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> SampledFunction {
        self.map_values(|v| c * v)
    }

    /// `a self + b other` on the common support.
    pub fn combine(&self, a: f64, other: &SampledFunction, b: f64) -> Result<SampledFunction> {
        if self.grid != other.grid || self.arity != other.arity {
            return Err(Error::InvalidArgument("combining functions on different grids".into()));
        }
        let mut out = self.clone();
        for i in 0..self.len() {
            if self.present[i] && other.present[i] {
                for c in 0..self.arity {
                    let k = i * self.arity + c;
                    out.values[k] = a * self.values[k] + b * other.values[k];
                }
            } else {
                out.unset(i);
            }
        }
        Ok(out)
    }

    /// Copy with the mask intersected with `keep`.
    pub fn restricted(&self, keep: &[bool]) -> SampledFunction {
        let mut out = self.clone();
        for i in 0..self.len() {
            if !keep[i] {
                out.unset(i);
            }
        }
        out
    }

    /// Multilinear interpolation from the 2^d surrounding samples, which
    /// must all be present.
    pub fn interpolate(&self, x: &[f64]) -> Option<Vec<f64>> {
        let d = self.dim();
        let mut base = [0i64; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for a in 0..d {
            let n = self.grid.n[a] as f64;
            let c = self.grid.coordinate(a, x[a]);
            if c < -1e-12 || c > n - 1.0 + 1e-12 {
                return None;
            }
            let c = c.clamp(0.0, n - 1.0);
            let b = c.floor().min((n - 2.0).max(0.0));
            base[a] = b as i64;
            frac[a] = c - b;
        }
        let mut out = vec![0.0; self.arity];
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = [0usize; MAX_DIM];
            for a in 0..d {
                let bit = (corner >> a) & 1;
                let t = frac[a];
                w *= if bit == 1 { t } else { 1.0 - t };
                idx[a] = (base[a] + bit as i64) as usize;
            }
            if w == 0.0 {
                continue;
            }
            if idx[..d].iter().zip(&self.grid.n).any(|(&i, &n)| i >= n) {
                return None;
            }
            let flat = self.grid.index_of(&idx);
            if !self.present[flat] {
                return None;
            }
            for c in 0..self.arity {
                out[c] += w * self.values[flat * self.arity + c];
            }
        }
        Some(out)
    }

    pub fn to_file_json(&self) -> serde_json::Value {
        let mut bytes = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let mask: Vec<u8> = self.present.iter().map(|&p| p as u8).collect();
        let file = FileFormat {
            h: self.grid.h,
            bbox: self.grid.bbox(),
            dims: self.grid.n.clone(),
            domain: self.domain.clone(),
            arity: self.arity,
            values: B64.encode(bytes),
            mask: B64.encode(mask),
            provenance: self.provenance.clone(),
        };
        serde_json::to_value(file).expect("serializable")
    }

    pub fn from_file_json(v: serde_json::Value) -> Result<SampledFunction> {
        let file: FileFormat = serde_json::from_value(v)?;
        let grid = Grid::new(&file.bbox.lo, file.h, &file.dims)?;
        let bytes = B64
            .decode(file.values.as_bytes())
            .map_err(|e| Error::Format(format!("values: {e}")))?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Format("value block is not a whole number of f64".into()));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mask = B64
            .decode(file.mask.as_bytes())
            .map_err(|e| Error::Format(format!("mask: {e}")))?;
        let present = mask.into_iter().map(|b| b != 0).collect();
        let mut f = SampledFunction::new(grid, &file.domain, file.arity, values, present)
            .map_err(|e| Error::Format(e.to_string()))?;
        f.provenance = file.provenance;
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_file_json())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SampledFunction> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file_json(serde_json::from_str(&text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct FileFormat {
    h: f64,
    bbox: BBox,
    dims: Vec<usize>,
    domain: String,
    arity: usize,
    values: String,
    mask: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_follows_domain() {
        let d = Domain::builtin("lshape").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 16.0, |x| x[0]).unwrap();
        assert_eq!(f.count_present(), 256 - 64);
        for i in 0..f.len() {
            let p = f.point(i);
            assert_eq!(f.is_present(i), d.contains(&p[..2]));
        }
    }

    #[test]
    fn file_round_trip() {
        let d = Domain::builtin("disc").unwrap();
        let mut f = SampledFunction::from_fn(&d, 1.0 / 8.0, 2, |x| vec![x[0], x[1] * x[1]]).unwrap();
        f.provenance = Some(serde_json::json!({"l0": 0.01}));
        let back = SampledFunction::from_file_json(f.to_file_json()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn bilinear_reproduces_affine() {
        let d = Domain::builtin("square").unwrap();
        let f = SampledFunction::from_scalar(&d, 1.0 / 32.0, |x| 2.0 * x[0] - x[1] + 0.5).unwrap();
        for p in [[0.3, 0.7], [0.02, 0.5], [0.984375, 0.5]] {
            let v = f.interpolate(&p).unwrap()[0];
            assert!((v - (2.0 * p[0] - p[1] + 0.5)).abs() < 1e-13);
        }
        assert!(f.interpolate(&[0.001, 0.5]).is_none());
    }
}
