//! Bounded open sets in one or two dimensions.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MAX_DIM: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BBox {
    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn max_extent(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| b - a)
            .fold(0.0, f64::max)
    }

    pub fn expanded(&self, margin: f64) -> BBox {
        BBox {
            lo: self.lo.iter().map(|v| v - margin).collect(),
            hi: self.hi.iter().map(|v| v + margin).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxClass {
    /// The closed box lies in the open set.
    Inside,
    /// The closed box lies in the complement of the closure.
    Outside,
    /// The box meets the relevant boundary.
    Straddle,
}

/// Which boundary a Whitney sweep works against: the boundary of the
/// domain itself, or the boundary of the complement of its closure (these
/// differ for slit domains).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Interior,
    Exterior,
}

type Seg = ([f64; 2], [f64; 2]);

/// Signed-distance samples on a regular grid; positive inside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdfGrid {
    pub dim: usize,
    pub n: Vec<usize>,
    pub lo: Vec<f64>,
    pub h: f64,
    pub values: Vec<f64>,
}

impl SdfGrid {
    /// Multilinear interpolation with samples at `lo + i h`; clamped at the
    /// edges of the sample grid.
    pub fn eval(&self, p: &[f64]) -> f64 {
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0; MAX_DIM];
        for a in 0..self.dim {
            let t = ((p[a] - self.lo[a]) / self.h).clamp(0.0, (self.n[a] - 1) as f64);
            let i = (t.floor() as usize).min(self.n[a].saturating_sub(2));
            base[a] = i;
            frac[a] = t - i as f64;
        }
        let mut total = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut w = 1.0;
            let mut flat = 0;
            let mut stride = 1;
            for a in 0..self.dim {
                let bit = (corner >> a) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                flat += (base[a] + bit).min(self.n[a] - 1) * stride;
                stride *= self.n[a];
            }
            total += w * self.values[flat];
        }
        total
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Interval { a: f64, b: f64 },
    /// Simple polygon minus a set of slit segments.
    Polygon { vertices: Vec<[f64; 2]>, slits: Vec<Seg> },
    Sdf(SdfGrid),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub name: String,
    pub shape: Shape,
    pub bbox: BBox,
    /// Length scale up to which the domain is uniform; sets the default `l0`.
    pub delta: f64,
}

pub const BUILTIN_NAMES: &[&str] = &["interval", "square", "lshape", "disc", "slit-square"];

const DEFAULT_SLIT_DEPTH: f64 = 0.75;
const ON_BOUNDARY_TOL: f64 = 1e-14;

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Domain> {
        if !(a < b) {
            return Err(Error::InvalidDomain(format!("empty interval ({a}, {b})")));
        }
        Ok(Domain {
            name: format!("interval({a},{b})"),
            shape: Shape::Interval { a, b },
            bbox: BBox {
                lo: vec![a],
                hi: vec![b],
            },
            delta: b - a,
        })
    }

    pub fn polygon(name: &str, vertices: Vec<[f64; 2]>) -> Result<Domain> {
        if vertices.len() < 3 {
            return Err(Error::InvalidDomain("polygon needs three vertices".into()));
        }
        let area = polygon_area(&vertices);
        if area.abs() < 1e-14 {
            return Err(Error::InvalidDomain("degenerate polygon".into()));
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &vertices {
            for a in 0..2 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        let delta = (hi[0] - lo[0]).max(hi[1] - lo[1]);
        Ok(Domain {
            name: name.to_string(),
            shape: Shape::Polygon {
                vertices,
                slits: Vec::new(),
            },
            bbox: BBox {
                lo: lo.to_vec(),
                hi: hi.to_vec(),
            },
            delta,
        })
    }

    /// Unit square with a vertical slit from the bottom edge up to `depth`.
    pub fn slit_square(depth: f64) -> Result<Domain> {
        if !(0.0 < depth && depth < 1.0) {
            return Err(Error::InvalidDomain(format!("slit depth {depth}")));
        }
        let mut d = Self::polygon("slit-square", unit_square())?;
        if let Shape::Polygon { slits, .. } = &mut d.shape {
            slits.push(([0.5, 0.0], [0.5, depth]));
        }
        if depth != DEFAULT_SLIT_DEPTH {
            d.name = format!("slit-square:{depth}");
        }
        Ok(d)
    }

    pub fn sdf(name: &str, grid: SdfGrid) -> Result<Domain> {
        let expected: usize = grid.n.iter().product();
        if grid.dim == 0
            || grid.dim > MAX_DIM
            || grid.n.len() != grid.dim
            || grid.lo.len() != grid.dim
            || grid.values.len() != expected
            || grid.n.iter().any(|&n| n < 2)
            || !(grid.h > 0.0)
        {
            return Err(Error::InvalidDomain("malformed signed-distance grid".into()));
        }
        if !grid.values.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidDomain("signed-distance grid has no interior".into()));
        }
        let lo = grid.lo.clone();
        let hi: Vec<f64> = (0..grid.dim)
            .map(|a| grid.lo[a] + (grid.n[a] - 1) as f64 * grid.h)
            .collect();
        let bbox = BBox { lo, hi };
        let delta = bbox.max_extent();
        Ok(Domain {
            name: name.to_string(),
            shape: Shape::Sdf(grid),
            bbox,
            delta,
        })
    }

    pub fn load_sdf(path: &Path) -> Result<Domain> {
        let text = std::fs::read_to_string(path)?;
        let grid: SdfGrid = serde_json::from_str(&text)?;
        Self::sdf(&path.display().to_string(), grid)
    }

    /// Built-in domains: `interval`, `square`, `lshape`, `disc`,
    /// `slit-square[:depth]`. All live in the unit box.
    pub fn builtin(name: &str) -> Result<Domain> {
        let (base, arg) = match name.split_once(':') {
            Some((b, a)) => (b, Some(a)),
            None => (name, None),
        };
        let param = |default: f64| -> Result<f64> {
            match arg {
                None => Ok(default),
                Some(a) => a
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidDomain(format!("bad parameter in {name}"))),
            }
        };
        let mut d = match base {
            "interval" => {
                let mut d = Self::interval(0.0, 1.0)?;
                d.name = "interval".into();
                d
            }
            "square" => Self::polygon("square", unit_square())?,
            "lshape" => Self::polygon(
                "lshape",
                vec![
                    [0.0, 0.0],
                    [1.0, 0.0],
                    [1.0, 0.5],
                    [0.5, 0.5],
                    [0.5, 1.0],
                    [0.0, 1.0],
                ],
            )?,
            "disc" => {
                let n = 64;
                let r = 0.45;
                let v = (0..n)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        [0.5 + r * t.cos(), 0.5 + r * t.sin()]
                    })
                    .collect();
                Self::polygon("disc", v)?
            }
            "slit-square" => Self::slit_square(param(DEFAULT_SLIT_DEPTH)?)?,
            _ => {
                return Err(Error::InvalidDomain(format!("unknown domain '{name}'")));
            }
        };
        if base != "interval" {
            d.bbox = BBox {
                lo: vec![0.0, 0.0],
                hi: vec![1.0, 1.0],
            };
            d.delta = 1.0;
        }
        Ok(d)
    }

    /// Built-in name or path to a signed-distance JSON file.
    pub fn resolve(spec: &str) -> Result<Domain> {
        match Self::builtin(spec) {
            Ok(d) => Ok(d),
            Err(e) => {
                let p = Path::new(spec);
                if p.exists() {
                    Self::load_sdf(p)
                } else {
                    Err(e)
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::Interval { .. } => 1,
            Shape::Polygon { .. } => 2,
            Shape::Sdf(g) => g.dim,
        }
    }

    /// Lebesgue measure (the signed-distance case counts grid cells).
    pub fn measure(&self) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => b - a,
            Shape::Polygon { vertices, .. } => polygon_area(vertices).abs(),
            Shape::Sdf(g) => {
                let cell = g.h.powi(g.dim as i32);
                g.values.iter().filter(|&&v| v > 0.0).count() as f64 * cell
            }
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        match &self.shape {
            Shape::Interval { a, b } => *a < p[0] && p[0] < *b,
            Shape::Polygon { vertices, slits } => {
                let q = [p[0], p[1]];
                if !point_in_polygon(vertices, q) {
                    return false;
                }
                let on_edge = edges(vertices).any(|s| point_segment_dist(q, s) <= ON_BOUNDARY_TOL);
                let on_slit = slits.iter().any(|s| point_segment_dist(q, *s) <= ON_BOUNDARY_TOL);
                !(on_edge || on_slit)
            }
            Shape::Sdf(g) => g.eval(p) > 0.0,
        }
    }

    /// Distance from a point to the boundary of the domain.
    pub fn boundary_distance(&self, p: &[f64]) -> f64 {
        match &self.shape {
            Shape::Interval { a, b } => (p[0] - a).abs().min((p[0] - b).abs()),
            Shape::Polygon { vertices, slits } => {
                let q = [p[0], p[1]];
                edges(vertices)
                    .chain(slits.iter().copied())
                    .map(|s| point_segment_dist(q, s))
                    .fold(f64::INFINITY, f64::min)
            }
            Shape::Sdf(g) => g.eval(p).abs(),
        }
    }

    /// Boundary sample points with spacing about `spacing`.
    pub fn boundary_samples(&self, spacing: f64) -> Vec<Vec<f64>> {
        match &self.shape {
            Shape::Interval { a, b } => vec![vec![*a], vec![*b]],
            Shape::Polygon { vertices, slits } => {
                let mut out = Vec::new();
                for (p, q) in edges(vertices).chain(slits.iter().copied()) {
                    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                    let n = (len / spacing).ceil().max(1.0) as usize;
                    for i in 0..n {
                        let t = i as f64 / n as f64;
                        out.push(vec![p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                    }
                }
                out
            }
            Shape::Sdf(g) => {
                // sample cells whose corners change sign
                let mut out = Vec::new();
                let step = (spacing / g.h).round().max(1.0) as usize;
                let total: usize = g.n.iter().product();
                for flat in (0..total).step_by(step) {
                    let mut idx = [0usize; MAX_DIM];
                    let mut rem = flat;
                    for a in 0..g.dim {
                        idx[a] = rem % g.n[a];
                        rem /= g.n[a];
                    }
                    let v = g.values[flat];
                    let mut stride = 1;
                    for a in 0..g.dim {
                        if idx[a] + 1 < g.n[a] {
                            let w = g.values[flat + stride];
                            if (v > 0.0) != (w > 0.0) {
                                let t = v / (v - w);
                                let p: Vec<f64> = (0..g.dim)
                                    .map(|b| {
                                        g.lo[b]
                                            + g.h
                                                * (idx[b] as f64 + if a == b { t } else { 0.0 })
                                    })
                                    .collect();
                                out.push(p);
                                break;
                            }
                        }
                        stride *= g.n[a];
                    }
                }
                out
            }
        }
    }

    /// Classifies the closed box `[lo, lo + side]^d` and returns its distance
    /// to the boundary relevant for `side_of`.
    pub fn classify_box(&self, lo: &[f64], side: f64, side_of: Side) -> (BoxClass, f64) {
        let d = self.dim();
        let mut center = [0.0; MAX_DIM];
        for a in 0..d {
            center[a] = lo[a] + 0.5 * side;
        }
        match &self.shape {
            Shape::Interval { a, b } => {
                let (l, h) = (lo[0], lo[0] + side);
                let dist = [*a, *b]
                    .iter()
                    .map(|&p| (l - p).max(p - h).max(0.0))
                    .fold(f64::INFINITY, f64::min);
                let class = if dist == 0.0 {
                    BoxClass::Straddle
                } else if *a < center[0] && center[0] < *b {
                    BoxClass::Inside
                } else {
                    BoxClass::Outside
                };
                (class, dist)
            }
            Shape::Polygon { vertices, slits } => {
                let bl = [lo[0], lo[1]];
                let bh = [lo[0] + side, lo[1] + side];
                let mut dist = edges(vertices)
                    .map(|s| box_segment_dist(bl, bh, s))
                    .fold(f64::INFINITY, f64::min);
                let inside_poly = point_in_polygon(vertices, [center[0], center[1]]);
                if side_of == Side::Interior {
                    // slits are invisible from the exterior
                    for s in slits {
                        dist = dist.min(box_segment_dist(bl, bh, *s));
                    }
                }
                let class = if dist == 0.0 {
                    BoxClass::Straddle
                } else if inside_poly {
                    BoxClass::Inside
                } else {
                    BoxClass::Outside
                };
                (class, dist)
            }
            Shape::Sdf(g) => {
                let stencil = box_stencil(lo, side, d);
                let vals: Vec<f64> = stencil.iter().map(|p| g.eval(p)).collect();
                let half_diag = 0.5 * side * (d as f64).sqrt();
                let c = g.eval(&center[..d]);
                let dist = (c.abs() - half_diag).max(0.0);
                let class = if vals.iter().all(|&v| v > 0.0) && dist > 0.0 {
                    BoxClass::Inside
                } else if vals.iter().all(|&v| v < 0.0) && dist > 0.0 {
                    BoxClass::Outside
                } else {
                    BoxClass::Straddle
                };
                let dist = if class == BoxClass::Straddle { 0.0 } else { dist };
                (class, dist)
            }
        }
    }
}

fn unit_square() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
}

/// Corners, edge midpoints and center (9 points in 2-D, 3 in 1-D).
fn box_stencil(lo: &[f64], side: f64, d: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for a in 0..d {
        let mut next = Vec::new();
        for p in &out {
            for t in [0.0, 0.5, 1.0] {
                let mut q = p.clone();
                q.push(lo[a] + t * side);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn edges(v: &[[f64; 2]]) -> impl Iterator<Item = Seg> + '_ {
    (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
}

fn polygon_area(v: &[[f64; 2]]) -> f64 {
    edges(v).map(|(p, q)| p[0] * q[1] - q[0] * p[1]).sum::<f64>() / 2.0
}

fn point_in_polygon(v: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut inside = false;
    for (a, b) in edges(v) {
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub(crate) fn point_segment_dist(p: [f64; 2], (a, b): Seg) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

fn point_box_dist(p: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let dx = (lo[0] - p[0]).max(p[0] - hi[0]).max(0.0);
    let dy = (lo[1] - p[1]).max(p[1] - hi[1]).max(0.0);
    (dx * dx + dy * dy).sqrt()
}

/// Liang-Barsky clip test of a segment against a closed box.
fn segment_hits_box(lo: [f64; 2], hi: [f64; 2], (a, b): Seg) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        for (p, q) in [(-d[k], a[k] - lo[k]), (d[k], hi[k] - a[k])] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
    }
    true
}

fn box_segment_dist(lo: [f64; 2], hi: [f64; 2], s: Seg) -> f64 {
    if segment_hits_box(lo, hi, s) {
        return 0.0;
    }
    let corners = [lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
    let from_ends = point_box_dist(s.0, lo, hi).min(point_box_dist(s.1, lo, hi));
    corners
        .iter()
        .map(|&c| point_segment_dist(c, s))
        .fold(from_ends, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        for name in BUILTIN_NAMES {
            let d = Domain::builtin(name).unwrap();
            assert!(d.measure() > 0.0);
        }
        assert!(Domain::builtin("torus").is_err());
        let lshape = Domain::builtin("lshape").unwrap();
        assert!((lshape.measure() - 0.75).abs() < 1e-15);
        assert!(!lshape.contains(&[0.75, 0.75]));
        assert!(lshape.contains(&[0.25, 0.75]));
    }

    #[test]
    fn slit_is_boundary_but_not_exterior() {
        let d = Domain::builtin("slit-square").unwrap();
        assert!(!d.contains(&[0.5, 0.2]));
        assert!(d.contains(&[0.5, 0.9]));
        // a box straddling the slit
        let (c, dist) = d.classify_box(&[0.45, 0.1], 0.1, Side::Interior);
        assert_eq!(c, BoxClass::Straddle);
        assert_eq!(dist, 0.0);
        let (c, _) = d.classify_box(&[0.45, 0.1], 0.1, Side::Exterior);
        assert_eq!(c, BoxClass::Inside);
        // exterior boxes only see the outer boundary
        let (c, dist) = d.classify_box(&[1.25, 0.25], 0.25, Side::Exterior);
        assert_eq!(c, BoxClass::Outside);
        assert!((dist - 0.25).abs() < 1e-15);
    }

    #[test]
    fn box_distances() {
        let d = Domain::builtin("square").unwrap();
        let (c, dist) = d.classify_box(&[0.25, 0.25], 0.25, Side::Interior);
        assert_eq!(c, BoxClass::Inside);
        assert!((dist - 0.25).abs() < 1e-15);
        let (c, dist) = d.classify_box(&[0.0, 0.25], 0.25, Side::Interior);
        assert_eq!(c, BoxClass::Straddle);
        assert_eq!(dist, 0.0);
        // diagonal distance to the corner
        let (c, dist) = d.classify_box(&[1.5, 1.5], 0.25, Side::Exterior);
        assert_eq!(c, BoxClass::Outside);
        assert!((dist - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn interval_boxes() {
        let d = Domain::builtin("interval").unwrap();
        assert_eq!(d.classify_box(&[0.25], 0.25, Side::Interior), (BoxClass::Inside, 0.25));
        assert_eq!(d.classify_box(&[0.0], 0.25, Side::Interior).0, BoxClass::Straddle);
        assert_eq!(d.classify_box(&[-1.0], 0.5, Side::Exterior), (BoxClass::Outside, 0.5));
    }

    #[test]
    fn sdf_disc() {
        let n = 65;
        let h = 1.0 / 64.0;
        let mut values = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let (x, y) = (i as f64 * h - 0.5, j as f64 * h - 0.5);
                values.push(0.4 - (x * x + y * y).sqrt());
            }
        }
        let grid = SdfGrid {
            dim: 2,
            n: vec![n, n],
            lo: vec![0.0, 0.0],
            h,
            values,
        };
        let d = Domain::sdf("disc-sdf", grid).unwrap();
        assert!(d.contains(&[0.5, 0.5]));
        assert!(!d.contains(&[0.95, 0.95]));
        let (c, _) = d.classify_box(&[0.45, 0.45], 0.1, Side::Interior);
        assert_eq!(c, BoxClass::Inside);
        assert!((d.measure() - std::f64::consts::PI * 0.16).abs() < 0.02);
    }
}
