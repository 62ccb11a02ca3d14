//! The extension operators `Lambda_0` and `Lambda_k`: on the exterior,
//! `sum_{Q in W3} psi_Q(x) P_{Q*}^k f(x)`.

use super::bumps::BumpPartition;
use super::moments::{moment_projection_windowed, MomentPolynomial};
use crate::error::{Error, Result};
use crate::geometry::{Domain, WhitneyCovering, WhitneyOptions};
use crate::spaces::{Grid, SampledFunction};
use serde::Serialize;
use std::collections::HashMap;

/// Generations below the grid spacing emitted by [`extension_covering`], so
/// that the uncovered exterior collar is thinner than half a cell.
pub const SUBGRID_GENERATIONS: u32 = 3;

/// Whitney covering fine enough for extending samples of spacing `h`.
pub fn extension_covering(domain: &Domain, h: f64, opts: &WhitneyOptions) -> Result<WhitneyCovering> {
    let levels = (domain.bbox.max_extent() / h).log2().ceil().max(0.0) as u32;
    let opts = WhitneyOptions {
        max_generation: levels + SUBGRID_GENERATIONS,
        ..opts.clone()
    };
    WhitneyCovering::build(domain, &opts)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExtensionStats {
    pub k: u32,
    pub l0: f64,
    pub covering_hash: String,
    pub dropped_cubes: usize,
    pub exterior_points: usize,
    /// Exterior points in no dilated exterior cube (absent in the output).
    pub uncovered_points: usize,
    /// Exterior points outside the `W3` collar (0 in the output).
    pub beyond_collar_points: usize,
    /// Partner cubes whose projection failed; their terms are dropped.
    pub failed_projections: usize,
    pub max_moment_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Extension {
    pub function: SampledFunction,
    /// Exterior points set to 0 because no `W3` cube reaches them.
    pub beyond_collar: Vec<bool>,
    /// `sum_{Q in W3} psi_Q` at each point (1 inside the domain).
    pub w3_weight: Vec<f64>,
    /// Points that carry `f` itself.
    pub interior: Vec<bool>,
    pub stats: ExtensionStats,
}

impl Extension {
    /// Provenance block for the file format.
    pub fn provenance(&self) -> serde_json::Value {
        serde_json::json!({
            "covering_hash": self.stats.covering_hash,
            "dropped_cubes": self.stats.dropped_cubes,
            "l0": self.stats.l0,
            "k": self.stats.k,
            "uncovered_points": self.stats.uncovered_points,
            "beyond_collar_points": self.stats.beyond_collar_points,
        })
    }
}

/// Output grid: the input grid padded by `ceil(5 l0 / h)` cells per side.
pub fn extended_grid(f: &SampledFunction, l0: f64) -> Result<(Grid, usize)> {
    let h = f.h();
    let pad = (5.0 * l0 / h - 1e-9).ceil().max(0.0) as usize;
    let lo: Vec<f64> = f.grid.lo.iter().map(|v| v - pad as f64 * h).collect();
    let n: Vec<usize> = f.grid.n.iter().map(|v| v + 2 * pad).collect();
    Ok((Grid::new(&lo, h, &n)?, pad))
}

/// `Lambda_k f` on the padded grid. `k = 0` is `Lambda_0`.
pub fn extend(f: &SampledFunction, k: u32, cov: &WhitneyCovering) -> Result<Extension> {
    if f.arity != 1 {
        return Err(Error::InvalidArgument("extension needs a scalar function".into()));
    }
    if f.dim() != cov.dim() {
        return Err(Error::InvalidArgument("function and covering dimensions differ".into()));
    }
    let bumps = BumpPartition::new(cov)?;
    let d = f.dim();
    let (grid, pad) = extended_grid(f, cov.l0)?;

    // one projection per partner cube
    let mut projections: HashMap<usize, Option<MomentPolynomial>> = HashMap::new();
    let mut stats = ExtensionStats {
        k,
        l0: cov.l0,
        covering_hash: cov.hash(),
        dropped_cubes: cov.dropped,
        ..Default::default()
    };
    for p in cov.partner.iter().flatten() {
        if projections.contains_key(p) {
            continue;
        }
        let proj = moment_projection_windowed(f, &cov.interior.cubes[*p], k).ok();
        if proj.is_none() {
            stats.failed_projections += 1;
        }
        projections.insert(*p, proj);
    }
    stats.max_moment_residual = projections
        .values()
        .flatten()
        .map(|p| p.residual)
        .fold(0.0, f64::max);

    let n = grid.len();
    let mut values = vec![0.0; n];
    let mut present = vec![false; n];
    let mut beyond = vec![false; n];
    let mut interior = vec![false; n];
    let mut w3_weight = vec![0.0; n];
    let mut inner = [0usize; 3];
    for i in 0..n {
        let m = grid.multi_index(i);
        let mut inside_grid = true;
        for a in 0..d {
            if m[a] < pad || m[a] >= pad + f.grid.n[a] {
                inside_grid = false;
                break;
            }
            inner[a] = m[a] - pad;
        }
        if inside_grid {
            let j = f.grid.index_of(&inner);
            if f.is_present(j) {
                values[i] = f.scalar(j);
                present[i] = true;
                interior[i] = true;
                w3_weight[i] = 1.0;
                continue;
            }
        }
        stats.exterior_points += 1;
        let x = grid.point(i);
        let ws = match bumps.weights(&x[..d]) {
            Ok(ws) => ws,
            Err(_) => {
                stats.uncovered_points += 1;
                continue;
            }
        };
        let mut v = 0.0;
        let mut wsum = 0.0;
        for (q, psi) in ws {
            if !cov.in_w3(q) {
                continue;
            }
            if let Some(p) = cov.partner[q] {
                if let Some(Some(poly)) = projections.get(&p) {
                    v += psi * poly.eval(&x[..d]);
                    wsum += psi;
                }
            }
        }
        present[i] = true;
        values[i] = v;
        w3_weight[i] = wsum;
        if wsum == 0.0 {
            beyond[i] = true;
            stats.beyond_collar_points += 1;
        }
    }
    let name = format!("{}+collar", f.domain);
    let mut function = SampledFunction::new(grid, &name, 1, values, present)?;
    let ext = Extension {
        function: function.clone(),
        beyond_collar: beyond,
        w3_weight,
        interior,
        stats,
    };
    function.provenance = Some(ext.provenance());
    Ok(Extension { function, ..ext })
}

pub fn extend_lambda0(f: &SampledFunction, cov: &WhitneyCovering) -> Result<Extension> {
    extend(f, 0, cov)
}

pub fn extend_lambdak(f: &SampledFunction, k: u32, cov: &WhitneyCovering) -> Result<Extension> {
    extend(f, k, cov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_reproduced() {
        let dom = Domain::builtin("square").unwrap();
        let h = 1.0 / 32.0;
        let cov = extension_covering(&dom, h, &WhitneyOptions::default()).unwrap();
        let f = SampledFunction::from_scalar(&dom, h, |_| 2.5).unwrap();
        let e = extend_lambda0(&f, &cov).unwrap();
        assert_eq!(e.stats.uncovered_points, 0);
        assert_eq!(e.stats.failed_projections, 0);
        for i in 0..e.function.len() {
            if e.w3_weight[i] > 1.0 - 1e-12 {
                assert!((e.function.scalar(i) - 2.5).abs() < 1e-12);
            }
        }
        let restored = e.interior.iter().filter(|&&b| b).count();
        assert_eq!(restored, f.count_present());
    }
}
