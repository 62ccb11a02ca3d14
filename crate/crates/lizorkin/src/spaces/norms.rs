//! Discrete `L^p`, `W^{k,p}`, Hölder and first-order-difference
//! Triebel–Lizorkin norms.

use super::sampled::SampledFunction;
use crate::calculus::finite_diff::finite_diff;
use crate::error::{Error, Result};
use crate::geometry::domain::MAX_DIM;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Points per reduction chunk; chunk sums are added in index order so the
/// result does not depend on the worker count.
const CHUNK: usize = 1024;

/// Default cap on ball offsets per t-level (see [`TlOptions`]).
pub const DEFAULT_BALL_BUDGET: usize = 1024;

/// Exhaustive Hölder pairs below this many points.
pub const HOLDER_EXHAUSTIVE_LIMIT: usize = 10_000;

/// `(s = k + sigma, p, q, u, rho)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub u: f64,
    pub rho: f64,
}

impl NormSpec {
    pub fn new(s: f64, p: f64, q: f64, u: f64, rho: f64) -> NormSpec {
        NormSpec { s, p, q, u, rho }
    }

    pub fn k(&self) -> u32 {
        self.s.floor() as u32
    }

    pub fn sigma(&self) -> f64 {
        self.s - self.s.floor()
    }

    /// Checks the parameter ranges and the index condition
    /// `sigma > d / min(p, q) - d / u`.
    pub fn validate(&self, d: usize) -> Result<()> {
        let sigma = self.sigma();
        if !self.s.is_finite() || self.s <= 0.0 || sigma == 0.0 {
            return Err(Error::Spec(format!("s = {} must be positive and not an integer", self.s)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Spec(format!("p = {} must lie in [1, inf)", self.p)));
        }
        if !(self.q >= 1.0) {
            return Err(Error::Spec(format!("q = {} must lie in [1, inf]", self.q)));
        }
        if !(self.u >= 1.0) {
            return Err(Error::Spec(format!("u = {} must lie in [1, inf]", self.u)));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::Spec(format!("rho = {} must lie in (0, 1]", self.rho)));
        }
        let d = d as f64;
        let bound = d / self.p.min(self.q) - d / self.u;
        if sigma <= bound {
            return Err(Error::Spec(format!(
                "sigma = {sigma} does not exceed d/min(p,q) - d/u = {bound}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TlOptions {
    /// Largest number of ball offsets per level; larger balls are sampled on
    /// a strided sublattice.
    pub ball_budget: usize,
    /// Smallest admissible `t` in grid cells.
    pub min_cells: f64,
}

impl Default for TlOptions {
    fn default() -> Self {
        TlOptions {
            ball_budget: DEFAULT_BALL_BUDGET,
            min_cells: 4.0,
        }
    }
}

fn ensure_nonempty(f: &SampledFunction) -> Result<()> {
    if f.count_present() == 0 {
        return Err(Error::IncompleteInput(format!("no samples of {}", f.domain)));
    }
    Ok(())
}

fn ordered_sum<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks: Vec<f64> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                acc += term(i);
            }
            acc
        })
        .collect();
    chunks.iter().sum()
}

/// [`ordered_sum`] for `m` accumulators filled by `term(i, acc)`.
fn ordered_sums<F>(n: usize, m: usize, term: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let chunks: Vec<Vec<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; m];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                term(i, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; m];
    for c in chunks {
        for (t, v) in total.iter_mut().zip(c) {
            *t += v;
        }
    }
    total
}

/// `(sum |f|^p h^d)^(1/p)`; `p = inf` gives the maximum.
pub fn lp_norm(f: &SampledFunction, p: f64) -> Result<f64> {
    ensure_nonempty(f)?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p = {p}")));
    }
    if p.is_infinite() {
        return Ok(f
            .present_indices()
            .into_iter()
            .map(|i| f.magnitude(i))
            .fold(0.0, f64::max));
    }
    let s = ordered_sum(f.len(), |i| {
        if f.is_present(i) {
            f.magnitude(i).powf(p)
        } else {
            0.0
        }
    });
    Ok((s * f.grid.cell_volume()).powf(1.0 / p))
}

/// `sum_{j <= k} ||nabla^j f||_p`.
pub fn wkp_norm(f: &SampledFunction, k: u32, p: f64) -> Result<f64> {
    let mut total = lp_norm(f, p)?;
    for j in 1..=k {
        total += lp_norm(&finite_diff(f, j)?, p)?;
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HolderOptions {
    pub seed: u64,
    pub random_pairs: usize,
    /// Above the exhaustive limit, every pair within this many cells is also
    /// scanned (the supremum usually sits at short range).
    pub local_radius: i64,
}

impl Default for HolderOptions {
    fn default() -> Self {
        HolderOptions {
            seed: 0x5eed,
            random_pairs: 2_000_000,
            local_radius: 4,
        }
    }
}

fn pair_ratio(f: &SampledFunction, i: usize, j: usize, sigma: f64) -> f64 {
    let (pi, pj) = (f.point(i), f.point(j));
    let dist = (0..f.dim())
        .map(|a| (pi[a] - pj[a]).powi(2))
        .sum::<f64>()
        .sqrt();
    let (a, b) = (f.value(i), f.value(j));
    let diff = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    diff / dist.powf(sigma)
}

/// Largest difference quotient of `f` itself with exponent `sigma`.
pub fn holder_quotient(f: &SampledFunction, sigma: f64, opts: &HolderOptions) -> Result<f64> {
    let pts = f.present_indices();
    if pts.len() < 2 {
        return Err(Error::IncompleteInput(format!(
            "Hölder seminorm needs at least two samples, {} has {}",
            f.domain,
            pts.len()
        )));
    }
    let n = pts.len();
    if n <= HOLDER_EXHAUSTIVE_LIMIT {
        let best = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut m: f64 = 0.0;
                for b in a + 1..n {
                    m = m.max(pair_ratio(f, pts[a], pts[b], sigma));
                }
                m
            })
            .reduce(|| 0.0, f64::max);
        return Ok(best);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: f64 = 0.0;
    for _ in 0..opts.random_pairs {
        let a = pts[rng.gen_range(0..n)];
        let b = pts[rng.gen_range(0..n)];
        if a != b {
            best = best.max(pair_ratio(f, a, b, sigma));
        }
    }
    let d = f.dim();
    let r = opts.local_radius;
    let offsets = lattice_offsets(d, r, 1, |o| o.iter().any(|&v| v != 0));
    let local = pts
        .par_iter()
        .map(|&i| {
            let mut m: f64 = 0.0;
            for o in &offsets {
                if let Some(j) = f.grid.shifted(i, &o[..d]) {
                    if f.is_present(j) {
                        m = m.max(pair_ratio(f, i, j, sigma));
                    }
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(best.max(local))
}

/// `|nabla^k f|_{C^sigma}` for `s = k + sigma`.
pub fn holder_seminorm(f: &SampledFunction, s: f64) -> Result<f64> {
    holder_seminorm_with(f, s, &HolderOptions::default())
}

pub fn holder_seminorm_with(f: &SampledFunction, s: f64, opts: &HolderOptions) -> Result<f64> {
    if !(s > 0.0) || s.fract() == 0.0 {
        return Err(Error::Spec(format!("Hölder index s = {s} must be positive and not an integer")));
    }
    let k = s.floor() as u32;
    let g = finite_diff(f, k)?;
    holder_quotient(&g, s - k as f64, opts)
}

/// `sum_{j <= k} ||nabla^j f||_inf + |nabla^k f|_{C^sigma}`.
pub fn holder_norm(f: &SampledFunction, s: f64) -> Result<f64> {
    let k = s.floor() as u32;
    let mut total = 0.0;
    for j in 0..=k {
        total += lp_norm(&finite_diff(f, j)?, f64::INFINITY)?;
    }
    Ok(total + holder_seminorm(f, s)?)
}

/// Integer offsets with `|o|_inf <= r` on the sublattice `stride Z^d`
/// accepted by `keep`.
fn lattice_offsets<F>(d: usize, r: i64, stride: i64, keep: F) -> Vec<[i64; MAX_DIM]>
where
    F: Fn(&[i64]) -> bool,
{
    let m = r / stride;
    let mut out = Vec::new();
    let mut j = [-m; MAX_DIM];
    for a in d..MAX_DIM {
        j[a] = 0;
    }
    loop {
        let mut o = [0i64; MAX_DIM];
        for a in 0..d {
            o[a] = j[a] * stride;
        }
        if keep(&o[..d]) {
            out.push(o);
        }
        let mut a = 0;
        loop {
            if a == d {
                return out;
            }
            j[a] += 1;
            if j[a] <= m {
                break;
            }
            j[a] = -m;
            a += 1;
        }
    }
}

/// One t-level: radius and the (possibly strided) offsets of the open ball.
#[derive(Clone, Debug)]
pub struct Level {
    pub t: f64,
    pub stride: i64,
    pub offsets: Vec<[i64; MAX_DIM]>,
}

/// Levels `t_m = rho 2^(-m - 1/2)` kept while `t_m >= min_cells h`. Each
/// node is the log-midpoint of the dyadic band `[rho 2^(-m-1), rho 2^(-m)]`,
/// which carries `dt/t`-weight `ln 2`.
pub fn t_levels(d: usize, h: f64, rho: f64, opts: &TlOptions) -> Vec<Level> {
    let mut out = Vec::new();
    let mut m = 0;
    loop {
        let t = rho * 2f64.powf(-(m as f64) - 0.5);
        if t < opts.min_cells * h {
            return out;
        }
        let r_cells = t / h;
        let r = r_cells.ceil() as i64;
        let mut stride = 1;
        let offsets = loop {
            let in_ball = |o: &[i64]| {
                let s: f64 = o.iter().map(|&v| (v as f64).powi(2)).sum();
                s.sqrt() < r_cells
            };
            let offs = lattice_offsets(d, r, stride, in_ball);
            if offs.len() <= opts.ball_budget.max(1) {
                break offs;
            }
            stride += 1;
        };
        out.push(Level { t, stride, offsets });
        m += 1;
    }
}

/// Discrete seminorm of the order-`k` field `gradk`: an outer Riemann sum
/// over `x`, dyadic `t`-levels with weight `ln 2`, and normalized ball
/// averages of `|gradk(x) - gradk(y)|^u` over present points `y`.
pub fn tl_seminorm(gradk: &SampledFunction, spec: &NormSpec) -> Result<f64> {
    tl_seminorm_with(gradk, spec, &TlOptions::default())
}

pub fn tl_seminorm_with(gradk: &SampledFunction, spec: &NormSpec, opts: &TlOptions) -> Result<f64> {
    tl_seminorms(gradk, std::slice::from_ref(spec), opts).remove(0)
}

fn check_levels(levels: usize, spec: &NormSpec, h: f64, opts: &TlOptions) -> Result<()> {
    if levels < 3 {
        return Err(Error::Resolution(format!(
            "only {levels} t-levels between rho = {} and {} h (h = {h}); need 3",
            spec.rho, opts.min_cells
        )));
    }
    Ok(())
}

/// [`tl_seminorm_with`] for several specs over the same field in one pass.
/// Levels shared by specs (equal `t`, e.g. `rho` differing by powers of 2)
/// and ball averages shared by equal `u` are computed once. Each entry
/// equals the single-spec result bit for bit.
pub fn tl_seminorms(gradk: &SampledFunction, specs: &[NormSpec], opts: &TlOptions) -> Vec<Result<f64>> {
    let d = gradk.dim();
    let h = gradk.h();
    let mut out: Vec<Result<f64>> = Vec::with_capacity(specs.len());
    // distinct levels and distinct u, with each spec's slots
    let mut levels: Vec<Level> = Vec::new();
    let mut us: Vec<f64> = Vec::new();
    let mut plan: Vec<Option<(Vec<usize>, usize)>> = Vec::with_capacity(specs.len());
    for spec in specs {
        let ok = spec
            .validate(d)
            .and_then(|_| ensure_nonempty(gradk))
            .and_then(|_| {
                let lv = t_levels(d, h, spec.rho, opts);
                check_levels(lv.len(), spec, h, opts).map(|_| lv)
            });
        match ok {
            Err(e) => {
                out.push(Err(e));
                plan.push(None);
            }
            Ok(lv) => {
                let mut slots = Vec::with_capacity(lv.len());
                for l in lv {
                    let slot = match levels.iter().position(|m| m.t == l.t) {
                        Some(s) => s,
                        None => {
                            levels.push(l);
                            levels.len() - 1
                        }
                    };
                    slots.push(slot);
                }
                let ui = match us.iter().position(|&u| u == spec.u) {
                    Some(i) => i,
                    None => {
                        us.push(spec.u);
                        us.len() - 1
                    }
                };
                out.push(Ok(0.0));
                plan.push(Some((slots, ui)));
            }
        }
    }
    let active: Vec<usize> = (0..specs.len()).filter(|&i| plan[i].is_some()).collect();
    if active.is_empty() {
        return out;
    }
    let arity = gradk.arity;
    let nl = levels.len();
    let nu = us.len();
    // per point: the outer integrand of every active spec
    let outer = |i: usize, acc_out: &mut [f64]| {
        if !gradk.is_present(i) {
            return;
        }
        let fx = gradk.value(i);
        // inner[l * nu + a]: ball mean of |diff|^u (or max for u = inf), then ^(1/u)
        let mut inner = vec![0.0; nl * nu];
        for (l, lv) in levels.iter().enumerate() {
            let mut sums = [0.0f64; 4];
            let mut sums_v = if nu > 4 { vec![0.0; nu] } else { Vec::new() };
            let sums: &mut [f64] = if nu > 4 { &mut sums_v } else { &mut sums[..nu] };
            let mut count = 0usize;
            for o in &lv.offsets {
                let j = match gradk.grid.shifted(i, &o[..d]) {
                    Some(j) if gradk.is_present(j) => j,
                    _ => continue,
                };
                let fy = gradk.value(j);
                let diff = if arity == 1 {
                    (fx[0] - fy[0]).abs()
                } else {
                    fx.iter()
                        .zip(fy)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                };
                count += 1;
                for (a, &u) in us.iter().enumerate() {
                    if u.is_infinite() {
                        sums[a] = sums[a].max(diff);
                    } else {
                        sums[a] += diff.powf(u);
                    }
                }
            }
            for (a, &u) in us.iter().enumerate() {
                inner[l * nu + a] = if u.is_infinite() {
                    sums[a]
                } else {
                    (sums[a] / count as f64).powf(1.0 / u)
                };
            }
        }
        for (slot, &si) in active.iter().enumerate() {
            let spec = &specs[si];
            let (levs, ui) = plan[si].as_ref().unwrap();
            let sigma = spec.sigma();
            let mut acc = 0.0;
            let mut sup: f64 = 0.0;
            for &l in levs {
                let scaled = inner[l * nu + ui] / levels[l].t.powf(sigma);
                if spec.q.is_infinite() {
                    sup = sup.max(scaled);
                } else {
                    acc += LN_2 * scaled.powf(spec.q);
                }
            }
            acc_out[slot] += if spec.q.is_infinite() {
                sup.powf(spec.p)
            } else {
                acc.powf(spec.p / spec.q)
            };
        }
    };
    let totals = ordered_sums(gradk.len(), active.len(), outer);
    let vol = gradk.grid.cell_volume();
    for (slot, &si) in active.iter().enumerate() {
        out[si] = Ok((totals[slot] * vol).powf(1.0 / specs[si].p));
    }
    out
}

/// `||f||_{W^{k,p}} + tl_seminorm(nabla^k f)`, with the split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub total: f64,
    pub wkp: f64,
    pub seminorm: f64,
}

pub fn tl_norm(f: &SampledFunction, spec: &NormSpec) -> Result<NormValue> {
    tl_norm_with(f, spec, &TlOptions::default())
}

pub fn tl_norm_with(f: &SampledFunction, spec: &NormSpec, opts: &TlOptions) -> Result<NormValue> {
    spec.validate(f.dim())?;
    let k = spec.k();
    let wkp = wkp_norm(f, k, spec.p)?;
    let seminorm = tl_seminorm_with(&finite_diff(f, k)?, spec, opts)?;
    Ok(NormValue {
        total: wkp + seminorm,
        wkp,
        seminorm,
    })
}

/// [`tl_norm_with`] for several specs; specs sharing `k` share one
/// derivative field and one seminorm pass.
pub fn tl_norms(f: &SampledFunction, specs: &[NormSpec], opts: &TlOptions) -> Vec<Result<NormValue>> {
    let mut out: Vec<Option<Result<NormValue>>> = (0..specs.len()).map(|_| None).collect();
    let mut ks: Vec<u32> = specs.iter().map(|s| s.k()).collect();
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let idx: Vec<usize> = (0..specs.len()).filter(|&i| specs[i].k() == k).collect();
        let gradk = match finite_diff(f, k) {
            Ok(g) => g,
            Err(e) => {
                // errors are not Clone; later specs get a fresh copy
                out[idx[0]] = Some(Err(e));
                for &i in &idx[1..] {
                    out[i] = Some(Err(finite_diff(f, k).err().unwrap()));
                }
                continue;
            }
        };
        let group: Vec<NormSpec> = idx.iter().map(|&i| specs[i]).collect();
        let semis = tl_seminorms(&gradk, &group, opts);
        for (&i, semi) in idx.iter().zip(semis) {
            out[i] = Some(semi.and_then(|seminorm| {
                let wkp = wkp_norm(f, k, specs[i].p)?;
                Ok(NormValue {
                    total: wkp + seminorm,
                    wkp,
                    seminorm,
                })
            }));
        }
    }
    out.into_iter().map(|v| v.unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Domain;

    fn interval(h: f64, f: impl Fn(f64) -> f64) -> SampledFunction {
        SampledFunction::from_scalar(&Domain::builtin("interval").unwrap(), h, |x| f(x[0])).unwrap()
    }

    #[test]
    fn lp_of_identity() {
        let f = interval(1.0 / 256.0, |x| x);
        let v = lp_norm(&f, 2.0).unwrap();
        assert!((v - (1.0f64 / 3.0).sqrt()).abs() < 0.02 / 3f64.sqrt());
        assert!((lp_norm(&f, f64::INFINITY).unwrap() - (1.0 - 0.5 / 256.0)).abs() < 1e-15);
        let w = wkp_norm(&f, 1, 2.0).unwrap();
        let want = (1.0f64 / 3.0).sqrt() + 1.0;
        assert!((w - want).abs() < 0.03 * want);
    }

    #[test]
    fn spec_validation() {
        assert!(NormSpec::new(0.5, 2.0, 2.0, 2.0, 1.0).validate(2).is_ok());
        assert!(NormSpec::new(1.0, 2.0, 2.0, 2.0, 1.0).validate(1).is_err());
        assert!(NormSpec::new(0.5, 2.0, 2.0, 2.0, 1.5).validate(1).is_err());
        // sigma = 0.5 <= 2/1 - 2/2
        assert!(NormSpec::new(0.5, 1.0, 2.0, 2.0, 1.0).validate(2).is_err());
    }

    #[test]
    fn levels_are_budgeted() {
        let lv = t_levels(2, 1.0 / 256.0, 1.0, &TlOptions::default());
        assert_eq!(lv.len(), 6);
        for l in &lv {
            assert!(l.offsets.len() <= DEFAULT_BALL_BUDGET);
            assert!(l.offsets.iter().any(|o| o.iter().all(|&v| v == 0)));
        }
        assert_eq!(lv.last().unwrap().stride, 1);
    }

    #[test]
    fn constants_and_homogeneity() {
        let spec = NormSpec::new(0.5, 2.0, 2.0, 2.0, 0.5);
        let c = interval(1.0 / 512.0, |_| 3.0);
        assert_eq!(tl_seminorm(&c, &spec).unwrap(), 0.0);
        let f = interval(1.0 / 512.0, |x| (x - 0.3).abs().sqrt());
        let a = tl_seminorm(&f, &spec).unwrap();
        let b = tl_seminorm(&f.scaled(-2.5), &spec).unwrap();
        assert!((b - 2.5 * a).abs() <= 1e-12 * b);
        let coarse = interval(1.0 / 8.0, |x| x);
        assert!(matches!(tl_seminorm(&coarse, &spec), Err(Error::Resolution(_))));
    }

    #[test]
    fn batch_matches_single_specs() {
        let f = interval(1.0 / 256.0, |x| (x - 0.4).abs().powf(0.7));
        let specs = [
            NormSpec::new(0.5, 2.0, 2.0, 1.0, 1.0),
            NormSpec::new(0.5, 2.0, 2.0, 2.0, 0.25),
            NormSpec::new(0.25, 4.0, f64::INFINITY, 2.0, 1.0),
            NormSpec::new(0.5, 2.0, 2.0, 1.0, 0.5),
            NormSpec::new(0.5, 2.0, 2.0, 1.0, 0.01),
        ];
        let opts = TlOptions::default();
        let batch = tl_seminorms(&f, &specs, &opts);
        for (spec, b) in specs.iter().zip(&batch) {
            match (tl_seminorm_with(&f, spec, &opts), b) {
                (Ok(x), Ok(y)) => assert_eq!(x, *y),
                (Err(_), Err(_)) => {}
                other => panic!("{other:?}"),
            }
        }
        assert!(batch[4].is_err());
        // nested t-ranges: smaller rho never increases the seminorm
        assert!(batch[1].as_ref().unwrap() <= &tl_seminorm(&f, &NormSpec::new(0.5, 2.0, 2.0, 2.0, 1.0)).unwrap());
    }

    #[test]
    fn holder_of_identity() {
        let f = interval(1.0 / 128.0, |x| x);
        let v = holder_seminorm(&f, 0.5).unwrap();
        assert!(v < 1.0 && v > 0.99);
        let z = interval(1.0 / 128.0, |_| 2.0);
        assert_eq!(holder_seminorm(&z, 0.5).unwrap(), 0.0);
    }
}
