//! The verification studies. Each returns a [`StudyReport`]; rows that fail
//! to compute become error rows instead of aborting the study.

use super::config::{Study, StudyConfig};
use super::report::{Check, Row, StudyReport};
use super::suite::SuiteFunction;
use crate::calculus::finite_diff::finite_diff;
use crate::calculus::{inverse_map_derivatives, singular_values, MapFamily, MultiIndex};
use crate::error::{Error, Result};
use crate::extension::{extend, extension_covering};
use crate::geometry::domain::Shape;
use crate::geometry::{check_corkscrew, Domain, WhitneyOptions};
use crate::geometry::checks::default_corkscrew_radii;
use crate::spaces::{
    holder_norm, holder_seminorm, lp_norm, resample_through_map, tl_norms, NormSpec, NormValue,
    SampledFunction, TlOptions,
};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::Instant;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "LIZORKIN_WORKERS";

/// Sizes the global worker pool from `LIZORKIN_WORKERS` (once per process)
/// and returns the worker count in effect.
pub fn init_workers() -> usize {
    if let Some(n) = std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        // a second initialization is a no-op
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    rayon::current_num_threads()
}

/// Boundary points per polygon edge when mapping a domain.
const IMAGE_EDGE_POINTS: usize = 64;

/// Points sampled for the inverse-derivative cross-check.
const CROSS_CHECK_POINTS: usize = 9;

pub fn run_study(cfg: &StudyConfig) -> Result<StudyReport> {
    let start = Instant::now();
    let mut report = match cfg.study {
        Study::Equivalence => study_equivalence(cfg)?,
        Study::Composition => study_composition(cfg)?,
        Study::Inverse => study_inverse(cfg)?,
        Study::Holder => study_holder(cfg)?,
        Study::Interpolation => study_interpolation(cfg)?,
        Study::Extension => study_extension(cfg)?,
    };
    report.metadata.study = cfg.study.name().into();
    report.metadata.seed = cfg.seed;
    report.metadata.workers = rayon::current_num_threads();
    report.metadata.config = serde_json::to_value(cfg)?;
    report.metadata.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn tl_opts(cfg: &StudyConfig) -> TlOptions {
    TlOptions {
        ball_budget: cfg.ball_budget,
        ..Default::default()
    }
}

fn sample(f: &SuiteFunction, dom: &Domain, h: f64) -> Result<SampledFunction> {
    SampledFunction::from_scalar(dom, h, |x| f.eval(x))
}

/// The map itself as a `d`-vector field on `dom`.
fn map_field(map: &MapFamily, dom: &Domain, h: f64) -> Result<SampledFunction> {
    SampledFunction::from_fn(dom, h, map.dim(), |x| map.eval(x))
}

/// `(||Df||_inf, ||Df^{-1}||_inf)` in the spectral norm over the samples of
/// `dom`; errors if the Jacobian degenerates or changes orientation.
fn jacobian_bounds(map: &MapFamily, dom: &Domain, h: f64) -> Result<(f64, f64)> {
    let probe = SampledFunction::from_scalar(dom, h, |_| 0.0)?;
    let d = map.dim();
    let mut a: f64 = 0.0;
    let mut b: f64 = 0.0;
    let mut orientation = 0.0;
    for i in probe.present_indices() {
        let x = probe.point(i);
        let j = map.jacobian(&x[..d]);
        let det = if d == 1 { j[0][0] } else { j[0][0] * j[1][1] - j[0][1] * j[1][0] };
        let (smax, smin) = singular_values(&j);
        if !(smin > 0.0) || det * orientation < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "{} is not bi-Lipschitz on the samples of {} (at {:?})",
                map.name(),
                dom.name,
                &x[..d]
            )));
        }
        orientation = det.signum();
        a = a.max(smax);
        b = b.max(1.0 / smin);
    }
    Ok((a, b))
}

/// `f(omega)` for an interval or a slit-free polygon, by mapping the boundary.
pub fn image_domain(omega: &Domain, map: &MapFamily) -> Result<Domain> {
    let name = format!("{}[{}]", map.name(), omega.name);
    match &omega.shape {
        Shape::Interval { a, b } => {
            let (fa, fb) = (map.eval(&[*a])[0], map.eval(&[*b])[0]);
            let mut d = Domain::interval(fa.min(fb), fa.max(fb))?;
            d.name = name;
            Ok(d)
        }
        Shape::Polygon { vertices, slits } if slits.is_empty() => {
            let mut pts = Vec::new();
            for (i, v) in vertices.iter().enumerate() {
                let w = vertices[(i + 1) % vertices.len()];
                for t in 0..IMAGE_EDGE_POINTS {
                    let s = t as f64 / IMAGE_EDGE_POINTS as f64;
                    let p = [v[0] + s * (w[0] - v[0]), v[1] + s * (w[1] - v[1])];
                    let y = map.eval(&p);
                    pts.push([y[0], y[1]]);
                }
            }
            Domain::polygon(&name, pts)
        }
        _ => Err(Error::Capability(format!(
            "image domains need an interval or a slit-free polygon, not {}",
            omega.name
        ))),
    }
}

/// The bounding box of `dom` grown by `margin`, as a domain.
fn enlarged_box(dom: &Domain, margin: f64) -> Result<Domain> {
    let b = dom.bbox.expanded(margin);
    if dom.dim() == 1 {
        return Domain::interval(b.lo[0], b.hi[0]);
    }
    Domain::polygon(
        &format!("box[{}]", dom.name),
        vec![[b.lo[0], b.lo[1]], [b.hi[0], b.lo[1]], [b.hi[0], b.hi[1]], [b.lo[0], b.hi[1]]],
    )
}

fn keep_inside(f: &SampledFunction, dom: &Domain) -> SampledFunction {
    let d = f.dim();
    let keep: Vec<bool> = (0..f.len()).map(|i| dom.contains(&f.point(i)[..d])).collect();
    let mut g = f.restricted(&keep);
    g.domain = dom.name.clone();
    g
}

fn sup_gradient(f: &SampledFunction) -> Result<f64> {
    lp_norm(&finite_diff(f, 1)?, f64::INFINITY)
}

fn spec_case(spec: &NormSpec) -> String {
    format!("s={} p={} q={} u={} rho={}", spec.s, spec.p, spec.q, spec.u, spec.rho)
}

/// A measured ratio keyed by curve, one entry per resolution.
#[derive(Default)]
struct Curves {
    // curve -> (template row, [(h, value)])
    curves: BTreeMap<String, (Row, Vec<(f64, f64)>)>,
    order: Vec<String>,
}

impl Curves {
    fn add(&mut self, key: &str, template: &Row, h: f64, value: f64) {
        if !self.curves.contains_key(key) {
            self.order.push(key.to_string());
        }
        self.curves
            .entry(key.to_string())
            .or_insert_with(|| (template.clone(), Vec::new()))
            .1
            .push((h, value));
    }

    /// Drift rows over the final refinement pair of every curve (a failing
    /// scored row when fewer than two resolutions produced a value) and the
    /// long-format curve points.
    fn finish(self, report: &mut StudyReport, study: &str, drift: f64, finest: f64, previous: f64) {
        for key in &self.order {
            let (template, pts) = &self.curves[key];
            for &(h, v) in pts {
                report.curve(key, h, v);
            }
            let at = |h: f64| pts.iter().find(|p| p.0 == h).map(|p| p.1);
            let mut row = template.clone();
            row.study = study.into();
            row.case = format!("drift {}", template.case);
            row.h = finest;
            row.c_f = f64::NAN;
            row.note.clear();
            row = match (at(finest), at(previous)) {
                (Some(a), Some(b)) => row.values(a, b, Check::Drift, drift, true),
                _ => row.error(&"final refinement pair unavailable", true),
            };
            report.push(row);
        }
    }
}

fn final_pair(res: &[f64]) -> (f64, f64) {
    let n = res.len();
    if n >= 2 {
        (res[n - 1], res[n - 2])
    } else {
        (res[0], f64::NAN)
    }
}

/// Equivalence of the `(u, rho)` variants of the norm, per suite function.
pub fn study_equivalence(cfg: &StudyConfig) -> Result<StudyReport> {
    let study = "equivalence";
    let dom = Domain::resolve(&cfg.domain)?;
    let d = dom.dim();
    let specs = cfg.specs(d);
    let opts = tl_opts(cfg);
    let mut report = StudyReport::new(study);
    report
        .metadata
        .notes
        .push("ratio = tl_norm(u, rho) / tl_norm(u_0, rho_0) with (u_0, rho_0) the first listed pair".into());
    let mut curves = Curves::default();
    // reference spec of each (s, p, q) group
    let reference = |spec: &NormSpec| {
        specs
            .iter()
            .find(|r| r.s == spec.s && r.p == spec.p && r.q == spec.q)
            .copied()
            .unwrap()
    };
    for &h in &cfg.resolutions {
        let mut functions: Vec<SuiteFunction> = Vec::new();
        for spec in &specs {
            for f in cfg.suite(spec.s, spec.p) {
                if !functions.contains(&f) {
                    functions.push(f);
                }
            }
        }
        let results: Vec<(SuiteFunction, Vec<(NormSpec, Result<NormValue>)>)> = functions
            .par_iter()
            .map(|f| {
                let members: Vec<NormSpec> =
                    specs.iter().copied().filter(|s| f.belongs(s.s, s.p)).collect();
                let norms = match sample(f, &dom, h) {
                    Ok(fs) => tl_norms(&fs, &members, &opts),
                    Err(e) => members.iter().map(|_| Err(Error::InvalidArgument(e.to_string()))).collect(),
                };
                (f.clone(), members.into_iter().zip(norms).collect())
            })
            .collect();
        for (f, norms) in results {
            let value = |s: &NormSpec| norms.iter().find(|n| n.0 == *s).and_then(|n| n.1.as_ref().ok());
            for (spec, norm) in &norms {
                let row = Row::new(study, &spec_case(spec))
                    .function(&f.name())
                    .domain(&dom.name)
                    .h(h)
                    .spec(spec);
                let norm = match norm {
                    Ok(n) => n,
                    Err(e) => {
                        report.push(row.error(e, false));
                        continue;
                    }
                };
                if f.is_zero() {
                    report.push(
                        row.values(norm.total, 0.0, Check::Record, f64::NAN, false)
                            .note("f = 0: ratio undefined, excluded"),
                    );
                    continue;
                }
                let r = reference(spec);
                match value(&r) {
                    Some(base) => {
                        let is_ref = r == *spec;
                        let row = row.values(norm.total, base.total, Check::Within, cfg.interval, !is_ref);
                        curves.add(&format!("{} {}", f.name(), spec_case(spec)), &row, h, row.ratio);
                        report.push(if is_ref { row.note("reference") } else { row });
                    }
                    None => report.push(row.error(&"reference norm unavailable", true)),
                }
                // nested t-ranges: rho' < rho means fewer levels
                for other in &norms {
                    let o = &other.0;
                    if o.s == spec.s && o.p == spec.p && o.q == spec.q && o.u == spec.u && o.rho > spec.rho {
                        if let Ok(big) = &other.1 {
                            report.push(
                                Row::new(study, &format!("rho monotone {} <= rho={}", spec_case(spec), o.rho))
                                    .function(&f.name())
                                    .domain(&dom.name)
                                    .h(h)
                                    .spec(spec)
                                    .values(norm.seminorm, big.seminorm, Check::LeMargin, 1.0, true),
                            );
                        }
                    }
                }
            }
        }
    }
    let (finest, previous) = final_pair(&cfg.resolutions);
    curves.finish(&mut report, study, cfg.drift, finest, previous);
    Ok(report)
}

/// `||Lambda_k f|| / ||f||` for every suite member, `k = floor(s)`.
pub fn study_extension(cfg: &StudyConfig) -> Result<StudyReport> {
    let study = "extension";
    let dom = Domain::resolve(&cfg.domain)?;
    let d = dom.dim();
    let specs = cfg.specs(d);
    let opts = tl_opts(cfg);
    let mut report = StudyReport::new(study);
    report.metadata.notes.push(
        "ratio = tl_norm(Lambda_k f on the padded box) / tl_norm(f on the domain); \
         the implicit constant depends on the extension constants of the domain, which are recorded but not isolated"
            .into(),
    );
    let mut curves = Curves::default();
    let wopts = WhitneyOptions::default();
    for (level, &h) in cfg.resolutions.iter().enumerate() {
        let cov = extension_covering(&dom, h, &wopts)?;
        report.metadata.covering_hashes.push(cov.hash());
        report.metadata.l0 = Some(cov.l0);
        if level == 0 && d == 2 {
            let radii = default_corkscrew_radii(&cov);
            let points = dom.boundary_samples(dom.delta / 16.0);
            let ck = check_corkscrew(&dom, &cov, &radii, &points);
            report.metadata.epsilon_empirical = Some(ck.epsilon);
        }
        let mut jobs: Vec<(SuiteFunction, u32, Vec<NormSpec>)> = Vec::new();
        for k in 0..=3u32 {
            let group: Vec<NormSpec> = specs.iter().copied().filter(|s| s.k() == k).collect();
            if group.is_empty() {
                continue;
            }
            let mut fs: Vec<SuiteFunction> = Vec::new();
            for s in &group {
                for f in cfg.suite(s.s, s.p) {
                    if !fs.contains(&f) && !f.is_zero() {
                        fs.push(f);
                    }
                }
            }
            for f in fs {
                let members: Vec<NormSpec> = group.iter().copied().filter(|s| f.belongs(s.s, s.p)).collect();
                jobs.push((f, k, members));
            }
        }
        let results: Vec<_> = jobs
            .par_iter()
            .map(|(f, k, members)| -> Result<_> {
                let fs = sample(f, &dom, h)?;
                let ext = extend(&fs, *k, &cov)?;
                // restriction identity: Lambda_k f = f at every sample
                let mut worst: f64 = 0.0;
                for i in 0..ext.function.len() {
                    if ext.interior[i] {
                        let x = ext.function.point(i);
                        worst = worst.max((ext.function.scalar(i) - f.eval(&x[..d])).abs());
                    }
                }
                let on_ext = tl_norms(&ext.function, members, &opts);
                let on_dom = tl_norms(&fs, members, &opts);
                Ok((worst, ext.stats.clone(), on_ext, on_dom))
            })
            .collect();
        for ((f, k, members), res) in jobs.iter().zip(results) {
            let base = Row::new(study, "").function(&f.name()).domain(&dom.name).h(h);
            let (worst, stats, on_ext, on_dom) = match res {
                Ok(v) => v,
                Err(e) => {
                    let mut row = base.error(&e, true);
                    row.case = format!("k={k}");
                    report.push(row);
                    continue;
                }
            };
            let mut row = base.clone().values(worst, 0.0, Check::AtMost, 0.0, true).note(format!(
                "dropped={} uncovered={} beyond_collar={} failed_projections={}",
                stats.dropped_cubes, stats.uncovered_points, stats.beyond_collar_points, stats.failed_projections
            ));
            row.case = format!("restriction k={k}");
            report.push(row);
            for ((spec, e), b) in members.iter().zip(on_ext).zip(on_dom) {
                let mut row = base.clone().spec(spec);
                row.case = format!("k={k} {}", spec_case(spec));
                match (e, b) {
                    (Ok(e), Ok(b)) => {
                        let row = row.values(e.total, b.total, Check::Finite, f64::NAN, true);
                        curves.add(&format!("{} {}", f.name(), spec_case(spec)), &row, h, row.ratio);
                        report.push(row);
                    }
                    (Err(e), _) | (_, Err(e)) => report.push(row.error(&e, true)),
                }
            }
        }
    }
    let (finest, previous) = final_pair(&cfg.resolutions);
    curves.finish(&mut report, study, cfg.drift, finest, previous);
    Ok(report)
}

/// Per-`(map, h)` quantities shared by every `g`.
struct MapData {
    omega2: Domain,
    big: Domain,
    grad: f64,
    grad_inv: f64,
    norms: Vec<(NormSpec, Result<NormValue>)>,
}

fn map_data(map: &MapFamily, omega1: &Domain, h: f64, specs: &[NormSpec], opts: &TlOptions) -> Result<MapData> {
    let omega2 = if matches!(map, MapFamily::Identity { .. }) {
        omega1.clone()
    } else {
        image_domain(omega1, map)?
    };
    let big = enlarged_box(&omega2, 4.0 * h)?;
    let (grad, grad_inv) = jacobian_bounds(map, omega1, h)?;
    let field = map_field(map, omega1, h)?;
    let norms = specs.iter().copied().zip(tl_norms(&field, specs, opts)).collect();
    Ok(MapData {
        omega2,
        big,
        grad,
        grad_inv,
        norms,
    })
}

/// `C_f = (1 + ||Df^{-1}||^{d/p}) (1 + ||Df^{-1}||^d ||Df||^d)`.
pub fn composition_constant(d: usize, p: f64, grad: f64, grad_inv: f64) -> f64 {
    let d = d as f64;
    (1.0 + grad_inv.powf(d / p)) * (1.0 + grad_inv.powf(d) * grad.powf(d))
}

struct CompositionCase {
    lhs: f64,
    rhs: f64,
    c_f: f64,
}

/// LHS and RHS of the composition inequality for `g` sampled on the box
/// around `Omega_2`, one entry per spec.
fn composition_case(
    g_big: &SampledFunction,
    map: &MapFamily,
    omega1: &Domain,
    md: &MapData,
    h: f64,
    specs: &[NormSpec],
    opts: &TlOptions,
) -> Vec<Result<CompositionCase>> {
    let inner = || -> Result<(Vec<Result<NormValue>>, Vec<Result<NormValue>>, f64)> {
        let gf = resample_through_map(g_big, map, omega1, h)?;
        let g2 = keep_inside(g_big, &md.omega2);
        let grad_g = sup_gradient(&g2)?;
        Ok((tl_norms(&gf, specs, opts), tl_norms(&g2, specs, opts), grad_g))
    };
    match inner() {
        Err(e) => specs.iter().map(|_| Err(Error::InvalidArgument(e.to_string()))).collect(),
        Ok((lhs, gn, grad_g)) => specs
            .iter()
            .zip(lhs)
            .zip(gn)
            .map(|((spec, l), g)| {
                let l = l?;
                let g = g?;
                let f_norm = md
                    .norms
                    .iter()
                    .find(|n| n.0 == *spec)
                    .map(|n| n.1.as_ref().map(|v| v.total).map_err(|e| Error::InvalidArgument(e.to_string())))
                    .unwrap_or_else(|| Err(Error::InvalidArgument("map norm missing".into())))?;
                let c_f = composition_constant(omega1.dim(), spec.p, md.grad, md.grad_inv);
                let rhs = c_f * (g.total * md.grad.powf(spec.s) + grad_g * f_norm);
                Ok(CompositionCase { lhs: l.total, rhs, c_f })
            })
            .collect(),
    }
}

fn with_identity(maps: &[MapFamily], d: usize) -> Vec<MapFamily> {
    let mut out = vec![MapFamily::Identity { d }];
    out.extend(maps.iter().filter(|m| !matches!(m, MapFamily::Identity { .. })).cloned());
    out
}

fn is_constant(f: &SuiteFunction) -> bool {
    matches!(f, SuiteFunction::Constant(_))
}

/// `||g o f||_F <= margin C_f (||g||_F ||Df||^s + ||Dg||_inf ||f||_F)`.
pub fn study_composition(cfg: &StudyConfig) -> Result<StudyReport> {
    let study = "composition";
    let omega1 = Domain::resolve(&cfg.domain)?;
    let d = omega1.dim();
    let specs = cfg.specs(d);
    let opts = tl_opts(cfg);
    let maps = with_identity(&cfg.maps, d);
    let mut report = StudyReport::new(study);
    report.metadata.notes.push(
        "margin calibrated on identity-map and constant-g rows, frozen before scoring; \
         the implicit constant depends on the extension constants of both domains (not isolated)"
            .into(),
    );
    // measurements: (row template, case result, calibration?)
    let mut measured: Vec<(Row, Result<CompositionCase>, bool)> = Vec::new();
    let mut homogeneity: Vec<Row> = Vec::new();
    let (finest, previous) = final_pair(&cfg.resolutions);
    for &h in &cfg.resolutions {
        for map in &maps {
            let md = match map_data(map, &omega1, h, &specs, &opts) {
                Ok(md) => md,
                Err(e) => {
                    let row = Row::new(study, "map").map(&map.name()).domain(&omega1.name).h(h);
                    measured.push((row, Err(e), false));
                    continue;
                }
            };
            let identity = matches!(map, MapFamily::Identity { .. });
            let mut gs: Vec<SuiteFunction> = Vec::new();
            for spec in &specs {
                for g in cfg.suite(spec.s, spec.p) {
                    if !gs.contains(&g) && !g.is_zero() {
                        gs.push(g);
                    }
                }
            }
            let results: Vec<_> = gs
                .par_iter()
                .map(|g| {
                    let members: Vec<NormSpec> = specs.iter().copied().filter(|s| g.belongs(s.s, s.p)).collect();
                    let cases = match sample(g, &md.big, h) {
                        Ok(gb) => composition_case(&gb, map, &omega1, &md, h, &members, &opts),
                        Err(e) => members.iter().map(|_| Err(Error::InvalidArgument(e.to_string()))).collect(),
                    };
                    (members, cases)
                })
                .collect();
            for (g, (members, cases)) in gs.iter().zip(results) {
                for (spec, case) in members.iter().zip(cases) {
                    let row = Row::new(study, &spec_case(spec))
                        .function(&g.name())
                        .map(&map.name())
                        .domain(&format!("{} -> {}", omega1.name, md.omega2.name))
                        .h(h)
                        .spec(spec);
                    measured.push((row, case, identity || is_constant(g)));
                }
            }
            // homogeneity: g -> 2g scales LHS and RHS alike
            if h == finest && !identity {
                if let Some(g) = gs.iter().find(|g| !is_constant(g)) {
                    let spec = specs.iter().copied().find(|s| g.belongs(s.s, s.p));
                    if let (Some(spec), Ok(gb)) = (spec, sample(g, &md.big, h)) {
                        let one = composition_case(&gb, map, &omega1, &md, h, &[spec], &opts).remove(0);
                        let two = composition_case(&gb.scaled(2.0), map, &omega1, &md, h, &[spec], &opts).remove(0);
                        let row = Row::new(study, "homogeneity g -> 2g")
                            .function(&g.name())
                            .map(&map.name())
                            .domain(&omega1.name)
                            .h(h)
                            .spec(&spec);
                        homogeneity.push(match (one, two) {
                            (Ok(a), Ok(b)) => row.values(b.lhs / b.rhs, a.lhs / a.rhs, Check::Equal, 1e-12, true),
                            (Err(e), _) | (_, Err(e)) => row.error(&e, true),
                        });
                    }
                }
            }
        }
    }
    let calibrated = measured
        .iter()
        .filter(|m| m.2)
        .filter_map(|m| m.1.as_ref().ok().map(|c| c.lhs / c.rhs))
        .fold(1.0, f64::max);
    let margin = cfg.margin.unwrap_or(calibrated);
    report.metadata.margin = Some(margin);
    let mut curves = Curves::default();
    for (row, case, calibration) in measured {
        match case {
            Ok(c) => {
                let row = row
                    .c_f(c.c_f)
                    .values(c.lhs, c.rhs, Check::LeMargin, margin, !calibration);
                if !calibration {
                    let key = format!("{} {} {}", row.map, row.function, row.case);
                    curves.add(&key, &row, row.h, row.ratio);
                }
                report.push(if calibration { row.note("calibration") } else { row });
            }
            Err(e) => report.push(row.error(&e, !calibration)),
        }
    }
    for row in homogeneity {
        report.push(row);
    }
    curves.finish(&mut report, study, cfg.drift, finest, previous);
    Ok(report)
}

/// `||Df||^{dk-2} ||Df^{-1}||^{dk} (1 + ||Df||^d ||Df^{-1}||^d)`.
pub fn inverse_bound_factor(d: usize, k: u32, grad: f64, grad_inv: f64) -> f64 {
    let dk = (d as u32 * k) as i32;
    let d = d as i32;
    grad.powi(dk - 2) * grad_inv.powi(dk) * (1.0 + grad.powi(d) * grad_inv.powi(d))
}

/// Largest relative gap between the derivatives of `f^{-1}` from the
/// symbolic inverse expansion (at a Newton-inverted point) and the
/// closed-form 1-D formulas at the analytic inverse.
pub fn inverse_cross_check(map: &MapFamily, omega2: &Domain) -> Result<f64> {
    if map.dim() != 1 {
        return Err(Error::Capability("the closed-form cross-check is one-dimensional".into()));
    }
    let (lo, hi) = (omega2.bbox.lo[0], omega2.bbox.hi[0]);
    let mut worst: f64 = 0.0;
    for i in 0..CROSS_CHECK_POINTS {
        let y = lo + (hi - lo) * (i as f64 + 0.5) / CROSS_CHECK_POINTS as f64;
        let x_newton = map.newton_inverse(&[y], &[y])?;
        let jets = map.jet(&x_newton, 3);
        let sym = inverse_map_derivatives(&jets, 1, 3)?;
        let x = map.inverse(&[y])?;
        let e = |n: u32| map.derivative(0, &MultiIndex::new(vec![n]), &x);
        let (f1, f2, f3) = (e(1), e(2), e(3));
        let exact = [
            1.0 / f1,
            -f2 / f1.powi(3),
            (3.0 * f2 * f2 - f1 * f3) / f1.powi(5),
        ];
        for (n, want) in exact.iter().enumerate() {
            let got = sym[0]
                .get(&MultiIndex::new(vec![n as u32 + 1]))
                .ok_or_else(|| Error::InvalidArgument("missing inverse derivative".into()))?;
            worst = worst.max((got - want).abs() / want.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// `||f^{-1}||_F(Omega_2)` against the inverse bound shape times `||f||_F`.
pub fn study_inverse(cfg: &StudyConfig) -> Result<StudyReport> {
    let study = "inverse";
    let opts = tl_opts(cfg);
    let mut report = StudyReport::new(study);
    let mut curves = Curves::default();
    for map in &cfg.maps {
        let d = map.dim();
        let omega1 = if d == 1 {
            Domain::builtin("interval")?
        } else {
            Domain::resolve(&cfg.domain).and_then(|o| {
                if o.dim() == d {
                    Ok(o)
                } else {
                    Domain::builtin("square")
                }
            })?
        };
        let res = if d == 1 { &cfg.resolutions } else { &cfg.resolutions_2d };
        let specs = cfg.specs(d);
        let omega2 = image_domain(&omega1, map)?;
        let identity = matches!(map, MapFamily::Identity { .. });
        if d == 1 && !identity {
            let row = Row::new(study, "inverse derivatives: expansion vs closed form")
                .map(&map.name())
                .domain(&omega2.name);
            report.push(match inverse_cross_check(map, &omega2) {
                Ok(err) => row.values(err, 0.0, Check::AtMost, 1e-8, true),
                Err(e) => row.error(&e, true),
            });
        }
        for &h in res {
            let measure = || -> Result<(Vec<Result<NormValue>>, Vec<Result<NormValue>>, f64, f64)> {
                let (grad, grad_inv) = jacobian_bounds(map, &omega1, h)?;
                let f = map_field(map, &omega1, h)?;
                let failed = std::cell::RefCell::new(None);
                let inv = SampledFunction::from_fn(&omega2, h, d, |y| match map.inverse(y) {
                    Ok(x) => x,
                    Err(e) => {
                        failed.borrow_mut().get_or_insert(e.to_string());
                        vec![f64::NAN; d]
                    }
                })?;
                if let Some(e) = failed.into_inner() {
                    return Err(Error::NoConvergence(e));
                }
                Ok((tl_norms(&inv, &specs, &opts), tl_norms(&f, &specs, &opts), grad, grad_inv))
            };
            let base = Row::new(study, "").map(&map.name()).domain(&format!("{} -> {}", omega1.name, omega2.name)).h(h);
            let (inv, fwd, grad, grad_inv) = match measure() {
                Ok(v) => v,
                Err(e) => {
                    let mut row = base.error(&e, true);
                    row.case = "inverse".into();
                    report.push(row);
                    continue;
                }
            };
            for ((spec, a), b) in specs.iter().zip(inv).zip(fwd) {
                let mut row = base.clone().spec(spec);
                row.case = spec_case(spec);
                let (a, b) = match (a, b) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => {
                        report.push(row.error(&e, true));
                        continue;
                    }
                };
                if identity {
                    row.case = format!("identity {}", row.case);
                    report.push(row.values(a.total, b.total, Check::Equal, 1e-12, true));
                    continue;
                }
                let factor = inverse_bound_factor(d, spec.k(), grad, grad_inv);
                let row = row.c_f(factor).values(a.total, factor * b.total, Check::Finite, f64::NAN, true);
                curves.add(&format!("{} {}", map.name(), spec_case(spec)), &row, h, row.ratio);
                report.push(row);
            }
        }
        if !identity {
            // drift over this map's own resolutions
            let (finest, previous) = final_pair(res);
            let mut mine = Curves::default();
            for key in curves.order.drain(..) {
                let (t, pts) = curves.curves.remove(&key).unwrap();
                for (h, v) in pts {
                    mine.add(&key, &t, h, v);
                }
            }
            mine.finish(&mut report, study, cfg.drift, finest, previous);
        }
    }
    Ok(report)
}

/// `|g o f|_{C^s} <= margin (1 + ||Df||)^s (1 + |f|_{C^s}) ||g||_{C^s}`, and
/// `f^{-1} in C^s`.
pub fn study_holder(cfg: &StudyConfig) -> Result<StudyReport> {
    let study = "holder";
    let omega1 = Domain::resolve(&cfg.domain)?;
    let d = omega1.dim();
    let maps = with_identity(&cfg.maps, d);
    let mut report = StudyReport::new(study);
    let mut measured: Vec<(Row, Result<(f64, f64, f64)>, bool)> = Vec::new();
    let mut s_values = cfg.s.clone();
    s_values.retain(|s| s.fract() != 0.0 && *s > 0.0);
    for &h in &cfg.resolutions {
        for map in &maps {
            let identity = matches!(map, MapFamily::Identity { .. });
            let omega2 = if identity { Ok(omega1.clone()) } else { image_domain(&omega1, map) };
            let prep = omega2.and_then(|o2| {
                let big = enlarged_box(&o2, 4.0 * h)?;
                let (grad, _) = jacobian_bounds(map, &omega1, h)?;
                let field = map_field(map, &omega1, h)?;
                Ok((o2, big, grad, field))
            });
            let (omega2, big, grad, field) = match prep {
                Ok(v) => v,
                Err(e) => {
                    measured.push((Row::new(study, "map").map(&map.name()).h(h), Err(e), false));
                    continue;
                }
            };
            for &s in &s_values {
                let f_semi = holder_seminorm(&field, s);
                if !identity {
                    // f^{-1} in C^s on Omega_2
                    let row = Row::new(study, &format!("inverse s={s}"))
                        .map(&map.name())
                        .domain(&omega2.name)
                        .h(h);
                    let inv = SampledFunction::from_fn(&omega2, h, d, |y| map.inverse(y).unwrap_or(vec![f64::NAN; d]))
                        .and_then(|inv| holder_seminorm(&inv, s));
                    report.push(match inv {
                        Ok(v) => {
                            let mut r = row.values(v, f64::NAN, Check::AtMost, f64::INFINITY, true);
                            r.s = s;
                            r
                        }
                        Err(e) => row.error(&e, true),
                    });
                }
                let gs: Vec<SuiteFunction> = cfg.suite(s, 2.0).into_iter().filter(|g| !g.is_zero()).collect();
                let results: Vec<Result<(f64, f64, f64)>> = gs
                    .par_iter()
                    .map(|g| {
                        let gb = sample(g, &big, h)?;
                        let gf = resample_through_map(&gb, map, &omega1, h)?;
                        let g2 = keep_inside(&gb, &omega2);
                        let lhs = holder_seminorm(&gf, s)?;
                        let f_semi = match &f_semi {
                            Ok(v) => *v,
                            Err(e) => return Err(Error::InvalidArgument(e.to_string())),
                        };
                        let c_f = (1.0 + grad).powf(s) * (1.0 + f_semi);
                        Ok((lhs, c_f * holder_norm(&g2, s)?, c_f))
                    })
                    .collect();
                for (g, r) in gs.iter().zip(results) {
                    let mut row = Row::new(study, &format!("s={s}"))
                        .function(&g.name())
                        .map(&map.name())
                        .domain(&format!("{} -> {}", omega1.name, omega2.name))
                        .h(h);
                    row.s = s;
                    measured.push((row, r, identity || is_constant(g)));
                }
            }
        }
    }
    let calibrated = measured
        .iter()
        .filter(|m| m.2)
        .filter_map(|m| m.1.as_ref().ok().map(|c| c.0 / c.1))
        .fold(1.0, f64::max);
    let margin = cfg.margin.unwrap_or(calibrated);
    report.metadata.margin = Some(margin);
    for (row, r, calibration) in measured {
        match r {
            Ok((lhs, rhs, c_f)) => {
                let row = row.c_f(c_f).values(lhs, rhs, Check::LeMargin, margin, !calibration);
                report.push(if calibration { row.note("calibration") } else { row });
            }
            Err(e) => report.push(row.error(&e, !calibration)),
        }
    }
    Ok(report)
}

/// Recorded constant of
/// `||D^j f||_{L^{p(s-1)/(j-1)}} <= C ||f||_F^{(j-1)/(s-1)} ||Df||_inf^{(s-j)/(s-1)}`.
pub fn study_interpolation(cfg: &StudyConfig) -> Result<StudyReport> {
    let study = "interpolation";
    let dom = Domain::resolve(&cfg.domain)?;
    let d = dom.dim();
    let specs = cfg.specs(d);
    let opts = tl_opts(cfg);
    for spec in &specs {
        let k = spec.k();
        if k < 1 {
            return Err(Error::Config(format!("interpolation needs s >= 1, got s = {}", spec.s)));
        }
        for &j in &cfg.j {
            if j > k {
                return Err(Error::Config(format!("j = {j} exceeds k = {k} for s = {}", spec.s)));
            }
        }
    }
    let mut report = StudyReport::new(study);
    let mut curves = Curves::default();
    let (finest, previous) = final_pair(&cfg.resolutions);
    let constant = |f: &SampledFunction, spec: &NormSpec, j: u32| -> Result<(f64, f64)> {
        let e = (j as f64 - 1.0) / (spec.s - 1.0);
        let r = spec.p * (spec.s - 1.0) / (j as f64 - 1.0);
        let lhs = lp_norm(&finite_diff(f, j)?, r)?;
        let norm = tl_norms(f, std::slice::from_ref(spec), &opts).remove(0)?;
        let rhs = norm.total.powf(e) * sup_gradient(f)?.powf(1.0 - e);
        Ok((lhs, rhs))
    };
    for &h in &cfg.resolutions {
        for spec in &specs {
            for f in cfg.suite(spec.s, spec.p) {
                if f.is_zero() {
                    continue;
                }
                let fs = sample(&f, &dom, h)?;
                for &j in &cfg.j {
                    let row = Row::new(study, &format!("j={j} {}", spec_case(spec)))
                        .function(&f.name())
                        .domain(&dom.name)
                        .h(h)
                        .spec(spec);
                    if j == 1 {
                        report.push(row.note("j = 1: exponent degenerate, excluded"));
                        continue;
                    }
                    match constant(&fs, spec, j) {
                        Ok((lhs, rhs)) => {
                            let row = row.values(lhs, rhs, Check::Finite, f64::NAN, true);
                            let ratio = row.ratio;
                            curves.add(&format!("{} j={j} {}", f.name(), spec_case(spec)), &row, h, ratio);
                            report.push(row);
                            if h == finest {
                                // 2f: LHS x2, RHS x2^e x2^(1-e)
                                let twice = Row::new(study, &format!("scaling 2f j={j} {}", spec_case(spec)))
                                    .function(&f.name())
                                    .domain(&dom.name)
                                    .h(h)
                                    .spec(spec);
                                report.push(match constant(&fs.scaled(2.0), spec, j) {
                                    Ok((l2, r2)) => twice.values(l2 / r2, ratio, Check::Equal, 1e-12, true),
                                    Err(e) => twice.error(&e, true),
                                });
                            }
                        }
                        Err(e) => report.push(row.error(&e, true)),
                    }
                }
            }
        }
    }
    curves.finish(&mut report, study, cfg.drift, finest, previous);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_of_square_under_shear() {
        let sq = Domain::builtin("square").unwrap();
        let img = image_domain(&sq, &MapFamily::Shear { lambda: 0.5 }).unwrap();
        assert!((img.measure() - 1.0).abs() < 1e-12);
        assert!(img.contains(&[0.9, 1.4]));
        assert!(!img.contains(&[0.1, 1.4]));
        let iv = image_domain(&Domain::builtin("interval").unwrap(), &MapFamily::Cubic { c: 0.1 }).unwrap();
        assert_eq!(iv.bbox.hi[0], 1.1);
    }

    #[test]
    fn constants() {
        // identity: every Jacobian norm is 1, so C_f = 2 * 2
        assert_eq!(composition_constant(2, 2.0, 1.0, 1.0), 4.0);
        assert_eq!(inverse_bound_factor(1, 1, 2.0, 1.0), 0.5 * 1.0 * 3.0);
    }

    #[test]
    fn bi_lipschitz_guard() {
        let sq = Domain::builtin("square").unwrap();
        let fold = MapFamily::Perturbation { a: 1.0, b: 3.0 };
        assert!(jacobian_bounds(&fold, &sq, 1.0 / 16.0).is_err());
        let (a, b) = jacobian_bounds(&MapFamily::linear_cond2(), &sq, 1.0 / 8.0).unwrap();
        assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cubic_cross_check() {
        let m = MapFamily::Cubic { c: 0.1 };
        let o2 = image_domain(&Domain::builtin("interval").unwrap(), &m).unwrap();
        assert!(inverse_cross_check(&m, &o2).unwrap() < 1e-10);
    }
}
