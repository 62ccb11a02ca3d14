//! Sampled corkscrew and uniformity constants.

use super::chain::{certify, path_to, shortest_path_tree, Chain, WEIGHT_EXPONENTS};
use super::domain::Domain;
use super::whitney::{CubeIndex, WhitneyCovering};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Clone, Debug, Serialize)]
pub struct BallWitness {
    pub point: Vec<f64>,
    pub radius: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorkscrewReport {
    pub epsilon: f64,
    pub delta: f64,
    pub samples: usize,
    pub worst: Option<BallWitness>,
    /// Balls containing no Whitney cube at the finest resolution.
    pub failures: Vec<BallWitness>,
}

impl CorkscrewReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.epsilon > 0.0
    }
}

/// For each boundary point and radius, the largest interior cube inside the
/// ball, scored by `l(Q) / r`.
pub fn check_corkscrew(
    domain: &Domain,
    cov: &WhitneyCovering,
    radii: &[f64],
    boundary_points: &[Vec<f64>],
) -> CorkscrewReport {
    let set = &cov.interior;
    let index = CubeIndex::new(&set.cubes);
    let mut report = CorkscrewReport {
        epsilon: f64::INFINITY,
        delta: domain.delta,
        samples: 0,
        worst: None,
        failures: Vec::new(),
    };
    for x in boundary_points {
        for &r in radii {
            report.samples += 1;
            let best = index
                .candidates(x, r)
                .into_iter()
                .filter(|&i| set.cubes[i].far_dist_to_point(x) <= r)
                .map(|i| set.cubes[i].side)
                .fold(0.0, f64::max);
            let ratio = best / r;
            let witness = BallWitness {
                point: x.clone(),
                radius: r,
                ratio,
            };
            if best == 0.0 {
                report.failures.push(witness.clone());
            }
            if ratio < report.epsilon {
                report.epsilon = ratio;
                report.worst = Some(witness);
            }
        }
    }
    if report.samples == 0 {
        report.epsilon = 0.0;
    }
    report
}

/// Dyadic radii `delta 2^-j` down to `r_min`.
pub fn dyadic_radii(delta: f64, r_min: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = delta;
    while r >= r_min {
        out.push(r);
        r *= 0.5;
    }
    out
}

/// Radii from `delta / 2` down to the smallest ball that still holds a cube
/// of the finest emitted generation next to the boundary.
pub fn default_corkscrew_radii(cov: &WhitneyCovering) -> Vec<f64> {
    let finest = cov.lattice.side(cov.max_generation);
    dyadic_radii(cov.domain.delta / 2.0, 2.0 * (4.0 * cov.cw + 2.0) * finest)
}

#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    pub from: usize,
    pub to: usize,
    pub long_distance: f64,
    pub epsilon: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UniformityReport {
    pub epsilon: f64,
    pub delta: f64,
    pub pairs: usize,
    pub worst: Option<PairWitness>,
    pub disconnected: Vec<PairWitness>,
}

impl UniformityReport {
    pub fn passed(&self) -> bool {
        self.disconnected.is_empty()
    }
}

fn score_from_source(
    cov: &WhitneyCovering,
    source: usize,
    targets: &[usize],
    delta: f64,
    report: &mut UniformityReport,
    mut keep: Option<&mut Vec<Chain>>,
) {
    let set = &cov.interior;
    let trees: Vec<_> = WEIGHT_EXPONENTS
        .iter()
        .map(|&g| shortest_path_tree(set, source, g))
        .collect();
    for &t in targets {
        let dd = set.cubes[source].long_distance(&set.cubes[t]);
        if dd > delta {
            continue;
        }
        report.pairs += 1;
        let mut best: Option<Chain> = None;
        for (pred, reached) in &trees {
            if !reached[t] {
                continue;
            }
            let path = path_to(pred, source, t);
            let (epsilon, central) = certify(set, &path);
            if best.as_ref().map_or(true, |b| epsilon > b.epsilon) {
                best = Some(Chain {
                    cubes: path,
                    central,
                    epsilon,
                });
            }
        }
        match best {
            None => report.disconnected.push(PairWitness {
                from: source,
                to: t,
                long_distance: dd,
                epsilon: 0.0,
            }),
            Some(ch) => {
                if ch.epsilon < report.epsilon {
                    report.epsilon = ch.epsilon;
                    report.worst = Some(PairWitness {
                        from: source,
                        to: t,
                        long_distance: dd,
                        epsilon: ch.epsilon,
                    });
                }
                if let Some(k) = keep.as_deref_mut() {
                    k.push(ch);
                }
            }
        }
    }
}

fn empty_report(delta: f64) -> UniformityReport {
    UniformityReport {
        epsilon: f64::INFINITY,
        delta,
        pairs: 0,
        worst: None,
        disconnected: Vec::new(),
    }
}

/// Minimum certified `epsilon` over the given pairs with `D(Q, S) <= delta`.
pub fn check_uniformity(
    cov: &WhitneyCovering,
    pairs: &[(usize, usize)],
    delta: f64,
) -> UniformityReport {
    let mut report = empty_report(delta);
    let mut sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    sources.sort_unstable();
    sources.dedup();
    for s in sources {
        let targets: Vec<usize> = pairs.iter().filter(|p| p.0 == s).map(|p| p.1).collect();
        score_from_source(cov, s, &targets, delta, &mut report, None);
    }
    report
}

/// Uniformity over every target reachable within `delta` of `sources`
/// seeded-random interior cubes; also returns the certified chains.
pub fn sample_uniformity(
    cov: &WhitneyCovering,
    sources: usize,
    delta: f64,
    seed: u64,
) -> (UniformityReport, Vec<Chain>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cov.interior.len();
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(&mut rng);
    let mut picks: Vec<usize> = all.into_iter().take(sources.min(n)).collect();
    picks.sort_unstable();
    let targets: Vec<usize> = (0..n).collect();
    let mut report = empty_report(delta);
    let mut chains = Vec::new();
    for s in picks {
        score_from_source(cov, s, &targets, delta, &mut report, Some(&mut chains));
    }
    (report, chains)
}

/// Pairs of equal-side interior cubes on either side of the slit of a
/// slit square, at horizontal distance comparable to their side.
pub fn slit_facing_pairs(cov: &WhitneyCovering, slit_x: f64, max_y: f64) -> Vec<(usize, usize)> {
    let set = &cov.interior;
    let mut out = Vec::new();
    for (i, c) in set.cubes.iter().enumerate() {
        if c.hi(0) <= slit_x && c.lo[1] < max_y {
            let mut coords = c.coords;
            let cells = ((slit_x - c.lo[0]) / c.side).round() as i64;
            coords[0] += 2 * cells - 1;
            if let Some(j) = set.lookup(c.generation, coords) {
                out.push((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::whitney::WhitneyOptions;

    fn cover(name: &str, g: u32) -> WhitneyCovering {
        WhitneyCovering::build(
            &Domain::builtin(name).unwrap(),
            &WhitneyOptions {
                max_generation: g,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn square_corkscrew_positive() {
        let cov = cover("square", 9);
        let pts = cov.domain.boundary_samples(0.05);
        let radii = default_corkscrew_radii(&cov);
        let rep = check_corkscrew(&cov.domain, &cov, &radii, &pts);
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.epsilon <= 1.0);
    }

    #[test]
    fn slit_pairs_are_poorly_connected() {
        let cov = cover("slit-square", 7);
        let pairs = slit_facing_pairs(&cov, 0.5, 0.3);
        assert!(!pairs.is_empty());
        let rep = check_uniformity(&cov, &pairs, 1.0);
        assert!(rep.passed());
        let (sq, _) = sample_uniformity(&cover("square", 7), 8, 1.0, 1);
        assert!(rep.epsilon < sq.epsilon);
    }
}
