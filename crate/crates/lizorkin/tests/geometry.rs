mod common;

use common::sandwich_violations;
use lizorkin::geometry::checks::{default_corkscrew_radii, slit_facing_pairs};
use lizorkin::geometry::{
    check_corkscrew, check_uniformity, sample_uniformity, shadow_sums, Domain, WhitneyCovering, WhitneyOptions,
};

fn cover(name: &str, max_gen: u32) -> WhitneyCovering {
    WhitneyCovering::build(
        &Domain::builtin(name).unwrap(),
        &WhitneyOptions {
            max_generation: max_gen,
            ..Default::default()
        },
    )
    .unwrap()
}

#[test]
fn sandwich_on_builtins() {
    for (name, g) in [("interval", 12), ("square", 7), ("lshape", 7), ("slit-square", 7)] {
        let cov = cover(name, g);
        assert!(!cov.interior.is_empty());
        assert_eq!(sandwich_violations(&cov), 0, "{name}");
    }
}

#[test]
fn neighbors_have_comparable_sides() {
    for name in ["square", "lshape", "slit-square", "disc"] {
        assert!(cover(name, 7).max_neighbor_ratio() <= 2.0, "{name}");
    }
}

#[test]
fn shadow_sums_are_stable() {
    let a = shadow_sums(&cover("square", 6), 4.0, 1.0);
    let b = shadow_sums(&cover("square", 7), 4.0, 1.0);
    for (x, y) in [
        (a.inverse_sum, b.inverse_sum),
        (a.truncated_sum, b.truncated_sum),
        (a.volume_sum, b.volume_sum),
    ] {
        assert!(x.is_finite() && y.is_finite() && x > 0.0);
        assert!(y / x <= 2.0 && x / y <= 2.0, "{x} -> {y}");
    }
}

#[test]
fn corkscrew_square_and_slit() {
    let mut eps = Vec::new();
    for g in [7, 8] {
        let cov = cover("square", g);
        let rep = check_corkscrew(&cov.domain, &cov, &default_corkscrew_radii(&cov), &cov.domain.boundary_samples(0.05));
        assert!(rep.passed());
        eps.push(rep.epsilon);
    }
    assert!(eps[1] / eps[0] <= 2.0 && eps[0] / eps[1] <= 2.0, "{eps:?}");
    let slit = cover("slit-square", 7);
    let rep = check_corkscrew(&slit.domain, &slit, &default_corkscrew_radii(&slit), &slit.domain.boundary_samples(0.05));
    assert!(rep.passed(), "{rep:?}");
}

#[test]
fn slit_weakens_uniformity() {
    let (square, _) = sample_uniformity(&cover("square", 7), 8, 1.0, 1);
    let slit = cover("slit-square", 7);
    let pairs = slit_facing_pairs(&slit, 0.5, 0.3);
    let across = check_uniformity(&slit, &pairs, 1.0);
    assert!(across.passed());
    println!("square eps {} slit eps {}", square.epsilon, across.epsilon);
    assert!(across.epsilon * 4.0 <= square.epsilon);
}
