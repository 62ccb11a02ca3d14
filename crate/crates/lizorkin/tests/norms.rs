mod common;

use lizorkin::calculus::product_difference_expansion;
use lizorkin::geometry::Domain;
use lizorkin::spaces::{tl_norm, tl_seminorm, NormSpec, SampledFunction};
use proptest::prelude::*;

#[test]
fn seminorm_matches_brute_force() {
    let h = 1.0 / 128.0;
    let dom = Domain::builtin("interval").unwrap();
    let f = SampledFunction::from_scalar(&dom, h, |x| x[0]).unwrap();
    let got = tl_seminorm(&f, &NormSpec::new(0.5, 2.0, 2.0, 1.0, 1.0)).unwrap();
    let want = common::brute_force_identity(h, 1.0);
    println!("seminorm {got}, direct {want}");
    assert!(common::drift(want, got) <= 0.10, "{got} vs {want}");
}

#[test]
fn constants_have_zero_seminorm() {
    let dom = Domain::builtin("square").unwrap();
    let f = SampledFunction::from_scalar(&dom, 1.0 / 32.0, |_| 3.5).unwrap();
    for s in [0.3, 0.5, 0.9] {
        assert_eq!(tl_seminorm(&f, &NormSpec::new(s, 2.0, 2.0, 1.0, 1.0)).unwrap(), 0.0);
    }
    let v = tl_norm(&f, &NormSpec::new(1.5, 2.0, 2.0, 1.0, 1.0)).unwrap();
    assert_eq!(v.seminorm, 0.0);
}

#[test]
fn split_adds_up() {
    let dom = Domain::builtin("lshape").unwrap();
    let f = SampledFunction::from_scalar(&dom, 1.0 / 32.0, |x| (x[0] * x[1]).cos()).unwrap();
    let v = tl_norm(&f, &NormSpec::new(1.5, 2.0, 2.0, 1.0, 1.0)).unwrap();
    assert_eq!(v.total, v.wkp + v.seminorm);
}

fn sample(c: f64, w: f64) -> SampledFunction {
    let dom = Domain::builtin("interval").unwrap();
    SampledFunction::from_scalar(&dom, 1.0 / 64.0, |x| c * (w * x[0]).sin() + x[0].powi(2)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn homogeneous(c in -5.0f64..5.0, s in 0.1f64..0.9, u in 1.0f64..3.0) {
        let f = sample(1.0, 7.0);
        let spec = NormSpec::new(s, 2.0, 2.0, u, 1.0);
        let a = tl_seminorm(&f, &spec).unwrap();
        let b = tl_seminorm(&f.scaled(c), &spec).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-12 * a);
    }

    #[test]
    fn triangle_inequality(c in -3.0f64..3.0, w in 1.0f64..20.0, p in 1.0f64..4.0, q in 1.0f64..4.0) {
        let f = sample(1.0, 3.0);
        let g = sample(c, w);
        let spec = NormSpec::new(0.5, p, q, 1.0, 1.0);
        let sum = tl_seminorm(&f.combine(1.0, &g, 1.0).unwrap(), &spec).unwrap();
        let parts = tl_seminorm(&f, &spec).unwrap() + tl_seminorm(&g, &spec).unwrap();
        prop_assert!(sum <= parts * (1.0 + 1e-12));
    }

    #[test]
    fn product_difference(v in prop::collection::vec(-2.0f64..2.0, 1..6), dv in prop::collection::vec(-1.0f64..1.0, 6)) {
        let dv = &dv[..v.len()];
        let want: f64 = v.iter().zip(dv).map(|(a, d)| a + d).product();
        let got = product_difference_expansion(&v, dv);
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }
}
