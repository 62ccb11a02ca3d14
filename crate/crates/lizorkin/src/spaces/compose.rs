use super::sampled::SampledFunction;
use crate::calculus::MapFamily;
use crate::error::{Error, Result};
use crate::geometry::Domain;

/// `g o f` sampled on `omega1` at spacing `h`, by multilinear interpolation of
/// `g` at `f(x)`. Points whose image leaves the sample support of `g` are
/// absent.
pub fn resample_through_map(
    g: &SampledFunction,
    map: &MapFamily,
    omega1: &Domain,
    h: f64,
) -> Result<SampledFunction> {
    if map.dim() != g.dim() || omega1.dim() != g.dim() {
        return Err(Error::InvalidArgument(format!(
            "map {} of dimension {} with a {}-dimensional function on a {}-dimensional domain",
            map.name(),
            map.dim(),
            g.dim(),
            omega1.dim()
        )));
    }
    let mut out = SampledFunction::from_fn(omega1, h, g.arity, |_| vec![0.0; g.arity])?;
    for i in out.present_indices() {
        let p = out.point(i);
        let y = map.eval(&p[..g.dim()]);
        match g.interpolate(&y) {
            Some(v) => out.set(i, &v),
            None => out.unset(i),
        }
    }
    if out.count_present() == 0 {
        return Err(Error::Coverage(format!(
            "no point of {} maps into the samples of {}",
            omega1.name, g.domain
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_field_through_shear() {
        let sq = Domain::builtin("square").unwrap();
        let h = 1.0 / 32.0;
        // g(x, y) = x sampled on a box large enough for the sheared image
        let big = Domain::polygon("big", vec![[-1.0, -1.0], [2.0, -1.0], [2.0, 2.0], [-1.0, 2.0]]).unwrap();
        let g = SampledFunction::from_scalar(&big, h, |x| x[0]).unwrap();
        let gf = resample_through_map(&g, &MapFamily::Shear { lambda: 0.5 }, &sq, h).unwrap();
        assert_eq!(gf.count_present(), 32 * 32);
        for i in gf.present_indices() {
            assert!((gf.scalar(i) - gf.point(i)[0]).abs() < 1e-13);
        }
        let one = SampledFunction::from_scalar(&big, h, |_| 1.0).unwrap();
        let c = resample_through_map(&one, &MapFamily::Identity { d: 2 }, &sq, h).unwrap();
        assert!(c.present_indices().iter().all(|&i| (c.scalar(i) - 1.0).abs() < 1e-15));
    }
}
