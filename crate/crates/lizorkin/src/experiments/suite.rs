//! Test functions for the studies, spanning the smoothness ladder.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SuiteFunction {
    Zero,
    Constant(f64),
    /// `0.5 + x_1 - 0.7 x_2` (extra coordinates ignored in 1-D)
    Affine,
    /// `prod sin(pi x_a)`
    SinProduct,
    /// `|x_1 - 1/2|^alpha`
    Power(f64),
    /// `sum_a (x_a - 1/2) |x_a - 1/2|^(s - 1)`: smooth of order just above `s`.
    Critical(f64),
}

impl SuiteFunction {
    pub fn name(&self) -> String {
        match self {
            SuiteFunction::Zero => "zero".into(),
            SuiteFunction::Constant(c) => format!("const({c})"),
            SuiteFunction::Affine => "affine".into(),
            SuiteFunction::SinProduct => "sin".into(),
            SuiteFunction::Power(a) => format!("power({a})"),
            SuiteFunction::Critical(s) => format!("critical({s})"),
        }
    }

    pub fn parse(s: &str) -> Result<SuiteFunction> {
        let s = s.trim();
        let arg = |name: &str| -> Option<Result<f64>> {
            s.strip_prefix(name)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("function {s}: {e}")))
                })
        };
        if let Some(v) = arg("const") {
            return Ok(SuiteFunction::Constant(v?));
        }
        if let Some(v) = arg("power") {
            return Ok(SuiteFunction::Power(v?));
        }
        if let Some(v) = arg("critical") {
            return Ok(SuiteFunction::Critical(v?));
        }
        match s {
            "zero" => Ok(SuiteFunction::Zero),
            "affine" => Ok(SuiteFunction::Affine),
            "sin" => Ok(SuiteFunction::SinProduct),
            _ => Err(Error::Config(format!("unknown suite function {s}"))),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SuiteFunction::Zero => 0.0,
            SuiteFunction::Constant(c) => *c,
            SuiteFunction::Affine => 0.5 + x[0] - 0.7 * x.get(1).copied().unwrap_or(0.0),
            SuiteFunction::SinProduct => x.iter().map(|v| (PI * v).sin()).product(),
            SuiteFunction::Power(a) => (x[0] - 0.5).abs().powf(*a),
            SuiteFunction::Critical(s) => x
                .iter()
                .map(|v| {
                    let t = v - 0.5;
                    t * t.abs().powf(s - 1.0)
                })
                .sum(),
        }
    }

    /// Supremum of the smoothness `s` with the function in `F^s_{p,q}`
    /// near the singular set (infinite for smooth functions).
    pub fn critical_smoothness(&self, p: f64) -> f64 {
        match self {
            SuiteFunction::Power(a) => a + 1.0 / p,
            SuiteFunction::Critical(s) => s + 1.0 / p,
            _ => f64::INFINITY,
        }
    }

    pub fn belongs(&self, s: f64, p: f64) -> bool {
        s < self.critical_smoothness(p)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, SuiteFunction::Zero) || *self == SuiteFunction::Constant(0.0)
    }
}

/// Default suite for smoothness `s`: constants, affine, sine product, two
/// powers, and the `s`-critical function.
pub fn default_suite(s: f64) -> Vec<SuiteFunction> {
    vec![
        SuiteFunction::Constant(1.0),
        SuiteFunction::Affine,
        SuiteFunction::SinProduct,
        SuiteFunction::Power(0.3),
        SuiteFunction::Power(0.8),
        SuiteFunction::Critical(s),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for f in default_suite(1.5).into_iter().chain([SuiteFunction::Zero]) {
            assert_eq!(SuiteFunction::parse(&f.name()).unwrap(), f);
        }
        assert!(SuiteFunction::parse("bogus").is_err());
    }

    #[test]
    fn membership_filter() {
        assert!(SuiteFunction::Power(0.8).belongs(0.5, 2.0));
        assert!(!SuiteFunction::Power(0.3).belongs(1.5, 2.0));
        assert!(SuiteFunction::Critical(2.5).belongs(2.5, 2.0));
        assert!(SuiteFunction::SinProduct.belongs(2.5, 4.0));
    }
}
