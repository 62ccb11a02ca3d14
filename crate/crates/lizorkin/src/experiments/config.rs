//! Flat `key = value` study configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Lists are comma separated
//! (commas inside parentheses do not split). Numbers accept `inf` and
//! fractions such as `1/64`. Keys:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `study` | equivalence, composition, inverse, holder, interpolation, extension | required |
//! | `domain` | built-in name or SDF file (the domain `Omega_1`) | study dependent |
//! | `maps` | map families, e.g. `shear(0.5)`, `perturbation(0.05,3.14159)`, `cubic(0.1)`, `linear_cond2`, `identity` | study dependent |
//! | `functions` | suite functions, e.g. `const(1)`, `affine`, `sin`, `power(0.3)`, `critical(1.5)` | the default suite |
//! | `s`, `p`, `q`, `u`, `rho` | norm index lists | study dependent |
//! | `resolutions` | grid spacings, coarse to fine | study dependent |
//! | `resolutions_2d` | spacings for 2-D maps in the inverse study | `1/32, 1/64, 1/128` |
//! | `interval` | equivalence ratios must lie in `[1/interval, interval]` | `10` |
//! | `j` | derivative orders for the interpolation study | `2` |
//! | `seed` | random seed | `1` |
//! | `drift` | allowed relative drift between the last two resolutions | `0.25` |
//! | `ball_budget` | ball offsets per t-level | `1024` |
//! | `margin` | fixed inequality margin (skips calibration) | calibrated |
//! | `out` | output path prefix for CSV/JSON reports | none |

use super::suite::{default_suite, SuiteFunction};
use crate::calculus::MapFamily;
use crate::error::{Error, Result};
use crate::spaces::NormSpec;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Study {
    Equivalence,
    Composition,
    Inverse,
    Holder,
    Interpolation,
    Extension,
}

impl Study {
    pub fn parse(s: &str) -> Result<Study> {
        Ok(match s.trim() {
            "equivalence" => Study::Equivalence,
            "composition" => Study::Composition,
            "inverse" => Study::Inverse,
            "holder" => Study::Holder,
            "interpolation" => Study::Interpolation,
            "extension" => Study::Extension,
            other => return Err(Error::Config(format!("unknown study {other}"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Study::Equivalence => "equivalence",
            Study::Composition => "composition",
            Study::Inverse => "inverse",
            Study::Holder => "holder",
            Study::Interpolation => "interpolation",
            Study::Extension => "extension",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyConfig {
    pub study: Study,
    pub domain: String,
    #[serde(skip)]
    pub maps: Vec<MapFamily>,
    pub map_names: Vec<String>,
    /// Explicit suite; `None` means the default suite for each `s`.
    pub functions: Option<Vec<SuiteFunction>>,
    pub s: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub resolutions: Vec<f64>,
    pub resolutions_2d: Vec<f64>,
    pub interval: f64,
    pub j: Vec<u32>,
    pub seed: u64,
    pub drift: f64,
    pub ball_budget: usize,
    pub margin: Option<f64>,
    pub out: Option<String>,
}

pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    match s {
        "inf" | "infinity" | "∞" => return Ok(f64::INFINITY),
        _ => {}
    }
    if let Some((a, b)) = s.split_once('/') {
        let a: f64 = a.trim().parse().map_err(|_| Error::Config(format!("bad number {s}")))?;
        let b: f64 = b.trim().parse().map_err(|_| Error::Config(format!("bad number {s}")))?;
        return Ok(a / b);
    }
    s.parse().map_err(|_| Error::Config(format!("bad number {s}")))
}

/// Splits on commas outside parentheses.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    split_list(s).iter().map(|v| parse_number(v)).collect()
}

pub fn parse_map(s: &str) -> Result<MapFamily> {
    let s = s.trim();
    let (name, args) = match s.split_once('(') {
        Some((n, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Config(format!("unbalanced map {s}")))?;
            (n.trim(), numbers(inner)?)
        }
        None => (s, Vec::new()),
    };
    let want = |n: usize| {
        if args.len() == n {
            Ok(())
        } else {
            Err(Error::Config(format!("map {name} takes {n} parameters, got {}", args.len())))
        }
    };
    Ok(match name {
        "identity" => {
            let d = if args.is_empty() { 2 } else { args[0] as usize };
            MapFamily::Identity { d }
        }
        "shear" => {
            want(1)?;
            MapFamily::Shear { lambda: args[0] }
        }
        "perturbation" => {
            want(2)?;
            MapFamily::Perturbation { a: args[0], b: args[1] }
        }
        "power" => {
            want(2)?;
            MapFamily::Power { c: args[0], tau: args[1] }
        }
        "cubic" => {
            want(1)?;
            MapFamily::Cubic { c: args[0] }
        }
        "linear" => {
            want(4)?;
            MapFamily::Linear {
                a: [[args[0], args[1]], [args[2], args[3]]],
            }
        }
        "linear_cond2" => MapFamily::linear_cond2(),
        _ => return Err(Error::Config(format!("unknown map {name}"))),
    })
}

impl StudyConfig {
    /// Defaults for a study.
    pub fn defaults(study: Study) -> StudyConfig {
        let two_d = vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0];
        let one_d: Vec<f64> = (10..=13).map(|m| 2f64.powi(-m)).collect();
        let mut cfg = StudyConfig {
            study,
            domain: "square".into(),
            maps: Vec::new(),
            map_names: Vec::new(),
            functions: None,
            s: vec![0.5, 1.5, 2.5],
            p: vec![2.0],
            q: vec![2.0],
            u: vec![1.0, 2.0],
            rho: vec![1.0, 0.25],
            resolutions: two_d,
            resolutions_2d: vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0],
            interval: 10.0,
            j: vec![2],
            seed: 1,
            drift: 0.25,
            ball_budget: crate::spaces::norms::DEFAULT_BALL_BUDGET,
            margin: None,
            out: None,
        };
        match study {
            Study::Equivalence => {}
            Study::Extension => {
                // rho = 1/4 leaves only two t-levels at h = 1/64
                cfg.u = vec![1.0];
                cfg.rho = vec![0.5];
            }
            Study::Composition => {
                cfg.s = vec![0.5, 1.5];
                cfg.u = vec![1.0];
                cfg.rho = vec![1.0];
                cfg.resolutions = vec![1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
                cfg.maps = vec![
                    MapFamily::Shear { lambda: 0.5 },
                    MapFamily::Perturbation {
                        a: 0.05,
                        b: std::f64::consts::PI,
                    },
                ];
                cfg.functions = Some(vec![
                    SuiteFunction::Constant(1.0),
                    SuiteFunction::Affine,
                    SuiteFunction::SinProduct,
                    SuiteFunction::Power(0.8),
                ]);
            }
            Study::Inverse => {
                cfg.s = vec![1.5];
                cfg.u = vec![1.0];
                cfg.rho = vec![1.0];
                cfg.domain = "interval".into();
                cfg.resolutions = one_d;
                cfg.maps = vec![
                    MapFamily::Identity { d: 1 },
                    MapFamily::Cubic { c: 0.1 },
                    MapFamily::linear_cond2(),
                ];
                cfg.functions = Some(Vec::new());
            }
            Study::Holder => {
                cfg.s = vec![0.5, 1.5];
                cfg.resolutions = vec![1.0 / 32.0, 1.0 / 64.0];
                cfg.maps = vec![MapFamily::Shear { lambda: 0.5 }];
                cfg.functions = Some(vec![
                    SuiteFunction::Constant(1.0),
                    SuiteFunction::SinProduct,
                    SuiteFunction::Power(0.8),
                ]);
            }
            Study::Interpolation => {
                cfg.s = vec![2.5];
                cfg.u = vec![1.0];
                cfg.rho = vec![0.25];
                cfg.domain = "interval".into();
                cfg.resolutions = one_d;
                cfg.functions = Some(vec![SuiteFunction::SinProduct]);
            }
        }
        cfg.map_names = cfg.maps.iter().map(|m| m.name()).collect();
        cfg
    }

    pub fn parse(text: &str) -> Result<StudyConfig> {
        Self::parse_for(text, None)
    }

    /// Like [`StudyConfig::parse`]; `study` fills a missing `study` key and
    /// must agree with a present one.
    pub fn parse_for(text: &str, study: Option<Study>) -> Result<StudyConfig> {
        let mut kv = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let study = match (kv.get("study"), study) {
            (Some(v), None) => Study::parse(v)?,
            (None, Some(s)) => s,
            (Some(v), Some(s)) => {
                let named = Study::parse(v)?;
                if named != s {
                    return Err(Error::Config(format!(
                        "config names study {} but {} was requested",
                        named.name(),
                        s.name()
                    )));
                }
                s
            }
            (None, None) => return Err(Error::Config("missing key: study".into())),
        };
        let mut cfg = StudyConfig::defaults(study);
        for (k, v) in &kv {
            match k.as_str() {
                "study" => {}
                "domain" => cfg.domain = v.clone(),
                "maps" => {
                    cfg.maps = split_list(v).iter().map(|m| parse_map(m)).collect::<Result<_>>()?;
                }
                "functions" => {
                    cfg.functions = Some(
                        split_list(v)
                            .iter()
                            .map(|f| SuiteFunction::parse(f))
                            .collect::<Result<_>>()?,
                    );
                }
                "s" => cfg.s = numbers(v)?,
                "p" => cfg.p = numbers(v)?,
                "q" => cfg.q = numbers(v)?,
                "u" => cfg.u = numbers(v)?,
                "rho" => cfg.rho = numbers(v)?,
                "resolutions" => cfg.resolutions = numbers(v)?,
                "resolutions_2d" => cfg.resolutions_2d = numbers(v)?,
                "interval" => cfg.interval = parse_number(v)?,
                "j" => cfg.j = numbers(v)?.into_iter().map(|x| x as u32).collect(),
                "seed" => cfg.seed = parse_number(v)? as u64,
                "drift" => cfg.drift = parse_number(v)?,
                "ball_budget" => cfg.ball_budget = parse_number(v)? as usize,
                "margin" => cfg.margin = Some(parse_number(v)?),
                "out" => cfg.out = Some(v.clone()),
                other => return Err(Error::Config(format!("unknown key {other}"))),
            }
        }
        cfg.map_names = cfg.maps.iter().map(|m| m.name()).collect();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<StudyConfig> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        for list in [&self.resolutions, &self.resolutions_2d] {
            if list.is_empty() {
                return Err(Error::Config("no resolutions".into()));
            }
            if list.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(Error::Config(
                    "resolutions must be strictly increasing (grid spacings strictly decreasing)".into(),
                ));
            }
            if list.iter().any(|h| !(*h > 0.0)) {
                return Err(Error::Config("grid spacings must be positive".into()));
            }
        }
        if !(self.interval >= 1.0) {
            return Err(Error::Config(format!("interval = {}", self.interval)));
        }
        if !(self.drift > 0.0) {
            return Err(Error::Config(format!("drift = {}", self.drift)));
        }
        Ok(())
    }

    /// Every `(s, p, q, u, rho)` of the grid satisfying the index condition in
    /// dimension `d`.
    pub fn specs(&self, d: usize) -> Vec<NormSpec> {
        let mut out = Vec::new();
        for &s in &self.s {
            for &p in &self.p {
                for &q in &self.q {
                    for &u in &self.u {
                        for &rho in &self.rho {
                            let spec = NormSpec::new(s, p, q, u, rho);
                            if spec.validate(d).is_ok() {
                                out.push(spec);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Suite members lying in `F^s_p`.
    pub fn suite(&self, s: f64, p: f64) -> Vec<SuiteFunction> {
        let all = self.functions.clone().unwrap_or_else(|| default_suite(s));
        all.into_iter().filter(|f| f.belongs(s, p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_text() {
        let cfg = StudyConfig::parse(
            "# composition run\nstudy = composition\nmaps = shear(0.25), perturbation(0.05, 3)\n\
             s = 0.5\nresolutions = 1/32, 1/64 # coarse to fine\nq = 2, inf\n",
        )
        .unwrap();
        assert_eq!(cfg.study, Study::Composition);
        assert_eq!(cfg.maps.len(), 2);
        assert_eq!(cfg.resolutions, vec![1.0 / 32.0, 1.0 / 64.0]);
        assert!(cfg.q[1].is_infinite());
        assert!(StudyConfig::parse("study = holder\nresolutions = 1/64, 1/32").is_err());
        assert!(StudyConfig::parse("study = holder\nfoo = 1").is_err());
    }

    #[test]
    fn spec_grid_is_filtered() {
        let mut cfg = StudyConfig::defaults(Study::Equivalence);
        cfg.p = vec![1.0, 2.0];
        cfg.u = vec![2.0];
        // sigma = 1/2 fails d/min(p,q) - d/u = 2 - 1 for p = 1 in 2-D
        assert!(cfg.specs(2).iter().all(|s| s.p == 2.0 || s.sigma() > 1.0));
    }
}
