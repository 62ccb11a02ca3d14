//! Study reports: rows with recomputable pass/fail, CSV/JSON emission.
//!
//! CSV columns, in order:
//! `id, study, case, function, map, domain, h, s, p, q, u, rho, lhs, rhs,
//! ratio, c_f, check, threshold, scored, passed, note`.
//! Non-finite numbers print as `inf`, `-inf` or `NaN`. The long-format CSV
//! has columns `study, curve, h, ratio`, one line per (curve, resolution).

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// How a row's `passed` is derived from its numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `lhs <= threshold * rhs`
    LeMargin,
    /// `|lhs / rhs - 1| <= threshold` (current against previous resolution)
    Drift,
    /// `lhs`, `rhs` and `ratio` finite, `rhs > 0`
    Finite,
    /// `|lhs - rhs| <= threshold * max(|lhs|, |rhs|)`
    Equal,
    /// `lhs <= threshold`
    AtMost,
    /// `ratio` in `[1 / threshold, threshold]`
    Within,
    /// Informational; always passes.
    Record,
    /// The row could not be computed (see the note); never passes.
    Error,
}

impl Check {
    pub fn name(&self) -> &'static str {
        match self {
            Check::LeMargin => "le_margin",
            Check::Drift => "drift",
            Check::Finite => "finite",
            Check::Equal => "equal",
            Check::AtMost => "at_most",
            Check::Within => "within",
            Check::Record => "record",
            Check::Error => "error",
        }
    }

    pub fn evaluate(&self, lhs: f64, rhs: f64, ratio: f64, threshold: f64) -> bool {
        match self {
            Check::LeMargin => lhs.is_finite() && rhs.is_finite() && lhs <= threshold * rhs,
            Check::Drift => {
                lhs.is_finite() && rhs.is_finite() && rhs != 0.0 && (lhs / rhs - 1.0).abs() <= threshold
            }
            Check::Finite => lhs.is_finite() && rhs.is_finite() && ratio.is_finite() && rhs > 0.0,
            Check::Equal => {
                lhs.is_finite() && rhs.is_finite() && (lhs - rhs).abs() <= threshold * lhs.abs().max(rhs.abs())
            }
            Check::AtMost => lhs.is_finite() && lhs <= threshold,
            Check::Within => ratio.is_finite() && ratio >= 1.0 / threshold && ratio <= threshold,
            Check::Record => true,
            Check::Error => false,
        }
    }
}

/// f64 that survives JSON even when not finite.
mod lenient {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Num {
        F(f64),
        S(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Num::deserialize(d)? {
            Num::F(v) => Ok(v),
            Num::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub id: usize,
    pub study: String,
    pub case: String,
    pub function: String,
    pub map: String,
    pub domain: String,
    #[serde(with = "lenient")]
    pub h: f64,
    #[serde(with = "lenient")]
    pub s: f64,
    #[serde(with = "lenient")]
    pub p: f64,
    #[serde(with = "lenient")]
    pub q: f64,
    #[serde(with = "lenient")]
    pub u: f64,
    #[serde(with = "lenient")]
    pub rho: f64,
    #[serde(with = "lenient")]
    pub lhs: f64,
    #[serde(with = "lenient")]
    pub rhs: f64,
    #[serde(with = "lenient")]
    pub ratio: f64,
    #[serde(with = "lenient")]
    pub c_f: f64,
    pub check: Check,
    #[serde(with = "lenient")]
    pub threshold: f64,
    pub scored: bool,
    pub passed: bool,
    pub note: String,
}

impl Row {
    pub fn new(study: &str, case: &str) -> Row {
        Row {
            id: 0,
            study: study.into(),
            case: case.into(),
            function: String::new(),
            map: String::new(),
            domain: String::new(),
            h: f64::NAN,
            s: f64::NAN,
            p: f64::NAN,
            q: f64::NAN,
            u: f64::NAN,
            rho: f64::NAN,
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: f64::NAN,
            c_f: f64::NAN,
            check: Check::Record,
            threshold: f64::NAN,
            scored: false,
            passed: true,
            note: String::new(),
        }
    }

    pub fn spec(mut self, spec: &crate::spaces::NormSpec) -> Row {
        self.s = spec.s;
        self.p = spec.p;
        self.q = spec.q;
        self.u = spec.u;
        self.rho = spec.rho;
        self
    }

    pub fn function(mut self, f: &str) -> Row {
        self.function = f.into();
        self
    }

    pub fn map(mut self, m: &str) -> Row {
        self.map = m.into();
        self
    }

    pub fn domain(mut self, d: &str) -> Row {
        self.domain = d.into();
        self
    }

    pub fn h(mut self, h: f64) -> Row {
        self.h = h;
        self
    }

    pub fn c_f(mut self, c: f64) -> Row {
        self.c_f = c;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Row {
        self.note = n.into();
        self
    }

    /// Sets the numbers and the check; `ratio = lhs / rhs`.
    pub fn values(mut self, lhs: f64, rhs: f64, check: Check, threshold: f64, scored: bool) -> Row {
        self.lhs = lhs;
        self.rhs = rhs;
        self.ratio = lhs / rhs;
        self.check = check;
        self.threshold = threshold;
        self.scored = scored;
        self.passed = self.recompute();
        self
    }

    /// A row that failed to compute; unscored unless `scored`.
    pub fn error(mut self, err: &dyn std::fmt::Display, scored: bool) -> Row {
        self.check = Check::Error;
        self.scored = scored;
        self.note = err.to_string();
        self.passed = false;
        self
    }

    pub fn recompute(&self) -> bool {
        self.check.evaluate(self.lhs, self.rhs, self.ratio, self.threshold)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub study: String,
    pub seed: u64,
    pub workers: usize,
    pub wall_time_s: f64,
    pub covering_hashes: Vec<String>,
    pub l0: Option<f64>,
    pub epsilon_empirical: Option<f64>,
    pub margin: Option<f64>,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
}

/// One point of a ratio-vs-resolution curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub study: String,
    pub curve: String,
    #[serde(with = "lenient")]
    pub h: f64,
    #[serde(with = "lenient")]
    pub ratio: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
    pub curves: Vec<CurvePoint>,
}

impl StudyReport {
    pub fn new(study: &str) -> StudyReport {
        StudyReport {
            metadata: Metadata {
                study: study.into(),
                ..Default::default()
            },
            ..Default::default()
        }
    }

    /// Appends rows in order, numbering them.
    pub fn push(&mut self, mut row: Row) {
        row.id = self.rows.len();
        self.rows.push(row);
    }

    pub fn curve(&mut self, curve: &str, h: f64, ratio: f64) {
        self.curves.push(CurvePoint {
            study: self.metadata.study.clone(),
            curve: curve.into(),
            h,
            ratio,
        });
    }

    pub fn scored(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.scored)
    }

    pub fn failures(&self) -> Vec<&Row> {
        self.scored().filter(|r| !r.passed).collect()
    }

    /// True iff every scored row passes (and at least one is scored).
    pub fn all_passed(&self) -> bool {
        self.scored().count() > 0 && self.failures().is_empty()
    }

    /// True iff every stored `passed` agrees with its numbers.
    pub fn consistent(&self) -> bool {
        self.rows.iter().all(|r| r.passed == r.recompute())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.rows.is_empty() {
            w.write_record(CSV_COLUMNS)?;
        }
        for r in &self.rows {
            w.serialize(r)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8 csv"))
    }

    pub fn to_long_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        if self.curves.is_empty() {
            w.write_record(["study", "curve", "h", "ratio"])?;
        }
        for c in &self.curves {
            w.serialize(c)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8 csv"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses a JSON report and recomputes every row's pass/fail.
    pub fn from_json(text: &str) -> Result<StudyReport> {
        let mut r: StudyReport = serde_json::from_str(text)?;
        for row in &mut r.rows {
            row.passed = row.recompute();
        }
        Ok(r)
    }

    /// Writes `<prefix>.csv`, `<prefix>.json` and `<prefix>_curves.csv`.
    pub fn emit(&self, prefix: &Path) -> Result<Vec<PathBuf>> {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        let paths = vec![with(".csv"), with(".json"), with("_curves.csv")];
        std::fs::write(&paths[0], self.to_csv()?)?;
        std::fs::write(&paths[1], self.to_json()?)?;
        std::fs::write(&paths[2], self.to_long_csv()?)?;
        Ok(paths)
    }

    /// One line per scored failure plus a summary.
    pub fn summary(&self) -> String {
        let scored = self.scored().count();
        let failed = self.failures();
        let mut s = format!(
            "{}: {} rows, {} scored, {} failed",
            self.metadata.study,
            self.rows.len(),
            scored,
            failed.len()
        );
        for r in failed {
            s.push_str(&format!(
                "\n  FAIL #{} {} {} {} h={} lhs={:.6e} rhs={:.6e} ({} {}) {}",
                r.id,
                r.case,
                r.function,
                r.map,
                r.h,
                r.lhs,
                r.rhs,
                r.check.name(),
                r.threshold,
                r.note
            ));
        }
        s
    }
}

pub const CSV_COLUMNS: [&str; 21] = [
    "id", "study", "case", "function", "map", "domain", "h", "s", "p", "q", "u", "rho", "lhs", "rhs",
    "ratio", "c_f", "check", "threshold", "scored", "passed", "note",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StudyReport {
        let mut r = StudyReport::new("demo");
        r.push(Row::new("demo", "a").h(0.5).values(1.0, 2.0, Check::LeMargin, 1.0, true));
        r.push(Row::new("demo", "b").values(1.1, 1.0, Check::Drift, 0.25, true));
        r.push(Row::new("demo", "c").values(f64::INFINITY, 1.0, Check::Finite, f64::NAN, true));
        r.push(Row::new("demo", "d,with comma").error(&"boom", false));
        r.curve("a", 0.5, 0.5);
        r
    }

    #[test]
    fn checks() {
        assert!(Check::LeMargin.evaluate(1.0, 1.0, 1.0, 1.0));
        assert!(!Check::Drift.evaluate(1.3, 1.0, 1.3, 0.25));
        assert!(Check::Within.evaluate(0.0, 0.0, 0.2, 10.0));
        assert!(!Check::Within.evaluate(0.0, 0.0, 0.05, 10.0));
        assert!(Check::Equal.evaluate(1.0, 1.0 + 1e-14, 0.0, 1e-12));
    }

    #[test]
    fn csv_header_and_order() {
        let empty = StudyReport::new("x").to_csv().unwrap();
        assert_eq!(empty.trim(), CSV_COLUMNS.join(","));
        let text = sample().to_csv().unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, CSV_COLUMNS.join(","));
        assert!(text.contains("\"d,with comma\""));
        assert!(text.contains("inf"));
    }

    #[test]
    fn json_round_trip_reproduces_pass_fail() {
        let r = sample();
        assert!(r.consistent());
        let back = StudyReport::from_json(&r.to_json().unwrap()).unwrap();
        assert_eq!(back.rows.len(), r.rows.len());
        for (a, b) in r.rows.iter().zip(&back.rows) {
            assert_eq!(a.passed, b.passed);
            assert_eq!(a.lhs.to_bits(), b.lhs.to_bits());
        }
        assert!(!r.all_passed());
        assert_eq!(r.failures().len(), 1);
    }
}
