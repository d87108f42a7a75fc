use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::error::{Error, Result};

/// Canonical JSON of a check's inputs and its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digest {
    pub sha256: String,
    pub inputs: String,
}

impl Digest {
    pub fn of(inputs: &impl Serialize) -> Self {
        let inputs = serde_json::to_string(inputs).expect("check inputs serialise");
        let sha256 = Sha256::digest(inputs.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Self { sha256, inputs }
    }

    /// Short form for text output.
    pub fn short(&self) -> &str {
        &self.sha256[..12]
    }
}

/// One scalar comparison. `pass` is `|measured - expected| <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Numerical error attached to `measured - expected`.
    pub stat_error: f64,
    /// Offset expected because the model is not an exact eigenfunction.
    pub trial_systematic: f64,
    pub digest: Digest,
    pub notes: Vec<String>,
    pub extra: BTreeMap<String, f64>,
}

impl CheckReport {
    pub fn new(name: &str, measured: f64, expected: f64, tolerance: f64, digest: Digest) -> Self {
        let pass = (measured - expected).abs() <= tolerance;
        Self {
            check_name: name.into(),
            measured,
            expected,
            tolerance,
            pass,
            stat_error: 0.0,
            trial_systematic: 0.0,
            digest,
            notes: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.into(), v);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub max: f64,
    pub min: f64,
    pub argmax: usize,
}

impl ScanSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut s = ScanSummary { max: f64::NEG_INFINITY, min: f64::INFINITY, argmax: 0 };
        for (i, v) in values.iter().enumerate() {
            if *v > s.max {
                s.max = *v;
                s.argmax = i;
            }
            s.min = s.min.min(*v);
        }
        s
    }
}

/// Values of one quantity over a set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub check_name: String,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub summary: ScanSummary,
    pub criterion: String,
    pub pass: bool,
    pub digest: Digest,
    pub notes: Vec<String>,
    pub extra: BTreeMap<String, f64>,
}

impl ScanReport {
    pub fn new(name: &str, points: Vec<Vec<f64>>, values: Vec<f64>, criterion: &str, digest: Digest) -> Self {
        let summary = ScanSummary::of(&values);
        Self {
            check_name: name.into(),
            points,
            values,
            summary,
            criterion: criterion.into(),
            pass: false,
            digest,
            notes: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.into(), v);
        self
    }
}

/// How a failing check affects the suite outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    Pass,
    /// Expected to fail; a failure counts as success.
    Fail,
    /// Informational only.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Outcome {
    Check(CheckReport),
    Scan(ScanReport),
}

impl Outcome {
    pub fn name(&self) -> &str {
        match self {
            Outcome::Check(c) => &c.check_name,
            Outcome::Scan(s) => &s.check_name,
        }
    }

    pub fn pass(&self) -> bool {
        match self {
            Outcome::Check(c) => c.pass,
            Outcome::Scan(s) => s.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub outcome: Outcome,
    pub expectation: Expectation,
    /// Whether the outcome matches the expectation.
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub title: String,
    pub entries: Vec<SuiteEntry>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn new(title: &str) -> Self {
        Self { title: title.into(), entries: Vec::new(), pass: true, notes: Vec::new() }
    }

    pub fn push(&mut self, outcome: Outcome, expectation: Expectation) {
        let ok = match expectation {
            Expectation::Pass => outcome.pass(),
            Expectation::Fail => !outcome.pass(),
            Expectation::Report => true,
        };
        self.pass &= ok;
        self.entries.push(SuiteEntry { outcome, expectation, ok });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialise")
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![[
            "check".to_string(),
            "measured".into(),
            "expected".into(),
            "tolerance".into(),
            "result".into(),
            "expect".into(),
            "digest".into(),
        ]];
        for e in &self.entries {
            let verdict = if e.outcome.pass() { "pass" } else { "FAIL" };
            let expect = match e.expectation {
                Expectation::Pass => "pass",
                Expectation::Fail => "fail",
                Expectation::Report => "report",
            };
            let row = match &e.outcome {
                Outcome::Check(c) => [
                    c.check_name.clone(),
                    format!("{:.9e}", c.measured),
                    format!("{:.9e}", c.expected),
                    format!("{:.2e}", c.tolerance),
                    verdict.into(),
                    expect.into(),
                    c.digest.short().into(),
                ],
                Outcome::Scan(s) => [
                    s.check_name.clone(),
                    format!("max {:.6e}", s.summary.max),
                    format!("{} pts", s.values.len()),
                    "-".into(),
                    verdict.into(),
                    expect.into(),
                    s.digest.short().into(),
                ],
            };
            rows.push(row);
        }
        let mut width = [0usize; 7];
        for r in &rows {
            for (k, c) in r.iter().enumerate() {
                width[k] = width[k].max(c.len());
            }
        }
        let mut out = format!("{}\n", self.title);
        for r in &rows {
            let line: Vec<String> = r.iter().enumerate().map(|(k, c)| format!("{c:<w$}", w = width[k])).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        for e in &self.entries {
            let (name, notes) = match &e.outcome {
                Outcome::Check(c) => (&c.check_name, &c.notes),
                Outcome::Scan(s) => (&s.check_name, &s.notes),
            };
            for n in notes {
                let _ = writeln!(out, "  [{name}] {n}");
            }
        }
        for n in &self.notes {
            let _ = writeln!(out, "  {n}");
        }
        let _ = writeln!(out, "suite: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

/// Per-check tolerances. Defaults pass the hydrogen-like fixtures with at
/// least a factor 10 to spare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute, on `ρ̃'(0)/ρ̃(0)`.
    pub cusp: f64,
    /// Relative, on `ρ̃''(0)`.
    pub curvature: f64,
    /// Multiples of the fit and input error bars added to the curvature tolerance.
    pub curvature_sigmas: f64,
    /// `max |residual| / max h̃` for eigenfunctions.
    pub pde: f64,
    /// Multiples of the error bar for trial functions.
    pub pde_sigmas: f64,
    pub h_bounds_sigmas: f64,
    /// Largest relative change of the fitted upper constant when the sample doubles.
    pub h_upper_drift: f64,
    pub tail_sigmas: f64,
    /// Absolute, on the `t₁` intercept.
    pub t1: f64,
    pub t1_jump_sigmas: f64,
    /// Relative slack on the hydrogenic gradient ratio bound `Z/2`.
    pub gradient_slack: f64,
    /// Largest allowed growth factor of the gradient ratio under refinement.
    pub gradient_growth: f64,
    pub holder_low: f64,
    pub holder_high: f64,
    pub holder_noise: f64,
    /// On `|Δ_FD F - V| / max(1, |V|)`.
    pub delta_f: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cusp: 1e-6,
            curvature: 1e-5,
            curvature_sigmas: 3.0,
            pde: 1e-5,
            pde_sigmas: 10.0,
            h_bounds_sigmas: 3.0,
            h_upper_drift: 0.2,
            tail_sigmas: 3.0,
            t1: 1e-6,
            t1_jump_sigmas: 5.0,
            gradient_slack: 0.05,
            gradient_growth: 2.0,
            holder_low: 0.2,
            holder_high: 0.8,
            holder_noise: 1e-8,
            delta_f: 1e-7,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 16] = [
        "cusp",
        "curvature",
        "curvature-sigmas",
        "pde",
        "pde-sigmas",
        "h-bounds-sigmas",
        "h-upper-drift",
        "tail-sigmas",
        "t1",
        "t1-jump-sigmas",
        "gradient-slack",
        "gradient-growth",
        "holder-low",
        "holder-high",
        "holder-noise",
        "delta-f",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "cusp" => &mut self.cusp,
            "curvature" => &mut self.curvature,
            "curvature-sigmas" => &mut self.curvature_sigmas,
            "pde" => &mut self.pde,
            "pde-sigmas" => &mut self.pde_sigmas,
            "h-bounds-sigmas" => &mut self.h_bounds_sigmas,
            "h-upper-drift" => &mut self.h_upper_drift,
            "tail-sigmas" => &mut self.tail_sigmas,
            "t1" => &mut self.t1,
            "t1-jump-sigmas" => &mut self.t1_jump_sigmas,
            "gradient-slack" => &mut self.gradient_slack,
            "gradient-growth" => &mut self.gradient_growth,
            "holder-low" => &mut self.holder_low,
            "holder-high" => &mut self.holder_high,
            "holder-noise" => &mut self.holder_noise,
            "delta-f" => &mut self.delta_f,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(key).map(|v| *v)
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!("tolerance {key} must be finite and >= 0, got {value}")));
        }
        match self.slot(key) {
            Some(v) => {
                *v = value;
                Ok(())
            }
            None => Err(Error::InvalidInput(format!("unknown tolerance key '{key}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable() {
        let a = Digest::of(&("cusp", 1.0, [0.5, 0.25]));
        let b = Digest::of(&("cusp", 1.0, [0.5, 0.25]));
        assert_eq!(a, b);
        assert_eq!(a.sha256.len(), 64);
        assert_ne!(a, Digest::of(&("cusp", 2.0, [0.5, 0.25])));
    }

    #[test]
    fn pass_matches_tolerance() {
        let d = Digest::of(&0);
        assert!(CheckReport::new("x", 1.0, 1.0 + 1e-7, 1e-6, d.clone()).pass);
        assert!(!CheckReport::new("x", 1.0, 1.1, 1e-6, d).pass);
    }

    #[test]
    fn expectations_shape_the_suite() {
        let d = Digest::of(&0);
        let mut s = SuiteReport::new("t");
        s.push(Outcome::Check(CheckReport::new("a", 0.0, 1.0, 0.1, d.clone())), Expectation::Fail);
        s.push(Outcome::Check(CheckReport::new("b", 0.0, 1.0, 0.1, d.clone())), Expectation::Report);
        assert!(s.pass);
        s.push(Outcome::Check(CheckReport::new("c", 0.0, 1.0, 0.1, d)), Expectation::Pass);
        assert!(!s.pass);
        let text = s.to_text();
        assert!(text.contains("suite: FAIL"));
        let back: SuiteReport = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn tolerance_overrides() {
        let mut t = Tolerances::default();
        for k in Tolerances::KEYS {
            assert!(t.get(k).is_some(), "{k}");
        }
        t.set("cusp", 5e-3).unwrap();
        assert_eq!(t.cusp, 5e-3);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set("pde", -1.0).is_err());
    }

    #[test]
    fn scan_summary() {
        let s = ScanSummary::of(&[1.0, 3.0, -2.0]);
        assert_eq!((s.max, s.min, s.argmax), (3.0, -2.0, 1));
    }
}
