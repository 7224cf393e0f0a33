//! Stable JSON report schema shared by the CLI and the reproduction
//! scenarios, plus the profile CSV writer.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::check::{CheckReport, Verdict, Witness};
use crate::error::Result;
use crate::maps::SelfMap;
use crate::metric::{MetricSpace, Point};
use crate::pa::ProfileRow;

pub const SCHEMA_VERSION: u32 = 1;

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A value stated by the published worked example being reproduced.
    Reference,
    /// A value computed by an independent oracle (closed form, brute force).
    Derived,
    /// A contract of the tool itself (determinism, vacuous truths).
    Trivial,
}

/// One labeled assertion. `expected` is a number, a flag, or a textual
/// relation such as `"<= 0.01"` or `"in (0.55, 0.75)"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: Value,
    pub expected: Value,
    pub provenance: Provenance,
    pub tolerance: f64,
    pub pass: bool,
    /// Diagnostic comparison against a narrative claim; never affects the
    /// overall verdict.
    #[serde(default)]
    pub discrepancy: bool,
}

impl Measurement {
    fn new(name: &str, value: Value, expected: Value, provenance: Provenance, tolerance: f64, pass: bool) -> Self {
        Self {
            name: name.to_string(),
            value,
            expected,
            provenance,
            tolerance,
            pass,
            discrepancy: false,
        }
    }

    pub fn exact(name: &str, value: f64, expected: f64, provenance: Provenance) -> Self {
        Self::new(name, json!(value), json!(expected), provenance, 0.0, value == expected)
    }

    pub fn count(name: &str, value: u64, expected: u64, provenance: Provenance) -> Self {
        Self::new(name, json!(value), json!(expected), provenance, 0.0, value == expected)
    }

    pub fn abs(name: &str, value: f64, expected: f64, tolerance: f64, provenance: Provenance) -> Self {
        let pass = (value - expected).abs() <= tolerance;
        Self::new(name, json!(value), json!(expected), provenance, tolerance, pass)
    }

    /// `|value - expected| ≤ tolerance · |expected|`.
    pub fn rel(name: &str, value: f64, expected: f64, tolerance: f64, provenance: Provenance) -> Self {
        let pass = (value - expected).abs() <= tolerance * expected.abs();
        Self::new(name, json!(value), json!(expected), provenance, tolerance, pass)
    }

    /// Open interval `(lower, upper)`.
    pub fn within(name: &str, value: f64, lower: f64, upper: f64, provenance: Provenance) -> Self {
        let pass = value > lower && value < upper;
        Self::new(name, json!(value), json!(format!("in ({lower}, {upper})")), provenance, 0.0, pass)
    }

    pub fn at_most(name: &str, value: f64, bound: f64, tolerance: f64, provenance: Provenance) -> Self {
        let pass = value <= bound + tolerance;
        Self::new(name, json!(value), json!(format!("<= {bound}")), provenance, tolerance, pass)
    }

    pub fn at_least(name: &str, value: f64, bound: f64, tolerance: f64, provenance: Provenance) -> Self {
        let pass = value >= bound - tolerance;
        Self::new(name, json!(value), json!(format!(">= {bound}")), provenance, tolerance, pass)
    }

    pub fn below(name: &str, value: f64, bound: f64, provenance: Provenance) -> Self {
        Self::new(name, json!(value), json!(format!("< {bound}")), provenance, 0.0, value < bound)
    }

    pub fn flag(name: &str, value: bool, expected: bool, provenance: Provenance) -> Self {
        Self::new(name, json!(value), json!(expected), provenance, 0.0, value == expected)
    }

    pub fn text(name: &str, value: &str, expected: &str, provenance: Provenance) -> Self {
        Self::new(name, json!(value), json!(expected), provenance, 0.0, value == expected)
    }

    pub fn as_discrepancy(mut self) -> Self {
        self.discrepancy = true;
        self
    }
}

/// `{kind, params}` of a space or map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub kind: String,
    pub params: Value,
}

impl Descriptor {
    pub fn space(space: &MetricSpace) -> Self {
        Self {
            kind: space.kind_name().to_string(),
            params: space.params(),
        }
    }

    pub fn map(map: &SelfMap) -> Self {
        Self {
            kind: map.kind_name().to_string(),
            params: map.params(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub pair: (Point, Point),
    pub n: Option<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

impl From<&Witness> for WitnessRecord {
    fn from(w: &Witness) -> Self {
        Self {
            pair: w.pair,
            n: w.n,
            lhs: w.lhs,
            rhs: w.rhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    Pass,
    Fail,
    HoldsOnSample,
    Violated,
}

impl ReportVerdict {
    /// Exit status: 0 for a pass or a condition that holds, 1 otherwise.
    pub fn exit_code(self) -> i32 {
        match self {
            ReportVerdict::Pass | ReportVerdict::HoldsOnSample => 0,
            ReportVerdict::Fail | ReportVerdict::Violated => 1,
        }
    }
}

impl From<Verdict> for ReportVerdict {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::HoldsOnSample => ReportVerdict::HoldsOnSample,
            Verdict::Violated => ReportVerdict::Violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<String>,
    pub space: Option<Descriptor>,
    pub map: Option<Descriptor>,
    pub spec: Option<Value>,
    pub verdict: ReportVerdict,
    pub witness: Option<WitnessRecord>,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
    /// Command-specific payload (traces, tables, witnesses).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub data: Option<Value>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            scenario: None,
            space: None,
            map: None,
            spec: None,
            verdict: ReportVerdict::Pass,
            witness: None,
            measurements: Vec::new(),
            notes: Vec::new(),
            data: None,
        }
    }

    pub fn with_target(mut self, space: &MetricSpace, map: &SelfMap) -> Self {
        self.space = Some(Descriptor::space(space));
        self.map = Some(Descriptor::map(map));
        self
    }

    pub fn from_check(command: impl Into<String>, space: &MetricSpace, map: &SelfMap, check: &CheckReport) -> Self {
        let mut r = Self::new(command).with_target(space, map);
        r.spec = Some(serde_json::to_value(check.spec).expect("spec serializes"));
        r.verdict = check.verdict.into();
        r.witness = check.witness.as_ref().map(WitnessRecord::from);
        r.notes = check.notes.clone();
        r.data = Some(json!({
            "pairs_checked": check.pairs_checked,
            "instances_checked": check.instances_checked,
            "degenerate_instances": check.degenerate_instances,
            "sample": check.sample,
            "worst": check.worst.as_ref().map(WitnessRecord::from),
        }));
        r
    }

    pub fn push(&mut self, m: Measurement) {
        self.measurements.push(m);
    }

    /// True iff every non-discrepancy measurement passes.
    pub fn all_pass(&self) -> bool {
        self.measurements.iter().filter(|m| !m.discrepancy).all(|m| m.pass)
    }

    /// Sets the verdict from the measurements.
    pub fn finish(mut self) -> Self {
        self.verdict = if self.all_pass() {
            ReportVerdict::Pass
        } else {
            ReportVerdict::Fail
        };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Writes `n,S_n,S1_n,rho_n` with an empty `rho_n` where undefined.
pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "S_n", "S1_n", "rho_n"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.s.to_string(),
            r.s1.to_string(),
            r.rho.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
