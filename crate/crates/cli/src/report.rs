//! Report document written by every subcommand.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use qmarkov::lyapunov::{InequalityCheck, Witness};
use qmarkov::{ComplexMatrix64, ComplexVector64, LyapunovCertificate, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Stable identifier of the criterion being tested.
    pub anchor: &'static str,
    pub verdict: &'static str,
    pub tolerance: f64,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip)]
    pub outcome: Verdict,
}

impl Check {
    pub fn new(name: &str, anchor: &'static str, verdict: Verdict, tolerance: f64, details: Value) -> Self {
        Check {
            name: name.to_string(),
            anchor,
            verdict: verdict.as_str(),
            tolerance,
            details,
            witness: None,
            outcome: verdict,
        }
    }

    pub fn with_witness(mut self, witness: Option<Value>) -> Self {
        self.witness = witness;
        self
    }
}

/// Series either inline or as a reference to an emitted file.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesEntry {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub verdict: &'static str,
    pub holds: usize,
    pub fails: usize,
    pub inconclusive: usize,
    pub exit_code: i32,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub timestamp_unix: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: Tool,
    pub command: &'static str,
    pub inputs: BTreeMap<String, String>,
    pub settings: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub series: Vec<SeriesEntry>,
    pub outputs: Vec<String>,
    pub summary: Summary,
    /// Run-dependent fields; excluded when comparing reports.
    pub metadata: Metadata,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            tool: Tool {
                name: "qmarkov",
                version: env!("CARGO_PKG_VERSION"),
            },
            command,
            inputs: BTreeMap::new(),
            settings: BTreeMap::new(),
            checks: Vec::new(),
            series: Vec::new(),
            outputs: Vec::new(),
            summary: Summary {
                verdict: Verdict::Holds.as_str(),
                holds: 0,
                fails: 0,
                inconclusive: 0,
                exit_code: 0,
            },
            metadata: Metadata {
                timestamp_unix: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
            },
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) {
        self.inputs.insert(key.to_string(), value.to_string());
    }

    pub fn setting(&mut self, key: &str, value: impl Into<Value>) {
        self.settings.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Fill in the summary and return the exit code it implies.
    pub fn finish(&mut self, strict: bool) -> i32 {
        let count = |v: Verdict| self.checks.iter().filter(|c| c.outcome == v).count();
        let (holds, fails, inconclusive) = (count(Verdict::Holds), count(Verdict::Fails), count(Verdict::Inconclusive));
        let overall = self.checks.iter().fold(Verdict::Holds, |acc, c| acc.and(c.outcome));
        let exit_code = exit_code(overall, strict);
        self.summary = Summary {
            verdict: overall.as_str(),
            holds,
            fails,
            inconclusive,
            exit_code,
        };
        exit_code
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub fn exit_code(overall: Verdict, strict: bool) -> i32 {
    match overall {
        Verdict::Holds => 0,
        Verdict::Fails => 1,
        Verdict::Inconclusive if strict => 2,
        Verdict::Inconclusive => 0,
    }
}

/// Finite floats as numbers, anything else as a string.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

pub fn matrix(m: &ComplexMatrix64) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub fn vector(v: &ComplexVector64) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

pub fn witness(w: &Witness<f64>) -> Value {
    json!({"eigenvalue": num(w.eigenvalue), "vector": vector(&w.vector)})
}

pub fn inequality(c: &InequalityCheck<f64>) -> Value {
    let mut v = json!({
        "label": c.label,
        "verdict": c.verdict.as_str(),
        "value": num(c.value),
    });
    if let Some(w) = &c.witness {
        v["witness"] = witness(w);
    }
    v
}

pub fn certificate(cert: &LyapunovCertificate<f64>) -> Value {
    json!({
        "mode": cert.mode.as_str(),
        "c": cert.c.map(num),
        "d": cert.d.map(num),
        "shift": num(cert.shift),
        "interior": cert.interior,
        "generator_w_norm": cert.generator_w_norm.map(num),
        "inequalities": cert.checks.iter().map(inequality).collect::<Vec<_>>(),
        "notes": cert.notes,
    })
}
