//! Invariant suites and their reports.

mod suites;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "report-v1";
pub const SUITES: &[&str] = &["gauges", "sb", "sm", "davis", "chain", "sb-flat-blocks"];

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// A statement proved in the source literature.
    Published,
    /// Immediate from the definitions.
    Trivial,
    /// Computed here from an independent derivation or oracle.
    Derived,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    pub check: String,
    pub inputs: Value,
    pub expected: Value,
    pub observed: Value,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
    pub anchor: Option<String>,
    /// Full certificate chain, attached to failures for replay.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub suite: String,
    pub seed: u64,
    pub n_cases: usize,
    pub passed: usize,
    pub failed: usize,
    pub runtime_ms: u64,
    pub cases: Vec<CaseRecord>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// The case table as canonical JSON, without timing data.
    pub fn case_table(&self) -> String {
        serde_json::to_string(&self.cases).expect("case records serialize")
    }
}

/// One check inside a case, before it is numbered.
pub(crate) struct Check {
    pub check: String,
    pub inputs: Value,
    pub expected: Value,
    pub observed: Value,
    pub tolerance: f64,
    pub pass: bool,
    pub provenance: Provenance,
    pub anchor: Option<&'static str>,
    pub certificate: Option<Value>,
}

impl Check {
    pub fn new(check: impl Into<String>, provenance: Provenance, anchor: Option<&'static str>) -> Self {
        Self {
            check: check.into(),
            inputs: Value::Null,
            expected: Value::Null,
            observed: Value::Null,
            tolerance: 0.0,
            pass: false,
            provenance,
            anchor,
            certificate: None,
        }
    }

    pub fn inputs(mut self, inputs: Value) -> Self {
        self.inputs = inputs;
        self
    }

    pub fn outcome(mut self, expected: Value, observed: Value, tolerance: f64, pass: bool) -> Self {
        self.expected = expected;
        self.observed = observed;
        self.tolerance = tolerance;
        self.pass = pass;
        self
    }

    pub fn certificate(mut self, cert: impl FnOnce() -> Option<Value>) -> Self {
        if !self.pass {
            self.certificate = cert();
        }
        self
    }

    /// An error raised while computing a check counts as a failure.
    pub fn failed_with(mut self, err: &Error) -> Self {
        self.observed = Value::String(err.to_string());
        self.pass = false;
        self
    }
}

/// Per-case generator: the stream index keeps cases independent of the
/// order in which they are evaluated.
pub(crate) fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

pub fn run_suite(name: &str, seed: u64, n_cases: usize) -> Result<Report> {
    let start = Instant::now();
    let case_fn: fn(u64, usize) -> Vec<Check> = match name {
        "gauges" => suites::gauges,
        "sb" => suites::sb,
        "sm" => suites::sm,
        "davis" => suites::davis,
        "chain" => suites::chain,
        "sb-flat-blocks" => suites::sb_flat_blocks,
        other => {
            return Err(Error::invalid(format!(
                "unknown suite {other:?}; known suites: {}",
                SUITES.join(", ")
            )))
        }
    };
    let fixed = suites::fixed_cases(name);
    let per_case: Vec<Vec<Check>> = (0..n_cases).into_par_iter().map(|i| case_fn(seed, i)).collect();
    let mut cases = Vec::new();
    for check in fixed.into_iter().chain(per_case.into_iter().flatten()) {
        cases.push(CaseRecord {
            index: cases.len(),
            check: check.check,
            inputs: check.inputs,
            expected: check.expected,
            observed: check.observed,
            tolerance: check.tolerance,
            pass: check.pass,
            provenance: check.provenance,
            anchor: check.anchor.map(str::to_string),
            certificate: check.certificate,
        });
    }
    let passed = cases.iter().filter(|c| c.pass).count();
    Ok(Report {
        schema: REPORT_SCHEMA.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        suite: name.into(),
        seed,
        n_cases,
        passed,
        failed: cases.len() - passed,
        runtime_ms: start.elapsed().as_millis() as u64,
        cases,
    })
}

/// The published report schema.
pub fn report_schema() -> Value {
    serde_json::from_str(include_str!("../../schema/report-v1.schema.json")).expect("bundled schema is valid JSON")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_pass_and_replay() {
        for name in SUITES {
            let a = run_suite(name, 7, 12).unwrap();
            let failures: Vec<String> = a
                .cases
                .iter()
                .filter(|c| !c.pass)
                .map(|c| format!("{} {} expected={} observed={}", c.check, c.inputs, c.expected, c.observed))
                .collect();
            assert!(failures.is_empty(), "{name}:\n{}", failures.join("\n"));
            let b = run_suite(name, 7, 12).unwrap();
            assert_eq!(a.case_table(), b.case_table(), "{name}");
        }
    }

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(run_suite("nope", 0, 1).is_err());
    }
}
