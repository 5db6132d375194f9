//! Machine-readable run reports.
//!
//! Reports are deterministic: checks are sorted by name, every numeric
//! value is an exact `"p/q"` string, and timing is only included when
//! explicitly requested, so identical inputs and seeds produce
//! byte-identical output.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub details: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub args: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u128>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            args: BTreeMap::new(),
            seed: None,
            checks: Vec::new(),
            passed: true,
            timing_ms: None,
        }
    }

    pub fn arg(mut self, key: &str, value: impl ToString) -> Self {
        self.args.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_check(
        &mut self,
        name: &str,
        pass: bool,
        details: impl Serialize,
    ) -> &mut Self {
        self.checks.push(CheckOutcome {
            name: name.to_string(),
            pass,
            details: serde_json::to_value(details).expect("serializable details"),
        });
        self.passed &= pass;
        self
    }

    /// Canonical ordering regardless of execution order.
    pub fn finish(mut self) -> Self {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        self
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
