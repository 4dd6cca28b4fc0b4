//! Structured reports: every command and verification suite emits one, and
//! identical inputs must produce byte-identical JSON (sorted maps, no
//! timestamps).

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    /// stable claim identifier, traceable to the module that verifies it
    pub claim: String,
    pub pass: bool,
    pub details: String,
}

impl Check {
    pub fn new(claim: &str, pass: bool, details: impl Into<String>) -> Self {
        Check { claim: claim.into(), pass, details: details.into() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            inputs: Value::Null,
            results: Value::Null,
            checks: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, v: impl Serialize) -> Self {
        self.inputs = serde_json::to_value(v).expect("serializable");
        self
    }

    pub fn with_results(mut self, v: impl Serialize) -> Self {
        self.results = serde_json::to_value(v).expect("serializable");
        self
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Human-readable rendering: one line per check plus the results blob.
    pub fn render_text(&self) -> String {
        let mut out = format!("== {}\n", self.command);
        if !self.inputs.is_null() {
            out += &format!("inputs: {}\n", compact(&self.inputs));
        }
        if !self.results.is_null() {
            out += &format!("results: {}\n", compact(&self.results));
        }
        for c in &self.checks {
            out += &format!(
                "  [{}] {} {}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.claim,
                c.details
            );
        }
        out
    }
}

fn compact(v: &Value) -> String {
    serde_json::to_string(v).expect("serializable")
}
