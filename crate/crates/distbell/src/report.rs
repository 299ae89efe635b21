//! Experiment reports: expectations with outcomes plus result tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, ExperimentName};

/// How an observation is compared with its threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
    Below,
    Above,
    /// `|observed − threshold| ≤ tolerance`.
    Within,
    /// A boolean outcome: 1 for true.
    IsTrue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    /// Stable dotted identifier, e.g. `noncontraction.d1_after`.
    pub id: String,
    pub description: String,
    /// `None` when the quantity could not be computed (e.g. training
    /// diverged); the expectation then fails.
    pub observed: Option<f64>,
    pub comparison: Comparison,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Expectation {
    fn build(id: &str, description: &str, observed: Option<f64>, comparison: Comparison, threshold: f64, tolerance: Option<f64>) -> Self {
        let passed = observed.is_some_and(|o| match comparison {
            Comparison::AtMost => o <= threshold,
            Comparison::AtLeast => o >= threshold,
            Comparison::Below => o < threshold,
            Comparison::Above => o > threshold,
            Comparison::Within => (o - threshold).abs() <= tolerance.unwrap_or(0.0),
            Comparison::IsTrue => o == 1.0,
        });
        Self { id: id.into(), description: description.into(), observed, comparison, threshold, tolerance, passed }
    }

    pub fn at_most(id: &str, description: &str, observed: f64, threshold: f64) -> Self {
        Self::build(id, description, finite(observed), Comparison::AtMost, threshold, None)
    }

    pub fn at_least(id: &str, description: &str, observed: f64, threshold: f64) -> Self {
        Self::build(id, description, finite(observed), Comparison::AtLeast, threshold, None)
    }

    pub fn below(id: &str, description: &str, observed: f64, threshold: f64) -> Self {
        Self::build(id, description, finite(observed), Comparison::Below, threshold, None)
    }

    pub fn above(id: &str, description: &str, observed: f64, threshold: f64) -> Self {
        Self::build(id, description, finite(observed), Comparison::Above, threshold, None)
    }

    pub fn within(id: &str, description: &str, observed: f64, target: f64, tolerance: f64) -> Self {
        Self::build(id, description, finite(observed), Comparison::Within, target, Some(tolerance))
    }

    pub fn is_true(id: &str, description: &str, observed: bool) -> Self {
        Self::build(id, description, Some(if observed { 1.0 } else { 0.0 }), Comparison::IsTrue, 1.0, None)
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: ExperimentName,
    pub config: ExperimentConfig,
    pub expectations: Vec<Expectation>,
    /// Named result tables; shapes differ per experiment.
    pub results: BTreeMap<String, Value>,
    /// Artifact paths relative to the report directory.
    pub files: Vec<String>,
    pub passed: bool,
    /// Wall-clock seconds; not part of the reproducible content.
    pub duration_secs: f64,
    /// Wall-clock seconds per section; not part of the reproducible content.
    pub timings: BTreeMap<String, f64>,
}

impl ExperimentReport {
    pub fn expectation(&self, id: &str) -> Option<&Expectation> {
        self.expectations.iter().find(|e| e.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Expectation> {
        self.expectations.iter().filter(|e| !e.passed)
    }

    /// The report as JSON with the wall-clock fields removed.
    pub fn reproducible_json(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("reports serialize");
        if let Value::Object(map) = &mut v {
            map.remove("duration_secs");
            map.remove("timings");
        }
        v
    }
}

/// Accumulates expectations, result tables and timings while a runner works.
#[derive(Debug, Default)]
pub struct ReportBuilder {
    pub expectations: Vec<Expectation>,
    pub results: BTreeMap<String, Value>,
    pub timings: BTreeMap<String, f64>,
}

impl ReportBuilder {
    pub fn expect(&mut self, e: Expectation) {
        self.expectations.push(e);
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).expect("results serialize"));
    }

    pub fn time<T>(&mut self, section: &str, f: impl FnOnce() -> T) -> T {
        let start = std::time::Instant::now();
        let out = f();
        self.timings.insert(section.into(), start.elapsed().as_secs_f64());
        out
    }
}
