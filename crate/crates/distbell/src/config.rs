//! Experiment configuration: a JSON file, overridden by CLI flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    CliffwalkAtoms,
    ContractionSuite,
    NoncontractionDemo,
    OscillationDemo,
    NonstationaryDemo,
    SampleWassersteinDemo,
    FixedPointCheck,
}

impl ExperimentName {
    pub const ALL: [Self; 7] = [
        Self::CliffwalkAtoms,
        Self::ContractionSuite,
        Self::NoncontractionDemo,
        Self::OscillationDemo,
        Self::NonstationaryDemo,
        Self::SampleWassersteinDemo,
        Self::FixedPointCheck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CliffwalkAtoms => "cliffwalk_atoms",
            Self::ContractionSuite => "contraction_suite",
            Self::NoncontractionDemo => "noncontraction_demo",
            Self::OscillationDemo => "oscillation_demo",
            Self::NonstationaryDemo => "nonstationary_demo",
            Self::SampleWassersteinDemo => "sample_wasserstein_demo",
            Self::FixedPointCheck => "fixed_point_check",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Self::CliffwalkAtoms => "learned vs Monte-Carlo return distributions on CliffWalk as the atom count varies",
            Self::ContractionSuite => "randomized property battery: contraction, variance, means, projection, gradients, metric axioms",
            Self::NoncontractionDemo => "two-state example where the optimality operator expands d1",
            Self::OscillationDemo => "adversarial tie-breaking makes the optimality operator cycle",
            Self::NonstationaryDemo => "a nonstationary policy whose return law no stationary policy attains",
            Self::SampleWassersteinDemo => "bias of the expected sample Wasserstein loss",
            Self::FixedPointCheck => "exact policy evaluation against Monte-Carlo and value iteration",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| format!("unknown experiment `{s}` (try `distbell list`)"))
    }
}

/// Numeric knobs. Fields left out of a config file take these defaults;
/// `None` means "the experiment's own default".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Atom counts for the CliffWalk sweep.
    pub atoms: Vec<usize>,
    /// Independent repetitions (root sub-seeds).
    pub seeds: usize,
    /// Supervised sweeps.
    pub sweeps: usize,
    /// Sampled-Bellman sweeps; ten times `sweeps` when absent.
    pub sampled_sweeps: Option<usize>,
    pub step_size: f64,
    /// Sweeps between learning-curve points.
    pub eval_every: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// Monte-Carlo rollouts per state-action pair.
    pub rollouts: Option<usize>,
    /// Rollout truncation.
    pub horizon: Option<usize>,
    pub epsilon: f64,
    /// Random MDPs in the contraction battery.
    pub instances: usize,
    /// Randomized cases for the projection and metric batteries.
    pub cases: usize,
    /// Cases for the gradient checks.
    pub gradient_cases: usize,
    /// Convergence tolerance of fixed-point iterations.
    pub tol: f64,
    pub max_iters: usize,
    /// Worker threads for independent cells.
    pub jobs: usize,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            atoms: vec![2, 3, 5, 11, 21, 51],
            seeds: 3,
            sweeps: 5000,
            sampled_sweeps: None,
            step_size: 0.1,
            eval_every: 500,
            v_min: -100.0,
            v_max: -1.0,
            rollouts: None,
            horizon: None,
            epsilon: 0.1,
            instances: 100,
            cases: 10_000,
            gradient_cases: 1000,
            tol: 1e-6,
            max_iters: 10_000,
            jobs: 1,
        }
    }
}

impl Params {
    pub fn sampled_sweeps(&self) -> usize {
        self.sampled_sweeps.unwrap_or(10 * self.sweeps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the report goes to `<out>/<experiment>/`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentName) -> Self {
        Self { experiment, seed: 0, out: None, params: Params::default() }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed config: {e}"))
    }

    /// Range checks; the message names the offending field.
    pub fn validate(&self) -> Result<(), String> {
        let p = &self.params;
        let positive = |name: &str, v: usize| if v == 0 { Err(format!("{name} must be at least 1")) } else { Ok(()) };
        if p.atoms.is_empty() {
            return Err("atoms must not be empty".into());
        }
        if let Some(&n) = p.atoms.iter().find(|&&n| n < 2) {
            return Err(format!("every atom count must be at least 2 (got {n})"));
        }
        positive("seeds", p.seeds)?;
        positive("sweeps", p.sweeps)?;
        positive("sampled_sweeps", p.sampled_sweeps())?;
        positive("eval_every", p.eval_every)?;
        positive("instances", p.instances)?;
        positive("cases", p.cases)?;
        positive("gradient_cases", p.gradient_cases)?;
        positive("max_iters", p.max_iters)?;
        positive("jobs", p.jobs)?;
        if let Some(r) = p.rollouts {
            positive("rollouts", r)?;
        }
        if let Some(h) = p.horizon {
            positive("horizon", h)?;
        }
        if !(p.step_size.is_finite() && p.step_size > 0.0) {
            return Err("step_size must be positive".into());
        }
        if !(p.v_min.is_finite() && p.v_max.is_finite() && p.v_min < p.v_max) {
            return Err("need finite v_min < v_max".into());
        }
        if !(0.0..=1.0).contains(&p.epsilon) {
            return Err("epsilon must lie in [0, 1]".into());
        }
        if !(p.tol.is_finite() && p.tol > 0.0) {
            return Err("tol must be positive".into());
        }
        Ok(())
    }
}
