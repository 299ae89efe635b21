//! Tabular MDPs, policies and the tables the Bellman operators act on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dist::DiscreteDistribution;
use crate::sum::sum;
use crate::{Error, Result, PROB_TOL};

mod instances;
mod rollout;

pub use instances::{
    build_cliffwalk, build_noncontraction_mdp, build_nonstationary_mdp, build_sample_wasserstein_mdp,
    noncontraction_tables, random_mdp, random_policy, random_table, CliffWalk, GridAction, RandomMdpSpec,
};
pub use rollout::{monte_carlo_returns, monte_carlo_table, Rollouts};

/// Finite MDP `(X, A, R, P, γ)` with random rewards.
///
/// Pairs are laid out row-major: pair `(x, a)` has index `x * n_actions + a`.
/// Terminal states self-loop with a point-mass reward at zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawMdp", into = "RawMdp"))]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    terminal: Vec<bool>,
    transition: Vec<Vec<f64>>,
    reward: Vec<DiscreteDistribution>,
}

/// Wire form of a [`TabularMdp`]; `transition[x][a][x']` and `reward[x][a]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawMdp {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    pub terminal: Vec<bool>,
    pub transition: Vec<Vec<Vec<f64>>>,
    pub reward: Vec<Vec<DiscreteDistribution>>,
}

impl TryFrom<RawMdp> for TabularMdp {
    type Error = Error;

    fn try_from(raw: RawMdp) -> Result<Self> {
        if raw.transition.len() != raw.n_states || raw.reward.len() != raw.n_states {
            return Err(Error::InvalidMdp(format!("expected {} state rows", raw.n_states)));
        }
        let transition = raw.transition.into_iter().flatten().collect();
        let reward = raw.reward.into_iter().flatten().collect();
        TabularMdp::new(raw.n_states, raw.n_actions, raw.gamma, raw.terminal, transition, reward)
    }
}

impl From<TabularMdp> for RawMdp {
    fn from(m: TabularMdp) -> Self {
        let na = m.n_actions;
        let mut transition = Vec::with_capacity(m.n_states);
        let mut reward = Vec::with_capacity(m.n_states);
        let mut t = m.transition.into_iter();
        let mut r = m.reward.into_iter();
        for _ in 0..m.n_states {
            transition.push(t.by_ref().take(na).collect());
            reward.push(r.by_ref().take(na).collect());
        }
        RawMdp { n_states: m.n_states, n_actions: na, gamma: m.gamma, terminal: m.terminal, transition, reward }
    }
}

impl TabularMdp {
    /// Validates and builds an MDP from flat per-pair rows.
    ///
    /// With `gamma = 1` every non-terminal state must be able to reach a
    /// terminal state; whether a particular policy terminates is checked by
    /// [`TabularMdp::check_proper`].
    pub fn new(
        n_states: usize,
        n_actions: usize,
        gamma: f64,
        terminal: Vec<bool>,
        transition: Vec<Vec<f64>>,
        reward: Vec<DiscreteDistribution>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        let n_pairs = n_states * n_actions;
        if terminal.len() != n_states {
            return Err(Error::InvalidMdp(format!("terminal has {} entries, expected {n_states}", terminal.len())));
        }
        if transition.len() != n_pairs || reward.len() != n_pairs {
            return Err(Error::InvalidMdp(format!("expected {n_pairs} transition and reward rows")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidMdp(format!("gamma {gamma} outside [0, 1]")));
        }
        for (i, row) in transition.iter().enumerate() {
            let (x, a) = (i / n_actions, i % n_actions);
            if row.len() != n_states {
                return Err(Error::InvalidMdp(format!("transition row ({x}, {a}) has {} entries", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidMdp(format!("transition row ({x}, {a}) has a negative or non-finite entry")));
            }
            let s = sum(row.iter().copied());
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidMdp(format!("transition row ({x}, {a}) sums to {s}")));
            }
        }
        for x in (0..n_states).filter(|&x| terminal[x]) {
            for a in 0..n_actions {
                let i = x * n_actions + a;
                if transition[i][x] < 1.0 - PROB_TOL {
                    return Err(Error::InvalidMdp(format!("terminal state {x} must self-loop")));
                }
                if reward[i] != DiscreteDistribution::point(0.0) {
                    return Err(Error::InvalidMdp(format!("terminal state {x} must have zero reward")));
                }
            }
        }
        let mdp = Self { n_states, n_actions, gamma, terminal, transition, reward };
        if gamma == 1.0 {
            let reach = mdp.can_reach_terminal(|_, _| true);
            if let Some(x) = reach.iter().position(|r| !r) {
                return Err(Error::InvalidMdp(format!("gamma = 1 but state {x} cannot reach a terminal state")));
            }
        }
        Ok(mdp)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn n_pairs(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_terminal(&self, x: usize) -> bool {
        self.terminal[x]
    }

    pub fn terminal(&self) -> &[bool] {
        &self.terminal
    }

    pub fn transition(&self, x: usize, a: usize) -> &[f64] {
        &self.transition[x * self.n_actions + a]
    }

    /// Successor states with positive probability.
    pub fn successors(&self, x: usize, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.transition(x, a).iter().copied().enumerate().filter(|&(_, p)| p > 0.0)
    }

    pub fn reward(&self, x: usize, a: usize) -> &DiscreteDistribution {
        &self.reward[x * self.n_actions + a]
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(
            self.n_states,
            self.n_actions,
            gamma,
            self.terminal.clone(),
            self.transition.clone(),
            self.reward.clone(),
        )
    }

    /// Largest `|r|` over all reward atoms.
    pub fn max_abs_reward(&self) -> f64 {
        self.reward.iter().flat_map(|d| d.atoms()).fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    /// Bound `B` on returns: `max|r| / (1 − γ)` when `γ < 1`, otherwise
    /// `max|r| · horizon` for episodic problems truncated at `horizon`.
    pub fn value_bound(&self, horizon: usize) -> f64 {
        let r = self.max_abs_reward();
        if self.gamma < 1.0 {
            r / (1.0 - self.gamma)
        } else {
            r * horizon as f64
        }
    }

    /// For each state, whether a terminal state is reachable along
    /// transitions whose action passes `allowed(x, a)`.
    fn can_reach_terminal(&self, allowed: impl Fn(usize, usize) -> bool) -> Vec<bool> {
        let mut reach = self.terminal.clone();
        loop {
            let mut changed = false;
            for x in 0..self.n_states {
                if reach[x] {
                    continue;
                }
                let hit = (0..self.n_actions)
                    .filter(|&a| allowed(x, a))
                    .any(|a| self.successors(x, a).any(|(y, _)| reach[y]));
                if hit {
                    reach[x] = true;
                    changed = true;
                }
            }
            if !changed {
                return reach;
            }
        }
    }

    /// With `γ = 1`, checks that `policy` terminates with probability one
    /// from every state (every state reaches a terminal state along the
    /// policy's support). Always succeeds for `γ < 1`.
    pub fn check_proper(&self, policy: &PolicyTable) -> Result<()> {
        self.check_policy(policy)?;
        if self.gamma < 1.0 {
            return Ok(());
        }
        let reach = self.can_reach_terminal(|x, a| policy.prob(x, a) > 0.0);
        match reach.iter().position(|r| !r) {
            None => Ok(()),
            Some(x) => Err(Error::InvalidPolicy(format!("state {x} never terminates under the policy"))),
        }
    }

    pub(crate) fn check_policy(&self, policy: &PolicyTable) -> Result<()> {
        if policy.n_states() != self.n_states || policy.n_actions() != self.n_actions {
            return Err(Error::IndexMismatch);
        }
        Ok(())
    }

    pub(crate) fn check_table<T: PairIndexed>(&self, table: &T) -> Result<()> {
        if table.n_states() != self.n_states || table.n_actions() != self.n_actions {
            return Err(Error::IndexMismatch);
        }
        Ok(())
    }
}

/// Something indexed by `(state, action)`.
pub trait PairIndexed {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
}

/// Stationary stochastic policy `π(a | x)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolicyTable {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl PolicyTable {
    /// Rows are `probs[x * n_actions .. (x + 1) * n_actions]`.
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions {
            return Err(Error::LengthMismatch { expected: n_states * n_actions, found: probs.len() });
        }
        for (x, row) in probs.chunks(n_actions.max(1)).enumerate() {
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::InvalidPolicy(format!("row {x} has a negative or non-finite entry")));
            }
            let s = sum(row.iter().copied());
            if (s - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidPolicy(format!("row {x} sums to {s}")));
            }
        }
        Ok(Self { n_states, n_actions, probs })
    }

    /// Deterministic policy choosing `actions[x]` in state `x`.
    pub fn deterministic(n_actions: usize, actions: &[usize]) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (x, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::InvalidPolicy(format!("action {a} out of range in state {x}")));
            }
            probs[x * n_actions + a] = 1.0;
        }
        Ok(Self { n_states: actions.len(), n_actions, probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self { n_states, n_actions, probs: vec![1.0 / n_actions as f64; n_states * n_actions] }
    }

    /// `(1 − eps) · self + eps · uniform`.
    pub fn mix_uniform(&self, eps: f64) -> Self {
        let u = eps / self.n_actions as f64;
        let probs = self.probs.iter().map(|p| (1.0 - eps) * p + u).collect();
        Self { n_states: self.n_states, n_actions: self.n_actions, probs }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, x: usize, a: usize) -> f64 {
        self.probs[x * self.n_actions + a]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.probs[x * self.n_actions..(x + 1) * self.n_actions]
    }

    /// The action with the largest probability in `x` (lowest index on ties).
    pub fn mode(&self, x: usize) -> usize {
        let row = self.row(x);
        let mut best = 0;
        for (a, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = a;
            }
        }
        best
    }
}

/// Action values `Q(x, a)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    values: Vec<f64>,
}

impl QTable {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn new(n_states: usize, n_actions: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_states * n_actions {
            return Err(Error::LengthMismatch { expected: n_states * n_actions, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { n_states, n_actions, values })
    }

    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self { n_states, n_actions, values: vec![0.0; n_states * n_actions] }
    }

    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.values[x * self.n_actions + a]
    }

    pub fn set(&mut self, x: usize, a: usize, v: f64) {
        self.values[x * self.n_actions + a] = v;
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.values[x * self.n_actions..(x + 1) * self.n_actions]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `‖self − other‖_∞`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if self.n_states != other.n_states || self.n_actions != other.n_actions {
            return Err(Error::IndexMismatch);
        }
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
    }
}

impl PairIndexed for QTable {
    fn n_states(&self) -> usize {
        self.n_states
    }
    fn n_actions(&self) -> usize {
        self.n_actions
    }
}

/// A return distribution `Z(x, a)` for every pair.
///
/// `bound` is a declared `B` with `|z| <= B` for every atom of every entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ValueDistributionTable {
    n_states: usize,
    n_actions: usize,
    entries: Vec<DiscreteDistribution>,
    bound: f64,
}

impl ValueDistributionTable {
    /// Builds a table whose bound is the largest atom magnitude present.
    pub fn new(n_states: usize, n_actions: usize, entries: Vec<DiscreteDistribution>) -> Result<Self> {
        if entries.len() != n_states * n_actions {
            return Err(Error::LengthMismatch { expected: n_states * n_actions, found: entries.len() });
        }
        let bound = entries
            .iter()
            .map(|d| d.min_atom().abs().max(d.max_atom().abs()))
            .fold(0.0, f64::max);
        Ok(Self { n_states, n_actions, entries, bound })
    }

    /// Builds a table and checks every atom against a declared bound.
    pub fn with_bound(n_states: usize, n_actions: usize, entries: Vec<DiscreteDistribution>, bound: f64) -> Result<Self> {
        let mut t = Self::new(n_states, n_actions, entries)?;
        if t.bound > bound {
            return Err(Error::InvalidMdp(format!("atom magnitude {} exceeds declared bound {bound}", t.bound)));
        }
        t.bound = bound;
        Ok(t)
    }

    /// Every entry equal to `d`.
    pub fn constant(n_states: usize, n_actions: usize, d: DiscreteDistribution) -> Self {
        let bound = d.min_atom().abs().max(d.max_atom().abs());
        Self { n_states, n_actions, entries: vec![d; n_states * n_actions], bound }
    }

    /// Every entry a point mass at zero.
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self::constant(n_states, n_actions, DiscreteDistribution::point(0.0))
    }

    pub fn get(&self, x: usize, a: usize) -> &DiscreteDistribution {
        &self.entries[x * self.n_actions + a]
    }

    pub fn entries(&self) -> &[DiscreteDistribution] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<DiscreteDistribution> {
        self.entries
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Returns a copy with entry `(x, a)` replaced.
    pub fn with_entry(&self, x: usize, a: usize, d: DiscreteDistribution) -> Self {
        let mut entries = self.entries.clone();
        entries[x * self.n_actions + a] = d;
        Self::new(self.n_states, self.n_actions, entries).expect("shape unchanged")
    }

    /// `E Z(x, a)` for every pair.
    pub fn mean_table(&self) -> QTable {
        QTable {
            n_states: self.n_states,
            n_actions: self.n_actions,
            values: self.entries.iter().map(DiscreteDistribution::mean).collect(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Largest support size over all entries.
    pub fn max_support(&self) -> usize {
        self.entries.iter().map(DiscreteDistribution::len).max().unwrap_or(0)
    }
}

impl PairIndexed for ValueDistributionTable {
    fn n_states(&self) -> usize {
        self.n_states
    }
    fn n_actions(&self) -> usize {
        self.n_actions
    }
}

/// Chooses among actions whose values tie for the maximum.
pub trait TieBreak {
    /// `tied` is nonempty and sorted ascending. `z` is the value-distribution
    /// table the greedy step is taken for, when there is one.
    fn pick(&self, state: usize, tied: &[usize], z: Option<&ValueDistributionTable>) -> usize;
}

/// Lowest action index first: a fixed total order on actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct LowestIndex;

impl TieBreak for LowestIndex {
    fn pick(&self, _state: usize, tied: &[usize], _z: Option<&ValueDistributionTable>) -> usize {
        tied[0]
    }
}

/// Breaks ties by inspecting one entry of the current table: picks
/// `when_zero` if `Z(probe)` is a point mass at zero, `otherwise` if not.
///
/// On the two-state example with `ε = 0`, probing `Z(x₁, ·)` with
/// `when_zero = a₂` and `otherwise = a₁` makes the optimality operator
/// oscillate with period two.
#[derive(Debug, Clone, Copy)]
pub struct PointMassAtZeroRule {
    pub probe: (usize, usize),
    pub when_zero: usize,
    pub otherwise: usize,
}

impl TieBreak for PointMassAtZeroRule {
    fn pick(&self, _state: usize, tied: &[usize], z: Option<&ValueDistributionTable>) -> usize {
        let at_zero = z
            .map(|t| {
                let d = t.get(self.probe.0, self.probe.1);
                d.is_point_mass() && d.atoms()[0] == 0.0
            })
            .unwrap_or(false);
        let want = if at_zero { self.when_zero } else { self.otherwise };
        if tied.contains(&want) {
            want
        } else {
            tied[0]
        }
    }
}

/// Relative tolerance under which two action values count as tied.
pub const TIE_TOL: f64 = 1e-12;

fn greedy_actions(q: &QTable, tie: &dyn TieBreak, z: Option<&ValueDistributionTable>) -> Vec<usize> {
    let mut tied = Vec::with_capacity(q.n_actions);
    (0..q.n_states)
        .map(|x| {
            let row = q.row(x);
            let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tol = TIE_TOL * best.abs().max(1.0);
            tied.clear();
            tied.extend((0..row.len()).filter(|&a| row[a] >= best - tol));
            tie.pick(x, &tied, z)
        })
        .collect()
}

/// Deterministic policy maximizing `q(x, ·)`, ties resolved by `tie`.
pub fn greedy_policy(q: &QTable, tie: &dyn TieBreak) -> PolicyTable {
    let actions = greedy_actions(q, tie, None);
    PolicyTable::deterministic(q.n_actions, &actions).expect("greedy actions are in range")
}

/// Greedy policy with respect to `E Z`, giving `tie` access to `z`.
pub fn greedy_policy_for(z: &ValueDistributionTable, tie: &dyn TieBreak) -> PolicyTable {
    let q = z.mean_table();
    let actions = greedy_actions(&q, tie, Some(z));
    PolicyTable::deterministic(q.n_actions, &actions).expect("greedy actions are in range")
}
