//! The categorical algorithm on a tabular softmax model.
//!
//! One logit vector per state-action pair; `p_i(x, a) = softmax(θ(x, a))_i`
//! over a fixed [`CategoricalSupport`]. Targets are built by the two-neighbour
//! projection, trained with cross-entropy, and compared against a sampled
//! Wasserstein-gradient learner and the one-parameter Bernoulli variant.

use alloc::vec;
use alloc::vec::Vec;

// Float math without std; when std is linked the inherent methods win.
#[allow(unused_imports)]
use num_traits::Float;

use crate::dist::{softmax, CategoricalDistribution, CategoricalSupport, DiscreteDistribution};
use crate::mdp::{PolicyTable, Rollouts, TabularMdp, TieBreak, ValueDistributionTable, TIE_TOL};
use crate::metrics::wasserstein;
use crate::sum::NeumaierSum;
use crate::{rng, Error, Result};

/// Logits above this magnitude abort training.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Splits mass `w` at `y` between the two neighbouring atoms of `support`.
#[inline]
fn deposit(support: &CategoricalSupport, inv_dz: f64, y: f64, w: f64, out: &mut [f64]) {
    let top = (support.n_atoms() - 1) as f64;
    let b = ((support.clamp(y) - support.v_min()) * inv_dz).clamp(0.0, top);
    let l = b.floor();
    let u = b.ceil();
    if l == u {
        out[l as usize] += w;
    } else {
        let hi = w * (b - l);
        out[l as usize] += w - hi;
        out[u as usize] += hi;
    }
}

/// Projects `target` onto `support`: each atom is clamped to
/// `[v_min, v_max]` and its mass split between the two nearest atoms in
/// proportion to proximity. An atom that lands exactly on a support point
/// keeps all of its mass there.
pub fn project(support: &CategoricalSupport, target: &DiscreteDistribution) -> CategoricalDistribution {
    let mut m = vec![0.0; support.n_atoms()];
    let inv_dz = 1.0 / support.delta_z();
    for (y, w) in target.iter() {
        deposit(support, inv_dz, y, w, &mut m);
    }
    CategoricalDistribution::from_raw(*support, m)
}

/// Projection of `r + γ_t Z` for `Z` with probabilities `probs` on `support`,
/// accumulated into `out` (which is zeroed first).
fn project_shifted(support: &CategoricalSupport, probs: &[f64], r: f64, gamma_t: f64, out: &mut [f64]) {
    out.iter_mut().for_each(|m| *m = 0.0);
    let inv_dz = 1.0 / support.delta_z();
    for (j, &pj) in probs.iter().enumerate() {
        deposit(support, inv_dz, r + gamma_t * support.atom(j), pj, out);
    }
}

/// Softmax logits, one row per state-action pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LogitTable {
    support: CategoricalSupport,
    n_states: usize,
    n_actions: usize,
    /// Row-major, `n_atoms` entries per pair.
    logits: Vec<f64>,
}

impl LogitTable {
    /// All-zero logits: every row is the uniform distribution.
    pub fn zeros(support: CategoricalSupport, n_states: usize, n_actions: usize) -> Self {
        Self { support, n_states, n_actions, logits: vec![0.0; n_states * n_actions * support.n_atoms()] }
    }

    pub fn from_rows(support: CategoricalSupport, n_states: usize, n_actions: usize, logits: Vec<f64>) -> Result<Self> {
        let expected = n_states * n_actions * support.n_atoms();
        if logits.len() != expected {
            return Err(Error::LengthMismatch { expected, found: logits.len() });
        }
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { support, n_states, n_actions, logits })
    }

    pub fn support(&self) -> &CategoricalSupport {
        &self.support
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn offset(&self, x: usize, a: usize) -> usize {
        (x * self.n_actions + a) * self.support.n_atoms()
    }

    pub fn row(&self, x: usize, a: usize) -> &[f64] {
        let o = self.offset(x, a);
        &self.logits[o..o + self.support.n_atoms()]
    }

    pub fn row_mut(&mut self, x: usize, a: usize) -> &mut [f64] {
        let o = self.offset(x, a);
        let n = self.support.n_atoms();
        &mut self.logits[o..o + n]
    }

    pub fn probs(&self, x: usize, a: usize) -> Vec<f64> {
        softmax(self.row(x, a))
    }

    pub fn distribution(&self, x: usize, a: usize) -> CategoricalDistribution {
        CategoricalDistribution::from_raw(self.support, self.probs(x, a))
    }

    /// `Q(x, a) = Σ_i z_i p_i(x, a)`.
    pub fn q(&self, x: usize, a: usize) -> f64 {
        let p = self.probs(x, a);
        p.iter().enumerate().map(|(i, pi)| pi * self.support.atom(i)).collect::<NeumaierSum>().value()
    }

    /// Greedy action at `x` on `Q`, ties resolved by `tie`.
    pub fn greedy(&self, x: usize, tie: &dyn TieBreak) -> usize {
        let q: Vec<f64> = (0..self.n_actions).map(|a| self.q(x, a)).collect();
        let best = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = TIE_TOL * best.abs().max(1.0);
        let tied: Vec<usize> = (0..q.len()).filter(|&a| q[a] >= best - tol).collect();
        tie.pick(x, &tied, None)
    }

    pub fn max_abs(&self) -> f64 {
        self.logits.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Every row as a [`DiscreteDistribution`].
    pub fn to_value_table(&self) -> Result<ValueDistributionTable> {
        let mut entries = Vec::with_capacity(self.n_states * self.n_actions);
        for x in 0..self.n_states {
            for a in 0..self.n_actions {
                entries.push(self.distribution(x, a).to_discrete());
            }
        }
        ValueDistributionTable::new(self.n_states, self.n_actions, entries)
    }
}

/// One observed transition; `gamma_t` is zero when `x_next` is terminal.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransitionSample {
    pub x: usize,
    pub a: usize,
    pub r: f64,
    pub x_next: usize,
    pub gamma_t: f64,
}

impl TransitionSample {
    /// Fills in `gamma_t` from the MDP's discount and terminal set.
    pub fn new(mdp: &TabularMdp, x: usize, a: usize, r: f64, x_next: usize) -> Self {
        let gamma_t = if mdp.is_terminal(x_next) { 0.0 } else { mdp.gamma() };
        Self { x, a, r, x_next, gamma_t }
    }
}

/// How the next action is chosen when bootstrapping.
#[derive(Clone, Copy)]
pub enum NextAction<'a> {
    /// `argmax_a Q(x', a)` under the target logits.
    Greedy(&'a dyn TieBreak),
    /// A given action, e.g. drawn from the evaluated policy.
    Given(usize),
}

fn next_action(theta: &LogitTable, x_next: usize, next: NextAction<'_>) -> usize {
    match next {
        NextAction::Greedy(tie) => theta.greedy(x_next, tie),
        NextAction::Given(a) => a,
    }
}

/// Projected one-sample target `Φ (r + γ_t Z_θ̃(x', a*))`.
pub fn sample_bellman_target(theta_target: &LogitTable, sample: &TransitionSample, next: NextAction<'_>) -> CategoricalDistribution {
    let support = *theta_target.support();
    let a_next = next_action(theta_target, sample.x_next, next);
    let p_next = theta_target.probs(sample.x_next, a_next);
    let mut m = vec![0.0; support.n_atoms()];
    project_shifted(&support, &p_next, sample.r, sample.gamma_t, &mut m);
    CategoricalDistribution::from_raw(support, m)
}

/// Two-atom target whose mean is the clamped mean of the one-sample
/// Bellman target.
pub fn bernoulli_target(theta_target: &LogitTable, sample: &TransitionSample, next: NextAction<'_>) -> Result<CategoricalDistribution> {
    let support = *theta_target.support();
    if support.n_atoms() != 2 {
        return Err(Error::InvalidConfig("the Bernoulli algorithm needs exactly two atoms".into()));
    }
    let a_next = next_action(theta_target, sample.x_next, next);
    let q = sample.r + sample.gamma_t * theta_target.q(sample.x_next, a_next);
    Ok(bernoulli_from_mean(&support, q))
}

fn bernoulli_from_mean(support: &CategoricalSupport, q: f64) -> CategoricalDistribution {
    let hi = ((q - support.v_min()) / support.delta_z()).clamp(0.0, 1.0);
    CategoricalDistribution::from_raw(*support, vec![1.0 - hi, hi])
}

/// Cross-entropy `−Σ m_i log softmax(θ)_i` and its gradient `p − m`.
pub fn ce_loss_and_gradient(m: &CategoricalDistribution, logits: &[f64]) -> Result<(f64, Vec<f64>)> {
    if logits.len() != m.probs().len() {
        return Err(Error::LengthMismatch { expected: m.probs().len(), found: logits.len() });
    }
    Ok(ce_raw(m.probs(), logits))
}

fn ce_raw(m: &[f64], logits: &[f64]) -> (f64, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).collect::<NeumaierSum>().value().ln();
    let loss = m
        .iter()
        .zip(logits)
        .filter(|(mi, _)| **mi > 0.0)
        .map(|(mi, l)| -mi * (l - lse))
        .collect::<NeumaierSum>()
        .value();
    let grad = softmax(logits).iter().zip(m).map(|(p, mi)| p - mi).collect();
    (loss, grad)
}

/// `d₁` between `p` on `support` and the law with (sorted) atoms `t_atoms`
/// and masses `t_probs`, with the gradient with respect to `p`.
///
/// `d₁ = ∫ |F − G|`; on the merged breakpoints `F − G` is piecewise constant,
/// and `∂F(y)/∂p_i = 1{z_i ≤ y}`, so `∂d₁/∂p_i` sums `sign(F − G) · length`
/// over segments starting at or after `z_i`.
fn w1_wrt_probs(support: &CategoricalSupport, p: &[f64], t_atoms: &[f64], t_probs: &[f64]) -> (f64, Vec<f64>) {
    let n = p.len();
    let k = t_atoms.len();
    let mut slope = Vec::with_capacity(n + k);
    let mut pos = vec![0usize; n];
    let (mut i, mut j) = (0, 0);
    let (mut f, mut g) = (0.0, 0.0);
    let mut loss = NeumaierSum::new();
    while i < n || j < k {
        let take_support = j >= k || (i < n && support.atom(i) <= t_atoms[j]);
        let y = if take_support {
            pos[i] = slope.len();
            f += p[i];
            i += 1;
            support.atom(i - 1)
        } else {
            g += t_probs[j];
            j += 1;
            t_atoms[j - 1]
        };
        let next = match (i < n, j < k) {
            (true, true) => support.atom(i).min(t_atoms[j]),
            (true, false) => support.atom(i),
            (false, true) => t_atoms[j],
            (false, false) => y,
        };
        let seg = next - y;
        let diff = f - g;
        loss.add(diff.abs() * seg);
        slope.push(if diff > 0.0 {
            seg
        } else if diff < 0.0 {
            -seg
        } else {
            0.0
        });
    }
    let mut suffix = vec![0.0; slope.len() + 1];
    for t in (0..slope.len()).rev() {
        suffix[t] = suffix[t + 1] + slope[t];
    }
    let grad = pos.iter().map(|&t| suffix[t]).collect();
    (loss.value().max(0.0), grad)
}

/// Chains `∂L/∂p` through the softmax Jacobian.
fn softmax_chain(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let avg = p.iter().zip(dp).map(|(pi, gi)| pi * gi).collect::<NeumaierSum>().value();
    p.iter().zip(dp).map(|(pi, gi)| pi * (gi - avg)).collect()
}

/// `d₁(softmax(θ) on support, target)` and a subgradient with respect to
/// `θ`. Segments where the two c.d.f.s agree contribute zero.
pub fn wasserstein_loss_and_subgradient(
    logits: &[f64],
    support: &CategoricalSupport,
    target: &DiscreteDistribution,
) -> Result<(f64, Vec<f64>)> {
    if logits.len() != support.n_atoms() {
        return Err(Error::LengthMismatch { expected: support.n_atoms(), found: logits.len() });
    }
    let p = softmax(logits);
    let (loss, dp) = w1_wrt_probs(support, &p, target.atoms(), target.probs());
    Ok((loss, softmax_chain(&p, &dp)))
}

/// Source of training targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Regime {
    /// The oracle distribution of every pair.
    SupervisedTarget,
    /// One sampled transition per pair per sweep, bootstrapped from a frozen
    /// copy of the logits.
    SampledBellman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Loss {
    CategoricalCe,
    WassersteinP1,
    Bernoulli,
}

/// Next-action rule of the sampled regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum Bootstrap {
    /// `a' ~ π(· | x')`: evaluates the given policy.
    Policy,
    /// `argmax_a Q(x', a)` with lowest-index ties.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub support: CategoricalSupport,
    pub regime: Regime,
    pub loss: Loss,
    pub bootstrap: Bootstrap,
    pub sweeps: usize,
    pub step_size: f64,
    pub seed: u64,
    /// Sweeps between refreshes of the frozen target logits.
    pub target_refresh_interval: usize,
    /// Sweeps between learning-curve points; the last sweep is always
    /// recorded.
    pub eval_every: usize,
}

impl TrainConfig {
    pub fn new(support: CategoricalSupport, regime: Regime, loss: Loss) -> Self {
        Self {
            support,
            regime,
            loss,
            bootstrap: Bootstrap::Policy,
            sweeps: 1000,
            step_size: 0.1,
            seed: 0,
            target_refresh_interval: 1,
            eval_every: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::InvalidConfig("sweeps must be at least 1".into()));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::InvalidConfig("step_size must be positive".into()));
        }
        if self.target_refresh_interval == 0 || self.eval_every == 0 {
            return Err(Error::InvalidConfig("intervals must be at least 1".into()));
        }
        if self.loss == Loss::Bernoulli && self.support.n_atoms() != 2 {
            return Err(Error::InvalidConfig("the Bernoulli algorithm needs exactly two atoms".into()));
        }
        Ok(())
    }
}

/// One learning-curve point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CurvePoint {
    /// 1-based sweep count.
    pub sweep: usize,
    /// Mean and max `d₁(Z_θ(x,a), oracle(x,a))` over non-terminal pairs.
    pub mean_d1: Option<f64>,
    pub max_d1: Option<f64>,
    /// Mean per-visit training loss of the sweep.
    pub loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub logits: LogitTable,
    pub history: Vec<CurvePoint>,
}

/// `(mean, max)` of `d₁(Z_θ(x,a), oracle(x,a))` over non-terminal pairs.
pub fn oracle_distance(mdp: &TabularMdp, theta: &LogitTable, oracle: &ValueDistributionTable) -> Result<(f64, f64)> {
    let mut acc = NeumaierSum::new();
    let mut max = 0.0_f64;
    let mut count = 0usize;
    for x in (0..mdp.n_states()).filter(|&x| !mdp.is_terminal(x)) {
        for a in 0..mdp.n_actions() {
            let d = wasserstein(&theta.distribution(x, a).to_discrete(), oracle.get(x, a), 1.0)?;
            acc.add(d);
            max = max.max(d);
            count += 1;
        }
    }
    Ok((acc.value() / count.max(1) as f64, max))
}

/// Plain gradient descent on a tabular logit model.
///
/// Each sweep visits every non-terminal pair once, in state-action order.
pub fn train(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    config: &TrainConfig,
    oracle: Option<&ValueDistributionTable>,
) -> Result<TrainOutcome> {
    config.validate()?;
    mdp.check_policy(policy)?;
    if let Some(o) = oracle {
        mdp.check_table(o)?;
    }
    if config.regime == Regime::SupervisedTarget && oracle.is_none() {
        return Err(Error::InvalidConfig("the supervised regime needs an oracle".into()));
    }
    let support = config.support;
    let n = support.n_atoms();
    let na = mdp.n_actions();
    let pairs: Vec<(usize, usize)> =
        (0..mdp.n_states()).filter(|&x| !mdp.is_terminal(x)).flat_map(|x| (0..na).map(move |a| (x, a))).collect();

    let supervised: Vec<SupervisedTarget> = match (config.regime, oracle) {
        (Regime::SupervisedTarget, Some(o)) => pairs
            .iter()
            .map(|&(x, a)| {
                let d = o.get(x, a);
                match config.loss {
                    Loss::CategoricalCe => SupervisedTarget::Categorical(project(&support, d).into_probs()),
                    Loss::Bernoulli => SupervisedTarget::Categorical(bernoulli_from_mean(&support, d.mean()).into_probs()),
                    Loss::WassersteinP1 => SupervisedTarget::Discrete(d.atoms().to_vec(), d.probs().to_vec()),
                }
            })
            .collect(),
        _ => Vec::new(),
    };

    let roll = Rollouts::new(mdp, policy)?;
    let mut rng = rng::named(config.seed, "sampled_bellman");
    let mut theta = LogitTable::zeros(support, mdp.n_states(), na);
    let mut frozen = theta.clone();
    let mut history = Vec::new();
    let mut m = vec![0.0; n];
    let mut t_atoms = vec![0.0; n];

    for sweep in 0..config.sweeps {
        if config.regime == Regime::SampledBellman && sweep % config.target_refresh_interval == 0 {
            frozen.clone_from(&theta);
        }
        let mut sweep_loss = NeumaierSum::new();
        for (idx, &(x, a)) in pairs.iter().enumerate() {
            let (loss, grad) = match config.regime {
                Regime::SupervisedTarget => match &supervised[idx] {
                    SupervisedTarget::Categorical(target) => ce_raw(target, theta.row(x, a)),
                    SupervisedTarget::Discrete(atoms, probs) => {
                        let p = softmax(theta.row(x, a));
                        let (l, dp) = w1_wrt_probs(&support, &p, atoms, probs);
                        (l, softmax_chain(&p, &dp))
                    }
                },
                Regime::SampledBellman => {
                    let (r, y) = roll.step(x, a, &mut rng);
                    let sample = TransitionSample::new(mdp, x, a, r, y);
                    let next = match config.bootstrap {
                        Bootstrap::Policy => NextAction::Given(roll.action(y, &mut rng)),
                        Bootstrap::Greedy => NextAction::Greedy(&crate::mdp::LowestIndex),
                    };
                    match config.loss {
                        Loss::CategoricalCe => {
                            let a_next = next_action(&frozen, y, next);
                            project_shifted(&support, &frozen.probs(y, a_next), r, sample.gamma_t, &mut m);
                            ce_raw(&m, theta.row(x, a))
                        }
                        Loss::Bernoulli => {
                            let target = bernoulli_target(&frozen, &sample, next)?;
                            ce_raw(target.probs(), theta.row(x, a))
                        }
                        Loss::WassersteinP1 => {
                            let a_next = next_action(&frozen, y, next);
                            let p_next = frozen.probs(y, a_next);
                            let p = softmax(theta.row(x, a));
                            let (l, dp) = if sample.gamma_t == 0.0 {
                                w1_wrt_probs(&support, &p, &[r], &[1.0])
                            } else {
                                for (j, t) in t_atoms.iter_mut().enumerate() {
                                    *t = r + sample.gamma_t * support.atom(j);
                                }
                                w1_wrt_probs(&support, &p, &t_atoms, &p_next)
                            };
                            (l, softmax_chain(&p, &dp))
                        }
                    }
                }
            };
            sweep_loss.add(loss);
            for (t, g) in theta.row_mut(x, a).iter_mut().zip(&grad) {
                *t -= config.step_size * g;
            }
        }
        let worst = theta.max_abs();
        if worst.is_nan() || worst > DIVERGENCE_LIMIT {
            return Err(Error::Divergence { sweep: sweep + 1, logit: worst });
        }
        let done = sweep + 1;
        if done % config.eval_every == 0 || done == config.sweeps {
            let (mean_d1, max_d1) = match oracle {
                Some(o) => {
                    let (mean, max) = oracle_distance(mdp, &theta, o)?;
                    (Some(mean), Some(max))
                }
                None => (None, None),
            };
            history.push(CurvePoint { sweep: done, mean_d1, max_d1, loss: sweep_loss.value() / pairs.len().max(1) as f64 });
        }
    }
    Ok(TrainOutcome { logits: theta, history })
}

enum SupervisedTarget {
    Categorical(Vec<f64>),
    Discrete(Vec<f64>, Vec<f64>),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{build_sample_wasserstein_mdp, LowestIndex};
    use crate::MERGE_TOL;
    use proptest::prelude::*;
    use rand::Rng;

    fn support(v_min: f64, v_max: f64, n: usize) -> CategoricalSupport {
        CategoricalSupport::new(v_min, v_max, n).unwrap()
    }

    /// Direct evaluation of `Σ_j [1 − |clamp(y_j) − z_i| / Δz]₀¹ w_j`.
    fn hat_projection(s: &CategoricalSupport, target: &DiscreteDistribution) -> Vec<f64> {
        (0..s.n_atoms())
            .map(|i| {
                target
                    .iter()
                    .map(|(y, w)| (1.0 - (s.clamp(y) - s.atom(i)).abs() / s.delta_z()).clamp(0.0, 1.0) * w)
                    .sum()
            })
            .collect()
    }

    #[test]
    fn projection_examples() {
        let s = support(0.0, 2.0, 3);
        let m = project(&s, &DiscreteDistribution::point(0.4));
        assert!((m.probs()[0] - 0.6).abs() < 1e-15 && (m.probs()[1] - 0.4).abs() < 1e-15 && m.probs()[2] == 0.0);
        assert_eq!(project(&s, &DiscreteDistribution::point(3.5)).probs(), &[0.0, 0.0, 1.0]);
        let on = DiscreteDistribution::new(&[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5], MERGE_TOL).unwrap();
        assert_eq!(project(&s, &on).probs(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn integral_position_keeps_mass() {
        let s = support(-3.0, 3.0, 7);
        for k in -3..=3 {
            let m = project(&s, &DiscreteDistribution::point(k as f64));
            assert_eq!(m.probs().iter().sum::<f64>(), 1.0);
            assert_eq!(m.probs()[(k + 3) as usize], 1.0);
        }
    }

    #[test]
    fn terminal_sample_is_point_mass() {
        let s = support(0.0, 10.0, 11);
        let theta = LogitTable::zeros(s, 2, 1);
        let sample = TransitionSample { x: 0, a: 0, r: 3.0, x_next: 1, gamma_t: 0.0 };
        let m = sample_bellman_target(&theta, &sample, NextAction::Greedy(&LowestIndex));
        assert!((m.probs()[3] - 1.0).abs() < 1e-15);
        assert!(m.probs().iter().enumerate().all(|(i, p)| i == 3 || *p == 0.0));
    }

    #[test]
    fn uniform_row_with_unit_discount() {
        let s = support(0.0, 10.0, 11);
        let theta = LogitTable::zeros(s, 2, 1);
        let sample = TransitionSample { x: 0, a: 0, r: 0.0, x_next: 1, gamma_t: 1.0 };
        let m = sample_bellman_target(&theta, &sample, NextAction::Given(0));
        for p in m.probs() {
            assert!((p - 1.0 / 11.0).abs() < 1e-15);
        }
    }

    #[test]
    fn greedy_bootstrap_uses_best_row() {
        let s = support(0.0, 1.0, 2);
        let mut theta = LogitTable::zeros(s, 2, 2);
        theta.row_mut(1, 1).copy_from_slice(&[-5.0, 5.0]);
        let sample = TransitionSample { x: 0, a: 0, r: 0.0, x_next: 1, gamma_t: 1.0 };
        let m = sample_bellman_target(&theta, &sample, NextAction::Greedy(&LowestIndex));
        assert_eq!(m.probs(), theta.probs(1, 1).as_slice());
    }

    #[test]
    fn ce_examples() {
        let s = support(0.0, 3.0, 4);
        let logits = [0.3, -1.0, 2.0, 0.0];
        let m = CategoricalDistribution::softmax(s, &logits).unwrap();
        let (loss, grad) = ce_loss_and_gradient(&m, &logits).unwrap();
        let entropy: f64 = m.probs().iter().map(|p| -p * p.ln()).sum();
        assert!((loss - entropy).abs() < 1e-12);
        assert!(grad.iter().all(|g| g.abs() < 1e-15));

        let one_hot = CategoricalDistribution::new(s, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
        let (_, grad) = ce_loss_and_gradient(&one_hot, &[0.0; 4]).unwrap();
        for (j, g) in grad.iter().enumerate() {
            let want = 0.25 - if j == 2 { 1.0 } else { 0.0 };
            assert!((g - want).abs() < 1e-15);
        }
    }

    #[test]
    fn wasserstein_loss_matches_metric() {
        let mut r = rng::stream(3, 0);
        let s = support(-2.0, 2.0, 9);
        for _ in 0..200 {
            let logits: Vec<f64> = (0..9).map(|_| r.gen_range(-2.0..2.0)).collect();
            let k = r.gen_range(1..6);
            let atoms: Vec<f64> = (0..k).map(|_| r.gen_range(-3.0..3.0)).collect();
            let probs: Vec<f64> = (0..k).map(|_| r.gen_range(0.1..1.0)).collect();
            let t = DiscreteDistribution::new(&atoms, &probs, MERGE_TOL).unwrap();
            let (loss, _) = wasserstein_loss_and_subgradient(&logits, &s, &t).unwrap();
            let p = CategoricalDistribution::softmax(s, &logits).unwrap().to_discrete();
            assert!((loss - wasserstein(&p, &t, 1.0).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn wasserstein_at_target_is_stationary() {
        let s = support(0.0, 4.0, 5);
        let logits = [0.1, 0.5, -0.2, 1.0, 0.0];
        let t = CategoricalDistribution::softmax(s, &logits).unwrap().to_discrete();
        let (loss, grad) = wasserstein_loss_and_subgradient(&logits, &s, &t).unwrap();
        assert!(loss < 1e-15);
        assert!(grad.iter().all(|g| g.abs() < 1e-15));
    }

    #[test]
    fn bernoulli_examples() {
        let s = support(-1.0, 3.0, 2);
        let theta = LogitTable::zeros(s, 2, 1);
        let at = |r: f64| {
            let sample = TransitionSample { x: 0, a: 0, r, x_next: 1, gamma_t: 0.0 };
            bernoulli_target(&theta, &sample, NextAction::Given(0)).unwrap()
        };
        assert_eq!(at(-1.0).probs(), &[1.0, 0.0]);
        assert_eq!(at(3.0).probs(), &[0.0, 1.0]);
        let mid = at(1.0);
        assert_eq!(mid.probs(), &[0.5, 0.5]);
        assert_eq!(mid.mean(), 1.0);
        let wide = LogitTable::zeros(support(0.0, 1.0, 3), 2, 1);
        let sample = TransitionSample { x: 0, a: 0, r: 0.0, x_next: 1, gamma_t: 0.0 };
        assert!(bernoulli_target(&wide, &sample, NextAction::Given(0)).is_err());
    }

    #[test]
    fn supervised_realizable_target() {
        let mdp = build_sample_wasserstein_mdp();
        let pi = PolicyTable::uniform(2, 1);
        let s = support(0.0, 1.0, 2);
        let coin = DiscreteDistribution::new(&[0.0, 1.0], &[0.5, 0.5], MERGE_TOL).unwrap();
        let oracle = ValueDistributionTable::new(2, 1, vec![coin, DiscreteDistribution::point(0.0)]).unwrap();
        let mut cfg = TrainConfig::new(s, Regime::SupervisedTarget, Loss::CategoricalCe);
        cfg.sweeps = 200;
        let out = train(&mdp, &pi, &cfg, Some(&oracle)).unwrap();
        assert!(out.history.last().unwrap().mean_d1.unwrap() <= 1e-3);
        assert_eq!(out.history.len(), 200);
    }

    #[test]
    fn sampled_training_learns_coin() {
        let mdp = build_sample_wasserstein_mdp();
        let pi = PolicyTable::uniform(2, 1);
        let s = support(0.0, 1.0, 2);
        let mut cfg = TrainConfig::new(s, Regime::SampledBellman, Loss::CategoricalCe);
        cfg.sweeps = 4000;
        cfg.step_size = 0.01;
        cfg.eval_every = 1000;
        let out = train(&mdp, &pi, &cfg, None).unwrap();
        assert_eq!(out.history.len(), 4);
        assert!((out.logits.probs(0, 0)[1] - 0.5).abs() < 0.1);
    }

    #[test]
    fn divergence_is_reported() {
        let mdp = build_sample_wasserstein_mdp();
        let pi = PolicyTable::uniform(2, 1);
        let s = support(0.0, 1.0, 2);
        let oracle = ValueDistributionTable::constant(2, 1, DiscreteDistribution::point(0.3));
        let mut cfg = TrainConfig::new(s, Regime::SupervisedTarget, Loss::WassersteinP1);
        cfg.step_size = 1e9;
        cfg.sweeps = 5;
        assert!(matches!(train(&mdp, &pi, &cfg, Some(&oracle)), Err(Error::Divergence { .. })));
    }

    #[test]
    fn config_validation() {
        let s = support(0.0, 1.0, 3);
        let mut cfg = TrainConfig::new(s, Regime::SampledBellman, Loss::CategoricalCe);
        cfg.sweeps = 0;
        assert!(cfg.validate().is_err());
        cfg.sweeps = 1;
        cfg.step_size = -1.0;
        assert!(cfg.validate().is_err());
        let b = TrainConfig::new(s, Regime::SampledBellman, Loss::Bernoulli);
        assert!(b.validate().is_err());
    }

    proptest! {
        #[test]
        fn projection_matches_hat_functions(
            n in 2usize..20,
            lo in -10.0f64..0.0,
            width in 0.5f64..20.0,
            pts in prop::collection::vec((-25.0f64..25.0, 0.01f64..1.0), 1..12),
        ) {
            let s = support(lo, lo + width, n);
            let (a, w): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let t = DiscreteDistribution::new(&a, &w, MERGE_TOL).unwrap();
            let m = project(&s, &t);
            let total: f64 = m.probs().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for (x, y) in m.probs().iter().zip(hat_projection(&s, &t)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn projection_preserves_unclipped_mean(
            n in 2usize..30,
            pts in prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..12),
        ) {
            let s = support(-5.0, 5.0, n);
            let (u, w): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let a: Vec<f64> = u.iter().map(|u| -5.0 + 10.0 * u).collect();
            let t = DiscreteDistribution::new(&a, &w, MERGE_TOL).unwrap();
            prop_assert!((project(&s, &t).mean() - t.mean()).abs() < 1e-12);
        }

        #[test]
        fn algorithm_target_is_projected_shift(
            logits in prop::collection::vec(-3.0f64..3.0, 2..16),
            r in -4.0f64..4.0,
            gamma in 0.0f64..1.0,
        ) {
            let s = support(-6.0, 6.0, logits.len());
            let theta = LogitTable::from_rows(s, 2, 1, [vec![0.0; logits.len()], logits.clone()].concat()).unwrap();
            let sample = TransitionSample { x: 0, a: 0, r, x_next: 1, gamma_t: gamma };
            let m = sample_bellman_target(&theta, &sample, NextAction::Given(0));
            let shifted = theta.distribution(1, 0).to_discrete().scale_shift(gamma, r).unwrap();
            for (x, y) in m.probs().iter().zip(hat_projection(&s, &shifted)) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
