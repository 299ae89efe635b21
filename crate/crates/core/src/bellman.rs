//! Expected and distributional Bellman operators.
//!
//! Conventions shared by every operator here: a terminal state `x` maps to
//! its reward alone, and a transition into a terminal state does not
//! bootstrap (the successor contributes a discount of zero).

use alloc::vec::Vec;

use crate::categorical::project;
use crate::dist::{CategoricalSupport, DiscreteDistribution};
use crate::mdp::{greedy_policy_for, PolicyTable, QTable, TabularMdp, TieBreak, ValueDistributionTable};
use crate::metrics::max_wasserstein;
use crate::sum::NeumaierSum;
use crate::{Error, Result, MERGE_TOL};

/// `T^π Q(x,a) = E R(x,a) + γ Σ_{x'} P(x'|x,a) Σ_{a'} π(a'|x') Q(x',a')`.
pub fn expected_bellman_pe(q: &QTable, mdp: &TabularMdp, policy: &PolicyTable) -> Result<QTable> {
    mdp.check_table(q)?;
    mdp.check_policy(policy)?;
    expected_backup(mdp, |y| {
        let mut acc = NeumaierSum::new();
        for (b, &w) in policy.row(y).iter().enumerate() {
            acc.add(w * q.get(y, b));
        }
        acc.value()
    })
}

/// `T Q(x,a) = E R(x,a) + γ Σ_{x'} P(x'|x,a) max_{a'} Q(x',a')`.
pub fn expected_bellman_opt(q: &QTable, mdp: &TabularMdp) -> Result<QTable> {
    mdp.check_table(q)?;
    expected_backup(mdp, |y| q.row(y).iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn expected_backup(mdp: &TabularMdp, next_value: impl Fn(usize) -> f64) -> Result<QTable> {
    let gamma = mdp.gamma();
    let mut out = Vec::with_capacity(mdp.n_pairs());
    for x in 0..mdp.n_states() {
        for a in 0..mdp.n_actions() {
            let mut v = NeumaierSum::new();
            v.add(mdp.reward(x, a).mean());
            if !mdp.is_terminal(x) {
                for (y, p) in mdp.successors(x, a) {
                    if !mdp.is_terminal(y) {
                        v.add(gamma * p * next_value(y));
                    }
                }
            }
            out.push(v.value());
        }
    }
    QTable::new(mdp.n_states(), mdp.n_actions(), out)
}

/// Iterates `op` from zero until successive tables differ by less than
/// `tol` in sup norm. Returns the last table and the number of iterations,
/// or `None` if `max_iters` is exhausted.
fn expected_fixed_point(
    mdp: &TabularMdp,
    tol: f64,
    max_iters: usize,
    op: impl Fn(&QTable) -> Result<QTable>,
) -> Result<Option<(QTable, usize)>> {
    let mut q = QTable::zeros(mdp.n_states(), mdp.n_actions());
    for k in 1..=max_iters {
        let next = op(&q)?;
        let delta = next.max_abs_diff(&q)?;
        q = next;
        if delta < tol {
            return Ok(Some((q, k)));
        }
    }
    Ok(None)
}

/// `Q^π` by repeated application of [`expected_bellman_pe`].
pub fn evaluate_policy(mdp: &TabularMdp, policy: &PolicyTable, tol: f64, max_iters: usize) -> Result<Option<QTable>> {
    Ok(expected_fixed_point(mdp, tol, max_iters, |q| expected_bellman_pe(q, mdp, policy))?.map(|r| r.0))
}

/// `Q*` by value iteration.
pub fn optimal_q(mdp: &TabularMdp, tol: f64, max_iters: usize) -> Result<Option<QTable>> {
    Ok(expected_fixed_point(mdp, tol, max_iters, |q| expected_bellman_opt(q, mdp))?.map(|r| r.0))
}

/// Knobs for the exact distributional operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    /// Atoms closer than this are coalesced after every application.
    pub merge_tol: f64,
    /// Largest number of `(atom, mass)` pairs one entry may generate before
    /// coalescing.
    pub support_cap: usize,
    /// Project every output entry onto this support (bounded-memory regime).
    pub projection: Option<CategoricalSupport>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self { merge_tol: MERGE_TOL, support_cap: 1_000_000, projection: None }
    }
}

/// Exact `T^π Z(x,a) = R(x,a) + γ Z(X', A')` with `R`, `X'` and `Z`
/// independent.
///
/// Each entry is the mixture over reward atom `r`, successor `x'`, next
/// action `a'` and atom `z` of point masses at `r + γ z`, weighted by
/// `p_R(r) P(x'|x,a) π(a'|x') p_Z(z)`.
pub fn dist_bellman_pe_exact(
    z: &ValueDistributionTable,
    mdp: &TabularMdp,
    policy: &PolicyTable,
    opts: &ExactOptions,
) -> Result<ValueDistributionTable> {
    mdp.check_table(z)?;
    mdp.check_policy(policy)?;
    let gamma = mdp.gamma();
    let na = mdp.n_actions();
    let mut entries = Vec::with_capacity(mdp.n_pairs());
    for x in 0..mdp.n_states() {
        for a in 0..na {
            let reward = mdp.reward(x, a);
            if mdp.is_terminal(x) {
                entries.push(finish(reward.clone(), opts)?);
                continue;
            }
            let mut count = 0usize;
            for (y, _) in mdp.successors(x, a) {
                count += if mdp.is_terminal(y) {
                    1
                } else {
                    (0..na).filter(|&b| policy.prob(y, b) > 0.0).map(|b| z.get(y, b).len()).sum()
                };
            }
            let count = count.saturating_mul(reward.len());
            if count > opts.support_cap {
                return Err(Error::SupportOverflow { atoms: count, cap: opts.support_cap });
            }
            let mut pairs = Vec::with_capacity(count);
            for (r, pr) in reward.iter() {
                for (y, py) in mdp.successors(x, a) {
                    if mdp.is_terminal(y) {
                        pairs.push((r, pr * py));
                        continue;
                    }
                    for (b, &pb) in policy.row(y).iter().enumerate() {
                        if pb == 0.0 {
                            continue;
                        }
                        let w = pr * py * pb;
                        pairs.extend(z.get(y, b).iter().map(|(v, pv)| (r + gamma * v, w * pv)));
                    }
                }
            }
            entries.push(finish(DiscreteDistribution::from_pairs(pairs, opts.merge_tol)?, opts)?);
        }
    }
    ValueDistributionTable::new(mdp.n_states(), na, entries)
}

fn finish(d: DiscreteDistribution, opts: &ExactOptions) -> Result<DiscreteDistribution> {
    match &opts.projection {
        None => Ok(d),
        Some(support) => Ok(project(support, &d).to_discrete()),
    }
}

/// Distributional optimality operator: `T^π` for the greedy policy of
/// `E Z`, ties resolved by `tie` (which may inspect `z`).
pub fn dist_bellman_opt(
    z: &ValueDistributionTable,
    mdp: &TabularMdp,
    tie: &dyn TieBreak,
    opts: &ExactOptions,
) -> Result<ValueDistributionTable> {
    mdp.check_table(z)?;
    let policy = greedy_policy_for(z, tie);
    dist_bellman_pe_exact(z, mdp, &policy, opts)
}

/// Every entry projected onto `support`.
pub fn project_table(z: &ValueDistributionTable, support: &CategoricalSupport) -> Result<ValueDistributionTable> {
    let entries = z.entries().iter().map(|d| project(support, d).to_discrete()).collect();
    ValueDistributionTable::new(z.n_states(), z.n_actions(), entries)
}

/// `V Z(x, a)` for every pair.
pub fn variance_table(z: &ValueDistributionTable) -> QTable {
    let v = z.entries().iter().map(DiscreteDistribution::variance).collect();
    QTable::new(z.n_states(), z.n_actions(), v).expect("shape matches")
}

/// Diagnostics of a fixed-point run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct IterationReport {
    /// `d̄_p(Z_{k+1}, Z_k)` for every application.
    pub deltas: Vec<f64>,
    /// `deltas[k + 1] / deltas[k]`.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `Z_{k+1}` came back within `tol` of `Z_{k-1}` while still moving.
    pub cycle_detected: bool,
    /// 2 when a period-two cycle was detected.
    pub period: Option<usize>,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub last: ValueDistributionTable,
}

/// Applies `op` from `z0` until `d̄_p(Z_{k+1}, Z_k) < tol`, a period-two
/// cycle shows up, or `max_iters` applications have been made.
///
/// Non-convergence is reported through the flags, not as an error.
pub fn iterate(
    mut op: impl FnMut(&ValueDistributionTable) -> Result<ValueDistributionTable>,
    z0: ValueDistributionTable,
    p: f64,
    tol: f64,
    max_iters: usize,
) -> Result<IterationReport> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidConfig("tolerance must be positive".into()));
    }
    let mut deltas = Vec::new();
    let mut prev: Option<ValueDistributionTable> = None;
    let mut z = z0;
    let mut converged = false;
    let mut cycle = false;
    for _ in 0..max_iters {
        let next = op(&z)?;
        let delta = max_wasserstein(&next, &z, p)?;
        deltas.push(delta);
        if delta < tol {
            converged = true;
            z = next;
            break;
        }
        if let Some(two_back) = &prev {
            if max_wasserstein(&next, two_back, p)? < tol {
                cycle = true;
                z = next;
                break;
            }
        }
        prev = Some(core::mem::replace(&mut z, next));
    }
    let ratios = deltas.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(IterationReport {
        iterations: deltas.len(),
        deltas,
        ratios,
        converged,
        cycle_detected: cycle,
        period: cycle.then_some(2),
        last: z,
    })
}
