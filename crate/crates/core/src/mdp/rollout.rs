//! Monte-Carlo rollouts: the ground-truth oracle for return distributions.

use alloc::vec::Vec;

use rand::Rng;

use super::{PolicyTable, TabularMdp, ValueDistributionTable};
use crate::dist::DiscreteDistribution;
use crate::{rng, Error, Result, MERGE_TOL};

/// Precomputed sampling tables for one `(mdp, policy)` pair.
#[derive(Debug, Clone)]
pub struct Rollouts<'a> {
    mdp: &'a TabularMdp,
    /// Per pair: successor states and their cumulative probabilities.
    successors: Vec<(Vec<usize>, Vec<f64>)>,
    /// Per state: cumulative action probabilities.
    actions: Vec<Vec<f64>>,
}

fn cumulative(probs: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

fn pick(cum: &[f64], u: f64) -> usize {
    cum.partition_point(|&c| c <= u).min(cum.len() - 1)
}

impl<'a> Rollouts<'a> {
    pub fn new(mdp: &'a TabularMdp, policy: &PolicyTable) -> Result<Self> {
        mdp.check_policy(policy)?;
        let successors = (0..mdp.n_pairs())
            .map(|i| {
                let (x, a) = (i / mdp.n_actions(), i % mdp.n_actions());
                let (states, probs): (Vec<usize>, Vec<f64>) = mdp.successors(x, a).unzip();
                (states, cumulative(probs.into_iter()))
            })
            .collect();
        let actions = (0..mdp.n_states()).map(|x| cumulative(policy.row(x).iter().copied())).collect();
        Ok(Self { mdp, successors, actions })
    }

    pub fn mdp(&self) -> &TabularMdp {
        self.mdp
    }

    /// Draws `(r, x')` for one step from `(x, a)`.
    pub fn step<R: Rng + ?Sized>(&self, x: usize, a: usize, rng: &mut R) -> (f64, usize) {
        let r = self.mdp.reward(x, a).sample(rng);
        let (states, cum) = &self.successors[x * self.mdp.n_actions() + a];
        let y = states[pick(cum, rng.gen::<f64>())];
        (r, y)
    }

    /// Draws `a ~ π(· | x)`.
    pub fn action<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        pick(&self.actions[x], rng.gen::<f64>())
    }

    /// One discounted return from `(x, a)`, truncated after `horizon` steps
    /// or on reaching a terminal state.
    pub fn sample_return<R: Rng + ?Sized>(&self, x: usize, a: usize, horizon: usize, rng: &mut R) -> f64 {
        let gamma = self.mdp.gamma();
        let (mut state, mut action) = (x, a);
        let mut ret = 0.0;
        let mut discount = 1.0;
        for _ in 0..horizon {
            if self.mdp.is_terminal(state) {
                break;
            }
            let (r, next) = self.step(state, action, rng);
            ret += discount * r;
            discount *= gamma;
            state = next;
            action = self.action(state, rng);
        }
        ret
    }

    /// Empirical law of `n_rollouts` returns from `(x, a)`.
    pub fn returns<R: Rng + ?Sized>(
        &self,
        x: usize,
        a: usize,
        n_rollouts: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Result<DiscreteDistribution> {
        if n_rollouts == 0 || horizon == 0 {
            return Err(Error::Empty);
        }
        let w = 1.0 / n_rollouts as f64;
        let pairs = (0..n_rollouts).map(|_| (self.sample_return(x, a, horizon, rng), w)).collect();
        DiscreteDistribution::from_pairs(pairs, MERGE_TOL)
    }
}

/// Empirical return distribution from `(x, a)` under `policy`.
pub fn monte_carlo_returns<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    x: usize,
    a: usize,
    n_rollouts: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<DiscreteDistribution> {
    Rollouts::new(mdp, policy)?.returns(x, a, n_rollouts, horizon, rng)
}

/// Monte-Carlo estimate of the whole table.
///
/// Pair `(x, a)` uses sub-stream `x * n_actions + a` of `seed`, so each entry
/// is reproducible on its own. Terminal states get a point mass at zero.
pub fn monte_carlo_table(
    mdp: &TabularMdp,
    policy: &PolicyTable,
    seed: u64,
    n_rollouts: usize,
    horizon: usize,
) -> Result<ValueDistributionTable> {
    let roll = Rollouts::new(mdp, policy)?;
    let na = mdp.n_actions();
    let mut entries = Vec::with_capacity(mdp.n_pairs());
    for x in 0..mdp.n_states() {
        for a in 0..na {
            if mdp.is_terminal(x) {
                entries.push(DiscreteDistribution::point(0.0));
            } else {
                let mut r = rng::stream(seed, (x * na + a) as u64);
                entries.push(roll.returns(x, a, n_rollouts, horizon, &mut r)?);
            }
        }
    }
    ValueDistributionTable::new(mdp.n_states(), na, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{build_nonstationary_mdp, build_sample_wasserstein_mdp};
    use crate::metrics::kolmogorov_to_cdf;
    use alloc::vec;

    #[test]
    fn point_reward_single_step() {
        let mdp = TabularMdp::new(
            2,
            1,
            1.0,
            vec![false, true],
            vec![vec![0.0, 1.0], vec![0.0, 1.0]],
            vec![DiscreteDistribution::point(-2.5), DiscreteDistribution::point(0.0)],
        )
        .unwrap();
        let pi = PolicyTable::uniform(2, 1);
        let mut r = rng::stream(1, 0);
        let d = monte_carlo_returns(&mdp, &pi, 0, 0, 37, 10, &mut r).unwrap();
        assert_eq!(d, DiscreteDistribution::point(-2.5));
    }

    #[test]
    fn bernoulli_frequencies() {
        let mdp = build_sample_wasserstein_mdp();
        let pi = PolicyTable::uniform(2, 1);
        let mut r = rng::stream(11, 0);
        let d = monte_carlo_returns(&mdp, &pi, 0, 0, 100_000, 5, &mut r).unwrap();
        assert_eq!(d.atoms(), &[0.0, 1.0]);
        assert!((d.probs()[0] - 0.5).abs() < 0.01);
    }

    #[test]
    fn always_coin_is_uniform() {
        let mdp = build_nonstationary_mdp();
        let pi = PolicyTable::deterministic(2, &[1]).unwrap();
        let mut r = rng::stream(5, 0);
        let d = monte_carlo_returns(&mdp, &pi, 0, 1, 100_000, 40, &mut r).unwrap();
        let k = kolmogorov_to_cdf(&d, |y| (y / 2.0).clamp(0.0, 1.0));
        assert!(k <= 0.02, "kolmogorov {k}");
    }

    #[test]
    fn deterministic_given_seed() {
        let mdp = build_nonstationary_mdp();
        let pi = PolicyTable::uniform(1, 2);
        let a = monte_carlo_table(&mdp, &pi, 9, 500, 20).unwrap();
        let b = monte_carlo_table(&mdp, &pi, 9, 500, 20).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_zero_rollouts() {
        let mdp = build_nonstationary_mdp();
        let pi = PolicyTable::uniform(1, 2);
        let mut r = rng::stream(0, 0);
        assert!(monte_carlo_returns(&mdp, &pi, 0, 0, 0, 10, &mut r).is_err());
    }
}
