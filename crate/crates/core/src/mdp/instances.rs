//! Concrete MDPs: CliffWalk, the small counterexamples, and random instances.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{PolicyTable, TabularMdp, ValueDistributionTable};
use crate::dist::DiscreteDistribution;
use crate::{Error, Result, MERGE_TOL};

/// Gridworld moves, in action-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [GridAction::Up, GridAction::Down, GridAction::Left, GridAction::Right];

    fn delta(self) -> (isize, isize) {
        match self {
            GridAction::Up => (-1, 0),
            GridAction::Down => (1, 0),
            GridAction::Left => (0, -1),
            GridAction::Right => (0, 1),
        }
    }
}

/// The cliff-walking gridworld.
///
/// Row 0 is the top. The agent starts in the bottom-left corner and the goal
/// is the bottom-right corner; the cells between them on the bottom row are
/// the cliff. Every move costs −1, moves into a wall leave the agent in
/// place, and stepping into the cliff costs −100 and sends the agent back
/// to the start. The goal is absorbing. Cliff cells cannot be occupied; they
/// are modelled as (unreachable) terminal states so the state count is
/// `rows * cols`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CliffWalk {
    pub rows: usize,
    pub cols: usize,
    /// Probability of replacing the safe-path action by a uniformly random one.
    pub random_action_prob: f64,
    pub gamma: f64,
}

impl Default for CliffWalk {
    fn default() -> Self {
        Self { rows: 4, cols: 12, random_action_prob: 0.1, gamma: 1.0 }
    }
}

pub const STEP_REWARD: f64 = -1.0;
pub const CLIFF_REWARD: f64 = -100.0;

impl CliffWalk {
    pub fn n_states(&self) -> usize {
        self.rows * self.cols
    }

    pub fn state(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn coords(&self, x: usize) -> (usize, usize) {
        (x / self.cols, x % self.cols)
    }

    pub fn start(&self) -> usize {
        self.state(self.rows - 1, 0)
    }

    pub fn goal(&self) -> usize {
        self.state(self.rows - 1, self.cols - 1)
    }

    pub fn is_cliff(&self, x: usize) -> bool {
        let (r, c) = self.coords(x);
        r == self.rows - 1 && c > 0 && c < self.cols - 1
    }

    /// Safe-path action: right along the top row, down the last column,
    /// up everywhere else.
    pub fn safe_action(&self, x: usize) -> GridAction {
        let (r, c) = self.coords(x);
        if c == self.cols - 1 {
            GridAction::Down
        } else if r == 0 {
            GridAction::Right
        } else {
            GridAction::Up
        }
    }

    /// States visited by the safe path from the start, goal excluded.
    pub fn safe_path(&self) -> Vec<usize> {
        let mut path = vec![self.start()];
        let mut x = self.start();
        while x != self.goal() {
            x = self.move_to(x, self.safe_action(x));
            if x != self.goal() {
                path.push(x);
            }
        }
        path
    }

    /// Cell reached by `action` from `x`, ignoring the cliff.
    fn move_to(&self, x: usize, action: GridAction) -> usize {
        let (r, c) = self.coords(x);
        let (dr, dc) = action.delta();
        let nr = (r as isize + dr).clamp(0, self.rows as isize - 1) as usize;
        let nc = (c as isize + dc).clamp(0, self.cols as isize - 1) as usize;
        self.state(nr, nc)
    }

    pub fn build(&self) -> Result<(TabularMdp, PolicyTable)> {
        if self.rows < 2 || self.cols < 3 {
            return Err(Error::InvalidMdp("cliff walk needs at least 2 rows and 3 columns".into()));
        }
        if !(0.0..=1.0).contains(&self.random_action_prob) {
            return Err(Error::InvalidMdp("random action probability outside [0, 1]".into()));
        }
        let n = self.n_states();
        let na = GridAction::ALL.len();
        let mut terminal = vec![false; n];
        let mut transition = Vec::with_capacity(n * na);
        let mut reward = Vec::with_capacity(n * na);
        for x in 0..n {
            let absorbing = x == self.goal() || self.is_cliff(x);
            terminal[x] = absorbing;
            for action in GridAction::ALL {
                let mut row = vec![0.0; n];
                let r = if absorbing {
                    row[x] = 1.0;
                    0.0
                } else {
                    let y = self.move_to(x, action);
                    if self.is_cliff(y) {
                        row[self.start()] = 1.0;
                        CLIFF_REWARD
                    } else {
                        row[y] = 1.0;
                        STEP_REWARD
                    }
                };
                transition.push(row);
                reward.push(DiscreteDistribution::point(r));
            }
        }
        let mdp = TabularMdp::new(n, na, self.gamma, terminal, transition, reward)?;
        let safe: Vec<usize> = (0..n).map(|x| self.safe_action(x) as usize).collect();
        let policy = PolicyTable::deterministic(na, &safe)?.mix_uniform(self.random_action_prob);
        Ok((mdp, policy))
    }
}

/// The 4×12 cliff walk with its ε-safe policy (10% uniformly random actions).
pub fn build_cliffwalk() -> (TabularMdp, PolicyTable) {
    CliffWalk::default().build().expect("default cliff walk is valid")
}

/// Two-state undiscounted MDP on which the optimality operator expands.
///
/// States: `0 = x₁`, `1 = x₂`, `2` = terminal. Both actions in `x₁` move to
/// `x₂` with no reward. In `x₂`, action `0 = a₁` pays 0 and action
/// `1 = a₂` pays `ε ± 1` with equal probability; both end the episode.
pub fn build_noncontraction_mdp(epsilon: f64) -> Result<TabularMdp> {
    if !epsilon.is_finite() {
        return Err(Error::NonFinite);
    }
    let zero = DiscreteDistribution::point(0.0);
    let coin = DiscreteDistribution::new(&[epsilon - 1.0, epsilon + 1.0], &[0.5, 0.5], MERGE_TOL)?;
    let to = |y: usize| {
        let mut row = vec![0.0; 3];
        row[y] = 1.0;
        row
    };
    TabularMdp::new(
        3,
        2,
        1.0,
        vec![false, false, true],
        vec![to(1), to(1), to(2), to(2), to(2), to(2)],
        vec![zero.clone(), zero.clone(), zero.clone(), coin, zero.clone(), zero],
    )
}

/// The tables `(Z, Z*)` of the two-state example: they agree except at
/// `(x₂, a₂)`, where `Z` holds `−ε ± 1` and `Z*` holds `ε ± 1`.
pub fn noncontraction_tables(epsilon: f64) -> Result<(ValueDistributionTable, ValueDistributionTable)> {
    let plus = DiscreteDistribution::new(&[epsilon - 1.0, epsilon + 1.0], &[0.5, 0.5], MERGE_TOL)?;
    let minus = DiscreteDistribution::new(&[-epsilon - 1.0, -epsilon + 1.0], &[0.5, 0.5], MERGE_TOL)?;
    let zero = DiscreteDistribution::point(0.0);
    let zstar = vec![plus.clone(), plus.clone(), zero.clone(), plus.clone(), zero.clone(), zero.clone()];
    let z = vec![plus.clone(), plus, zero.clone(), minus, zero.clone(), zero];
    Ok((ValueDistributionTable::new(3, 2, z)?, ValueDistributionTable::new(3, 2, zstar)?))
}

/// One state, two self-looping actions, `γ = ½`: action 0 pays ½, action 1
/// pays 0 or 1 with equal probability.
pub fn build_nonstationary_mdp() -> TabularMdp {
    let half = DiscreteDistribution::point(0.5);
    let coin = DiscreteDistribution::new(&[0.0, 1.0], &[0.5, 0.5], MERGE_TOL).expect("valid coin");
    TabularMdp::new(1, 2, 0.5, vec![false], vec![vec![1.0], vec![1.0]], vec![half, coin]).expect("valid MDP")
}

/// One step from state 0 to a terminal state with reward 0 or 1 (½ each).
pub fn build_sample_wasserstein_mdp() -> TabularMdp {
    let coin = DiscreteDistribution::new(&[0.0, 1.0], &[0.5, 0.5], MERGE_TOL).expect("valid coin");
    TabularMdp::new(
        2,
        1,
        1.0,
        vec![false, true],
        vec![vec![0.0, 1.0], vec![0.0, 1.0]],
        vec![coin, DiscreteDistribution::point(0.0)],
    )
    .expect("valid MDP")
}

/// Shape of a random MDP for property tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMdpSpec {
    pub n_states: usize,
    pub n_actions: usize,
    pub gamma: f64,
    /// Rewards get between 1 and this many atoms.
    pub max_reward_atoms: usize,
    /// Reward atoms are drawn from `[-reward_scale, reward_scale]`.
    pub reward_scale: f64,
    /// Make the last state terminal.
    pub with_terminal: bool,
}

impl Default for RandomMdpSpec {
    fn default() -> Self {
        Self { n_states: 4, n_actions: 2, gamma: 0.9, max_reward_atoms: 3, reward_scale: 1.0, with_terminal: false }
    }
}

fn random_simplex<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<f64>() < density { rng.gen_range(0.05..1.0) } else { 0.0 })
        .collect();
    if w.iter().all(|&v| v == 0.0) {
        w[rng.gen_range(0..n)] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
    w
}

fn random_discrete<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize, scale: f64) -> DiscreteDistribution {
    let k = rng.gen_range(1..=max_atoms.max(1));
    let atoms: Vec<f64> = (0..k).map(|_| rng.gen_range(-scale..=scale)).collect();
    let probs: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    DiscreteDistribution::new(&atoms, &probs, MERGE_TOL).expect("random atoms are finite")
}

/// Random MDP with sparse stochastic transitions and discrete random rewards.
pub fn random_mdp<R: Rng + ?Sized>(rng: &mut R, spec: &RandomMdpSpec) -> Result<TabularMdp> {
    let n = spec.n_states;
    let na = spec.n_actions;
    let mut terminal = vec![false; n];
    if spec.with_terminal {
        terminal[n - 1] = true;
    }
    let mut transition = Vec::with_capacity(n * na);
    let mut reward = Vec::with_capacity(n * na);
    for x in 0..n {
        for _ in 0..na {
            if terminal[x] {
                let mut row = vec![0.0; n];
                row[x] = 1.0;
                transition.push(row);
                reward.push(DiscreteDistribution::point(0.0));
            } else {
                transition.push(random_simplex(rng, n, 0.6));
                reward.push(random_discrete(rng, spec.max_reward_atoms, spec.reward_scale));
            }
        }
    }
    TabularMdp::new(n, na, spec.gamma, terminal, transition, reward)
}

/// Random stochastic policy with full support.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, n_states: usize, n_actions: usize) -> PolicyTable {
    let probs = (0..n_states).flat_map(|_| random_simplex(rng, n_actions, 1.0)).collect();
    PolicyTable::new(n_states, n_actions, probs).expect("rows are normalized")
}

/// Random value-distribution table with up to `max_atoms` atoms per entry in
/// `[-scale, scale]`.
pub fn random_table<R: Rng + ?Sized>(
    rng: &mut R,
    n_states: usize,
    n_actions: usize,
    max_atoms: usize,
    scale: f64,
) -> ValueDistributionTable {
    let entries = (0..n_states * n_actions).map(|_| random_discrete(rng, max_atoms, scale)).collect();
    ValueDistributionTable::new(n_states, n_actions, entries).expect("shape matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn cliffwalk_dynamics() {
        let cw = CliffWalk::default();
        let (mdp, policy) = cw.build().unwrap();
        assert_eq!(mdp.n_states(), 48);
        assert_eq!(mdp.n_actions(), 4);

        // interior state, "right": point mass on the right neighbour
        let x = cw.state(1, 4);
        let row = mdp.transition(x, GridAction::Right as usize);
        assert_eq!(row[cw.state(1, 5)], 1.0);
        assert_eq!(row.iter().filter(|&&p| p > 0.0).count(), 1);
        assert_eq!(mdp.reward(x, GridAction::Right as usize), &DiscreteDistribution::point(-1.0));

        // above the cliff, "down": −100 and back to the start
        let edge = cw.state(2, 5);
        let down = GridAction::Down as usize;
        assert_eq!(mdp.reward(edge, down), &DiscreteDistribution::point(-100.0));
        assert_eq!(mdp.transition(edge, down)[cw.start()], 1.0);

        // start, "right" also falls
        assert_eq!(mdp.reward(cw.start(), GridAction::Right as usize).atoms(), &[-100.0]);

        // goal absorbs with zero reward
        for a in 0..4 {
            assert_eq!(mdp.transition(cw.goal(), a)[cw.goal()], 1.0);
            assert_eq!(mdp.reward(cw.goal(), a), &DiscreteDistribution::point(0.0));
        }
        assert!(mdp.is_terminal(cw.goal()));

        // walls keep the agent in place
        let corner = cw.state(0, 0);
        assert_eq!(mdp.transition(corner, GridAction::Up as usize)[corner], 1.0);

        // policy: 0.9 safe + 0.1 uniform
        assert!((policy.prob(cw.start(), GridAction::Up as usize) - 0.925).abs() < 1e-15);
        assert!((policy.prob(cw.start(), GridAction::Right as usize) - 0.025).abs() < 1e-15);
        assert_eq!(mdp.gamma(), 1.0);
    }

    #[test]
    fn safe_path_layout() {
        let cw = CliffWalk::default();
        let path = cw.safe_path();
        assert_eq!(path.len(), 17);
        assert_eq!(path[0], cw.start());
        assert_eq!(path[3], cw.state(0, 0));
        assert_eq!(*path.last().unwrap(), cw.state(2, 11));
    }

    #[test]
    fn noncontraction_rewards() {
        let mdp = build_noncontraction_mdp(0.1).unwrap();
        let r = mdp.reward(1, 1);
        assert!((r.atoms()[0] + 0.9).abs() < 1e-15 && (r.atoms()[1] - 1.1).abs() < 1e-15);
        assert_eq!(r.probs(), &[0.5, 0.5]);
        assert_eq!(mdp.reward(1, 0), &DiscreteDistribution::point(0.0));
        assert!((r.mean() - 0.1).abs() < 1e-15);
        assert_eq!(mdp.gamma(), 1.0);
    }

    #[test]
    fn sample_wasserstein_reward() {
        let mdp = build_sample_wasserstein_mdp();
        let r = mdp.reward(0, 0);
        assert_eq!(r.atoms(), &[0.0, 1.0]);
        assert_eq!(r.mean(), 0.5);
        assert_eq!(r.variance(), 0.25);
    }

    #[test]
    fn random_instances_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let spec = RandomMdpSpec { n_states: n, with_terminal: n > 1, ..Default::default() };
            let mdp = random_mdp(&mut rng, &spec).unwrap();
            let pi = random_policy(&mut rng, n, spec.n_actions);
            assert!(mdp.check_proper(&pi).is_ok());
        }
    }
}
