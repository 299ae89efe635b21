//! Random instances shared by the property batteries.

use distbell_core::mdp::{random_mdp, random_policy, random_table, RandomMdpSpec};
use distbell_core::rng::StreamRng;
use distbell_core::{CategoricalSupport, DiscreteDistribution, PolicyTable, TabularMdp, ValueDistributionTable, MERGE_TOL};
use rand::Rng;

pub const GAMMAS: [f64; 3] = [0.3, 0.5, 0.9];

pub struct Instance {
    pub mdp: TabularMdp,
    pub policy: PolicyTable,
    pub z1: ValueDistributionTable,
    pub z2: ValueDistributionTable,
}

/// Random MDP, policy and two tables: up to 6 states and 3 actions, γ drawn
/// from [`GAMMAS`].
pub fn instance(r: &mut StreamRng) -> Instance {
    let n_states = r.gen_range(1..=6);
    let spec = RandomMdpSpec {
        n_states,
        n_actions: r.gen_range(1..=3),
        gamma: GAMMAS[r.gen_range(0..GAMMAS.len())],
        max_reward_atoms: 3,
        reward_scale: 2.0,
        with_terminal: r.gen_bool(0.3) && n_states > 1,
    };
    let mdp = random_mdp(r, &spec).expect("random MDPs are valid");
    let policy = random_policy(r, spec.n_states, spec.n_actions);
    let z1 = random_table(r, spec.n_states, spec.n_actions, 4, 5.0);
    let z2 = random_table(r, spec.n_states, spec.n_actions, 4, 5.0);
    Instance { mdp, policy, z1, z2 }
}

/// Up to `max_atoms` atoms in `[lo, hi)`.
pub fn distribution(r: &mut StreamRng, max_atoms: usize, lo: f64, hi: f64) -> DiscreteDistribution {
    let k = r.gen_range(1..=max_atoms);
    let atoms: Vec<f64> = (0..k).map(|_| r.gen_range(lo..hi)).collect();
    let probs: Vec<f64> = (0..k).map(|_| r.gen_range(0.01..1.0)).collect();
    DiscreteDistribution::new(&atoms, &probs, MERGE_TOL).expect("finite atoms")
}

/// Between 2 and 51 atoms on `[v_min, v_min + width]`.
pub fn support(r: &mut StreamRng) -> CategoricalSupport {
    let n = r.gen_range(2..=51);
    let lo = r.gen_range(-20.0..0.0);
    let width = r.gen_range(0.5..30.0);
    CategoricalSupport::new(lo, lo + width, n).expect("valid support")
}
