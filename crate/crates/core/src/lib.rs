//! Exact value distributions for distributional reinforcement learning.
//!
//! This crate is `no_std` (it needs `alloc`) and contains only the numerical
//! pieces:
//!
//! * [`dist`]: finite discrete distributions, categorical supports and their
//!   elementary transforms,
//! * [`metrics`]: exact Wasserstein distances (any `p`, including `p = ∞`),
//!   Kolmogorov, total variation and cross-entropy,
//! * [`mdp`]: tabular MDPs, policies, value-distribution tables, the example
//!   MDPs used by the experiments and a Monte-Carlo rollout oracle,
//! * [`bellman`]: expected and distributional Bellman operators, the greedy
//!   optimality operator and a fixed-point iteration driver,
//! * [`categorical`]: the categorical projection, sample Bellman targets,
//!   cross-entropy and Wasserstein losses with analytic gradients, and a
//!   tabular trainer.
//!
//! File formats, experiment runners and the command line live in the
//! `distbell` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bellman;
pub mod categorical;
pub mod dist;
mod error;
pub mod mdp;
pub mod metrics;
pub mod rng;
mod sum;

pub use crate::error::{Error, Result};
pub use crate::sum::NeumaierSum;

pub use crate::dist::{CategoricalDistribution, CategoricalSupport, DiscreteDistribution};
pub use crate::mdp::{PolicyTable, QTable, TabularMdp, ValueDistributionTable};

/// Default absolute tolerance under which two atoms are coalesced.
pub const MERGE_TOL: f64 = 1e-12;

/// Tolerance on the total mass of a probability vector.
pub const PROB_TOL: f64 = 1e-9;
