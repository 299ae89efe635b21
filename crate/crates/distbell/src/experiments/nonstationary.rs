//! A nonstationary policy whose return law no stationary policy attains.

use anyhow::Result;
use distbell_core::mdp::{build_nonstationary_mdp, Rollouts};
use distbell_core::metrics::{kolmogorov, kolmogorov_to_cdf};
use distbell_core::{rng, DiscreteDistribution, PolicyTable, MERGE_TOL};
use serde_json::json;

use super::Ctx;
use crate::report::Expectation;

pub const ROLLOUTS: usize = 100_000;
pub const HORIZON: usize = 40;
pub const STATIONARY_P: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Returns are snapped to a 1e-9 grid: truncation after 40 steps leaves
/// them within 2e-12 of the infinite-horizon value, and a step CDF such as
/// that of `δ₁` would otherwise see the truncated atom on the wrong side.
fn snap(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn empirical(samples: Vec<f64>) -> Result<DiscreteDistribution> {
    let w = vec![1.0; samples.len()];
    let snapped: Vec<f64> = samples.into_iter().map(snap).collect();
    Ok(DiscreteDistribution::new(&snapped, &w, MERGE_TOL)?)
}

fn uniform_cdf(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |y| ((y - lo) / (hi - lo)).clamp(0.0, 1.0)
}

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let params = &ctx.config.params;
    let n = params.rollouts.unwrap_or(ROLLOUTS);
    let horizon = params.horizon.unwrap_or(HORIZON);
    let seed = ctx.config.seed;
    let mdp = build_nonstationary_mdp();

    let out = ctx.report.time("nonstationary", || -> Result<_> {
        // π_p plays a₂ with probability p.
        let stationary = |p: f64, name: &str| -> Result<DiscreteDistribution> {
            let pi = PolicyTable::new(1, 2, vec![1.0 - p, p])?;
            let roll = Rollouts::new(&mdp, &pi)?;
            let mut r = rng::named(seed, name);
            // The first action is drawn from π too.
            empirical((0..n).map(|_| {
                let a = roll.action(0, &mut r);
                roll.sample_return(0, a, horizon, &mut r)
            }).collect())
        };
        let always_a1 = stationary(0.0, "always_a1")?;
        let always_a2 = stationary(1.0, "always_a2")?;
        let mixed = {
            let pi = PolicyTable::deterministic(2, &[1])?;
            let roll = Rollouts::new(&mdp, &pi)?;
            let mut r = rng::named(seed, "a1_then_a2");
            let gamma = mdp.gamma();
            empirical((0..n).map(|_| {
                let (r0, _) = roll.step(0, 0, &mut r);
                r0 + gamma * roll.sample_return(0, 1, horizon - 1, &mut r)
            }).collect())?
        };
        let sweep = STATIONARY_P
            .iter()
            .map(|&p| Ok((p, stationary(p, &format!("stationary_{p}"))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((always_a1, always_a2, mixed, sweep))
    })?;
    let (always_a1, always_a2, mixed, sweep) = out;

    let k_a1 = kolmogorov(&always_a1, &DiscreteDistribution::point(1.0));
    let k_a2 = kolmogorov_to_cdf(&always_a2, uniform_cdf(0.0, 2.0));
    let k_mixed = kolmogorov_to_cdf(&mixed, uniform_cdf(0.5, 1.5));
    let sweep_k: Vec<(f64, f64)> = sweep.iter().map(|(p, d)| (*p, kolmogorov(d, &mixed))).collect();
    let min_k = sweep_k.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);

    for (name, d) in [("always_a1", &always_a1), ("always_a2", &always_a2), ("a1_then_a2", &mixed)] {
        let path = ctx.artifacts.path(&format!("returns/{name}.csv"))?;
        crate::io::write_distribution_csv(&path, d)?;
    }
    ctx.report.result(
        "nonstationary",
        json!({
            "rollouts": n,
            "horizon": horizon,
            "kolmogorov_always_a1_vs_point_1": k_a1,
            "kolmogorov_always_a2_vs_uniform_0_2": k_a2,
            "kolmogorov_mixed_vs_uniform_half_3half": k_mixed,
            "stationary_sweep": sweep_k.iter().map(|(p, k)| json!({"p": p, "kolmogorov_to_mixed": k})).collect::<Vec<_>>(),
            "mean_always_a2": always_a2.mean(),
            "mean_mixed": mixed.mean(),
        }),
    );
    let r = &mut ctx.report;
    r.expect(Expectation::at_most("nonstationary.always_a1", "K(always a₁, δ₁) ≤ 0.001", k_a1, 0.001));
    r.expect(Expectation::at_most("nonstationary.always_a2", "K(always a₂, U[0,2]) ≤ 0.02", k_a2, 0.02));
    r.expect(Expectation::at_most("nonstationary.mixed", "K(a₁ then a₂, U[½,3/2]) ≤ 0.02", k_mixed, 0.02));
    r.expect(Expectation::at_least(
        "nonstationary.no_stationary_match",
        "min over stationary p of K(π_p, a₁ then a₂) ≥ 0.05",
        min_k,
        0.05,
    ));
    Ok(())
}
