//! Bias of the expected per-sample Wasserstein loss.
//!
//! `P = ½δ₀ + ½δ₁` is the return law of a one-step coin-flip MDP. `Q_p` puts
//! mass `p` on 0 and `1 − p` on 1. The true loss is `d₁(P, Q_p)`; the sample
//! loss replaces `P` by the outcome `δ₀` or `δ₁` of one transition.

use anyhow::Result;
use distbell_core::mdp::{build_sample_wasserstein_mdp, Rollouts};
use distbell_core::metrics::wasserstein;
use distbell_core::{rng, DiscreteDistribution, PolicyTable, MERGE_TOL};
use serde::Serialize;
use serde_json::json;

use super::Ctx;
use crate::report::Expectation;

pub const SAMPLES: usize = 10_000;
pub const P0: f64 = 0.3;
pub const GD_STEPS: usize = 1000;

fn q(p: f64) -> Result<DiscreteDistribution> {
    // Q_0 and Q_1 are point masses; zero-probability atoms are dropped.
    Ok(DiscreteDistribution::new(&[0.0, 1.0], &[p, 1.0 - p], MERGE_TOL)?)
}

fn true_loss(p_law: &DiscreteDistribution, p: f64) -> Result<f64> {
    Ok(wasserstein(p_law, &q(p)?, 1.0)?)
}

/// `Σ_i w_i d₁(δ_{x_i}, Q_p)` over the outcomes of `p_law`.
fn sample_loss(p_law: &DiscreteDistribution, p: f64) -> Result<f64> {
    let qp = q(p)?;
    let mut acc = 0.0;
    for (x, w) in p_law.iter() {
        acc += w * wasserstein(&DiscreteDistribution::point(x), &qp, 1.0)?;
    }
    Ok(acc)
}

/// Central-difference derivative, one-sided at the ends of `[0, 1]`.
fn derivative(f: &impl Fn(f64) -> Result<f64>, p: f64) -> Result<f64> {
    let h = 1e-7;
    let (lo, hi) = ((p - h).max(0.0), (p + h).min(1.0));
    Ok((f(hi)? - f(lo)?) / (hi - lo))
}

#[derive(Debug, Serialize)]
struct Descent {
    start: f64,
    end: f64,
    trajectory: Vec<f64>,
}

/// Gradient descent with step `0.1 / (k + 1)`, projected onto `[0, 1]`.
fn descend(f: impl Fn(f64) -> Result<f64>, p0: f64, steps: usize) -> Result<Descent> {
    let mut p = p0;
    let mut trajectory = vec![p];
    for k in 0..steps {
        let g = derivative(&f, p)?;
        p = (p - 0.1 / (k + 1) as f64 * g).clamp(0.0, 1.0);
        trajectory.push(p);
    }
    Ok(Descent { start: p0, end: p, trajectory })
}

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let n = ctx.config.params.rollouts.unwrap_or(SAMPLES);
    let seed = ctx.config.seed;
    let grid: Vec<f64> = (0..=20).map(|k| k as f64 * 0.05).collect();
    let exact = DiscreteDistribution::new(&[0.0, 1.0], &[0.5, 0.5], MERGE_TOL)?;

    let (rows, gd_sample, gd_true) = ctx.report.time("sample_wasserstein", || -> Result<_> {
        let mdp = build_sample_wasserstein_mdp();
        let roll = Rollouts::new(&mdp, &PolicyTable::uniform(2, 1))?;
        let mc = roll.returns(0, 0, n, 1, &mut rng::named(seed, "coin"))?;
        let mut rows = Vec::with_capacity(grid.len());
        for &p in &grid {
            rows.push(vec![p, true_loss(&exact, p)?, sample_loss(&exact, p)?, true_loss(&mc, p)?, sample_loss(&mc, p)?]);
        }
        let gd_sample = descend(|p| sample_loss(&exact, p), P0, GD_STEPS)?;
        let gd_true = descend(|p| true_loss(&exact, p), P0, GD_STEPS)?;
        Ok((rows, gd_sample, gd_true))
    })?;

    let header = ["p", "true_d1", "expected_sample_d1", "mc_true_d1", "mc_expected_sample_d1"];
    let path = ctx.artifacts.path("curves.csv")?;
    crate::io::write_table_csv(&path, &header, &rows)?;

    let interior = |r: &&Vec<f64>| r[0] > 0.0 && r[0] < 1.0;
    let err = |col: usize, want: &dyn Fn(f64) -> f64, only_interior: bool| {
        rows.iter()
            .filter(|r| !only_interior || interior(r))
            .map(|r| (r[col] - want(r[0])).abs())
            .fold(0.0, f64::max)
    };
    let abs_half = |p: f64| (p - 0.5).abs();
    let half = |_: f64| 0.5;
    let true_err = err(1, &abs_half, false);
    let sample_err = err(2, &half, true);
    let mc_true_err = err(3, &abs_half, false);
    let mc_sample_err = err(4, &half, true);
    let min_gap = rows.iter().filter(interior).map(|r| r[2] - r[1]).fold(f64::INFINITY, f64::min);

    ctx.report.result(
        "sample_wasserstein",
        json!({
            "samples": n,
            "grid": grid,
            "max_error_true_analytic": true_err,
            "max_error_sample_analytic": sample_err,
            "max_error_true_mc": mc_true_err,
            "max_error_sample_mc": mc_sample_err,
            "min_interior_gap": min_gap,
        }),
    );
    ctx.report.result("descent_on_sample_loss", &gd_sample);
    ctx.report.result("descent_on_true_loss", &gd_true);

    let r = &mut ctx.report;
    r.expect(Expectation::at_most("sample_wasserstein.true_curve", "analytic d₁(P, Q_p) = |p − ½| to 1e-3", true_err, 1e-3));
    r.expect(Expectation::at_most("sample_wasserstein.sample_curve", "analytic E d₁(P_i, Q_p) = ½ on interior p to 1e-3", sample_err, 1e-3));
    r.expect(Expectation::at_most("sample_wasserstein.mc_true_curve", "Monte-Carlo d₁(P, Q_p) = |p − ½| to 1e-2", mc_true_err, 1e-2));
    r.expect(Expectation::at_most("sample_wasserstein.mc_sample_curve", "Monte-Carlo E d₁(P_i, Q_p) = ½ on interior p to 1e-2", mc_sample_err, 1e-2));
    r.expect(Expectation::above("sample_wasserstein.strict", "E d₁(P_i, Q_p) > d₁(P, Q_p) on interior p", min_gap, 0.0));
    r.expect(Expectation::above(
        "sample_wasserstein.sample_descent_misses",
        "descent on the sample loss from 0.3 ends farther than 1e-3 from ½",
        (gd_sample.end - 0.5).abs(),
        1e-3,
    ));
    r.expect(Expectation::at_most(
        "sample_wasserstein.true_descent_reaches",
        "descent on the true loss from 0.3 ends within 1e-3 of ½",
        (gd_true.end - 0.5).abs(),
        1e-3,
    ));
    Ok(())
}
