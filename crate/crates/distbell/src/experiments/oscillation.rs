//! Adversarial tie-breaking makes iterates of the optimality operator cycle.

use anyhow::Result;
use distbell_core::bellman::{dist_bellman_opt, iterate, ExactOptions, IterationReport};
use distbell_core::mdp::{build_noncontraction_mdp, noncontraction_tables, LowestIndex, PointMassAtZeroRule, TieBreak};
use serde_json::json;

use super::Ctx;
use crate::report::Expectation;

/// Iterations allowed before a cycle must have been detected.
pub const CYCLE_BUDGET: usize = 10;

fn iterate_from_optimum(tie: &dyn TieBreak, tol: f64, max_iters: usize) -> Result<IterationReport> {
    let mdp = build_noncontraction_mdp(0.0)?;
    let (_, zstar) = noncontraction_tables(0.0)?;
    let opts = ExactOptions::default();
    Ok(iterate(|z| dist_bellman_opt(z, &mdp, tie, &opts), zstar, 1.0, tol, max_iters)?)
}

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let tol = ctx.config.params.tol;
    let max_iters = ctx.config.params.max_iters;
    let adversarial = PointMassAtZeroRule { probe: (0, 0), when_zero: 1, otherwise: 0 };
    let (adv, default) = ctx.report.time("oscillation", || -> Result<_> {
        Ok((iterate_from_optimum(&adversarial, tol, CYCLE_BUDGET)?, iterate_from_optimum(&LowestIndex, tol, max_iters)?))
    })?;
    let min_delta = adv.deltas.iter().copied().fold(f64::INFINITY, f64::min);
    ctx.report.result("adversarial", &adv);
    ctx.report.result("lowest_index", &default);
    ctx.report.result("adversarial_min_delta", json!(min_delta));
    let r = &mut ctx.report;
    r.expect(Expectation::within(
        "oscillation.period",
        "adversarial tie rule: period-2 cycle detected within 10 iterations",
        adv.period.map_or(f64::NAN, |p| p as f64),
        2.0,
        0.0,
    ));
    r.expect(Expectation::is_true(
        "oscillation.lowest_index_converges",
        "lowest-index tie rule converges",
        default.converged,
    ));
    Ok(())
}
