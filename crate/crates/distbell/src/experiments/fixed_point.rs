//! Exact operator iteration against Monte-Carlo and expected-value oracles.

use anyhow::{anyhow, Result};
use distbell_core::bellman::{
    dist_bellman_opt, dist_bellman_pe_exact, evaluate_policy, iterate, optimal_q, ExactOptions, IterationReport,
};
use distbell_core::mdp::{monte_carlo_table, random_mdp, random_policy, CliffWalk, LowestIndex, RandomMdpSpec};
use distbell_core::metrics::max_wasserstein;
use distbell_core::{rng, CategoricalSupport, PolicyTable, QTable, TabularMdp, ValueDistributionTable};
use serde_json::{json, Value};

use super::Ctx;
use crate::report::Expectation;

pub const ROLLOUTS: usize = 10_000;
pub const HORIZON: usize = 10_000;
/// Random MDPs per family.
pub const RANDOM_MDPS: usize = 5;
const VALUE_TOL: f64 = 1e-12;
const VALUE_ITERS: usize = 1_000_000;
/// A delta below `tol` bounds the distance to the fixed point only up to a
/// factor `1 / (1 − ρ)`, so iteration runs this much tighter than `tol`.
pub const TIGHTENING: f64 = 1e-3;

fn vi_reference(q: Result<Option<QTable>, distbell_core::Error>) -> Result<QTable> {
    q?.ok_or_else(|| anyhow!("value iteration did not converge"))
}

fn summary(rep: &IterationReport) -> Value {
    json!({
        "converged": rep.converged,
        "iterations": rep.iterations,
        "final_delta": rep.deltas.last(),
        "max_support": rep.last.max_support(),
    })
}

/// Iterates exact `T^π` from the zero table.
fn evaluate(mdp: &TabularMdp, pi: &PolicyTable, opts: &ExactOptions, tol: f64, max_iters: usize) -> Result<IterationReport> {
    let z0 = ValueDistributionTable::zeros(mdp.n_states(), mdp.n_actions());
    Ok(iterate(|z| dist_bellman_pe_exact(z, mdp, pi, opts), z0, 1.0, tol, max_iters)?)
}

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let params = &ctx.config.params;
    let (tol, max_iters) = (params.tol, params.max_iters);
    let rollouts = params.rollouts.unwrap_or(ROLLOUTS);
    let horizon = params.horizon.unwrap_or(HORIZON);
    let seed = ctx.config.seed;
    let exact = ExactOptions::default();

    let cliff = CliffWalk::default();
    let (mdp, pi) = cliff.build()?;
    crate::io::save_mdp(&ctx.artifacts.path("cliffwalk_mdp.json")?, &mdp)?;

    let (rep, d1, mean_err) = ctx.report.time("cliffwalk", || -> Result<_> {
        let rep = evaluate(&mdp, &pi, &exact, tol * TIGHTENING, max_iters)?;
        let oracle = monte_carlo_table(&mdp, &pi, rng::named_seed(seed, "oracle"), rollouts, horizon)?;
        let d1 = max_wasserstein(&rep.last, &oracle, 1.0)?;
        let q = vi_reference(evaluate_policy(&mdp, &pi, VALUE_TOL, VALUE_ITERS))?;
        let err = rep.last.mean_table().max_abs_diff(&q)?;
        Ok((rep, d1, err))
    })?;
    for &x in cliff.safe_path().iter().step_by(4) {
        let a = cliff.safe_action(x) as usize;
        crate::io::write_distribution_csv(&ctx.artifacts.path(&format!("cliffwalk_fixed_point/s{x}_a{a}.csv"))?, rep.last.get(x, a))?;
    }

    let small = ctx.report.time("cliffwalk_4x4", || -> Result<Value> {
        let cw = CliffWalk { rows: 4, cols: 4, ..CliffWalk::default() };
        let (mdp, pi) = cw.build()?;
        let rep = evaluate(&mdp, &pi, &exact, tol * TIGHTENING, max_iters)?;
        let oracle = monte_carlo_table(&mdp, &pi, rng::named_seed(seed, "oracle_4x4"), rollouts, horizon)?;
        let q = vi_reference(evaluate_policy(&mdp, &pi, VALUE_TOL, VALUE_ITERS))?;
        let mut v = summary(&rep);
        v["d1_to_monte_carlo"] = json!(max_wasserstein(&rep.last, &oracle, 1.0)?);
        v["mean_error"] = json!(rep.last.mean_table().max_abs_diff(&q)?);
        Ok(v)
    })?;

    // γ = 0.9 random MDPs: exact iterates grow without bound in support, so
    // they are projected onto a fine grid that contains every return.
    let random = ctx.report.time("random_mdps", || -> Result<Value> {
        let grid = CategoricalSupport::new(-12.0, 12.0, 2401)?;
        let projected = ExactOptions { projection: Some(grid), ..ExactOptions::default() };
        let spec = RandomMdpSpec { n_states: 4, n_actions: 2, gamma: 0.9, ..RandomMdpSpec::default() };
        let mut rows = Vec::new();
        for i in 0..RANDOM_MDPS {
            let r = &mut rng::stream(rng::named_seed(seed, "random_mdps"), i as u64);
            let mdp = random_mdp(r, &spec)?;
            let pi = random_policy(r, spec.n_states, spec.n_actions);
            let pe = evaluate(&mdp, &pi, &projected, 1e-10, max_iters)?;
            let q_pi = vi_reference(evaluate_policy(&mdp, &pi, VALUE_TOL, VALUE_ITERS))?;
            let z0 = ValueDistributionTable::zeros(spec.n_states, spec.n_actions);
            let opt = iterate(|z| dist_bellman_opt(z, &mdp, &LowestIndex, &projected), z0, 1.0, 1e-10, max_iters)?;
            let q_star = vi_reference(optimal_q(&mdp, VALUE_TOL, VALUE_ITERS))?;
            let mut pe_v = summary(&pe);
            pe_v["mean_error"] = json!(pe.last.mean_table().max_abs_diff(&q_pi)?);
            let mut opt_v = summary(&opt);
            opt_v["mean_error"] = json!(opt.last.mean_table().max_abs_diff(&q_star)?);
            rows.push(json!({"instance": i, "policy_evaluation": pe_v, "ordered_greedy": opt_v}));
        }
        Ok(json!({"projection": {"v_min": -12.0, "v_max": 12.0, "n_atoms": 2401}, "instances": rows}))
    })?;

    let first_below = rep.deltas.iter().position(|&d| d < tol);
    ctx.report.result(
        "cliffwalk",
        json!({
            "iteration": summary(&rep),
            "iteration_tol": tol * TIGHTENING,
            "first_iteration_below_tol": first_below.map(|k| k + 1),
            "deltas": rep.deltas,
            "rollouts": rollouts,
            "horizon": horizon,
            "d1_to_monte_carlo": d1,
            "mean_error": mean_err,
        }),
    );
    ctx.report.result("cliffwalk_4x4", small);
    ctx.report.result("random_mdps", random);
    let r = &mut ctx.report;
    r.expect(Expectation::is_true(
        "fixed_point.converged",
        "exact T^π on CliffWalk converges (d̄₁ delta < tol)",
        rep.converged && first_below.is_some(),
    ));
    r.expect(Expectation::at_most("fixed_point.monte_carlo", "d̄₁(fixed point, Monte-Carlo oracle) ≤ 1.0", d1, 1.0));
    r.expect(Expectation::at_most("fixed_point.means", "mean table matches value iteration to 1e-6", mean_err, 1e-6));
    Ok(())
}
