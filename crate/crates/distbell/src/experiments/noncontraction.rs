//! Two-state example on which the optimality operator expands `d̄₁`.

use anyhow::Result;
use distbell_core::bellman::{dist_bellman_opt, ExactOptions};
use distbell_core::mdp::{build_noncontraction_mdp, noncontraction_tables, LowestIndex};
use distbell_core::metrics::max_wasserstein;
use serde_json::json;

use super::Ctx;
use crate::report::Expectation;

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let eps = ctx.config.params.epsilon;
    let (before, after) = ctx.report.time("noncontraction", || -> Result<(f64, f64)> {
        let mdp = build_noncontraction_mdp(eps)?;
        let (z, zstar) = noncontraction_tables(eps)?;
        let opts = ExactOptions::default();
        let tz = dist_bellman_opt(&z, &mdp, &LowestIndex, &opts)?;
        let tzstar = dist_bellman_opt(&zstar, &mdp, &LowestIndex, &opts)?;
        Ok((max_wasserstein(&z, &zstar, 1.0)?, max_wasserstein(&tz, &tzstar, 1.0)?))
    })?;
    let want_before = 2.0 * eps;
    let want_after = 0.5 * (1.0 - eps).abs() + 0.5 * (1.0 + eps).abs();
    ctx.report.result(
        "noncontraction",
        json!({
            "epsilon": eps,
            "d1_before": before,
            "d1_after": after,
            "expected_before": want_before,
            "expected_after": want_after,
            "expands": after > before,
        }),
    );
    let r = &mut ctx.report;
    r.expect(Expectation::within("noncontraction.d1_before", "d̄₁(Z, Z*) = 2ε", before, want_before, 1e-12));
    r.expect(Expectation::within("noncontraction.d1_after", "d̄₁(TZ, TZ*) = ½|1−ε| + ½|1+ε|", after, want_after, 1e-12));
    r.expect(Expectation::is_true("noncontraction.expands", "d̄₁(TZ, TZ*) > d̄₁(Z, Z*)", after > before));
    Ok(())
}
