//! Randomized property battery over operators, projection, gradients and
//! metrics. Reports worst observed ratios and violation counts.

use anyhow::Result;
use distbell_core::bellman::{dist_bellman_opt, dist_bellman_pe_exact, variance_table, ExactOptions};
use distbell_core::categorical::{ce_loss_and_gradient, project, wasserstein_loss_and_subgradient};
use distbell_core::dist::mixture;
use distbell_core::mdp::{build_noncontraction_mdp, noncontraction_tables, LowestIndex};
use distbell_core::metrics::{max_wasserstein, wasserstein};
use distbell_core::{
    rng, CategoricalDistribution, CategoricalSupport, DiscreteDistribution, TabularMdp, ValueDistributionTable, MERGE_TOL,
};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use super::battery::{self, Instance};
use super::Ctx;
use crate::report::Expectation;

pub const ORDERS: [f64; 3] = [1.0, 2.0, f64::INFINITY];
const SLACK: f64 = 1e-9;
/// Noncontraction examples mixed into the mean-contraction battery.
pub const EPSILONS: [f64; 4] = [0.05, 0.1, 0.5, 1.0];

fn order_name(p: f64) -> String {
    if p.is_infinite() { "inf".into() } else { format!("{p}") }
}

fn ratio(after: f64, before: f64) -> Option<f64> {
    (before > 0.0).then(|| after / before)
}

fn mean_matched(z: &ValueDistributionTable, like: &ValueDistributionTable) -> Result<ValueDistributionTable> {
    let entries = z
        .entries()
        .iter()
        .zip(like.entries())
        .map(|(d, l)| d.affine(1.0, l.mean() - d.mean()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ValueDistributionTable::new(z.n_states(), z.n_actions(), entries)?)
}

#[derive(Debug, Default, Serialize)]
struct Worst {
    /// Largest `ratio − bound` seen.
    excess: f64,
    ratio: f64,
    gamma: f64,
    instance: usize,
}

impl Worst {
    fn new() -> Self {
        Self { excess: f64::NEG_INFINITY, ..Self::default() }
    }

    fn see(&mut self, ratio: Option<f64>, bound: f64, gamma: f64, instance: usize) {
        if let Some(r) = ratio {
            if r - bound > self.excess {
                *self = Self { excess: r - bound, ratio: r, gamma, instance };
            }
        }
    }
}

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    operators(ctx)?;
    projection(ctx)?;
    gradients(ctx)?;
    metrics(ctx)?;
    Ok(())
}

fn operators(ctx: &mut Ctx<'_>) -> Result<()> {
    let n = ctx.config.params.instances;
    let seed = rng::named_seed(ctx.config.seed, "instances");
    let opts = ExactOptions::default();
    let instances: Vec<Instance> = (0..n).map(|i| battery::instance(&mut rng::stream(seed, i as u64))).collect();

    let pe = ctx.report.time("policy_evaluation", || -> Result<Vec<Worst>> {
        let mut worst: Vec<Worst> = ORDERS.iter().map(|_| Worst::new()).collect();
        for (i, inst) in instances.iter().enumerate() {
            let t1 = dist_bellman_pe_exact(&inst.z1, &inst.mdp, &inst.policy, &opts)?;
            let t2 = dist_bellman_pe_exact(&inst.z2, &inst.mdp, &inst.policy, &opts)?;
            for (w, &p) in worst.iter_mut().zip(&ORDERS) {
                let r = ratio(max_wasserstein(&t1, &t2, p)?, max_wasserstein(&inst.z1, &inst.z2, p)?);
                w.see(r, inst.mdp.gamma(), inst.mdp.gamma(), i);
            }
        }
        Ok(worst)
    })?;

    let (var, var_matched) = ctx.report.time("variance", || -> Result<(Worst, Worst)> {
        let (mut plain, mut matched) = (Worst::new(), Worst::new());
        let var_ratio = |mdp: &TabularMdp, pi, a: &ValueDistributionTable, b: &ValueDistributionTable| -> Result<Option<f64>> {
            let ta = dist_bellman_pe_exact(a, mdp, pi, &opts)?;
            let tb = dist_bellman_pe_exact(b, mdp, pi, &opts)?;
            let before = variance_table(a).max_abs_diff(&variance_table(b))?;
            let after = variance_table(&ta).max_abs_diff(&variance_table(&tb))?;
            Ok(ratio(after, before))
        };
        for (i, inst) in instances.iter().enumerate() {
            let g = inst.mdp.gamma();
            plain.see(var_ratio(&inst.mdp, &inst.policy, &inst.z1, &inst.z2)?, g * g, g, i);
            let z2 = mean_matched(&inst.z2, &inst.z1)?;
            matched.see(var_ratio(&inst.mdp, &inst.policy, &inst.z1, &z2)?, g * g, g, i);
        }
        Ok((plain, matched))
    })?;

    let (mean_worst, expansions) = ctx.report.time("optimality_means", || -> Result<_> {
        let mut worst = Worst::new();
        let mean_ratio = |mdp: &TabularMdp, a: &ValueDistributionTable, b: &ValueDistributionTable| -> Result<(Option<f64>, Option<f64>)> {
            let ta = dist_bellman_opt(a, mdp, &LowestIndex, &opts)?;
            let tb = dist_bellman_opt(b, mdp, &LowestIndex, &opts)?;
            let means = ratio(ta.mean_table().max_abs_diff(&tb.mean_table())?, a.mean_table().max_abs_diff(&b.mean_table())?);
            let d1 = ratio(max_wasserstein(&ta, &tb, 1.0)?, max_wasserstein(a, b, 1.0)?);
            Ok((means, d1))
        };
        for (i, inst) in instances.iter().enumerate() {
            worst.see(mean_ratio(&inst.mdp, &inst.z1, &inst.z2)?.0, inst.mdp.gamma(), inst.mdp.gamma(), i);
        }
        let mut expansions = Vec::new();
        for (k, &eps) in EPSILONS.iter().enumerate() {
            let mdp = build_noncontraction_mdp(eps)?;
            let (z, zstar) = noncontraction_tables(eps)?;
            let (means, d1) = mean_ratio(&mdp, &z, &zstar)?;
            worst.see(means, 1.0, 1.0, n + k);
            expansions.push(json!({"epsilon": eps, "mean_ratio": means, "d1_ratio": d1}));
        }
        Ok((worst, expansions))
    })?;

    let r = &mut ctx.report;
    for (w, &p) in pe.iter().zip(&ORDERS) {
        r.expect(Expectation::at_most(
            &format!("contraction.policy_evaluation.p_{}", order_name(p)),
            &format!("max d̄_p ratio of T^π minus γ ≤ 1e-9, p = {}", order_name(p)),
            w.excess,
            SLACK,
        ));
    }
    r.expect(Expectation::at_most("contraction.variance", "max variance-difference ratio minus γ² ≤ 1e-9", var.excess, SLACK));
    r.expect(Expectation::at_most(
        "contraction.optimality_means",
        "max ∞-norm mean ratio of T minus γ ≤ 1e-9, noncontraction examples included",
        mean_worst.excess,
        SLACK,
    ));
    r.result("instances", n);
    r.result(
        "policy_evaluation",
        ORDERS.iter().zip(&pe).map(|(&p, w)| json!({"p": order_name(p), "worst": w})).collect::<Vec<_>>(),
    );
    r.result("variance", json!({"worst": var, "worst_mean_matched": var_matched}));
    r.result("optimality_means", json!({"worst": mean_worst, "noncontraction_examples": expansions}));
    Ok(())
}

/// Projection by evaluating the triangular kernel at every atom.
fn hat_projection(s: &CategoricalSupport, t: &DiscreteDistribution) -> Vec<f64> {
    let dz = s.delta_z();
    (0..s.n_atoms())
        .map(|i| {
            let zi = s.atom(i);
            t.iter().map(|(y, p)| p * (1.0 - (y.clamp(s.v_min(), s.v_max()) - zi).abs() / dz).clamp(0.0, 1.0)).sum()
        })
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn projection(ctx: &mut Ctx<'_>) -> Result<()> {
    let n = ctx.config.params.cases;
    let seed = rng::named_seed(ctx.config.seed, "projection");
    let errs = ctx.report.time("projection", || -> Result<[f64; 5]> {
        let mut e = [0.0_f64; 5];
        for i in 0..n {
            let r = &mut rng::stream(seed, i as u64);
            let s = battery::support(r);
            let (lo, hi) = (s.v_min(), s.v_max());
            let w = hi - lo;
            let t1 = battery::distribution(r, 8, lo - w, hi + w);
            let t2 = battery::distribution(r, 8, lo - w, hi + w);
            let inside = battery::distribution(r, 8, lo, hi);
            let k = r.gen_range(1..=6);
            let grid_atoms: Vec<f64> = (0..k).map(|_| s.atom(r.gen_range(0..s.n_atoms()))).collect();
            let grid_probs: Vec<f64> = (0..k).map(|_| r.gen_range(0.01..1.0)).collect();
            let on_grid = DiscreteDistribution::new(&grid_atoms, &grid_probs, MERGE_TOL)?;
            let lambda = r.gen_range(0.0..1.0);

            let p1 = project(&s, &t1);
            let p2 = project(&s, &t2);
            e[0] = e[0].max((p1.probs().iter().sum::<f64>() - 1.0).abs());
            e[1] = e[1].max((project(&s, &inside).mean() - inside.mean()).abs());
            let mixed = project(&s, &mixture(&[(lambda, &t1), (1.0 - lambda, &t2)], MERGE_TOL)?);
            let combo: Vec<f64> = p1.probs().iter().zip(p2.probs()).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            e[2] = e[2].max(max_diff(mixed.probs(), &combo));
            e[3] = e[3].max(max_diff(p1.probs(), &hat_projection(&s, &t1)));
            e[4] = e[4].max(max_diff(project(&s, &on_grid).probs(), &hat_projection(&s, &on_grid)));
        }
        Ok(e)
    })?;
    let names = [
        ("mass", "projected mass sums to 1"),
        ("mean", "unclipped targets keep their mean"),
        ("linearity", "projection of a mixture is the mixture of projections"),
        ("kernel_equivalence", "two-neighbour split equals the triangular-kernel formula"),
        ("kernel_equivalence_integral", "two-neighbour split equals the kernel formula on grid-aligned targets"),
    ];
    for ((id, desc), e) in names.iter().zip(errs) {
        ctx.report.expect(Expectation::at_most(&format!("projection.{id}"), &format!("{desc}, to 1e-12"), e, 1e-12));
    }
    ctx.report.result(
        "projection",
        json!({"cases": n, "max_errors": names.iter().zip(errs).map(|((id, _), e)| (id.to_string(), e)).collect::<std::collections::BTreeMap<_, _>>()}),
    );
    Ok(())
}

fn central_difference(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], i: usize, h: f64) -> Result<f64> {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    Ok((f(&up)? - f(&down)?) / (2.0 * h))
}

/// Smallest `|F − G|` over the pieces of the merged support: how close the
/// two c.d.f.s come to crossing, where `d₁` has a kink.
pub fn kink_margin(p: &[f64], s: &CategoricalSupport, t: &DiscreteDistribution) -> f64 {
    let mut ys: Vec<f64> = s.atoms().into_iter().chain(t.atoms().iter().copied()).collect();
    ys.sort_by(f64::total_cmp);
    let mut margin = f64::INFINITY;
    let mut f = 0.0;
    let mut i = 0;
    for w in ys.windows(2) {
        while i < p.len() && s.atom(i) <= w[0] {
            f += p[i];
            i += 1;
        }
        if w[1] > w[0] {
            margin = margin.min((f - t.cdf(w[0])).abs());
        }
    }
    margin
}

pub const FD_STEP: f64 = 1e-6;
pub const KINK_MARGIN: f64 = 1e-5;

fn gradients(ctx: &mut Ctx<'_>) -> Result<()> {
    let n = ctx.config.params.gradient_cases;
    let seed = rng::named_seed(ctx.config.seed, "gradients");
    let (ce_err, w_err, w_checked) = ctx.report.time("gradients", || -> Result<(f64, f64, usize)> {
        let (mut ce_err, mut w_err, mut checked) = (0.0_f64, 0.0_f64, 0usize);
        for i in 0..n {
            let r = &mut rng::stream(seed, i as u64);
            let s = battery::support(r);
            let logits: Vec<f64> = (0..s.n_atoms()).map(|_| r.gen_range(-3.0..3.0)).collect();
            let (lo, hi) = (s.v_min(), s.v_max());
            let target = battery::distribution(r, 8, lo - 5.0, hi + 5.0);

            let m = project(&s, &target);
            let (_, g) = ce_loss_and_gradient(&m, &logits)?;
            let ce = |l: &[f64]| Ok(ce_loss_and_gradient(&m, l)?.0);
            for (k, gk) in g.iter().enumerate() {
                ce_err = ce_err.max((gk - central_difference(ce, &logits, k, FD_STEP)?).abs());
            }

            let p = CategoricalDistribution::softmax(s, &logits)?;
            if kink_margin(p.probs(), &s, &target) > KINK_MARGIN {
                checked += 1;
                let (_, g) = wasserstein_loss_and_subgradient(&logits, &s, &target)?;
                let wl = |l: &[f64]| Ok(wasserstein_loss_and_subgradient(l, &s, &target)?.0);
                for (k, gk) in g.iter().enumerate() {
                    w_err = w_err.max((gk - central_difference(wl, &logits, k, FD_STEP)?).abs());
                }
            }
        }
        Ok((ce_err, w_err, checked))
    })?;
    let r = &mut ctx.report;
    r.expect(Expectation::at_most("gradients.cross_entropy", "cross-entropy gradient matches central differences to 1e-6", ce_err, 1e-6));
    r.expect(Expectation::at_most(
        "gradients.wasserstein",
        "Wasserstein subgradient matches central differences to 1e-6 away from kinks",
        w_err,
        1e-6,
    ));
    r.result(
        "gradients",
        json!({"cases": n, "fd_step": FD_STEP, "kink_margin": KINK_MARGIN, "wasserstein_checked": w_checked,
               "max_error_cross_entropy": ce_err, "max_error_wasserstein": w_err}),
    );
    Ok(())
}

fn lp_norm(a: &DiscreteDistribution, p: f64) -> f64 {
    if p.is_infinite() { a.abs_moment(p) } else { a.abs_moment(p).powf(1.0 / p) }
}

type Partition = (DiscreteDistribution, DiscreteDistribution, Vec<(DiscreteDistribution, DiscreteDistribution)>);

/// Mixtures `U = Σ w_i U_i`, `V = Σ w_i V_i` and the laws of `A_i U`, `A_i V`
/// for the component indicators `A_i`.
fn partitioned(
    parts: &[(DiscreteDistribution, DiscreteDistribution, f64)],
) -> Result<Partition> {
    let total: f64 = parts.iter().map(|p| p.2).sum();
    let w: Vec<f64> = parts.iter().map(|p| p.2 / total).collect();
    let u = mixture(&parts.iter().zip(&w).map(|(p, &w)| (w, &p.0)).collect::<Vec<_>>(), MERGE_TOL)?;
    let v = mixture(&parts.iter().zip(&w).map(|(p, &w)| (w, &p.1)).collect::<Vec<_>>(), MERGE_TOL)?;
    let zero = DiscreteDistribution::point(0.0);
    let mut pieces = Vec::with_capacity(parts.len());
    for (p, &wi) in parts.iter().zip(&w) {
        pieces.push((
            mixture(&[(wi, &p.0), (1.0 - wi, &zero)], MERGE_TOL)?,
            mixture(&[(wi, &p.1), (1.0 - wi, &zero)], MERGE_TOL)?,
        ));
    }
    Ok((u, v, pieces))
}

const METRIC_PROPERTIES: [&str; 8] =
    ["nonnegative", "identity", "symmetry", "triangle", "scaling", "independent_shift", "independent_product", "partition"];

fn metrics(ctx: &mut Ctx<'_>) -> Result<()> {
    let n = ctx.config.params.cases;
    let seed = rng::named_seed(ctx.config.seed, "metrics");
    let counts = ctx.report.time("metrics", || -> Result<Vec<[usize; 3]>> {
        let mut counts = vec![[0usize; 3]; METRIC_PROPERTIES.len()];
        for i in 0..n {
            let r = &mut rng::stream(seed, i as u64);
            let u = battery::distribution(r, 6, -10.0, 10.0);
            let v = battery::distribution(r, 6, -10.0, 10.0);
            let w = battery::distribution(r, 6, -10.0, 10.0);
            let a = r.gen_range(-5.0..5.0);
            let big_a = battery::distribution(r, 4, -3.0, 3.0);
            let k = r.gen_range(1..=4);
            let parts: Vec<_> = (0..k)
                .map(|_| (battery::distribution(r, 4, -10.0, 10.0), battery::distribution(r, 4, -10.0, 10.0), r.gen_range(0.05..1.0)))
                .collect();
            let (pu, pv, pieces) = partitioned(&parts)?;
            let (au, av) = (u.affine(a, 0.0)?, v.affine(a, 0.0)?);
            let (su, sv) = (big_a.convolve(&u)?, big_a.convolve(&v)?);
            let (mu, mv) = (big_a.product(&u)?, big_a.product(&v)?);
            for (j, &p) in ORDERS.iter().enumerate() {
                let d = |x: &DiscreteDistribution, y: &DiscreteDistribution| wasserstein(x, y, p);
                let uv = d(&u, &v)?;
                let split: f64 = pieces.iter().map(|(x, y)| d(x, y)).sum::<Result<f64, _>>()?;
                let violated = [
                    uv < 0.0,
                    d(&u, &u)? > SLACK,
                    (uv - d(&v, &u)?).abs() > SLACK,
                    uv > d(&u, &w)? + d(&w, &v)? + SLACK,
                    d(&au, &av)? > a.abs() * uv + SLACK,
                    d(&su, &sv)? > uv + SLACK,
                    d(&mu, &mv)? > lp_norm(&big_a, p) * uv + SLACK,
                    d(&pu, &pv)? > split + SLACK,
                ];
                for (c, bad) in counts.iter_mut().zip(violated) {
                    c[j] += usize::from(bad);
                }
            }
        }
        Ok(counts)
    })?;
    let total: usize = counts.iter().flatten().sum();
    let table: serde_json::Map<String, serde_json::Value> = METRIC_PROPERTIES
        .iter()
        .zip(&counts)
        .map(|(name, c)| {
            let per: serde_json::Map<_, _> = ORDERS.iter().zip(c).map(|(&p, &k)| (order_name(p), json!(k))).collect();
            (name.to_string(), serde_json::Value::Object(per))
        })
        .collect();
    ctx.report.expect(Expectation::at_most(
        "metrics.violations",
        "zero violations of metric axioms, scaling, independent shift/product and partition bounds (slack 1e-9)",
        total as f64,
        0.0,
    ));
    ctx.report.result("metrics", json!({"cases": n, "orders": ORDERS.map(order_name), "violations": table}));
    Ok(())
}
