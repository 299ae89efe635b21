//! Learned return distributions on CliffWalk against a Monte-Carlo oracle,
//! as the number of atoms varies.

use anyhow::Result;
use distbell_core::categorical::{train, LogitTable, Loss, Regime, TrainConfig};
use distbell_core::mdp::{monte_carlo_table, CliffWalk};
use distbell_core::metrics::wasserstein;
use distbell_core::categorical::project;
use distbell_core::{rng, CategoricalSupport, NeumaierSum, PolicyTable, TabularMdp, ValueDistributionTable};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::Ctx;
use crate::config::Params;
use crate::io;
use crate::report::Expectation;

pub const ROLLOUTS: usize = 10_000;
pub const HORIZON: usize = 10_000;
/// Relative slack allowed when checking that error falls with atom count.
pub const NOISE_BAND: f64 = 0.05;
/// Safe-path states whose distributions are dumped.
pub const DUMPED_STATES: usize = 5;

pub const REGIMES: [Regime; 2] = [Regime::SupervisedTarget, Regime::SampledBellman];
pub const LOSSES: [Loss; 2] = [Loss::CategoricalCe, Loss::WassersteinP1];

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::SupervisedTarget => "supervised",
        Regime::SampledBellman => "sampled",
    }
}

fn loss_name(l: Loss) -> &'static str {
    match l {
        Loss::CategoricalCe => "categorical_ce",
        Loss::WassersteinP1 => "wasserstein_p1",
        Loss::Bernoulli => "bernoulli",
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    seed_index: usize,
    n_atoms: usize,
    regime: Regime,
    loss: Loss,
}

impl Cell {
    fn tag(&self) -> String {
        format!("{}_{}_n{}_seed{}", regime_name(self.regime), loss_name(self.loss), self.n_atoms, self.seed_index)
    }
}

#[derive(Debug, Clone, Serialize)]
struct CellResult {
    regime: &'static str,
    loss: &'static str,
    n_atoms: usize,
    seed_index: usize,
    mean_d1: Option<f64>,
    max_d1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip)]
    outcome: Option<(LogitTable, Vec<distbell_core::categorical::CurvePoint>)>,
}

/// Root of the sub-seeds of repetition `k`.
fn seed_root(seed: u64, k: usize) -> u64 {
    rng::named_seed(seed, &format!("seed{k}"))
}

fn run_cell(cell: Cell, params: &Params, seed: u64, mdp: &TabularMdp, pi: &PolicyTable, oracle: &ValueDistributionTable) -> CellResult {
    let sweeps = match cell.regime {
        Regime::SupervisedTarget => params.sweeps,
        Regime::SampledBellman => params.sampled_sweeps(),
    };
    let outcome = CategoricalSupport::new(params.v_min, params.v_max, cell.n_atoms).and_then(|support| {
        let config = TrainConfig {
            sweeps,
            step_size: params.step_size,
            eval_every: params.eval_every,
            seed: rng::named_seed(seed_root(seed, cell.seed_index), &format!("train/{}", cell.tag())),
            ..TrainConfig::new(support, cell.regime, cell.loss)
        };
        train(mdp, pi, &config, Some(oracle))
    });
    let base = CellResult {
        regime: regime_name(cell.regime),
        loss: loss_name(cell.loss),
        n_atoms: cell.n_atoms,
        seed_index: cell.seed_index,
        mean_d1: None,
        max_d1: None,
        error: None,
        outcome: None,
    };
    match outcome {
        Ok(out) => {
            let last = out.history.last().copied();
            CellResult {
                mean_d1: last.and_then(|c| c.mean_d1),
                max_d1: last.and_then(|c| c.max_d1),
                outcome: Some((out.logits, out.history)),
                ..base
            }
        }
        Err(e) => CellResult { error: Some(e.to_string()), ..base },
    }
}

/// Mean over non-terminal pairs of `d₁(Φ oracle, oracle)`: the best any
/// categorical fit on this support can do.
fn projection_floor(mdp: &TabularMdp, oracle: &ValueDistributionTable, support: &CategoricalSupport) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    let mut count = 0usize;
    for x in (0..mdp.n_states()).filter(|&x| !mdp.is_terminal(x)) {
        for a in 0..mdp.n_actions() {
            let d = oracle.get(x, a);
            acc.add(wasserstein(&project(support, d).to_discrete(), d, 1.0)?);
            count += 1;
        }
    }
    Ok(acc.value() / count as f64)
}

/// Mean over seeds, `None` if any seed failed.
fn seed_mean(cells: &[CellResult], regime: Regime, loss: Loss, n: usize) -> Option<f64> {
    let vals: Option<Vec<f64>> = cells
        .iter()
        .filter(|c| c.regime == regime_name(regime) && c.loss == loss_name(loss) && c.n_atoms == n)
        .map(|c| c.mean_d1)
        .collect();
    vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Range over seeds, `None` if any seed failed.
fn seed_range(cells: &[CellResult], regime: Regime, loss: Loss, n: usize) -> Option<f64> {
    let vals: Option<Vec<f64>> = cells
        .iter()
        .filter(|c| c.regime == regime_name(regime) && c.loss == loss_name(loss) && c.n_atoms == n)
        .map(|c| c.mean_d1)
        .collect();
    let vals = vals?;
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(hi - lo)
}

/// Five evenly spaced states along the safe path, start and goal side
/// included.
pub fn dumped_states(cliff: &CliffWalk) -> Vec<usize> {
    let path = cliff.safe_path();
    let last = path.len() - 1;
    (0..DUMPED_STATES).map(|k| path[(k * last + (DUMPED_STATES - 1) / 2) / (DUMPED_STATES - 1)]).collect()
}

pub fn run(ctx: &mut Ctx<'_>) -> Result<()> {
    let params = ctx.config.params.clone();
    let seed = ctx.config.seed;
    let rollouts = params.rollouts.unwrap_or(ROLLOUTS);
    let horizon = params.horizon.unwrap_or(HORIZON);
    let mut atoms = params.atoms.clone();
    atoms.sort_unstable();
    atoms.dedup();
    let cliff = CliffWalk::default();
    let (mdp, pi) = cliff.build()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(params.jobs).build()?;

    let oracles = ctx.report.time("oracle", || -> Result<Vec<ValueDistributionTable>> {
        pool.install(|| {
            (0..params.seeds)
                .into_par_iter()
                .map(|k| Ok(monte_carlo_table(&mdp, &pi, rng::named_seed(seed_root(seed, k), "oracle"), rollouts, horizon)?))
                .collect()
        })
    })?;

    let mut cells = Vec::new();
    for seed_index in 0..params.seeds {
        for &n_atoms in &atoms {
            for regime in REGIMES {
                for loss in LOSSES {
                    cells.push(Cell { seed_index, n_atoms, regime, loss });
                }
            }
        }
    }
    let results: Vec<CellResult> = ctx.report.time("training", || {
        pool.install(|| {
            cells.par_iter().map(|&c| run_cell(c, &params, seed, &mdp, &pi, &oracles[c.seed_index])).collect()
        })
    });

    for (cell, res) in cells.iter().zip(&results) {
        if let Some((logits, curve)) = &res.outcome {
            io::write_curve_csv(&ctx.artifacts.path(&format!("curves/{}.csv", cell.tag()))?, curve)?;
            io::write_logits(&ctx.artifacts.path(&format!("logits/{}.json", cell.tag()))?, logits)?;
        }
    }

    // Distributions at the dumped states: oracle and every learner, first
    // seed, largest atom count.
    let states = dumped_states(&cliff);
    let n_max = *atoms.last().expect("validated nonempty");
    for &x in &states {
        let a = cliff.safe_action(x) as usize;
        io::write_distribution_csv(&ctx.artifacts.path(&format!("cdf/s{x}_oracle.csv"))?, oracles[0].get(x, a))?;
        for (cell, res) in cells.iter().zip(&results) {
            if cell.seed_index != 0 || cell.n_atoms != n_max {
                continue;
            }
            if let Some((logits, _)) = &res.outcome {
                let name = format!("cdf/s{x}_{}_{}.csv", res.regime, res.loss);
                io::write_distribution_csv(&ctx.artifacts.path(&name)?, &logits.distribution(x, a).to_discrete())?;
            }
        }
    }

    let mut floors = Vec::with_capacity(atoms.len());
    for &n in &atoms {
        let support = CategoricalSupport::new(params.v_min, params.v_max, n)?;
        let mut acc = 0.0;
        for o in &oracles {
            acc += projection_floor(&mdp, o, &support)?;
        }
        floors.push(acc / oracles.len() as f64);
    }

    let mean = |regime, loss| atoms.iter().map(|&n| seed_mean(&results, regime, loss, n)).collect::<Vec<_>>();
    let range = |regime, loss| atoms.iter().map(|&n| seed_range(&results, regime, loss, n)).collect::<Vec<_>>();
    let mut table = serde_json::Map::new();
    for regime in REGIMES {
        for loss in LOSSES {
            table.insert(
                format!("{}/{}", regime_name(regime), loss_name(loss)),
                json!({"mean_d1": mean(regime, loss), "seed_range": range(regime, loss)}),
            );
        }
    }

    // Largest step-to-step growth of categorical error as atoms increase.
    let growth = |v: &[Option<f64>]| -> f64 {
        if v.iter().any(Option::is_none) {
            return f64::NAN;
        }
        v.windows(2).map(|w| w[1].unwrap() / w[0].unwrap()).fold(0.0, f64::max)
    };
    let worst = |v: Vec<Option<f64>>| v.into_iter().map(|x| x.unwrap_or(f64::NAN)).fold(f64::NEG_INFINITY, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) });
    let ce_sampled = mean(Regime::SampledBellman, Loss::CategoricalCe);
    let w_sampled = mean(Regime::SampledBellman, Loss::WassersteinP1);
    let gap: Vec<Option<f64>> = ce_sampled.iter().zip(&w_sampled).map(|(c, w)| Some((*c)? - (*w)?)).collect();
    let w_spread = worst(range(Regime::SampledBellman, Loss::WassersteinP1));
    let ce_spread = worst(range(Regime::SampledBellman, Loss::CategoricalCe));

    ctx.report.result(
        "cliffwalk_atoms",
        json!({
            "atoms": atoms,
            "seeds": params.seeds,
            "rollouts": rollouts,
            "horizon": horizon,
            "sweeps": {"supervised": params.sweeps, "sampled": params.sampled_sweeps()},
            "step_size": params.step_size,
            "support": {"v_min": params.v_min, "v_max": params.v_max},
            "regimes": table,
            "projection_floor": floors,
            "sampled_ce_minus_wasserstein": gap,
            "sampled_spread": {"wasserstein_p1": w_spread, "categorical_ce": ce_spread},
            "dumped_states": states,
        }),
    );
    ctx.report.result("cells", &results);

    let r = &mut ctx.report;
    for regime in REGIMES {
        let name = regime_name(regime);
        r.expect(Expectation::at_most(
            &format!("cliffwalk.categorical_monotone.{name}"),
            &format!("{name} categorical d₁ does not grow by more than 5% as atoms increase (3-seed mean)"),
            growth(&mean(regime, Loss::CategoricalCe)),
            1.0 + NOISE_BAND,
        ));
    }
    r.expect(Expectation::below(
        "cliffwalk.sampled_categorical_beats_wasserstein",
        "sampled regime: categorical d₁ below Wasserstein d₁ at every atom count (largest difference < 0)",
        worst(gap),
        0.0,
    ));
    r.expect(Expectation::above(
        "cliffwalk.wasserstein_seed_spread",
        "sampled regime: Wasserstein seed spread minus 3× categorical seed spread > 0",
        w_spread - 3.0 * ce_spread,
        0.0,
    ));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dumped_states_span_the_path() {
        let cliff = CliffWalk::default();
        let path = cliff.safe_path();
        let s = dumped_states(&cliff);
        assert_eq!(s.len(), 5);
        assert_eq!(s[0], path[0]);
        assert_eq!(s[4], path[path.len() - 1]);
    }
}
