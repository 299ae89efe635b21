//! Distances between finite discrete distributions.
//!
//! The Wasserstein distance is evaluated through the quantile representation
//! `d_p(F, G) = ‖F⁻¹(U) − G⁻¹(U)‖_p`: both quantile functions are piecewise
//! constant between cumulative-probability breakpoints, so merging the two
//! breakpoint lists gives the integral exactly.

use alloc::vec::Vec;

// Float math without std; when std is linked the inherent methods win.
#[allow(unused_imports)]
use num_traits::Float;

use crate::dist::{CategoricalDistribution, DiscreteDistribution};
use crate::mdp::ValueDistributionTable;
use crate::sum::NeumaierSum;
use crate::{Error, Result, MERGE_TOL};

/// Quantile pieces shorter than this are treated as rounding artefacts by
/// the `p = ∞` path.
const SUP_PIECE_TOL: f64 = 1e-14;

/// Smallest probability passed to `ln` by [`cross_entropy`].
pub const CE_CLAMP: f64 = 1e-300;

/// Walks the merged quantile pieces of `f` and `g`, calling `visit(length,
/// f_atom, g_atom)` for every piece of positive length.
fn for_each_quantile_piece(f: &DiscreteDistribution, g: &DiscreteDistribution, mut visit: impl FnMut(f64, f64, f64)) {
    let (fa, fc) = (f.atoms(), f.cumulative());
    let (ga, gc) = (g.atoms(), g.cumulative());
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    while i < fa.len() && j < ga.len() {
        let next = fc[i].min(gc[j]);
        if next > u {
            visit(next - u, fa[i], ga[j]);
            u = next;
        }
        if fc[i] <= next {
            i += 1;
        }
        if gc[j] <= next {
            j += 1;
        }
    }
}

/// Wasserstein distance `d_p` for `p >= 1`; pass `f64::INFINITY` for `d_∞`.
pub fn wasserstein(f: &DiscreteDistribution, g: &DiscreteDistribution, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidOrder(p));
    }
    if p.is_infinite() {
        let mut sup = 0.0_f64;
        for_each_quantile_piece(f, g, |len, a, b| {
            if len > SUP_PIECE_TOL {
                sup = sup.max((a - b).abs());
            }
        });
        return Ok(sup);
    }
    let mut acc = NeumaierSum::new();
    if p == 1.0 {
        for_each_quantile_piece(f, g, |len, a, b| acc.add(len * (a - b).abs()));
        Ok(acc.value().max(0.0))
    } else if p == 2.0 {
        for_each_quantile_piece(f, g, |len, a, b| acc.add(len * (a - b) * (a - b)));
        Ok(acc.value().max(0.0).sqrt())
    } else {
        for_each_quantile_piece(f, g, |len, a, b| acc.add(len * (a - b).abs().powf(p)));
        Ok(acc.value().max(0.0).powf(1.0 / p))
    }
}

/// Maximal Wasserstein distance `sup_{x,a} d_p(z1(x,a), z2(x,a))`.
pub fn max_wasserstein(z1: &ValueDistributionTable, z2: &ValueDistributionTable, p: f64) -> Result<f64> {
    if z1.n_states() != z2.n_states() || z1.n_actions() != z2.n_actions() {
        return Err(Error::IndexMismatch);
    }
    let mut sup = 0.0_f64;
    for (a, b) in z1.entries().iter().zip(z2.entries()) {
        sup = sup.max(wasserstein(a, b, p)?);
    }
    Ok(sup)
}

/// Union of both atom sets, coalesced within `MERGE_TOL`; each group is
/// represented by its largest member so right-continuous c.d.f.s agree on
/// atoms that would have been merged.
fn merged_atoms(f: &DiscreteDistribution, g: &DiscreteDistribution) -> Vec<f64> {
    let mut all: Vec<f64> = f.atoms().iter().chain(g.atoms()).copied().collect();
    all.sort_unstable_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    let mut head = f64::NEG_INFINITY;
    for z in all {
        if z - head < MERGE_TOL {
            *out.last_mut().unwrap() = z;
        } else {
            head = z;
            out.push(z);
        }
    }
    out
}

/// Kolmogorov distance `sup_y |F(y) − G(y)|`.
pub fn kolmogorov(f: &DiscreteDistribution, g: &DiscreteDistribution) -> f64 {
    merged_atoms(f, g)
        .into_iter()
        .map(|y| (f.cdf(y) - g.cdf(y)).abs())
        .fold(0.0, f64::max)
}

/// Kolmogorov distance between `f` and a continuous c.d.f.
///
/// The supremum is attained at a jump of `f`, on either side of it.
pub fn kolmogorov_to_cdf(f: &DiscreteDistribution, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut prev = 0.0;
    let mut sup = 0.0_f64;
    for (&z, &c) in f.atoms().iter().zip(f.cumulative()) {
        let g = cdf(z);
        sup = sup.max((c - g).abs()).max((prev - g).abs());
        prev = c;
    }
    sup
}

/// Total variation `½ Σ |f(y) − g(y)|` over the merged atoms.
pub fn total_variation(f: &DiscreteDistribution, g: &DiscreteDistribution) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut prev = 0.0;
    for y in merged_atoms(f, g) {
        let diff = f.cdf(y) - g.cdf(y);
        acc.add((diff - prev).abs());
        prev = diff;
    }
    0.5 * acc.value()
}

/// Result of [`cross_entropy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossEntropy {
    pub value: f64,
    /// Some `p_i` was below [`CE_CLAMP`] where `m_i > 0`; `value` is then the
    /// clamped (finite) cross-entropy.
    pub saturated: bool,
}

/// `−Σ m_i ln p_i` on a shared support, with `0 · ln 0 = 0`.
pub fn cross_entropy(m: &CategoricalDistribution, p: &CategoricalDistribution) -> Result<CrossEntropy> {
    if m.support() != p.support() {
        return Err(Error::SupportMismatch);
    }
    Ok(cross_entropy_probs(m.probs(), p.probs()))
}

pub(crate) fn cross_entropy_probs(m: &[f64], p: &[f64]) -> CrossEntropy {
    let mut acc = NeumaierSum::new();
    let mut saturated = false;
    for (&mi, &pi) in m.iter().zip(p) {
        if mi > 0.0 {
            if pi < CE_CLAMP {
                saturated = true;
            }
            acc.add(-mi * pi.max(CE_CLAMP).ln());
        }
    }
    CrossEntropy { value: acc.value(), saturated }
}
