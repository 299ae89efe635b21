//! Finite discrete distributions and categorical supports.

use alloc::vec::Vec;

use rand::Rng;

use crate::sum::{sum, NeumaierSum};
use crate::{Error, Result, MERGE_TOL, PROB_TOL};

/// A probability law with finitely many atoms.
///
/// Atoms are strictly increasing (at least `MERGE_TOL` apart once built
/// through [`DiscreteDistribution::new`]), probabilities are nonnegative and
/// sum to one. The cumulative probabilities are cached; the last one is
/// exactly `1.0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawDistribution", into = "RawDistribution"))]
pub struct DiscreteDistribution {
    atoms: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

/// Wire form `{"atoms": [...], "probs": [...]}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawDistribution {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
}

impl TryFrom<RawDistribution> for DiscreteDistribution {
    type Error = Error;

    fn try_from(raw: RawDistribution) -> Result<Self> {
        DiscreteDistribution::new(&raw.atoms, &raw.probs, MERGE_TOL)
    }
}

impl From<DiscreteDistribution> for RawDistribution {
    fn from(d: DiscreteDistribution) -> Self {
        RawDistribution { atoms: d.atoms, probs: d.probs }
    }
}

impl DiscreteDistribution {
    /// Builds a distribution from unsorted atoms and unnormalized masses.
    ///
    /// Atoms closer than `merge_tol` to the first atom of their group are
    /// coalesced onto that (smaller) atom, zero-mass atoms are dropped and
    /// the masses are renormalized.
    pub fn new(atoms: &[f64], probs: &[f64], merge_tol: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty);
        }
        if atoms.len() != probs.len() {
            return Err(Error::LengthMismatch { expected: atoms.len(), found: probs.len() });
        }
        if !merge_tol.is_finite() || merge_tol < 0.0 {
            return Err(Error::NonFinite);
        }
        for (i, (&z, &p)) in atoms.iter().zip(probs).enumerate() {
            if !z.is_finite() || !p.is_finite() {
                return Err(Error::NonFinite);
            }
            if p < 0.0 {
                return Err(Error::NegativeMass { index: i, value: p });
            }
        }
        let pairs = atoms.iter().copied().zip(probs.iter().copied()).collect();
        Self::from_pairs(pairs, merge_tol)
    }

    /// Point mass at `z`.
    pub fn point(z: f64) -> Self {
        Self { atoms: alloc::vec![z], probs: alloc::vec![1.0], cum: alloc::vec![1.0] }
    }

    /// Builds from `(atom, mass)` pairs that are already known to be finite
    /// and nonnegative.
    pub(crate) fn from_pairs(mut pairs: Vec<(f64, f64)>, merge_tol: f64) -> Result<Self> {
        // stable sort: inputs are usually concatenations of sorted runs
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::with_capacity(pairs.len());
        let mut masses: Vec<NeumaierSum> = Vec::with_capacity(pairs.len());
        for (z, p) in pairs {
            match atoms.last() {
                Some(&head) if z - head < merge_tol => masses.last_mut().unwrap().add(p),
                _ => {
                    atoms.push(z);
                    let mut s = NeumaierSum::new();
                    s.add(p);
                    masses.push(s);
                }
            }
        }
        let mut probs: Vec<f64> = masses.iter().map(NeumaierSum::value).collect();

        // drop atoms that carry no mass
        let mut keep = 0;
        for i in 0..atoms.len() {
            if probs[i] > 0.0 {
                atoms[keep] = atoms[i];
                probs[keep] = probs[i];
                keep += 1;
            }
        }
        if keep == 0 {
            return Err(Error::ZeroMass);
        }
        atoms.truncate(keep);
        probs.truncate(keep);

        let total = sum(probs.iter().copied());
        if !total.is_finite() {
            return Err(Error::NonFinite);
        }
        if (total - 1.0).abs() > 4.0 * f64::EPSILON {
            for p in &mut probs {
                *p /= total;
            }
        }
        Ok(Self::assemble(atoms, probs))
    }

    fn assemble(atoms: Vec<f64>, probs: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = NeumaierSum::new();
        for &p in &probs {
            acc.add(p);
            cum.push(acc.value().min(1.0));
        }
        *cum.last_mut().unwrap() = 1.0;
        Self { atoms, probs, cum }
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative probabilities `F(atoms[i])`; the last entry is `1.0`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn min_atom(&self) -> f64 {
        self.atoms[0]
    }

    pub fn max_atom(&self) -> f64 {
        *self.atoms.last().unwrap()
    }

    pub fn is_point_mass(&self) -> bool {
        self.atoms.len() == 1
    }

    /// `F(y) = P(Z <= y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        let k = self.atoms.partition_point(|&z| z <= y);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `inf { y : F(y) >= q }` for `q` in `(0, 1]`.
    pub fn inverse_cdf(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::QuantileOutOfRange(q));
        }
        let k = self.cum.partition_point(|&c| c < q);
        Ok(self.atoms[k.min(self.atoms.len() - 1)])
    }

    pub fn mean(&self) -> f64 {
        sum(self.iter().map(|(z, p)| z * p))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        sum(self.iter().map(|(z, p)| p * (z - m) * (z - m)))
    }

    /// Draws one atom by inverting the c.d.f. at a single uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // gen() is in [0, 1); flip it into (0, 1]
        let q = 1.0 - rng.gen::<f64>();
        let k = self.cum.partition_point(|&c| c < q);
        self.atoms[k.min(self.atoms.len() - 1)]
    }

    /// Law of `r + gamma * Z` for `gamma >= 0`.
    ///
    /// `gamma = 0` collapses to a point mass at `r`.
    pub fn scale_shift(&self, gamma: f64, r: f64) -> Result<Self> {
        if !gamma.is_finite() || !r.is_finite() {
            return Err(Error::NonFinite);
        }
        if gamma < 0.0 {
            return Err(Error::NegativeMass { index: 0, value: gamma });
        }
        if gamma == 0.0 {
            return Ok(Self::point(r));
        }
        if gamma == 1.0 && r == 0.0 {
            return Ok(self.clone());
        }
        self.affine(gamma, r)
    }

    /// Law of `shift + scale * Z` for any finite `scale`.
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Self> {
        if !scale.is_finite() || !shift.is_finite() {
            return Err(Error::NonFinite);
        }
        let pairs = self.iter().map(|(z, p)| (shift + scale * z, p)).collect();
        Self::from_pairs(pairs, MERGE_TOL)
    }

    /// Law of `A + B` for independent `A ~ self`, `B ~ other`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let mut pairs = Vec::with_capacity(self.len() * other.len());
        for (a, pa) in self.iter() {
            for (b, pb) in other.iter() {
                pairs.push((a + b, pa * pb));
            }
        }
        Self::from_pairs(pairs, MERGE_TOL)
    }

    /// Law of `A * B` for independent `A ~ self`, `B ~ other`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut pairs = Vec::with_capacity(self.len() * other.len());
        for (a, pa) in self.iter() {
            for (b, pb) in other.iter() {
                pairs.push((a * b, pa * pb));
            }
        }
        Self::from_pairs(pairs, MERGE_TOL)
    }

    /// `E|Z|^p` for finite `p`, or the largest `|z|` for `p = ∞`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.atoms.iter().fold(0.0_f64, |m, z| m.max(z.abs()))
        } else {
            sum(self.iter().map(|(z, w)| w * num_traits::Float::powf(z.abs(), p)))
        }
    }
}

/// Makes a distribution from atoms and masses; see [`DiscreteDistribution::new`].
pub fn make_discrete(atoms: &[f64], probs: &[f64], merge_tol: f64) -> Result<DiscreteDistribution> {
    DiscreteDistribution::new(atoms, probs, merge_tol)
}

/// Mixture `sum_k w_k D_k`, coalesced with `merge_tol`.
///
/// Weights must be nonnegative and sum to one within `PROB_TOL`.
pub fn mixture(components: &[(f64, &DiscreteDistribution)], merge_tol: f64) -> Result<DiscreteDistribution> {
    if components.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let mut total = NeumaierSum::new();
    for (i, &(w, _)) in components.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite);
        }
        if w < 0.0 {
            return Err(Error::NegativeMass { index: i, value: w });
        }
        total.add(w);
    }
    if (total.value() - 1.0).abs() > PROB_TOL {
        return Err(Error::WeightSum(total.value()));
    }
    let n: usize = components.iter().map(|(_, d)| d.len()).sum();
    let mut pairs = Vec::with_capacity(n);
    for &(w, d) in components {
        if w > 0.0 {
            pairs.extend(d.iter().map(|(z, p)| (z, w * p)));
        }
    }
    DiscreteDistribution::from_pairs(pairs, merge_tol)
}

/// Evenly spaced atoms `v_min + i * delta_z`, `0 <= i < n_atoms`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CategoricalSupport {
    v_min: f64,
    v_max: f64,
    n_atoms: usize,
}

impl CategoricalSupport {
    pub fn new(v_min: f64, v_max: f64, n_atoms: usize) -> Result<Self> {
        if !v_min.is_finite() || !v_max.is_finite() {
            return Err(Error::NonFinite);
        }
        if v_min >= v_max || n_atoms < 2 {
            return Err(Error::InvalidSupport);
        }
        Ok(Self { v_min, v_max, n_atoms })
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn delta_z(&self) -> f64 {
        (self.v_max - self.v_min) / (self.n_atoms - 1) as f64
    }

    /// The `i`-th atom; the endpoints are exactly `v_min` and `v_max`.
    pub fn atom(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_atoms);
        if i + 1 == self.n_atoms {
            self.v_max
        } else {
            self.v_min + i as f64 * self.delta_z()
        }
    }

    pub fn atoms(&self) -> Vec<f64> {
        (0..self.n_atoms).map(|i| self.atom(i)).collect()
    }

    pub fn clamp(&self, y: f64) -> f64 {
        y.clamp(self.v_min, self.v_max)
    }
}

/// A probability vector on a [`CategoricalSupport`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CategoricalDistribution {
    support: CategoricalSupport,
    probs: Vec<f64>,
}

impl CategoricalDistribution {
    /// Validates and renormalizes `probs`; the sum must already be within
    /// `PROB_TOL` of one.
    pub fn new(support: CategoricalSupport, mut probs: Vec<f64>) -> Result<Self> {
        if probs.len() != support.n_atoms() {
            return Err(Error::LengthMismatch { expected: support.n_atoms(), found: probs.len() });
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite);
            }
            if p < 0.0 {
                return Err(Error::NegativeMass { index: i, value: p });
            }
        }
        let total = sum(probs.iter().copied());
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::WeightSum(total));
        }
        if total != 1.0 {
            for p in &mut probs {
                *p /= total;
            }
        }
        Ok(Self { support, probs })
    }

    /// Skips validation; callers guarantee a normalized nonnegative vector.
    pub(crate) fn from_raw(support: CategoricalSupport, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), support.n_atoms());
        Self { support, probs }
    }

    /// Softmax of a logit row.
    pub fn softmax(support: CategoricalSupport, logits: &[f64]) -> Result<Self> {
        if logits.len() != support.n_atoms() {
            return Err(Error::LengthMismatch { expected: support.n_atoms(), found: logits.len() });
        }
        if logits.iter().any(|l| !l.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { support, probs: softmax(logits) })
    }

    pub fn support(&self) -> &CategoricalSupport {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub fn mean(&self) -> f64 {
        sum(self.probs.iter().enumerate().map(|(i, p)| p * self.support.atom(i)))
    }

    /// The same law as a [`DiscreteDistribution`] (zero-mass atoms dropped).
    pub fn to_discrete(&self) -> DiscreteDistribution {
        let mut atoms = Vec::with_capacity(self.probs.len());
        let mut probs = Vec::with_capacity(self.probs.len());
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                atoms.push(self.support.atom(i));
                probs.push(p);
            }
        }
        let total = sum(probs.iter().copied());
        if (total - 1.0).abs() > 4.0 * f64::EPSILON {
            for p in &mut probs {
                *p /= total;
            }
        }
        DiscreteDistribution::assemble(atoms, probs)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| num_traits::Float::exp(l - max)).collect();
    let total = sum(out.iter().copied());
    for p in &mut out {
        *p /= total;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn d(atoms: &[f64], probs: &[f64]) -> DiscreteDistribution {
        DiscreteDistribution::new(atoms, probs, MERGE_TOL).unwrap()
    }

    #[test]
    fn sorts_atoms() {
        let x = d(&[1.0, 0.0], &[0.5, 0.5]);
        assert_eq!(x.atoms(), &[0.0, 1.0]);
        assert_eq!(x.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn coalesces_duplicates() {
        let x = d(&[0.0, 0.0, 1.0], &[0.25, 0.25, 0.5]);
        assert_eq!(x.atoms(), &[0.0, 1.0]);
        assert_eq!(x.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn coalescing_keeps_smaller_atom() {
        let x = DiscreteDistribution::new(&[1.0 + 1e-13, 1.0], &[0.5, 0.5], MERGE_TOL).unwrap();
        assert_eq!(x.atoms(), &[1.0]);
    }

    #[test]
    fn normalizes_point_mass() {
        let x = d(&[2.0], &[3.0]);
        assert_eq!(x.atoms(), &[2.0]);
        assert_eq!(x.probs(), &[1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(DiscreteDistribution::new(&[], &[], MERGE_TOL), Err(Error::Empty));
        assert!(matches!(
            DiscreteDistribution::new(&[0.0, 1.0], &[0.5, -0.5], MERGE_TOL),
            Err(Error::NegativeMass { index: 1, .. })
        ));
        assert_eq!(DiscreteDistribution::new(&[0.0, 1.0], &[0.0, 0.0], MERGE_TOL), Err(Error::ZeroMass));
        assert!(matches!(
            DiscreteDistribution::new(&[0.0], &[0.5, 0.5], MERGE_TOL),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(DiscreteDistribution::new(&[f64::NAN], &[1.0], MERGE_TOL), Err(Error::NonFinite));
    }

    #[test]
    fn inverse_cdf_examples() {
        assert_eq!(DiscreteDistribution::point(5.0).inverse_cdf(0.7).unwrap(), 5.0);
        let x = d(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(x.inverse_cdf(0.5).unwrap(), 0.0);
        assert_eq!(x.inverse_cdf(0.500001).unwrap(), 1.0);
        let y = d(&[-1.0, 1.0], &[0.25, 0.75]);
        assert_eq!(y.inverse_cdf(0.25).unwrap(), -1.0);
        assert_eq!(y.inverse_cdf(1.0).unwrap(), 1.0);
        assert!(matches!(x.inverse_cdf(0.0), Err(Error::QuantileOutOfRange(_))));
        assert!(matches!(x.inverse_cdf(1.5), Err(Error::QuantileOutOfRange(_))));
    }

    #[test]
    fn scale_shift_examples() {
        let p = DiscreteDistribution::point(1.0).scale_shift(0.5, 2.0).unwrap();
        assert_eq!(p.atoms(), &[2.5]);
        let t = d(&[0.0, 1.0], &[0.5, 0.5]).scale_shift(0.0, 3.0).unwrap();
        assert_eq!((t.atoms(), t.probs()), (&[3.0][..], &[1.0][..]));
        let s = d(&[-1.0, 1.0], &[0.5, 0.5]).scale_shift(0.9, 0.1).unwrap();
        assert!((s.atoms()[0] + 0.8).abs() < 1e-15);
        assert!((s.atoms()[1] - 1.0).abs() < 1e-15);
        assert_eq!(s.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn mixture_examples() {
        let a = d(&[0.0, 3.0], &[0.2, 0.8]);
        assert_eq!(mixture(&[(1.0, &a)], MERGE_TOL).unwrap(), a);

        let zero = DiscreteDistribution::point(0.0);
        let one = DiscreteDistribution::point(1.0);
        let m = mixture(&[(0.5, &zero), (0.5, &one)], MERGE_TOL).unwrap();
        assert_eq!((m.atoms(), m.probs()), (&[0.0, 1.0][..], &[0.5, 0.5][..]));

        let two = DiscreteDistribution::point(2.0);
        let c = mixture(&[(0.3, &two), (0.7, &two)], MERGE_TOL).unwrap();
        assert_eq!((c.atoms(), c.probs()), (&[2.0][..], &[1.0][..]));

        assert_eq!(mixture(&[], MERGE_TOL), Err(Error::EmptyMixture));
        assert!(matches!(mixture(&[(-0.5, &two), (1.5, &one)], MERGE_TOL), Err(Error::NegativeMass { .. })));
        assert!(matches!(mixture(&[(0.5, &two)], MERGE_TOL), Err(Error::WeightSum(_))));
    }

    #[test]
    fn moments() {
        let x = d(&[-1.0, 1.0], &[0.5, 0.5]);
        assert_eq!((x.mean(), x.variance()), (0.0, 1.0));
        let p = DiscreteDistribution::point(7.0);
        assert_eq!((p.mean(), p.variance()), (7.0, 0.0));
        let b = d(&[0.0, 1.0], &[0.25, 0.75]);
        assert!((b.mean() - 0.75).abs() < 1e-15);
        assert!((b.variance() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn empirical_law_matches() {
        let x = d(&[-2.0, 0.5, 1.0, 4.0], &[0.1, 0.4, 0.3, 0.2]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| x.sample(&mut rng)).collect();
        let ones = vec![1.0; n];
        let emp = DiscreteDistribution::new(&samples, &ones, MERGE_TOL).unwrap();
        let k = x
            .atoms()
            .iter()
            .map(|&z| (emp.cdf(z) - x.cdf(z)).abs())
            .fold(0.0, f64::max);
        assert!(k < 0.01, "kolmogorov {k}");
    }

    #[test]
    fn categorical_support_endpoints() {
        let s = CategoricalSupport::new(-100.0, -1.0, 51).unwrap();
        assert_eq!(s.atom(0), -100.0);
        assert_eq!(s.atom(50), -1.0);
        assert!((s.delta_z() - 99.0 / 50.0).abs() < 1e-15);
        assert_eq!(CategoricalSupport::new(1.0, 1.0, 3), Err(Error::InvalidSupport));
        assert_eq!(CategoricalSupport::new(0.0, 1.0, 1), Err(Error::InvalidSupport));
    }

    #[test]
    fn categorical_to_discrete_drops_zeros() {
        let s = CategoricalSupport::new(0.0, 2.0, 3).unwrap();
        let c = CategoricalDistribution::new(s, vec![0.6, 0.4, 0.0]).unwrap();
        let x = c.to_discrete();
        assert_eq!(x.atoms(), &[0.0, 1.0]);
        assert!((c.mean() - 0.4).abs() < 1e-15);
    }

    fn arb_dist() -> impl Strategy<Value = DiscreteDistribution> {
        prop::collection::vec((-10.0..10.0f64, 0.01..1.0f64), 1..8).prop_map(|v| {
            let (a, p): (Vec<f64>, Vec<f64>) = v.into_iter().unzip();
            DiscreteDistribution::new(&a, &p, MERGE_TOL).unwrap()
        })
    }

    proptest! {
        #[test]
        fn construction_is_idempotent(x in arb_dist()) {
            let y = DiscreteDistribution::new(x.atoms(), x.probs(), MERGE_TOL).unwrap();
            prop_assert_eq!(y, x);
        }

        #[test]
        fn identity_scale_shift(x in arb_dist()) {
            prop_assert_eq!(x.scale_shift(1.0, 0.0).unwrap(), x);
        }

        #[test]
        fn scale_shift_mean(x in arb_dist(), g in 0.0..1.0f64, r in -5.0..5.0f64) {
            let y = x.scale_shift(g, r).unwrap();
            prop_assert!((y.mean() - (r + g * x.mean())).abs() < 1e-12);
        }

        #[test]
        fn mixture_mean_is_linear(a in arb_dist(), b in arb_dist(), c in arb_dist(), w in prop::array::uniform3(0.01..1.0f64)) {
            let t: f64 = w.iter().sum();
            let w = [w[0] / t, w[1] / t, 1.0 - w[0] / t - w[1] / t];
            let m = mixture(&[(w[0], &a), (w[1], &b), (w[2], &c)], MERGE_TOL).unwrap();
            let expect = w[0] * a.mean() + w[1] * b.mean() + w[2] * c.mean();
            prop_assert!((m.mean() - expect).abs() < 1e-12);
        }

        #[test]
        fn valid_after_construction(x in arb_dist()) {
            prop_assert!(x.atoms().windows(2).all(|w| w[0] < w[1]));
            let s: f64 = x.probs().iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
            prop_assert_eq!(*x.cumulative().last().unwrap(), 1.0);
        }
    }
}
