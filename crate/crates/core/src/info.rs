//! Plug-in estimation of discrete distributions and the Shannon functionals built on them.
//!
//! Counts are accumulated as integers in [`Histogram`] / [`JointHistogram`] and only turned
//! into probabilities when a [`Pmf`] or [`JointPmf`] is formed. All logarithms are base 2.
//! No bias correction is applied.

use std::collections::BTreeMap;
use std::fmt::Debug;

use thiserror::Error;

use crate::scalar::{ordered_sum, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InfoError {
    #[error("cannot estimate a distribution from an empty sample")]
    EmptySample,
    #[error("probability for entry {index} is not strictly positive")]
    NonPositiveProbability { index: usize },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("duplicate symbol in support at entry {index}")]
    DuplicateSymbol { index: usize },
}

/// Alphabet element of a distribution. Any totally ordered value works.
pub trait Symbol: Ord + Clone + Debug {}
impl<S: Ord + Clone + Debug> Symbol for S {}

/// Integer occurrence counts over a symbol alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram<S: Symbol> {
    counts: BTreeMap<S, u64>,
    total: u64,
}

impl<S: Symbol> Default for Histogram<S> {
    fn default() -> Self {
        Self { counts: BTreeMap::new(), total: 0 }
    }
}

impl<S: Symbol> Histogram<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, symbol: S) {
        self.add_n(symbol, 1);
    }

    pub fn add_n(&mut self, symbol: S, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(symbol).or_insert(0) += n;
        self.total += n;
    }

    /// Folds another partial histogram into this one. Merging is associative and commutative.
    pub fn merge(&mut self, other: &Histogram<S>) {
        for (s, &c) in &other.counts {
            self.add_n(s.clone(), c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, symbol: &S) -> u64 {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, u64)> {
        self.counts.iter().map(|(s, &c)| (s, c))
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn to_pmf<T: Scalar>(&self) -> Result<Pmf<T, S>, InfoError> {
        if self.total == 0 {
            return Err(InfoError::EmptySample);
        }
        let total = T::from_count(self.total);
        let (support, probs) = self
            .counts
            .iter()
            .map(|(s, &c)| (s.clone(), T::from_count(c) / total))
            .unzip();
        Ok(Pmf { support, probs })
    }
}

impl<S: Symbol> FromIterator<S> for Histogram<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut h = Histogram::new();
        for s in iter {
            h.add(s);
        }
        h
    }
}

/// Integer occurrence counts over pairs of symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointHistogram<A: Symbol, B: Symbol> {
    counts: BTreeMap<(A, B), u64>,
    total: u64,
}

impl<A: Symbol, B: Symbol> Default for JointHistogram<A, B> {
    fn default() -> Self {
        Self { counts: BTreeMap::new(), total: 0 }
    }
}

impl<A: Symbol, B: Symbol> JointHistogram<A, B> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, a: A, b: B) {
        self.add_n(a, b, 1);
    }

    pub fn add_n(&mut self, a: A, b: B, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry((a, b)).or_insert(0) += n;
        self.total += n;
    }

    pub fn merge(&mut self, other: &JointHistogram<A, B>) {
        for ((a, b), &c) in &other.counts {
            self.add_n(a.clone(), b.clone(), c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, a: &A, b: &B) -> u64 {
        // BTreeMap lookup needs an owned key
        self.counts.get(&(a.clone(), b.clone())).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(A, B), u64)> {
        self.counts.iter().map(|(k, &c)| (k, c))
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn first_marginal(&self) -> Histogram<A> {
        let mut h = Histogram::new();
        for ((a, _), &c) in &self.counts {
            h.add_n(a.clone(), c);
        }
        h
    }

    pub fn second_marginal(&self) -> Histogram<B> {
        let mut h = Histogram::new();
        for ((_, b), &c) in &self.counts {
            h.add_n(b.clone(), c);
        }
        h
    }

    /// Applies a relabeling to each coordinate. Non-injective maps merge cells.
    pub fn map_symbols<C: Symbol, D: Symbol>(
        &self,
        mut first: impl FnMut(&A) -> C,
        mut second: impl FnMut(&B) -> D,
    ) -> JointHistogram<C, D> {
        let mut out = JointHistogram::new();
        for ((a, b), &c) in &self.counts {
            out.add_n(first(a), second(b), c);
        }
        out
    }

    pub fn to_pmf<T: Scalar>(&self) -> Result<JointPmf<T, A, B>, InfoError> {
        if self.total == 0 {
            return Err(InfoError::EmptySample);
        }
        let total = T::from_count(self.total);
        let (support, probs) = self
            .counts
            .iter()
            .map(|(k, &c)| (k.clone(), T::from_count(c) / total))
            .unzip();
        Ok(JointPmf { support, probs })
    }
}

impl<A: Symbol, B: Symbol> FromIterator<(A, B)> for JointHistogram<A, B> {
    fn from_iter<I: IntoIterator<Item = (A, B)>>(iter: I) -> Self {
        let mut h = JointHistogram::new();
        for (a, b) in iter {
            h.add(a, b);
        }
        h
    }
}

/// Probability mass function over a sorted support. Zero-mass symbols are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T, S = i64> {
    support: Vec<S>,
    probs: Vec<T>,
}

impl<T: Scalar, S: Symbol> Pmf<T, S> {
    /// Builds a pmf from explicit `(symbol, probability)` entries.
    pub fn from_probs(entries: impl IntoIterator<Item = (S, T)>) -> Result<Self, InfoError> {
        let mut entries: Vec<(S, T)> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(InfoError::EmptySample);
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for (i, w) in entries.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(InfoError::DuplicateSymbol { index: i + 1 });
            }
        }
        check_probs(entries.iter().map(|(_, p)| *p))?;
        let (support, probs) = entries.into_iter().unzip();
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[S] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob(&self, symbol: &S) -> T {
        match self.support.binary_search(symbol) {
            Ok(i) => self.probs[i],
            Err(_) => T::zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, T)> {
        self.support.iter().zip(self.probs.iter().copied())
    }
}

/// Joint probability mass function over sorted symbol pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T, A = i64, B = i64> {
    support: Vec<(A, B)>,
    probs: Vec<T>,
}

impl<T: Scalar, A: Symbol, B: Symbol> JointPmf<T, A, B> {
    pub fn from_probs(entries: impl IntoIterator<Item = ((A, B), T)>) -> Result<Self, InfoError> {
        let mut entries: Vec<((A, B), T)> = entries.into_iter().collect();
        if entries.is_empty() {
            return Err(InfoError::EmptySample);
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for (i, w) in entries.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(InfoError::DuplicateSymbol { index: i + 1 });
            }
        }
        check_probs(entries.iter().map(|(_, p)| *p))?;
        let (support, probs) = entries.into_iter().unzip();
        Ok(Self { support, probs })
    }

    pub fn support(&self) -> &[(A, B)] {
        &self.support
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(A, B), T)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    pub fn first_marginal(&self) -> Pmf<T, A> {
        let mut acc: BTreeMap<A, T> = BTreeMap::new();
        for ((a, _), p) in self.iter() {
            let slot = acc.entry(a.clone()).or_insert_with(T::zero);
            *slot = *slot + p;
        }
        let (support, probs) = acc.into_iter().unzip();
        Pmf { support, probs }
    }

    pub fn second_marginal(&self) -> Pmf<T, B> {
        let mut acc: BTreeMap<B, T> = BTreeMap::new();
        for ((_, b), p) in self.iter() {
            let slot = acc.entry(b.clone()).or_insert_with(T::zero);
            *slot = *slot + p;
        }
        let (support, probs) = acc.into_iter().unzip();
        Pmf { support, probs }
    }

    /// The same distribution with the coordinates exchanged.
    pub fn swapped(&self) -> JointPmf<T, B, A> {
        let mut entries: Vec<((B, A), T)> = self
            .iter()
            .map(|((a, b), p)| ((b.clone(), a.clone()), p))
            .collect();
        entries.sort_by(|x, y| x.0.cmp(&y.0));
        let (support, probs) = entries.into_iter().unzip();
        JointPmf { support, probs }
    }
}

fn check_probs<T: Scalar>(probs: impl Iterator<Item = T>) -> Result<(), InfoError> {
    let mut terms = Vec::new();
    for (index, p) in probs.enumerate() {
        if !(p > T::zero()) {
            return Err(InfoError::NonPositiveProbability { index });
        }
        terms.push(p);
    }
    let n = terms.len();
    let sum = ordered_sum(terms);
    if (sum - T::one()).abs() > T::normalization_tolerance(n) {
        return Err(InfoError::NotNormalized { sum: sum.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(())
}

/// Empirical (maximum-likelihood) pmf of a symbol stream.
pub fn estimate_pmf<T: Scalar, S: Symbol>(
    symbols: impl IntoIterator<Item = S>,
) -> Result<Pmf<T, S>, InfoError> {
    symbols.into_iter().collect::<Histogram<S>>().to_pmf()
}

/// Empirical joint pmf of a stream of symbol pairs.
pub fn joint_from_pairs<T: Scalar, A: Symbol, B: Symbol>(
    pairs: impl IntoIterator<Item = (A, B)>,
) -> Result<JointPmf<T, A, B>, InfoError> {
    pairs.into_iter().collect::<JointHistogram<A, B>>().to_pmf()
}

/// Shannon entropy in bits.
pub fn entropy<T: Scalar, S: Symbol>(pmf: &Pmf<T, S>) -> T {
    let terms = pmf.probs.iter().map(|&p| -(p * p.log2())).collect();
    clamp_negative_zero(ordered_sum(terms))
}

/// `H(X | Z)` in bits, where X is the first coordinate and Z the second.
pub fn conditional_entropy<T: Scalar, A: Symbol, B: Symbol>(joint: &JointPmf<T, A, B>) -> T {
    let cond = joint.second_marginal();
    let terms = joint
        .iter()
        .map(|((_, z), p)| p * (cond.prob(z) / p).log2())
        .collect();
    clamp_negative_zero(ordered_sum(terms))
}

/// `I(X; Z)` in bits.
pub fn mutual_information<T: Scalar, A: Symbol, B: Symbol>(joint: &JointPmf<T, A, B>) -> T {
    let px = joint.first_marginal();
    let pz = joint.second_marginal();
    let terms = joint
        .iter()
        .map(|((x, z), p)| p * (p / (px.prob(x) * pz.prob(z))).log2())
        .collect();
    ordered_sum(terms)
}

// -0.0 shows up for degenerate distributions and prints badly
fn clamp_negative_zero<T: Scalar>(v: T) -> T {
    if v == T::zero() {
        T::zero()
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn joint_4cell() -> JointPmf<f64, i64, i64> {
        JointPmf::from_probs([((0, 0), 0.4), ((0, 1), 0.1), ((1, 0), 0.1), ((1, 1), 0.4)]).unwrap()
    }

    // Straight evaluation of -sum p log2 p for the known-value examples.
    fn closed_form_entropy(ps: &[f64]) -> f64 {
        ps.iter().map(|p| -p * p.log2()).sum()
    }

    #[test]
    fn estimate_pmf_examples() {
        let p: Pmf<f64> = estimate_pmf([0i64, 0, 0, 0]).unwrap();
        assert_eq!(p.support(), &[0]);
        assert_eq!(p.probs(), &[1.0]);

        let p: Pmf<f64> = estimate_pmf([0i64, 1, 0, 1]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5]);

        let p: Pmf<f64> = estimate_pmf([0i64, 0, 0, 1]).unwrap();
        assert_eq!(p.support(), &[0, 1]);
        assert_eq!(p.probs(), &[0.75, 0.25]);
    }

    #[test]
    fn estimate_pmf_rejects_empty() {
        let r: Result<Pmf<f64>, _> = estimate_pmf(Vec::<i64>::new());
        assert_eq!(r.unwrap_err(), InfoError::EmptySample);
        let r: Result<JointPmf<f64>, _> = joint_from_pairs(Vec::<(i64, i64)>::new());
        assert_eq!(r.unwrap_err(), InfoError::EmptySample);
    }

    #[test]
    fn entropy_examples() {
        let p = Pmf::from_probs([(0i64, 1.0f64)]).unwrap();
        assert_eq!(entropy(&p), 0.0);
        let p = Pmf::from_probs([(0i64, 0.5f64), (1, 0.5)]).unwrap();
        assert!((entropy(&p) - 1.0).abs() < 1e-12);
        let p = Pmf::from_probs([(0i64, 0.75f64), (1, 0.25)]).unwrap();
        let oracle = closed_form_entropy(&[0.75, 0.25]);
        assert!((oracle - 0.8112781).abs() < 1e-6);
        assert!((entropy(&p) - oracle).abs() < 1e-12);
    }

    #[test]
    fn entropy_in_single_precision() {
        let p = Pmf::from_probs([(0i64, 0.75f32), (1, 0.25)]).unwrap();
        assert!((entropy(&p) - 0.8112781f32).abs() < 1e-6);
    }

    #[test]
    fn conditional_entropy_examples() {
        let diag: JointPmf<f64> = joint_from_pairs([(0i64, 0i64), (1, 1), (0, 0), (1, 1)]).unwrap();
        assert_eq!(conditional_entropy(&diag), 0.0);

        let indep = JointPmf::from_probs([((0i64, 0i64), 0.25f64), ((0, 1), 0.25), ((1, 0), 0.25), ((1, 1), 0.25)]).unwrap();
        assert!((conditional_entropy(&indep) - 1.0).abs() < 1e-12);

        // brute force over the four cells with P(z) = 0.5 for both columns
        let oracle: f64 = [0.4f64, 0.1, 0.1, 0.4].iter().map(|p| p * (0.5 / p).log2()).sum();
        assert!((oracle - 0.7219281).abs() < 1e-6);
        assert!((conditional_entropy(&joint_4cell()) - oracle).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = JointPmf::from_probs([((0i64, 0i64), 0.25f64), ((0, 1), 0.25), ((1, 0), 0.25), ((1, 1), 0.25)]).unwrap();
        assert_eq!(mutual_information(&indep), 0.0);

        let same: JointPmf<f64> = joint_from_pairs([(0i64, 0i64), (1, 1)]).unwrap();
        assert!((mutual_information(&same) - 1.0).abs() < 1e-12);

        let chain = 1.0 - 0.7219280948873623;
        assert!((mutual_information(&joint_4cell()) - chain).abs() < 1e-9);
        assert!((mutual_information(&joint_4cell()) - 0.2780719).abs() < 1e-6);
    }

    #[test]
    fn joint_from_pairs_examples() {
        let j: JointPmf<f64> = joint_from_pairs([(0i64, 0i64), (0, 0)]).unwrap();
        assert_eq!(j.support(), &[(0, 0)]);
        assert_eq!(j.probs(), &[1.0]);

        let j: JointPmf<f64> = joint_from_pairs([(0i64, 1i64), (1, 0)]).unwrap();
        assert_eq!(j.support(), &[(0, 1), (1, 0)]);
        assert_eq!(j.probs(), &[0.5, 0.5]);

        let j: JointPmf<f64> = joint_from_pairs([(0i64, 0i64), (0, 1), (1, 1), (1, 1)]).unwrap();
        assert_eq!(j.support(), &[(0, 0), (0, 1), (1, 1)]);
        assert_eq!(j.probs(), &[0.25, 0.25, 0.5]);
    }

    #[test]
    fn from_probs_validation() {
        assert!(matches!(
            Pmf::from_probs([(0i64, 0.5f64), (1, 0.4)]),
            Err(InfoError::NotNormalized { .. })
        ));
        assert!(matches!(
            Pmf::from_probs([(0i64, 1.0f64), (1, 0.0)]),
            Err(InfoError::NonPositiveProbability { index: 1 })
        ));
        assert!(matches!(
            Pmf::from_probs([(0i64, 0.5f64), (0, 0.5)]),
            Err(InfoError::DuplicateSymbol { .. })
        ));
    }

    #[test]
    fn histogram_merge_matches_single_pass() {
        let data = [3i64, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5];
        let whole: Histogram<i64> = data.iter().copied().collect();
        let mut left: Histogram<i64> = data[..4].iter().copied().collect();
        let right: Histogram<i64> = data[4..].iter().copied().collect();
        left.merge(&right);
        assert_eq!(left, whole);
    }

    // Nested-loop counting, independent of the BTreeMap path.
    fn naive_counts(symbols: &[u8]) -> Vec<(u8, u64)> {
        let mut out = Vec::new();
        for s in 0..8u8 {
            let mut c = 0;
            for &x in symbols {
                if x == s {
                    c += 1;
                }
            }
            if c > 0 {
                out.push((s, c));
            }
        }
        out
    }

    fn pairs_strategy() -> impl Strategy<Value = Vec<(u8, u8)>> {
        prop::collection::vec((0u8..5, 0u8..6), 1..300)
    }

    proptest! {
        #[test]
        fn streaming_counts_match_naive(symbols in prop::collection::vec(0u8..8, 1..1000)) {
            let h: Histogram<u8> = symbols.iter().copied().collect();
            let streamed: Vec<(u8, u64)> = h.iter().map(|(s, c)| (*s, c)).collect();
            prop_assert_eq!(streamed, naive_counts(&symbols));
        }

        #[test]
        fn conditional_entropy_bounded(pairs in pairs_strategy()) {
            let j: JointPmf<f64, u8, u8> = joint_from_pairs(pairs).unwrap();
            let h = conditional_entropy(&j);
            prop_assert!(h >= 0.0);
            prop_assert!(h <= entropy(&j.first_marginal()) + 1e-9);
        }

        #[test]
        fn chain_rule_and_symmetry(pairs in pairs_strategy()) {
            let j: JointPmf<f64, u8, u8> = joint_from_pairs(pairs).unwrap();
            let hx = entropy(&j.first_marginal());
            let hz = entropy(&j.second_marginal());
            let mi = mutual_information(&j);
            prop_assert!((hx - mi - conditional_entropy(&j)).abs() < 1e-9);
            prop_assert_eq!(mi, mutual_information(&j.swapped()));
            prop_assert!(mi >= -1e-12);
            prop_assert!(mi <= hx.min(hz) + 1e-9);
        }

        #[test]
        fn relabeling_invariance(pairs in pairs_strategy(), shift in 1i64..50) {
            let j: JointHistogram<u8, u8> = pairs.into_iter().collect();
            // injective, order reversing on the first coordinate
            let r = j.map_symbols(|a| -(*a as i64) * 7 + shift, |b| (*b as i64) * 3 - shift);
            let (jp, rp): (JointPmf<f64, u8, u8>, JointPmf<f64, i64, i64>) =
                (j.to_pmf().unwrap(), r.to_pmf().unwrap());
            prop_assert!((conditional_entropy(&jp) - conditional_entropy(&rp)).abs() < 1e-12);
            prop_assert!((mutual_information(&jp) - mutual_information(&rp)).abs() < 1e-12);
            prop_assert!((entropy(&jp.first_marginal()) - entropy(&rp.first_marginal())).abs() < 1e-12);
        }

        #[test]
        fn marginals_match_coordinate_streams(pairs in pairs_strategy()) {
            let j: JointPmf<f64, u8, u8> = joint_from_pairs(pairs.clone()).unwrap();
            let px: Pmf<f64, u8> = estimate_pmf(pairs.iter().map(|p| p.0)).unwrap();
            let pz: Pmf<f64, u8> = estimate_pmf(pairs.iter().map(|p| p.1)).unwrap();
            let mx = j.first_marginal();
            prop_assert_eq!(mx.support(), px.support());
            for (a, b) in mx.probs().iter().zip(px.probs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let mz = j.second_marginal();
            prop_assert_eq!(mz.support(), pz.support());
        }
    }
}
