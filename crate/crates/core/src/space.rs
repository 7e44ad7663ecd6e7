//! Finite probability spaces with uniform measure, observables on them, and
//! the distributions and couplings those observables push forward to.
//!
//! Two views coexist. Count views ([`Dist`], [`PairCounts`]) hold integers
//! over a common denominator and are exact by construction. The scalar view
//! ([`Coupling`]) is generic over [`Scalar`] and is what targets, errors and
//! bounds are expressed in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::line::LineBijection;
use crate::perm::Permutation;
use crate::scalar::{max_abs_diff, Scalar};

/// `{0..n-1}` with the uniform probability measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    n: usize,
}

impl FiniteSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape("a finite space needs at least one point".into()));
        }
        Ok(Self { n })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Measure of a set with `count` points.
    pub fn measure<S: Scalar>(&self, count: usize) -> S {
        S::from_count(count as u64, self.n as u64)
    }
}

/// A labeling of `{0..n-1}` by the dense alphabet `{0..alphabet-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observable {
    labels: Vec<usize>,
    alphabet: usize,
}

impl Observable {
    pub fn new(labels: Vec<usize>, alphabet: usize) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::Observable("alphabet must be nonempty".into()));
        }
        if let Some((x, &a)) = labels.iter().enumerate().find(|(_, &a)| a >= alphabet) {
            return Err(Error::Observable(format!(
                "label {a} at point {x} is outside alphabet of size {alphabet}"
            )));
        }
        Ok(Self { labels, alphabet })
    }

    /// Alphabet sized to the largest label present.
    pub fn from_labels(labels: Vec<usize>) -> Self {
        let alphabet = labels.iter().max().map_or(1, |m| m + 1);
        Self { labels, alphabet }
    }

    pub fn constant(n: usize) -> Self {
        Self { labels: vec![0; n], alphabet: 1 }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x]
    }

    /// Points of each atom, ascending.
    pub fn atoms(&self) -> Vec<Vec<usize>> {
        let mut atoms = vec![Vec::new(); self.alphabet];
        for (x, &a) in self.labels.iter().enumerate() {
            atoms[a].push(x);
        }
        atoms
    }

    /// Relabel onto the symbols that actually occur, keeping their order.
    /// Returns the restricted observable and, for each new symbol, the old one.
    pub fn essential_range(&self) -> (Observable, Vec<usize>) {
        let mut used = vec![false; self.alphabet];
        for &a in &self.labels {
            used[a] = true;
        }
        let old_of_new: Vec<usize> = (0..self.alphabet).filter(|&a| used[a]).collect();
        let mut new_of_old = vec![usize::MAX; self.alphabet];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old] = new;
        }
        let labels = self.labels.iter().map(|&a| new_of_old[a]).collect();
        let alphabet = old_of_new.len().max(1);
        (Observable { labels, alphabet }, old_of_new)
    }

    /// The labeling `x -> self(t(x))`.
    pub fn pull_back(&self, t: &Permutation) -> Observable {
        let labels = (0..self.len()).map(|x| self.labels[t[x]]).collect();
        Observable { labels, alphabet: self.alphabet }
    }
}

/// A distribution on the alphabet stored as integer counts over `denom`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dist {
    counts: Vec<u64>,
    denom: u64,
}

impl Dist {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let denom: u64 = counts.iter().sum();
        if counts.is_empty() || denom == 0 {
            return Err(Error::Shape("a distribution needs positive total mass".into()));
        }
        Ok(Self { counts, denom })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    pub fn prob<S: Scalar>(&self, a: usize) -> S {
        S::from_count(self.counts[a], self.denom)
    }

    pub fn probs<S: Scalar>(&self) -> Vec<S> {
        (0..self.counts.len()).map(|a| self.prob(a)).collect()
    }

    pub fn min_count(&self) -> u64 {
        self.counts.iter().copied().min().unwrap_or(0)
    }
}

/// A coupling in count view: `counts[a * k + b] / denom`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PairCounts {
    k: usize,
    counts: Vec<u64>,
    denom: u64,
}

impl PairCounts {
    pub fn new(k: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != k * k {
            return Err(Error::Shape(format!("expected {} pair counts, got {}", k * k, counts.len())));
        }
        let denom = counts.iter().sum();
        Ok(Self { k, counts, denom })
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn denom(&self) -> u64 {
        self.denom
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[a * self.k + b]
    }

    pub fn row_counts(&self) -> Vec<u64> {
        self.counts.chunks(self.k).map(|r| r.iter().sum()).collect()
    }

    pub fn col_counts(&self) -> Vec<u64> {
        let mut c = vec![0; self.k];
        for row in self.counts.chunks(self.k) {
            for (acc, &v) in c.iter_mut().zip(row) {
                *acc += v;
            }
        }
        c
    }

    /// Real view. An empty count table (no pairs) maps to the zero matrix.
    pub fn to_coupling<S: Scalar>(&self) -> Coupling<S> {
        let entries = if self.denom == 0 {
            vec![S::zero(); self.counts.len()]
        } else {
            self.counts.iter().map(|&c| S::from_count(c, self.denom)).collect()
        };
        Coupling { k: self.k, entries }
    }
}

/// A probability matrix on `A × A`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling<S> {
    k: usize,
    entries: Vec<S>,
}

impl<S: Scalar> Coupling<S> {
    /// Validates shape, nonnegativity and total mass one.
    pub fn new(k: usize, entries: Vec<S>) -> Result<Self> {
        if k == 0 || entries.len() != k * k {
            return Err(Error::Shape(format!("a {k}x{k} coupling needs {} entries, got {}", k * k, entries.len())));
        }
        if let Some(e) = entries.iter().find(|e| e.is_negative()) {
            return Err(Error::Coupling(format!("negative entry {e}")));
        }
        let total = entries.iter().cloned().fold(S::zero(), |a, b| a + b);
        if !total.close_to(&S::one(), entries.len()) {
            return Err(Error::Coupling(format!("entries sum to {total}, not 1")));
        }
        Ok(Self { k, entries })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Shape("coupling rows must form a square matrix".into()));
        }
        Self::new(k, rows.into_iter().flatten().collect())
    }

    /// The diagonal (identity) self-coupling of `pi`.
    pub fn diagonal(pi: &Dist) -> Self {
        let k = pi.alphabet_size();
        let mut entries = vec![S::zero(); k * k];
        for a in 0..k {
            entries[a * k + a] = pi.prob(a);
        }
        Self { k, entries }
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn get(&self, a: usize, b: usize) -> &S {
        &self.entries[a * self.k + b]
    }

    pub fn row_margin(&self) -> Vec<S> {
        self.entries
            .chunks(self.k)
            .map(|r| r.iter().cloned().fold(S::zero(), |a, b| a + b))
            .collect()
    }

    pub fn col_margin(&self) -> Vec<S> {
        let mut c = vec![S::zero(); self.k];
        for row in self.entries.chunks(self.k) {
            for (acc, v) in c.iter_mut().zip(row) {
                *acc = acc.clone() + v.clone();
            }
        }
        c
    }

    pub fn min_entry(&self) -> S {
        self.entries
            .iter()
            .cloned()
            .reduce(|a, b| if b < a { b } else { a })
            .unwrap_or_else(S::zero)
    }

    /// Largest ℓ∞ distance from either margin to `pi`.
    pub fn margin_gap(&self, pi: &[S]) -> Result<S> {
        let r = max_abs_diff(&self.row_margin(), pi);
        let c = max_abs_diff(&self.col_margin(), pi);
        match (r, c) {
            (Some(r), Some(c)) => Ok(if c > r { c } else { r }),
            _ => Err(Error::Shape(format!(
                "coupling over {} symbols vs distribution over {}",
                self.k,
                pi.len()
            ))),
        }
    }
}

/// `π(a) = #{x: φ(x) = a} / n`.
pub fn empirical_distribution(phi: &Observable) -> Dist {
    let mut counts = vec![0u64; phi.alphabet_size()];
    for &a in phi.labels() {
        counts[a] += 1;
    }
    let denom = phi.len() as u64;
    Dist { counts, denom }
}

/// Distribution of `(φ(i), φ(σ(i)))` over the `N - 1` edges of a line bijection.
pub fn empirical_pair_distribution(phi: &Observable, sigma: &LineBijection) -> Result<PairCounts> {
    if sigma.len() != phi.len() {
        return Err(Error::Shape(format!(
            "line bijection on {} points vs observable on {}",
            sigma.len(),
            phi.len()
        )));
    }
    let k = phi.alphabet_size();
    let mut counts = vec![0u64; k * k];
    for (i, &j) in sigma.images().iter().enumerate() {
        counts[phi.label(i) * k + phi.label(j)] += 1;
    }
    PairCounts::new(k, counts)
}

/// Distribution of `(φ(x), φ(t(x)))` under the uniform measure: `(φ ∨ φ∘t)_* μ`.
pub fn pair_distribution(phi: &Observable, t: &Permutation) -> Result<PairCounts> {
    if t.len() != phi.len() {
        return Err(Error::Shape(format!("permutation on {} points vs observable on {}", t.len(), phi.len())));
    }
    let k = phi.alphabet_size();
    let mut counts = vec![0u64; k * k];
    for x in 0..t.len() {
        counts[phi.label(x) * k + phi.label(t[x])] += 1;
    }
    PairCounts::new(k, counts)
}

/// Largest absolute entrywise difference.
pub fn linf<S: Scalar>(p: &Coupling<S>, q: &Coupling<S>) -> Result<S> {
    if p.k != q.k {
        return Err(Error::Shape(format!("{}x{} vs {}x{}", p.k, p.k, q.k, q.k)));
    }
    max_abs_diff(&p.entries, &q.entries).ok_or_else(|| Error::Shape("entry count".into()))
}

/// `π ⊗ π`.
pub fn product_coupling<S: Scalar>(pi: &Dist) -> Coupling<S> {
    let k = pi.alphabet_size();
    let d = pi.denom() as i128;
    let c = pi.counts();
    let mut entries = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            entries.push(S::from_ratio(c[a] as i128 * c[b] as i128, d * d));
        }
    }
    Coupling { k, entries }
}

/// `(1 - ε)·C + ε·(π ⊗ π)`.
pub fn mixture_coupling<S: Scalar>(c: &Coupling<S>, eps: &S, pi: &Dist) -> Result<Coupling<S>> {
    if *eps < S::zero() || *eps > S::one() {
        return Err(Error::Precondition(format!("mixture weight {eps} outside [0, 1]")));
    }
    if !coupling_margins_check(c, pi) {
        return Err(Error::MarginMismatch("mixture input is not a self-coupling of the given distribution".into()));
    }
    let prod = product_coupling::<S>(pi);
    let keep = S::one() - eps.clone();
    let entries = c
        .entries
        .iter()
        .zip(prod.entries)
        .map(|(x, y)| keep.clone() * x.clone() + eps.clone() * y)
        .collect();
    Ok(Coupling { k: c.k, entries })
}

/// Both margins equal `pi` (exactly for exact scalars, to a few ulps otherwise).
pub fn coupling_margins_check<S: Scalar>(j: &Coupling<S>, pi: &Dist) -> bool {
    if j.k != pi.alphabet_size() {
        return false;
    }
    let target = pi.probs::<S>();
    let ok = |m: Vec<S>| m.iter().zip(&target).all(|(a, b)| a.close_to(b, 2 * j.k));
    ok(j.row_margin()) && ok(j.col_margin())
}

/// Both margins of a count coupling equal `pi` exactly (after cross-multiplying denominators).
pub fn pair_counts_margins_check(j: &PairCounts, pi: &Dist) -> bool {
    if j.k != pi.alphabet_size() {
        return false;
    }
    let eq = |m: Vec<u64>| {
        m.iter()
            .zip(pi.counts())
            .all(|(&a, &b)| a as u128 * pi.denom() as u128 == b as u128 * j.denom as u128)
    };
    eq(j.row_counts()) && eq(j.col_counts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn q(n: i128, d: i128) -> Q {
        Q::new(n, d)
    }

    fn obs(l: &[usize]) -> Observable {
        Observable::from_labels(l.to_vec())
    }

    #[test]
    fn empirical_distribution_examples() {
        let d = empirical_distribution(&obs(&[0, 0, 1, 1]));
        assert_eq!(d.probs::<Q>(), vec![q(1, 2), q(1, 2)]);
        let d = empirical_distribution(&Observable::new(vec![0; 4], 2).unwrap());
        assert_eq!(d.probs::<Q>(), vec![q(1, 1), q(0, 1)]);
        let d = empirical_distribution(&obs(&[0, 1, 0, 1, 0]));
        assert_eq!(d.probs::<Q>(), vec![q(3, 5), q(2, 5)]);
    }

    #[test]
    fn pair_distribution_on_lines() {
        // 1-based (1→2, 2→3) becomes 0-based (0→1, 1→2)
        let s = LineBijection::new(vec![1, 2]).unwrap();
        let j = empirical_pair_distribution(&obs(&[0, 0, 0]), &s).unwrap();
        assert_eq!((j.get(0, 0), j.denom()), (2, 2));

        // (1→3, 3→2, 2→4) in 0-based: 0→2, 1→3, 2→1
        let s = LineBijection::new(vec![2, 3, 1]).unwrap();
        let j = empirical_pair_distribution(&obs(&[0, 1, 0, 1]), &s).unwrap();
        assert_eq!(j.counts(), &[1, 1, 0, 1]);
        assert_eq!(j.denom(), 3);

        let s = LineBijection::new(vec![1]).unwrap();
        let j = empirical_pair_distribution(&obs(&[0, 1]), &s).unwrap();
        assert_eq!(j.counts(), &[0, 1, 0, 0]);
    }

    #[test]
    fn linf_examples() {
        let p = Coupling::<f64>::from_rows(vec![vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap();
        let r = Coupling::<f64>::from_rows(vec![vec![0.25, 0.0], vec![0.0, 0.75]]).unwrap();
        assert!((linf(&p, &r).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(linf(&p, &p).unwrap(), 0.0);
        let a = Coupling::<Q>::from_rows(vec![vec![q(1, 1)]]).unwrap();
        assert!(linf(&a, &Coupling::diagonal(&Dist::new(vec![1, 1]).unwrap())).is_err());
        let e = Coupling::<Q>::from_rows(vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        let f = Coupling::<Q>::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(0, 1), q(0, 1)]]).unwrap();
        assert_eq!(linf(&e, &f).unwrap(), q(1, 1));
    }

    #[test]
    fn product_coupling_examples() {
        let p = product_coupling::<Q>(&Dist::new(vec![1, 0]).unwrap());
        assert_eq!(p.entries(), &[q(1, 1), q(0, 1), q(0, 1), q(0, 1)]);
        let p = product_coupling::<Q>(&Dist::new(vec![1, 1]).unwrap());
        assert!(p.entries().iter().all(|e| *e == q(1, 4)));
        let p = product_coupling::<Q>(&Dist::new(vec![3, 1]).unwrap());
        assert_eq!(p.entries(), &[q(9, 16), q(3, 16), q(3, 16), q(1, 16)]);
    }

    #[test]
    fn mixture_coupling_examples() {
        let pi = Dist::new(vec![1, 1]).unwrap();
        let c = Coupling::<Q>::diagonal(&pi);
        assert_eq!(mixture_coupling(&c, &q(0, 1), &pi).unwrap(), c);
        assert_eq!(mixture_coupling(&c, &q(1, 1), &pi).unwrap(), product_coupling(&pi));
        let m = mixture_coupling(&c, &q(1, 2), &pi).unwrap();
        assert_eq!(m.entries(), &[q(3, 8), q(1, 8), q(1, 8), q(3, 8)]);

        let other = Dist::new(vec![3, 1]).unwrap();
        assert!(matches!(mixture_coupling(&c, &q(1, 2), &other), Err(Error::MarginMismatch(_))));
    }

    #[test]
    fn margins_check_examples() {
        let pi = Dist::new(vec![3, 1]).unwrap();
        assert!(coupling_margins_check(&product_coupling::<Q>(&pi), &pi));
        assert!(coupling_margins_check(&Coupling::<Q>::diagonal(&pi), &pi));
        assert!(coupling_margins_check(&product_coupling::<f64>(&pi), &pi));
        let j = Coupling::<Q>::from_rows(vec![vec![q(1, 2), q(0, 1)], vec![q(1, 4), q(1, 4)]]).unwrap();
        assert!(!coupling_margins_check(&j, &Dist::new(vec![1, 1]).unwrap()));
    }

    #[test]
    fn essential_range_drops_unused() {
        let phi = Observable::new(vec![0, 2, 2, 0], 3).unwrap();
        let (r, map) = phi.essential_range();
        assert_eq!(r.labels(), &[0, 1, 1, 0]);
        assert_eq!(r.alphabet_size(), 2);
        assert_eq!(map, vec![0, 2]);
    }

    #[test]
    fn coupling_validation() {
        assert!(Coupling::<f64>::from_rows(vec![vec![0.5, 0.5], vec![0.0, 0.1]]).is_err());
        assert!(Coupling::<f64>::from_rows(vec![vec![1.5, -0.5], vec![0.0, 0.0]]).is_err());
        assert!(Observable::new(vec![0, 3], 2).is_err());
    }
}
