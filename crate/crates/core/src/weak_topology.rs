//! Finite-partition statistics of actions and the transport of a partition
//! from the ball of radius `r` back to the generators.
//!
//! For an action `a`, a partition `P = {P_0..P_{k-1}}` and a word `g`, the
//! statistics matrix holds `μ(P_i ∩ a_g P_j)`. Two actions are close in the
//! weak topology exactly when these matrices are close for suitable
//! partitions, which is what [`kechris_distance`] measures.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_group::{ball, evaluate, refinement, FiniteAction, ReducedWord};
use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::space::Observable;

/// Counts `#(P_i ∩ g·P_j)` over a space of `n` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatsMatrix {
    word: ReducedWord,
    k: usize,
    n: usize,
    counts: Vec<u64>,
}

impl StatsMatrix {
    pub fn word(&self) -> &ReducedWord {
        &self.word
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn space_size(&self) -> usize {
        self.n
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k + j]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `μ(P_i ∩ g·P_j)`.
    pub fn entry<S: Scalar>(&self, i: usize, j: usize) -> S {
        S::from_count(self.count(i, j), self.n as u64)
    }

    pub fn row_counts(&self) -> Vec<u64> {
        self.counts.chunks(self.k).map(|r| r.iter().sum()).collect()
    }
}

fn stats_for(p: &Observable, g: &Permutation, word: ReducedWord) -> StatsMatrix {
    let k = p.alphabet_size();
    let mut counts = vec![0u64; k * k];
    // y = g·x lies in P_i ∩ g·P_j exactly when P(g·x) = i and P(x) = j
    for x in 0..g.len() {
        counts[p.label(g[x]) * k + p.label(x)] += 1;
    }
    StatsMatrix { word, k, n: g.len(), counts }
}

/// `μ(P_i ∩ a_g P_j)` for all `i, j`.
pub fn stats_matrix(a: &FiniteAction, p: &Observable, g: &ReducedWord) -> Result<StatsMatrix> {
    if p.len() != a.size() {
        return Err(Error::Shape(format!("partition on {} points, action on {}", p.len(), a.size())));
    }
    Ok(stats_for(p, &evaluate(a, g)?, g.clone()))
}

/// Statistics matrices for every word of `words`, in order.
pub fn stats_matrices(a: &FiniteAction, p: &Observable, words: &[ReducedWord]) -> Result<Vec<StatsMatrix>> {
    words.par_iter().map(|g| stats_matrix(a, p, g)).collect()
}

/// `max_{g ∈ F, i, j} |μ(P_i ∩ v_g P_j) − μ(Q_i ∩ w_g Q_j)|`.
pub fn kechris_distance<S: Scalar>(
    v: &FiniteAction,
    w: &FiniteAction,
    p: &Observable,
    q: &Observable,
    words: &[ReducedWord],
) -> Result<S> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::Shape(format!(
            "partitions have {} and {} atoms",
            p.alphabet_size(),
            q.alphabet_size()
        )));
    }
    let sv = stats_matrices(v, p, words)?;
    let sw = stats_matrices(w, q, words)?;
    let (nv, nw) = (v.size() as u64, w.size() as u64);
    let mut best = S::zero();
    for (x, y) in sv.iter().zip(&sw) {
        for (&c, &d) in x.counts.iter().zip(&y.counts) {
            let diff = (S::from_count(c, nv) - S::from_count(d, nw)).abs();
            if diff > best {
                best = diff;
            }
        }
    }
    Ok(best)
}

/// `Σ_i 2^{-(i+1)} μ(T A_i △ U A_i)` over the supplied family.
///
/// Weights halve exactly, so exact scalar types overflow beyond roughly as
/// many sets as their integer width allows.
pub fn weak_distance<S: Scalar>(t: &Permutation, u: &Permutation, sets: &[Vec<usize>]) -> Result<S> {
    let n = t.len();
    if u.len() != n {
        return Err(Error::Shape(format!("permutations on {} and {} points", n, u.len())));
    }
    let mut member = vec![false; n];
    let mut in_t = vec![false; n];
    let two = S::from_usize(2);
    let mut weight = S::one();
    let mut total = S::zero();
    for set in sets {
        weight = weight / two.clone();
        if let Some(&x) = set.iter().find(|&&x| x >= n) {
            return Err(Error::Shape(format!("point {x} outside a space of {n} points")));
        }
        // repeated points count once
        let mut unique = Vec::with_capacity(set.len());
        for &x in set {
            if !std::mem::replace(&mut member[x], true) {
                unique.push(x);
                in_t[t[x]] = true;
            }
        }
        let common = unique.iter().filter(|&&x| in_t[u[x]]).count();
        // clear without touching the whole array
        for &x in &unique {
            member[x] = false;
            in_t[t[x]] = false;
        }
        let sym = 2 * (unique.len() - common);
        total = total + weight.clone() * S::from_count(sym as u64, n as u64);
    }
    Ok(total)
}

/// A bijection from the atoms of a refinement `P′` onto the atoms of a
/// partition `Q′` of the target space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomBijection {
    image: Vec<usize>,
    target: Observable,
}

impl AtomBijection {
    /// `image[c]` is the `Q′`-atom assigned to the `P′`-atom `c`.
    pub fn new(image: Vec<usize>, target: Observable) -> Result<Self> {
        Permutation::new(image.clone())
            .map_err(|e| Error::NotBijection(format!("atom map: {e}")))?;
        if target.alphabet_size() != image.len() {
            return Err(Error::NotBijection(format!(
                "atom map has {} entries but the target partition has {} atoms",
                image.len(),
                target.alphabet_size()
            )));
        }
        Ok(Self { image, target })
    }

    /// Every atom to the same atom of the same partition.
    pub fn identity(partition: &Observable) -> Self {
        Self { image: (0..partition.alphabet_size()).collect(), target: partition.clone() }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn target(&self) -> &Observable {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    fn preimage(&self) -> Vec<usize> {
        let mut pre = vec![0; self.image.len()];
        for (c, &d) in self.image.iter().enumerate() {
            pre[d] = c;
        }
        pre
    }
}

/// For each atom of `fine`, the atom of `coarse` containing it.
fn parents(coarse: &Observable, fine: &Observable) -> Result<Vec<usize>> {
    if coarse.len() != fine.len() {
        return Err(Error::Shape(format!("partitions on {} and {} points", coarse.len(), fine.len())));
    }
    let mut parent = vec![usize::MAX; fine.alphabet_size()];
    for x in 0..fine.len() {
        let c = fine.label(x);
        let i = coarse.label(x);
        if parent[c] == usize::MAX {
            parent[c] = i;
        } else if parent[c] != i {
            return Err(Error::Observable(format!("atom {c} of the refinement meets two atoms of the partition")));
        }
    }
    Ok(parent)
}

/// `Q_i = β(P_i)`: the union of the images of the refinement atoms inside
/// `P_i`. Refinement atoms that are empty map nowhere in particular; their
/// images join atom `0`.
pub fn transport_partition(p: &Observable, p_prime: &Observable, beta: &AtomBijection) -> Result<Observable> {
    if beta.len() != p_prime.alphabet_size() {
        return Err(Error::NotBijection(format!(
            "atom map has {} entries, the refinement has {} atoms",
            beta.len(),
            p_prime.alphabet_size()
        )));
    }
    let parent = parents(p, p_prime)?;
    let pre = beta.preimage();
    let labels = beta
        .target
        .labels()
        .iter()
        .map(|&d| match parent[pre[d]] {
            usize::MAX => 0,
            i => i,
        })
        .collect();
    Observable::new(labels, p.alphabet_size())
}

/// Per-word value of the second claim.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordBound<S> {
    pub word: String,
    pub length: usize,
    /// `max_i μ(β(v_g P_i) △ w_g β(P_i))`.
    pub value: S,
    /// `ε|g| / (2|F|)`.
    pub bound: S,
}

/// Quantities tracked while transporting `P` from `v` to `w` over a ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransportCertificate<S> {
    pub eps: S,
    pub radius: usize,
    pub ball_size: usize,
    pub refinement_atoms: usize,
    /// `max |μ(β(A)) − μ(A)|` over refinement atoms and the atoms `P_i`.
    pub claim1_max: S,
    pub claim2: Vec<WordBound<S>>,
    /// `max_{s, P′, P″} |μ(P′ ∩ v_s P″) − μ(βP′ ∩ w_s βP″)|` over `s` and `s⁻¹`.
    pub generator_discrepancy: S,
    /// `ε / (4 |P′|² |F|)`.
    pub hypothesis_threshold: S,
    pub hypothesis_held: bool,
    /// Kechris distance between `(v, P)` and `(w, Q)` over the ball.
    pub final_discrepancy: S,
    #[serde(skip)]
    pub transported: Observable,
}

impl<S: Scalar> TransportCertificate<S> {
    pub fn claim1_holds(&self) -> bool {
        self.claim1_max < self.eps.clone() / S::from_usize(2)
    }

    pub fn claim2_holds(&self) -> bool {
        self.claim2.iter().all(|w| w.value <= w.bound)
    }

    pub fn claim2_max(&self) -> S {
        self.claim2
            .iter()
            .map(|w| w.value.clone())
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Refine `P` by the ball of radius `r` under `v`, push it through `β`, and
/// measure both claims plus the resulting discrepancy on the whole ball.
///
/// `beta` must be defined on the atoms of `refine_partition(P, ball(S, r), v)`
/// (numbered by first occurrence). Never fails on quantitative grounds; the
/// certificate reports whether the generator hypothesis held.
pub fn ball_transport_certificate<S: Scalar>(
    v: &FiniteAction,
    w: &FiniteAction,
    p: &Observable,
    r: usize,
    beta: &AtomBijection,
    eps: &S,
) -> Result<TransportCertificate<S>> {
    if v.rank() != w.rank() {
        return Err(Error::Shape(format!("actions of rank {} and {}", v.rank(), w.rank())));
    }
    if beta.target.len() != w.size() {
        return Err(Error::Shape(format!(
            "target partition on {} points, action on {}",
            beta.target.len(),
            w.size()
        )));
    }
    let words = ball(&v.generators(), r);
    let refined = refinement(p, &words, v)?;
    let p_prime = &refined.observable;
    let kp = p_prime.alphabet_size();
    let q = transport_partition(p, p_prime, beta)?;
    let q_prime = &beta.target;
    let (nv, nw) = (v.size() as u64, w.size() as u64);

    let mut claim1_max = S::zero();
    let mut bump = |a: u64, b: u64| {
        let d = (S::from_count(a, nv) - S::from_count(b, nw)).abs();
        if d > claim1_max {
            claim1_max = d;
        }
    };
    let pc = atom_sizes(p_prime);
    let qc = atom_sizes(q_prime);
    for c in 0..kp {
        bump(pc[c], qc[beta.image[c]]);
    }
    for (a, b) in atom_sizes(p).into_iter().zip(atom_sizes(&q)) {
        bump(a, b);
    }

    // the image under β of the P′-atom containing the point β-preimage of y
    let pre = beta.preimage();
    let source_atom: Vec<usize> = q_prime.labels().iter().map(|&d| pre[d]).collect();
    let f = S::from_usize(words.len());
    let k = p.alphabet_size();
    let claim2 = words
        .par_iter()
        .enumerate()
        .map(|(t, g)| -> Result<WordBound<S>> {
            let wg_inv = evaluate(w, &g.inverse())?;
            let mut diff = vec![0u64; k];
            for y in 0..q.len() {
                let lhs = refined.signatures[source_atom[y]][t];
                let rhs = q.label(wg_inv[y]);
                if lhs != rhs {
                    diff[lhs] += 1;
                    diff[rhs] += 1;
                }
            }
            let worst = diff.into_iter().max().unwrap_or(0);
            Ok(WordBound {
                word: g.to_string(),
                length: g.len(),
                value: S::from_count(worst, nw),
                bound: eps.clone() * S::from_usize(g.len()) / (S::from_usize(2) * f.clone()),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // generator hypothesis on P′ versus Q′ = β(P′), relabeled so atoms correspond
    let q_relabeled = Observable::new(source_atom, kp.max(1))?;
    let letters = v.generators().symmetric();
    let mut generator_discrepancy = S::zero();
    for l in letters {
        let sv = stats_for(p_prime, v.letter(l), ReducedWord::letter(l));
        let sw = stats_for(&q_relabeled, w.letter(l), ReducedWord::letter(l));
        for (&c, &d) in sv.counts.iter().zip(&sw.counts) {
            let diff = (S::from_count(c, nv) - S::from_count(d, nw)).abs();
            if diff > generator_discrepancy {
                generator_discrepancy = diff;
            }
        }
    }
    let hypothesis_threshold = eps.clone() / (S::from_usize(4 * kp * kp) * f);
    let hypothesis_held = generator_discrepancy < hypothesis_threshold;
    let final_discrepancy = kechris_distance(v, w, p, &q, &words)?;

    Ok(TransportCertificate {
        eps: eps.clone(),
        radius: r,
        ball_size: words.len(),
        refinement_atoms: kp,
        claim1_max,
        claim2,
        generator_discrepancy,
        hypothesis_threshold,
        hypothesis_held,
        final_discrepancy,
        transported: q,
    })
}

fn atom_sizes(p: &Observable) -> Vec<u64> {
    let mut c = vec![0u64; p.alphabet_size()];
    for &a in p.labels() {
        c[a] += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    fn halves() -> Observable {
        Observable::from_labels(vec![0, 0, 1, 1])
    }

    fn shift_action(n: usize) -> FiniteAction {
        FiniteAction::new(vec![Permutation::shift(n)]).unwrap()
    }

    #[test]
    fn identity_word_is_diagonal() {
        let s = stats_matrix(&shift_action(4), &halves(), &ReducedWord::identity()).unwrap();
        assert_eq!(s.counts(), &[2, 0, 0, 2]);
        assert_eq!(s.entry::<Q>(0, 0), Q::new(1, 2));
    }

    #[test]
    fn shift_spreads_evenly() {
        let s = stats_matrix(&shift_action(4), &halves(), &"a".parse().unwrap()).unwrap();
        assert_eq!(s.counts(), &[1, 1, 1, 1]);
        assert_eq!(s.row_counts(), vec![2, 2]);
    }

    #[test]
    fn single_atom() {
        let s = stats_matrix(&shift_action(5), &Observable::constant(5), &"A".parse().unwrap()).unwrap();
        assert_eq!(s.entry::<Q>(0, 0), Q::from_integer(1));
    }

    #[test]
    fn kechris_shift_versus_identity() {
        let id = FiniteAction::new(vec![Permutation::identity(4)]).unwrap();
        let f = vec!["a".parse().unwrap()];
        let d: Q = kechris_distance(&shift_action(4), &id, &halves(), &halves(), &f).unwrap();
        assert_eq!(d, Q::new(1, 4));
        let zero: Q = kechris_distance(&id, &id, &halves(), &halves(), &f).unwrap();
        assert_eq!(zero, Q::from_integer(0));
        assert!(kechris_distance::<Q>(&id, &id, &halves(), &Observable::constant(4), &f).is_err());
    }

    #[test]
    fn weak_distance_examples() {
        let t = Permutation::shift(4);
        let u = Permutation::identity(4);
        assert_eq!(weak_distance::<Q>(&t, &u, &[vec![0, 1]]).unwrap(), Q::new(1, 4));
        assert_eq!(weak_distance::<Q>(&t, &t, &[vec![0, 1], vec![2]]).unwrap(), Q::from_integer(0));
        assert_eq!(weak_distance::<Q>(&t, &u, &[vec![0, 1, 2, 3]]).unwrap(), Q::from_integer(0));
        assert_eq!(weak_distance::<Q>(&t, &u, &[vec![0, 1, 2, 3], vec![0]]).unwrap(), Q::new(1, 8));
    }

    #[test]
    fn transport_identity_and_swap() {
        let p = halves();
        let q = transport_partition(&p, &p, &AtomBijection::identity(&p)).unwrap();
        assert_eq!(q, p);

        let fine = Observable::from_labels(vec![0, 1, 2, 3]);
        // swap the atoms {1} and {2}
        let beta = AtomBijection::new(vec![0, 2, 1, 3], fine.clone()).unwrap();
        let q = transport_partition(&p, &fine, &beta).unwrap();
        assert_eq!(q.labels(), &[0, 1, 0, 1]);

        let one = Observable::constant(4);
        let q = transport_partition(&one, &fine, &beta).unwrap();
        assert_eq!(q, one);
        assert!(transport_partition(&fine, &p, &AtomBijection::identity(&p)).is_err());
        assert!(AtomBijection::new(vec![0, 0], p.clone()).is_err());
    }

    #[test]
    fn certificate_is_zero_for_identical_data() {
        let v = shift_action(6);
        let p = Observable::from_labels(vec![0, 0, 1, 1, 0, 1]);
        let refined = refinement(&p, &ball(&v.generators(), 2), &v).unwrap();
        let beta = AtomBijection::identity(&refined.observable);
        let c = ball_transport_certificate(&v, &v, &p, 2, &beta, &Q::new(1, 10)).unwrap();
        assert_eq!(c.claim1_max, Q::from_integer(0));
        assert_eq!(c.claim2_max(), Q::from_integer(0));
        assert_eq!(c.final_discrepancy, Q::from_integer(0));
        assert!(c.hypothesis_held && c.claim1_holds() && c.claim2_holds());
    }

    #[test]
    fn certificate_for_perturbed_shift() {
        // w = shift ∘ (0 3); radius 1, β the identity on P′
        let v = shift_action(6);
        let w = FiniteAction::new(vec![Permutation::shift(6).compose(&Permutation::identity(6).with_transposition(0, 3))])
            .unwrap();
        let p = Observable::from_labels(vec![0, 0, 0, 1, 1, 1]);
        let refined = refinement(&p, &ball(&v.generators(), 1), &v).unwrap();
        let beta = AtomBijection::identity(&refined.observable);
        let c = ball_transport_certificate(&v, &w, &p, 1, &beta, &Q::new(1, 10)).unwrap();
        assert_eq!(c.claim1_max, Q::from_integer(0));
        // Q = P; w_a sends 0 → 4 and 3 → 1, so w_a P_0 = {1, 2, 4} against v_a P_0 = {1, 2, 3}
        let by_word: Vec<_> = c.claim2.iter().map(|w| (w.word.as_str(), w.value)).collect();
        assert_eq!(by_word, vec![("e", Q::from_integer(0)), ("a", Q::new(1, 3)), ("A", Q::new(1, 3))]);
        assert!(!c.hypothesis_held);
    }

    #[test]
    fn mismatched_beta_is_flagged() {
        let v = shift_action(6);
        let p = Observable::from_labels(vec![0, 0, 0, 0, 1, 1]);
        let refined = refinement(&p, &ball(&v.generators(), 1), &v).unwrap();
        let k = refined.observable.alphabet_size();
        let mut image: Vec<usize> = (0..k).collect();
        image.reverse();
        let beta = AtomBijection::new(image, refined.observable.clone()).unwrap();
        let c = ball_transport_certificate(&v, &v, &p, 1, &beta, &Q::new(1, 10)).unwrap();
        assert!(c.claim1_max >= Q::new(1, 6));
        assert!(!c.hypothesis_held);
    }
}
