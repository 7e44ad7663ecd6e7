//! Finite model of the density argument: given a source action `a`, a target
//! action `b` and a target observable `φ`, find an observable `ψ` and an
//! action `a′` with the same generator orbits as `a` whose generator
//! statistics `(ψ ∨ ψ∘a′_s)_* μ` match `(φ ∨ φ∘b_s)_* μ` to within `10|A|ε`.
//!
//! Steps: mix each target pair law with the product law so every entry is
//! positive, sample `ψ` until every generator's cycles are equidistributed,
//! and rewire each generator inside its cycles toward its mixed target.

pub mod config;
pub mod experiment;
pub mod instance;
pub mod rng;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_group::{ball, FiniteAction, Letter};
use crate::rewire::{ergodic_profile, rewire_with, verify_same_orbits, RewireOptions};
use crate::scalar::Scalar;
use crate::space::{empirical_distribution, linf, mixture_coupling, pair_distribution, Coupling, Dist, Observable};
use crate::weak_topology::kechris_distance;

use rng::{stream, Purpose};

/// How candidate observables are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Each point independently from `π`.
    #[default]
    Iid,
    /// A uniformly random labeling with the counts of `π` scaled to `n`
    /// (rounded down, remainder to the lowest symbols).
    Exact,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodObservableParams<S> {
    /// A cycle is bad when its label distribution is farther than this from `π`.
    pub deviation_threshold: S,
    /// Accept when the bad mass of every generator is below this.
    pub mass_bound: S,
    pub retries: usize,
    pub sampling: Sampling,
}

impl<S: Scalar> GoodObservableParams<S> {
    /// Deviation threshold `3ε` and mass bound `ε`.
    pub fn lemma(eps: &S, retries: usize) -> Self {
        Self {
            deviation_threshold: S::from_usize(3) * eps.clone(),
            mass_bound: eps.clone(),
            retries,
            sampling: Sampling::Iid,
        }
    }

    /// Threshold and mass bound both `ε`, as the rewiring step needs.
    pub fn strict(eps: &S, retries: usize) -> Self {
        Self { deviation_threshold: eps.clone(), ..Self::lemma(eps, retries) }
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodObservable<S> {
    pub psi: Observable,
    /// 1-based index of the accepted attempt.
    pub attempts: usize,
    /// Bad mass per generator for the accepted sample.
    pub bad_mass: Vec<S>,
}

fn sample_observable(n: usize, pi: &Dist, sampling: Sampling, rng: &mut rand_chacha::ChaCha8Rng) -> Result<Observable> {
    let k = pi.alphabet_size();
    let labels = match sampling {
        Sampling::Iid => {
            let w = WeightedIndex::new(pi.counts()).map_err(|e| Error::Precondition(format!("sampling weights: {e}")))?;
            (0..n).map(|_| w.sample(rng)).collect()
        }
        Sampling::Exact => {
            let d = pi.denom() as u128;
            let mut sizes: Vec<usize> = pi.counts().iter().map(|&c| (c as u128 * n as u128 / d) as usize).collect();
            let rest = n - sizes.iter().sum::<usize>();
            for s in sizes.iter_mut().take(rest) {
                *s += 1;
            }
            let mut labels: Vec<usize> = sizes.iter().enumerate().flat_map(|(a, &c)| std::iter::repeat(a).take(c)).collect();
            labels.shuffle(rng);
            labels
        }
    };
    Observable::new(labels, k)
}

/// Draw `ψ` with law `π` until, for every generator `s`, the cycles of `a_s`
/// whose label distribution deviates from `π` by more than the threshold
/// carry less than the mass bound. Attempt `i` uses stream
/// `(GoodObservable, i)`, so the outcome depends only on `seed`.
pub fn good_observable<S: Scalar>(
    a: &FiniteAction,
    pi: &Dist,
    params: &GoodObservableParams<S>,
    seed: u64,
) -> Result<GoodObservable<S>> {
    if params.retries == 0 {
        return Err(Error::Precondition("at least one attempt is required".into()));
    }
    let mut worst = Vec::new();
    for attempt in 0..params.retries {
        let mut rng = stream(seed, Purpose::GoodObservable, attempt as u64);
        let psi = sample_observable(a.size(), pi, params.sampling, &mut rng)?;
        let bad_mass = a
            .perms()
            .par_iter()
            .map(|t| ergodic_profile(t, &psi, &params.deviation_threshold).map(|p| p.bad_mass))
            .collect::<Result<Vec<S>>>()?;
        if bad_mass.iter().all(|m| *m < params.mass_bound) {
            return Ok(GoodObservable { psi, attempts: attempt + 1, bad_mass });
        }
        worst = bad_mass;
    }
    let detail = worst.iter().enumerate().map(|(s, m)| format!("generator {s}: bad mass {m}")).collect::<Vec<_>>();
    Err(Error::GoodObservableExhausted {
        attempts: params.retries,
        detail: format!(
            "last sample {} (mass bound {}); cycles may be too short to equidistribute",
            detail.join(", "),
            params.mass_bound
        ),
    })
}

/// Mixed target for one generator.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetCoupling<S> {
    /// `(φ ∨ φ∘b_s)_* μ`.
    pub pair: Coupling<S>,
    /// `(1 − ε)·pair + ε·(π ⊗ π)`.
    pub j: Coupling<S>,
    /// `min J_s > 2|A|ε`.
    pub min_entry_ok: bool,
}

/// `J_s = (1 − ε)(φ ∨ φ∘b_s)_* μ + ε (φ × φ)_*(μ × μ)` for every generator.
pub fn target_couplings<S: Scalar>(b: &FiniteAction, phi: &Observable, eps: &S) -> Result<Vec<TargetCoupling<S>>> {
    if phi.len() != b.size() {
        return Err(Error::Shape(format!("observable on {} points, action on {}", phi.len(), b.size())));
    }
    let pi = empirical_distribution(phi);
    if let Some(symbol) = pi.counts().iter().position(|&c| c == 0) {
        return Err(Error::UnusedSymbol { symbol });
    }
    let k = phi.alphabet_size();
    let need = S::from_usize(2 * k) * eps.clone();
    b.perms()
        .iter()
        .map(|t| {
            let pair = pair_distribution(phi, t)?.to_coupling::<S>();
            let j = mixture_coupling(&pair, eps, &pi)?;
            let min_entry_ok = j.min_entry() > need;
            Ok(TargetCoupling { pair, j, min_entry_ok })
        })
        .collect()
}

/// Orbit equivalence in the finite model: every generator keeps its cycles.
pub fn verify_oe(a: &FiniteAction, a_prime: &FiniteAction) -> bool {
    a.rank() == a_prime.rank()
        && a.size() == a_prime.size()
        && a.perms().iter().zip(a_prime.perms()).all(|(t, u)| verify_same_orbits(t, u))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OeParams<S> {
    pub eps: S,
    pub observable: GoodObservableParams<S>,
    /// Radius of the ball `F` on which the Kechris distance is reported.
    pub radius: usize,
    pub seed: u64,
}

impl<S: Scalar> OeParams<S> {
    /// Strict observable acceptance (`ε`, `ε`), i.i.d. sampling, `F = ball(S, 2)`.
    pub fn new(eps: S, retries: usize, seed: u64) -> Self {
        Self { observable: GoodObservableParams::strict(&eps, retries), eps, radius: 2, seed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorReport<S> {
    pub generator: String,
    /// `‖(ψ ∨ ψ∘a′_s)_* μ − (φ ∨ φ∘b_s)_* μ‖∞`.
    pub achieved_error: S,
    /// `‖(ψ ∨ ψ∘a′_s)_* μ − J_s‖∞`.
    pub rewire_error: S,
    /// `‖J_s − (φ ∨ φ∘b_s)_* μ‖∞`, at most `ε`.
    pub mixture_gap: S,
    pub min_entry: S,
    pub min_entry_ok: bool,
    pub good_mass: S,
    pub hypotheses_held: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport<S> {
    pub eps: S,
    /// `10|A|ε`.
    pub bound: S,
    pub generators: Vec<GeneratorReport<S>>,
    pub orbit_equivalent: bool,
    pub good_observable_attempts: usize,
    /// Kechris distance between `(b, φ)` and `(a′, ψ)` over the ball.
    pub kechris_distance: S,
    pub radius: usize,
    /// All rewiring hypotheses and min-entry checks held.
    pub hypotheses_held: bool,
    /// Orbit equivalence holds and every generator is within the bound.
    pub success: bool,
}

#[derive(Clone, Debug)]
pub struct OeOutcome<S> {
    pub a_prime: FiniteAction,
    pub psi: Observable,
    pub report: PipelineReport<S>,
}

/// Build `a′` orbit equivalent to `a`, generator by generator, and report how
/// well `(a′, ψ)` reproduces the statistics of `(b, φ)`.
///
/// Failed quantitative hypotheses do not abort the run: the rewiring falls
/// back to the identity on bad cycles and the report says which hypotheses
/// held. Structural problems and an exhausted observable search are errors.
pub fn oe_approximate<S: Scalar>(
    a: &FiniteAction,
    b: &FiniteAction,
    phi: &Observable,
    params: &OeParams<S>,
) -> Result<OeOutcome<S>> {
    let eps = &params.eps;
    if *eps <= S::zero() || *eps >= S::from_ratio(1, 6) {
        return Err(Error::Precondition(format!("ε = {eps} is not in (0, 1/6)")));
    }
    if a.rank() != b.rank() || a.size() != b.size() {
        return Err(Error::Shape(format!(
            "source action has rank {} on {} points, target rank {} on {} points",
            a.rank(),
            a.size(),
            b.rank(),
            b.size()
        )));
    }
    let targets = target_couplings(b, phi, eps)?;
    let pi = empirical_distribution(phi);
    let good = good_observable(a, &pi, &params.observable, params.seed)?;
    let psi = good.psi;
    let k = phi.alphabet_size();
    let opts = RewireOptions {
        eps: eps.clone(),
        deviation_threshold: eps.clone(),
        mass_bound: eps.clone(),
        gate: Default::default(),
    };

    let rewired = a
        .perms()
        .par_iter()
        .zip(&targets)
        .enumerate()
        .map(|(s, (t, target))| -> Result<_> {
            let (t_prime, rep) = rewire_with(t, &psi, &target.j, &opts)?;
            let got = pair_distribution(&psi, &t_prime)?.to_coupling::<S>();
            let achieved_error = linf(&got, &target.pair)?;
            let mixture_gap = linf(&target.j, &target.pair)?;
            debug_assert!(mixture_gap <= *eps);
            debug_assert!(achieved_error <= rep.achieved_error.clone() + mixture_gap.clone() + S::sum_tolerance(4 * k * k));
            let report = GeneratorReport {
                generator: Letter::gen(s).to_string(),
                achieved_error,
                rewire_error: rep.achieved_error,
                mixture_gap,
                min_entry: target.j.min_entry(),
                min_entry_ok: target.min_entry_ok,
                good_mass: rep.good_mass,
                hypotheses_held: rep.hypotheses_held && target.min_entry_ok,
            };
            Ok((t_prime, report))
        })
        .collect::<Result<Vec<_>>>()?;
    let (perms, generators): (Vec<_>, Vec<_>) = rewired.into_iter().unzip();
    let a_prime = FiniteAction::new(perms)?;

    let orbit_equivalent = verify_oe(a, &a_prime);
    let words = ball(&a.generators(), params.radius);
    let kechris = kechris_distance(b, &a_prime, phi, &psi, &words)?;
    let bound = S::from_usize(10 * k) * eps.clone();
    let hypotheses_held = generators.iter().all(|g| g.hypotheses_held);
    let success = orbit_equivalent && generators.iter().all(|g| g.achieved_error <= bound);
    let report = PipelineReport {
        eps: eps.clone(),
        bound,
        generators,
        orbit_equivalent,
        good_observable_attempts: good.attempts,
        kechris_distance: kechris,
        radius: params.radius,
        hypotheses_held,
        success,
    };
    Ok(OeOutcome { a_prime, psi, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::Permutation;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    #[test]
    fn single_symbol_is_constant() {
        let mut rng = stream(3, Purpose::Trial, 0);
        let a = FiniteAction::random_cyclic(50, 2, &mut rng).unwrap();
        let g = good_observable(&a, &Dist::new(vec![7]).unwrap(), &GoodObservableParams::lemma(&0.01, 1), 9).unwrap();
        assert_eq!(g.attempts, 1);
        assert!(g.psi.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn involutions_are_rejected() {
        let n = 1000;
        let swap: Vec<usize> = (0..n).map(|x| x ^ 1).collect();
        let a = FiniteAction::new(vec![Permutation::new(swap).unwrap()]).unwrap();
        let err = good_observable(&a, &Dist::new(vec![1, 1]).unwrap(), &GoodObservableParams::lemma(&0.01, 5), 1)
            .unwrap_err();
        assert!(matches!(err, Error::GoodObservableExhausted { attempts: 5, .. }));
    }

    #[test]
    fn exact_sampling_hits_counts() {
        let mut rng = stream(4, Purpose::Trial, 0);
        let psi = sample_observable(10, &Dist::new(vec![1, 2]).unwrap(), Sampling::Exact, &mut rng).unwrap();
        assert_eq!(empirical_distribution(&psi).counts(), &[4, 6]);
    }

    #[test]
    fn target_coupling_examples() {
        let phi = Observable::from_labels(vec![0, 1, 0, 1]);
        let id = FiniteAction::new(vec![Permutation::identity(4)]).unwrap();
        let t = target_couplings(&id, &phi, &Q::new(1, 2)).unwrap();
        assert_eq!(t[0].j.entries(), &[Q::new(3, 8), Q::new(1, 8), Q::new(1, 8), Q::new(3, 8)]);
        let t = target_couplings(&id, &phi, &Q::from_integer(0)).unwrap();
        assert_eq!(t[0].j, t[0].pair);
        let t = target_couplings(&id, &phi, &Q::from_integer(1)).unwrap();
        assert_eq!(t[0].j.entries(), &[Q::new(1, 4); 4]);
        let unused = Observable::new(vec![0, 0, 2, 2], 3).unwrap();
        assert!(matches!(target_couplings(&id, &unused, &Q::new(1, 10)), Err(Error::UnusedSymbol { symbol: 1 })));
    }

    #[test]
    fn verify_oe_examples() {
        let mut rng = stream(5, Purpose::Trial, 0);
        let a = FiniteAction::new(vec![Permutation::identity(30), Permutation::random(30, &mut rng)]).unwrap();
        assert!(verify_oe(&a, &a));
        assert!(verify_oe(&a, &a.inverted()));
        let other = a.with_generator(0, Permutation::shift(30)).unwrap();
        assert!(!verify_oe(&a, &other));
    }
}
