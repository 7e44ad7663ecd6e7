//! Rewiring a permutation inside its own cycles.
//!
//! Every cycle gets one base point `y` (its smallest element) and is read as
//! the block `(Ty, T²y, …, y)`. On a good block the line rearranger produces a
//! Hamiltonian path through the block positions; following it and closing
//! back through `y` gives a new cycle on the same points whose consecutive
//! label pairs follow the target coupling. Other cycles are left alone, so the
//! result always has exactly the orbits of the input.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::line::{rearrange_line_unchecked, LineBijection};
use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::space::{empirical_distribution, linf, Coupling, Dist, Observable, PairCounts};
use crate::union_find::UnionFind;

/// Cycles of a permutation, ordered by smallest element, each starting there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleDecomposition {
    cycles: Vec<Vec<usize>>,
    cycle_of: Vec<usize>,
}

impl CycleDecomposition {
    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn cycle(&self, c: usize) -> &[usize] {
        &self.cycles[c]
    }

    pub fn cycle_of(&self, x: usize) -> usize {
        self.cycle_of[x]
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn space_size(&self) -> usize {
        self.cycle_of.len()
    }
}

pub fn cycle_decomposition(t: &Permutation) -> CycleDecomposition {
    let n = t.len();
    let mut cycle_of = vec![usize::MAX; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if cycle_of[start] != usize::MAX {
            continue;
        }
        let id = cycles.len();
        let mut cyc = Vec::new();
        let mut x = start;
        loop {
            cycle_of[x] = id;
            cyc.push(x);
            x = t[x];
            if x == start {
                break;
            }
        }
        cycles.push(cyc);
    }
    CycleDecomposition { cycles, cycle_of }
}

/// True iff both permutations have the same cycles as sets.
pub fn verify_same_orbits(t: &Permutation, t_prime: &Permutation) -> bool {
    if t.len() != t_prime.len() {
        return false;
    }
    // each point labeled by the smallest element of its cycle
    let canon = |p: &Permutation| {
        let dec = cycle_decomposition(p);
        (0..p.len()).map(|x| dec.cycles[dec.cycle_of[x]][0]).collect::<Vec<_>>()
    };
    canon(t) == canon(t_prime)
}

/// Label statistics of each cycle against the global distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErgodicProfile<S> {
    /// Fraction of points on cycles whose deviation exceeds the threshold.
    pub bad_mass: S,
    /// `‖ψ_*ν_c − ψ_*μ‖∞` per cycle, with `ν_c` uniform on cycle `c`.
    pub deviations: Vec<S>,
    pub lengths: Vec<usize>,
}

fn cycle_counts(dec: &CycleDecomposition, psi: &Observable) -> Vec<Vec<u64>> {
    dec.cycles
        .par_iter()
        .map(|cyc| {
            let mut c = vec![0u64; psi.alphabet_size()];
            for &x in cyc {
                c[psi.label(x)] += 1;
            }
            c
        })
        .collect()
}

fn deviation<S: Scalar>(counts: &[u64], len: usize, target: &[S]) -> S {
    counts
        .iter()
        .zip(target)
        .map(|(&c, p)| (S::from_count(c, len as u64) - p.clone()).abs())
        .fold(S::zero(), |a, b| if b > a { b } else { a })
}

pub fn ergodic_profile<S: Scalar>(t: &Permutation, psi: &Observable, threshold: &S) -> Result<ErgodicProfile<S>> {
    if t.len() != psi.len() {
        return Err(Error::Shape(format!("permutation on {} points, labels on {}", t.len(), psi.len())));
    }
    let dec = cycle_decomposition(t);
    let global = empirical_distribution(psi).probs::<S>();
    let counts = cycle_counts(&dec, psi);
    let mut bad = 0u64;
    let mut deviations = Vec::with_capacity(dec.len());
    let mut lengths = Vec::with_capacity(dec.len());
    for (cyc, c) in dec.cycles.iter().zip(&counts) {
        let d = deviation(c, cyc.len(), &global);
        if d > *threshold {
            bad += cyc.len() as u64;
        }
        deviations.push(d);
        lengths.push(cyc.len());
    }
    Ok(ErgodicProfile { bad_mass: S::from_count(bad, t.len() as u64), deviations, lengths })
}

/// One marked point per cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    points: Vec<usize>,
    n: usize,
}

impl Section {
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// `μ(Y)`.
    pub fn measure<S: Scalar>(&self) -> S {
        S::from_count(self.points.len() as u64, self.n as u64)
    }
}

/// The smallest point of every cycle.
pub fn choose_section(dec: &CycleDecomposition) -> Section {
    Section { points: dec.cycles.iter().map(|c| c[0]).collect(), n: dec.space_size() }
}

/// The return-time block over the base point of one cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerBlock {
    pub cycle: usize,
    pub base: usize,
    /// `(Ty, T²y, …, y)`.
    pub order: Vec<usize>,
    pub labels: Observable,
}

pub fn tower_block(dec: &CycleDecomposition, c: usize, psi: &Observable) -> TowerBlock {
    let cyc = &dec.cycles[c];
    let mut order = Vec::with_capacity(cyc.len());
    order.extend_from_slice(&cyc[1..]);
    order.push(cyc[0]);
    let labels = order.iter().map(|&x| psi.label(x)).collect();
    TowerBlock {
        cycle: c,
        base: cyc[0],
        order,
        labels: Observable::new(labels, psi.alphabet_size()).expect("labels come from psi"),
    }
}

/// Which cycles get rearranged.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum CycleGate {
    /// Cycles that are ε-good: length at least 3, label distribution close to
    /// the margins of `J`, and long enough for the rounding step.
    #[default]
    EpsGood,
    /// Every cycle of length at least 3, regardless of statistics.
    All,
    /// ε-good cycles except the listed cycle ids, which are kept as they are.
    EpsGoodExcept(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewireOptions<S> {
    pub eps: S,
    /// A cycle is close enough when `‖ψ_*ν_c − margins(J)‖∞` is below this.
    pub deviation_threshold: S,
    /// The error bound applies when the mass of cycles left alone is below this.
    pub mass_bound: S,
    pub gate: CycleGate,
}

impl<S: Scalar> RewireOptions<S> {
    /// Threshold and mass bound both equal to `eps`.
    pub fn new(eps: S) -> Self {
        Self { deviation_threshold: eps.clone(), mass_bound: eps.clone(), eps, gate: CycleGate::EpsGood }
    }

    pub fn with_gate(mut self, gate: CycleGate) -> Self {
        self.gate = gate;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleReport<S> {
    pub length: usize,
    pub good: bool,
    /// `‖(ψ ∨ ψ∘T′)_* ν_c − J‖∞` on this cycle.
    pub error: S,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RewireReport<S> {
    pub good_mass: S,
    pub bad_mass: S,
    /// `‖(ψ ∨ ψ∘T′)_* μ − J‖∞`.
    pub achieved_error: S,
    /// `9|A|ε`.
    pub bound: S,
    /// ε < 1/6, min J > 2|A|ε, margins of `J` within ε of the label
    /// distribution, bad mass below the mass bound and every rearranged cycle
    /// of length at least `|A|²/ε`.
    pub hypotheses_held: bool,
    pub per_cycle: Vec<CycleReport<S>>,
}

impl<S: Scalar> RewireReport<S> {
    pub fn within_bound(&self) -> bool {
        self.achieved_error <= self.bound
    }
}

/// `9|A|ε`.
pub fn rewire_bound<S: Scalar>(k: usize, eps: &S) -> S {
    S::from_usize(9 * k) * eps.clone()
}

/// The global hypotheses of [`rewire`]: `0 < ε < 1/6`, `min J > 2|A|ε` and
/// both margins of `J` within `ε` of the label distribution `pi`.
pub fn rewire_preconditions<S: Scalar>(j: &Coupling<S>, pi: &Dist, eps: &S) -> Result<()> {
    let k = j.alphabet_size();
    if pi.alphabet_size() != k {
        return Err(Error::Shape(format!("coupling over {k} symbols, labels over {}", pi.alphabet_size())));
    }
    if *eps <= S::zero() || *eps >= S::from_ratio(1, 6) {
        return Err(Error::Precondition(format!("ε = {eps} is not in (0, 1/6)")));
    }
    let need = S::from_usize(2 * k) * eps.clone();
    if j.min_entry() <= need {
        return Err(Error::Precondition(format!(
            "min entry {} of J is not above 2|A|ε = {need}",
            j.min_entry()
        )));
    }
    let gap = j.margin_gap(&pi.probs())?;
    if gap >= *eps {
        return Err(Error::Precondition(format!(
            "margins of J differ from the label distribution by {gap}, not below ε = {eps}"
        )));
    }
    Ok(())
}

/// Rewire `t` so that `(ψ, ψ∘T′)` approximately has law `j`, after checking
/// the global hypotheses. Deviation threshold and mass bound are both `ε`.
pub fn rewire<S: Scalar>(
    t: &Permutation,
    psi: &Observable,
    j: &Coupling<S>,
    eps: &S,
) -> Result<(Permutation, RewireReport<S>)> {
    if t.len() != psi.len() {
        return Err(Error::Shape(format!("permutation on {} points, labels on {}", t.len(), psi.len())));
    }
    rewire_preconditions(j, &empirical_distribution(psi), eps)?;
    rewire_with(t, psi, j, &RewireOptions::new(eps.clone()))
}

/// Rewire without rejecting failed hypotheses; they are reported instead.
/// The output always has the same cycles as `t`.
pub fn rewire_with<S: Scalar>(
    t: &Permutation,
    psi: &Observable,
    j: &Coupling<S>,
    opts: &RewireOptions<S>,
) -> Result<(Permutation, RewireReport<S>)> {
    let n = t.len();
    if n != psi.len() {
        return Err(Error::Shape(format!("permutation on {n} points, labels on {}", psi.len())));
    }
    let k = psi.alphabet_size();
    if j.alphabet_size() != k {
        return Err(Error::Shape(format!("coupling over {} symbols, labels over {k}", j.alphabet_size())));
    }
    let eps = &opts.eps;
    let dec = cycle_decomposition(t);
    let counts = cycle_counts(&dec, psi);
    let margins = (j.row_margin(), j.col_margin());
    let min_j = j.min_entry();
    let slack = min_j.clone() - S::from_usize(2 * k) * eps.clone();
    let excluded: &[usize] = match &opts.gate {
        CycleGate::EpsGoodExcept(ids) => ids,
        _ => &[],
    };

    let is_good = |c: usize| -> bool {
        let len = dec.cycles[c].len();
        if len < 3 {
            return false;
        }
        match opts.gate {
            CycleGate::All => true,
            _ if excluded.contains(&c) => false,
            _ => {
                let dev = |m: &[S]| deviation(&counts[c], len, m);
                dev(&margins.0) < opts.deviation_threshold
                    && dev(&margins.1) < opts.deviation_threshold
                    && slack > S::from_ratio((k * k) as i128, len as i128)
            }
        }
    };

    let pieces: Vec<(Vec<(usize, usize)>, CycleReport<S>)> = (0..dec.len())
        .into_par_iter()
        .map(|c| -> Result<_> {
            let cyc = &dec.cycles[c];
            let good = is_good(c);
            let edges: Vec<(usize, usize)> = if good {
                let block = tower_block(&dec, c, psi);
                let (sigma, _) = rearrange_line_unchecked(&block.labels, j, eps)?;
                reclose(&block.order, &sigma)
            } else {
                cyc.iter().map(|&x| (x, t[x])).collect()
            };
            let mut pc = vec![0u64; k * k];
            for &(x, y) in &edges {
                pc[psi.label(x) * k + psi.label(y)] += 1;
            }
            let error = linf(&PairCounts::new(k, pc)?.to_coupling(), j)?;
            Ok((edges, CycleReport { length: cyc.len(), good, error }))
        })
        .collect::<Result<_>>()?;

    let mut images = vec![usize::MAX; n];
    let mut total = vec![0u64; k * k];
    let mut good_points = 0u64;
    let mut long_enough = true;
    let min_len = S::from_usize(k * k) / eps.clone();
    let mut per_cycle = Vec::with_capacity(pieces.len());
    for (edges, rep) in pieces {
        for (x, y) in edges {
            images[x] = y;
            total[psi.label(x) * k + psi.label(y)] += 1;
        }
        if rep.good {
            good_points += rep.length as u64;
            long_enough &= S::from_usize(rep.length) >= min_len;
        }
        per_cycle.push(rep);
    }
    let t_prime = Permutation::new(images).expect("rewired cycles partition the space");
    debug_assert!(verify_same_orbits(t, &t_prime));

    let achieved_error = linf(&PairCounts::new(k, total)?.to_coupling(), j)?;
    let good_mass = S::from_count(good_points, n as u64);
    let bad_mass = S::one() - good_mass.clone();
    let hypotheses_held = rewire_preconditions(j, &empirical_distribution(psi), eps).is_ok()
        && bad_mass < opts.mass_bound
        && long_enough;
    let report = RewireReport {
        good_mass,
        bad_mass,
        achieved_error,
        bound: rewire_bound(k, eps),
        hypotheses_held,
        per_cycle,
    };
    Ok((t_prime, report))
}

/// Follow the line `σ` through the block positions and close it through the
/// base point, which sits at the last position.
fn reclose(order: &[usize], sigma: &LineBijection) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = sigma
        .images()
        .iter()
        .enumerate()
        .map(|(p, &q)| (order[p], order[q]))
        .collect();
    edges.push((order[order.len() - 1], order[0]));
    edges
}

/// `max_i |T′(C_i) △ D_i|`, counted in points.
pub fn ergodic_mismatch(t_prime: &Permutation, c: &Observable, d: &Observable) -> Result<usize> {
    if c.alphabet_size() != d.alphabet_size() || c.len() != d.len() || c.len() != t_prime.len() {
        return Err(Error::Shape("partitions and permutation must share space and atom count".into()));
    }
    let mut diff = vec![0usize; c.alphabet_size()];
    for x in 0..c.len() {
        let (i, j) = (c.label(x), d.label(t_prime[x]));
        if i != j {
            diff[i] += 1;
            diff[j] += 1;
        }
    }
    Ok(diff.into_iter().max().unwrap_or(0))
}

/// A single `n`-cycle `T′` on the points of the single cycle `t` with
/// `T′(C_i)` close to `D_i`: at most `2k` points off per atom.
///
/// Points keep their `T`-image when it already lies in the right atom of `D`;
/// the rest are matched in ascending order. Cycles of that bijection are
/// then joined by swapping images within an atom of `C` (which keeps every
/// `T′(C_i) = D_i`), and the at most `k` survivors are joined by rotating one
/// image per cycle.
pub fn rewire_ergodic(t: &Permutation, c: &Observable, d: &Observable) -> Result<Permutation> {
    let n = t.len();
    if c.len() != n || d.len() != n {
        return Err(Error::Shape(format!("partitions on {} and {} points, permutation on {n}", c.len(), d.len())));
    }
    if cycle_decomposition(t).len() != 1 {
        return Err(Error::Precondition("the permutation must be a single cycle".into()));
    }
    if c.alphabet_size() != d.alphabet_size() || empirical_distribution(c).counts() != empirical_distribution(d).counts() {
        return Err(Error::MarginMismatch("C and D must have equal atom sizes".into()));
    }
    let k = c.alphabet_size();
    let mut images = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    for x in 0..n {
        if d.label(t[x]) == c.label(x) {
            images[x] = t[x];
            taken[t[x]] = true;
        }
    }
    let mut free: Vec<Vec<usize>> = vec![Vec::new(); k];
    for y in (0..n).rev() {
        if !taken[y] {
            free[d.label(y)].push(y);
        }
    }
    for x in 0..n {
        if images[x] == usize::MAX {
            images[x] = free[c.label(x)].pop().expect("atom sizes agree");
        }
    }

    let mut uf = UnionFind::new(n);
    for (x, &y) in images.iter().enumerate() {
        uf.union(x, y);
    }
    let mut anchor = vec![usize::MAX; k];
    for x in 0..n {
        let a = &mut anchor[c.label(x)];
        if *a == usize::MAX {
            *a = x;
        } else if uf.find(*a) != uf.find(x) {
            images.swap(*a, x);
            uf.union(*a, x);
        }
    }

    let mut seen = vec![false; n];
    let mut reps = Vec::new();
    for x in 0..n {
        let r = uf.find(x);
        if !std::mem::replace(&mut seen[r], true) {
            reps.push(x);
        }
    }
    if reps.len() > 1 {
        let first = images[reps[0]];
        for s in 0..reps.len() - 1 {
            images[reps[s]] = images[reps[s + 1]];
        }
        let last = reps[reps.len() - 1];
        images[last] = first;
    }
    Permutation::new(images)
}
