//! Rearranging a labeled interval into a single line whose consecutive-label
//! statistics approximate a target coupling.
//!
//! Positions are 0-based. A line bijection on `N` points maps `{0..N-2}`
//! onto `{1..N-1}`; its pair graph has the edges `(i, σ(i))`. The pipeline
//! is: round the target to an integer self-coupling of the label counts
//! ([`round_coupling`]), realize it as a bijection ([`build_tau`]), merge
//! components by label-preserving swaps ([`merge_components`]) and rotate one
//! edge per remaining component to get a single path ([`close_line`]).
//! The result satisfies `‖J_σ − J‖∞ < 2|A|ε + 3|A|²/N`.

mod components;
mod rounding;
mod tau;

pub use components::{close_line, component_count, merge_components};
pub use rounding::{round_coupling, round_coupling_unchecked, Rounded};
pub use tau::build_tau;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{empirical_distribution, empirical_pair_distribution, linf, Coupling, Dist, Observable};

/// A bijection `{0..N-2} → {1..N-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LineBijection {
    images: Vec<usize>,
}

impl LineBijection {
    /// `images[i]` is the image of `i`; the line has `images.len() + 1` points.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len() + 1;
        let mut hit = vec![false; n];
        for (i, &j) in images.iter().enumerate() {
            if j == 0 || j >= n {
                return Err(Error::NotBijection(format!("image {j} of {i} is outside 1..{}", n - 1)));
            }
            if std::mem::replace(&mut hit[j], true) {
                return Err(Error::NotBijection(format!("image {j} is hit twice")));
            }
        }
        Ok(Self { images })
    }

    pub(crate) fn from_vec_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::new(images.clone()).is_ok());
        Self { images }
    }

    /// `i -> i + 1`.
    pub fn identity(n: usize) -> Self {
        Self { images: (1..n.max(1)).collect() }
    }

    /// Number of points `N`.
    pub fn len(&self) -> usize {
        self.images.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Vertices visited walking from `0` along the edges.
    pub fn line_order(&self) -> Vec<usize> {
        let mut order = vec![0];
        let mut x = 0;
        while x < self.images.len() {
            x = self.images[x];
            order.push(x);
        }
        order
    }

    /// The walk from `0` visits every point.
    pub fn is_connected(&self) -> bool {
        self.line_order().len() == self.len()
    }
}

/// Outcome of [`rearrange_line`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RearrangeReport<S> {
    /// `‖J_σ − J‖∞` with `J_σ` normalized by the `N − 1` edges.
    pub achieved_error: S,
    /// `2|A|ε + 3|A|²/N`.
    pub bound: S,
    pub components_after_merge: usize,
    pub edges_changed_by_close: usize,
}

impl<S: Scalar> RearrangeReport<S> {
    pub fn within_bound(&self) -> bool {
        self.achieved_error < self.bound
    }
}

/// `2|A|ε + 3|A|²/N`.
pub fn rearrange_bound<S: Scalar>(k: usize, n: usize, eps: &S) -> S {
    S::from_usize(2 * k) * eps.clone() + S::from_ratio(3 * (k * k) as i128, n as i128)
}

/// Checks `‖π′ − margins(J)‖∞ < ε` and `min J > 2|A|ε + |A|²/N`.
pub fn check_preconditions<S: Scalar>(j: &Coupling<S>, pi_prime: &Dist, eps: &S) -> Result<()> {
    let k = pi_prime.alphabet_size();
    if j.alphabet_size() != k {
        return Err(Error::Shape(format!("coupling over {} symbols, labels over {k}", j.alphabet_size())));
    }
    let n = pi_prime.denom();
    let gap = j.margin_gap(&pi_prime.probs())?;
    if gap >= *eps {
        return Err(Error::Precondition(format!(
            "margin gap ‖π′ − margins(J)‖∞ = {gap} is not below ε = {eps}"
        )));
    }
    let need = S::from_usize(2 * k) * eps.clone() + S::from_ratio((k * k) as i128, n as i128);
    let min = j.min_entry();
    if min <= need {
        return Err(Error::Precondition(format!(
            "min entry {min} of J is not above 2|A|ε + |A|²/N = {need}"
        )));
    }
    Ok(())
}

/// Rearrange `phi` into a connected line whose pair statistics approximate
/// `j`, after checking the hypotheses of the rounding step (`N ≥ 2`, margin
/// gap below `ε`, min entry above `2|A|ε + |A|²/N`).
pub fn rearrange_line<S: Scalar>(
    phi: &Observable,
    j: &Coupling<S>,
    eps: &S,
) -> Result<(LineBijection, RearrangeReport<S>)> {
    if phi.len() < 2 {
        return Err(Error::Precondition(format!("need N ≥ 2 points, got {}", phi.len())));
    }
    check_preconditions(j, &empirical_distribution(phi), eps)?;
    rearrange_line_unchecked(phi, j, eps)
}

/// The same pipeline with no hypothesis checks. Always returns a connected
/// line; the error bound is only guaranteed when the hypotheses hold.
pub fn rearrange_line_unchecked<S: Scalar>(
    phi: &Observable,
    j: &Coupling<S>,
    eps: &S,
) -> Result<(LineBijection, RearrangeReport<S>)> {
    let k = phi.alphabet_size();
    if j.alphabet_size() != k {
        return Err(Error::Shape(format!("coupling over {} symbols, labels over {k}", j.alphabet_size())));
    }
    let n = phi.len();
    if n == 0 {
        return Err(Error::Shape("empty observable".into()));
    }
    let pi_prime = empirical_distribution(phi);
    let rounded = round_coupling_unchecked(j, &pi_prime);
    let tau = build_tau(phi, &rounded.counts)?;
    let (merged, components) = merge_components(phi, &tau)?;
    let (sigma, changed) = close_line(&merged);
    let pairs = empirical_pair_distribution(phi, &sigma)?;
    let achieved_error = linf(&pairs.to_coupling(), j)?;
    let report = RearrangeReport {
        achieved_error,
        bound: rearrange_bound(k, n, eps),
        components_after_merge: components,
        edges_changed_by_close: changed,
    };
    Ok((sigma, report))
}
