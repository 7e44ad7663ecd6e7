use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::space::{empirical_distribution, Observable, PairCounts};

use super::LineBijection;

/// Realize an integer self-coupling of the empirical distribution of `phi`
/// as a bijection `{0..N-2} → {1..N-1}`.
///
/// Points labeled `a` are split into blocks `P_{a,b}` of size `N·J′(a,b)` in
/// ascending order. This fixes, for every point, the label of its image. The
/// permutation `β` then sends the last point to itself when its block allows
/// it, and every other point `x` to the smallest unused point of the required
/// label that is greater than `x`, wrapping around to the smallest unused one.
/// Finally the out-edge of `N-1` is dropped and `β⁻¹(0)` is sent to `β(N-1)`
/// instead, which perturbs at most one edge.
pub fn build_tau(phi: &Observable, j_prime: &PairCounts) -> Result<LineBijection> {
    let n = phi.len();
    let k = phi.alphabet_size();
    if j_prime.alphabet_size() != k {
        return Err(Error::Shape(format!(
            "coupling over {} symbols, observable over {k}",
            j_prime.alphabet_size()
        )));
    }
    let pi = empirical_distribution(phi);
    if j_prime.denom() != n as u64 || j_prime.row_counts() != pi.counts() || j_prime.col_counts() != pi.counts() {
        return Err(Error::MarginMismatch(
            "integer coupling margins differ from the label counts".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Shape("empty observable".into()));
    }

    let atoms = phi.atoms();
    let mut target = vec![0usize; n];
    for (a, pts) in atoms.iter().enumerate() {
        let mut it = pts.iter();
        for b in 0..k {
            for &x in it.by_ref().take(j_prime.get(a, b) as usize) {
                target[x] = b;
            }
        }
    }

    let last = n - 1;
    let mut beta = vec![usize::MAX; n];
    let mut pools = atoms;
    if target[last] == phi.label(last) {
        let pool = &mut pools[target[last]];
        pool.pop();
        beta[last] = last;
    }
    let mut ahead = vec![0usize; k];
    let mut behind: Vec<VecDeque<usize>> = vec![VecDeque::new(); k];
    for x in 0..n {
        if beta[x] != usize::MAX {
            continue;
        }
        let b = target[x];
        let (pool, cur, back) = (&pools[b], &mut ahead[b], &mut behind[b]);
        while *cur < pool.len() && pool[*cur] <= x {
            back.push_back(pool[*cur]);
            *cur += 1;
        }
        beta[x] = if *cur < pool.len() {
            *cur += 1;
            pool[*cur - 1]
        } else {
            back.pop_front().expect("pool sizes match block sizes")
        };
    }

    let mut images = beta;
    let end = images.pop().expect("n >= 1");
    if end != 0 {
        let pre = images.iter().position(|&y| y == 0).expect("β is onto");
        images[pre] = end;
    }
    debug_assert_eq!(images.len(), last);
    LineBijection::new(images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{empirical_pair_distribution, linf};
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    #[test]
    fn four_point_hand_construction() {
        // 1-based: β = (1→3, 2→1, 3→2, 4→4), τ = (1→3, 2→4, 3→2)
        let phi = Observable::from_labels(vec![0, 1, 0, 1]);
        let j = PairCounts::new(2, vec![1, 1, 1, 1]).unwrap();
        let tau = build_tau(&phi, &j).unwrap();
        assert_eq!(tau.images(), &[2, 3, 1]);
    }

    #[test]
    fn constant_labels_give_identity_line() {
        let phi = Observable::constant(6);
        let tau = build_tau(&phi, &PairCounts::new(1, vec![6]).unwrap()).unwrap();
        assert_eq!(tau.images(), &[1, 2, 3, 4, 5]);
        let tau = build_tau(&Observable::constant(2), &PairCounts::new(1, vec![2]).unwrap()).unwrap();
        assert_eq!(tau.images(), &[1]);
    }

    #[test]
    fn forced_two_point() {
        let phi = Observable::from_labels(vec![0, 1]);
        let tau = build_tau(&phi, &PairCounts::new(2, vec![0, 1, 1, 0]).unwrap()).unwrap();
        assert_eq!(tau.images(), &[1]);
    }

    #[test]
    fn margin_mismatch_is_rejected() {
        let phi = Observable::from_labels(vec![0, 1, 0, 1]);
        let j = PairCounts::new(2, vec![2, 1, 0, 1]).unwrap();
        assert!(matches!(build_tau(&phi, &j), Err(Error::MarginMismatch(_))));
    }

    #[test]
    fn pair_counts_within_two_over_n_minus_one() {
        let phi = Observable::from_labels(vec![0, 1, 1, 0, 2, 2, 0, 1, 2, 0]);
        let j = PairCounts::new(3, vec![2, 1, 1, 1, 1, 1, 1, 1, 1]).unwrap();
        let tau = build_tau(&phi, &j).unwrap();
        let got = empirical_pair_distribution(&phi, &tau).unwrap().to_coupling::<Q>();
        assert!(linf(&got, &j.to_coupling()).unwrap() <= Q::new(2, 9));
    }
}
