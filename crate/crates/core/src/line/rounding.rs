use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::{Coupling, Dist, PairCounts};

use super::check_preconditions;

/// Round a real coupling to a self-coupling of `pi_prime` with entries in
/// `(1/N)·ℤ`, where `N = pi_prime.denom()`.
///
/// Symbol `0` is distinguished: entries off its row and column are rounded to
/// the nearest multiple of `1/N` (ties down), and its row and column absorb
/// whatever the margins of `pi_prime` require.
pub fn round_coupling<S: Scalar>(j: &Coupling<S>, pi_prime: &Dist, eps: &S) -> Result<PairCounts> {
    check_preconditions(j, pi_prime, eps)?;
    let out = round_coupling_unchecked(j, pi_prime);
    if out.repairs > 0 {
        return Err(Error::Precondition(format!(
            "rounding produced {} negative entries despite the hypotheses",
            out.repairs
        )));
    }
    Ok(out.counts)
}

pub struct Rounded {
    pub counts: PairCounts,
    /// Unit moves spent lifting negative entries back to zero. Always zero
    /// when the rounding hypotheses hold.
    pub repairs: u64,
}

/// The same rounding without hypothesis checks. If the margin subtraction
/// leaves negative entries, mass is moved around 2x2 rectangles (which keeps
/// both margins) until every entry is nonnegative.
pub fn round_coupling_unchecked<S: Scalar>(j: &Coupling<S>, pi_prime: &Dist) -> Rounded {
    let k = pi_prime.alphabet_size();
    assert_eq!(j.alphabet_size(), k, "coupling and distribution alphabets differ");
    let n = pi_prime.denom();
    let pi: Vec<i128> = pi_prime.counts().iter().map(|&c| c as i128).collect();
    let mut m = vec![0i128; k * k];

    for b in 1..k {
        for c in 1..k {
            m[b * k + c] = j.get(b, c).nearest_count(n);
        }
    }
    for c in 1..k {
        m[c] = pi[c] - (1..k).map(|t| m[t * k + c]).sum::<i128>();
    }
    for b in 1..k {
        m[b * k] = pi[b] - (1..k).map(|t| m[b * k + t]).sum::<i128>();
    }
    m[0] = pi[0] - (1..k).map(|t| m[t]).sum::<i128>();

    let mut repairs = 0u64;
    while let Some(idx) = (0..k * k).find(|&i| m[i] < 0) {
        let (b, c) = (idx / k, idx % k);
        // the row and column of a negative entry each hold a positive one,
        // since both margins are nonnegative
        let c2 = (0..k).max_by_key(|&t| (m[b * k + t], std::cmp::Reverse(t))).unwrap();
        let b2 = (0..k).max_by_key(|&t| (m[t * k + c], std::cmp::Reverse(t))).unwrap();
        debug_assert!(m[b * k + c2] > 0 && m[b2 * k + c] > 0);
        m[b * k + c] += 1;
        m[b2 * k + c2] += 1;
        m[b * k + c2] -= 1;
        m[b2 * k + c] -= 1;
        repairs += 1;
    }

    let counts = m.into_iter().map(|v| v as u64).collect();
    Rounded { counts: PairCounts::new(k, counts).expect("k*k entries"), repairs }
}
