//! Instance generators and brute-force oracles shared by the integration
//! tests. Nothing here calls into the algorithms under test; the oracles
//! recompute every quantity from raw images and labels.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::Signed;
use orbit_forge::{Coupling, Observable, Permutation};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Q = Ratio<i128>;

pub fn rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// A symmetric coupling on `k` symbols with every entry at least `floor`:
/// `floor + (1 − k²·floor)·W` for a random symmetric probability matrix `W`.
pub fn symmetric_coupling<R: Rng>(k: usize, floor: f64, rng: &mut R) -> Coupling<f64> {
    let mut w = vec![0.0; k * k];
    for a in 0..k {
        for b in a..k {
            let v: f64 = rng.gen_range(0.05..1.0);
            w[a * k + b] = v;
            w[b * k + a] = v;
        }
    }
    let total: f64 = w.iter().sum();
    let spread = 1.0 - (k * k) as f64 * floor;
    let entries = w.iter().map(|v| floor + spread * v / total).collect();
    Coupling::new(k, entries).expect("valid coupling")
}

/// Integer counts summing to `n`, proportional to `p` (largest remainder).
pub fn apportion(p: &[f64], n: usize) -> Vec<usize> {
    let raw: Vec<f64> = p.iter().map(|x| x.max(0.0) * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    let mut rest = n - counts.iter().sum::<usize>();
    for &a in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        counts[a] += 1;
        rest -= 1;
    }
    counts
}

/// A shuffled labeling with the given symbol counts.
pub fn labels_with_counts<R: Rng>(counts: &[usize], rng: &mut R) -> Vec<usize> {
    let mut labels: Vec<usize> = counts.iter().enumerate().flat_map(|(a, &c)| std::iter::repeat(a).take(c)).collect();
    labels.shuffle(rng);
    labels
}

/// A random permutation whose cycles have the given lengths, placed on a
/// random arrangement of the points.
pub fn perm_with_cycle_lengths<R: Rng>(lengths: &[usize], rng: &mut R) -> Permutation {
    let n: usize = lengths.iter().sum();
    let mut pts: Vec<usize> = (0..n).collect();
    pts.shuffle(rng);
    let mut images = vec![0; n];
    let mut start = 0;
    for &len in lengths {
        let cyc = &pts[start..start + len];
        for i in 0..len {
            images[cyc[i]] = cyc[(i + 1) % len];
        }
        start += len;
    }
    Permutation::new(images).expect("cycles partition the points")
}

/// Split `total` into parts each at least `min_len` (at most `max_parts`).
pub fn random_lengths<R: Rng>(total: usize, min_len: usize, max_parts: usize, rng: &mut R) -> Vec<usize> {
    let parts = rng.gen_range(1..=max_parts.min(total / min_len.max(1)).max(1));
    let free = total - parts * min_len;
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.gen_range(0..=free)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(free)) {
        out.push(min_len + c - prev);
        prev = c;
    }
    out
}

/// The orbits of a permutation as a set of sorted point sets.
pub fn orbit_partition(images: &[usize]) -> BTreeSet<Vec<usize>> {
    let n = images.len();
    let mut seen = vec![false; n];
    let mut out = BTreeSet::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        let mut orbit = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            orbit.push(x);
            x = images[x];
        }
        orbit.sort_unstable();
        out.insert(orbit);
    }
    out
}

/// Pair counts `#{x : (labels[x], labels[images[x]]) = (a, b)}`.
pub fn pair_counts(labels: &[usize], images: &[usize], k: usize) -> Vec<u64> {
    let mut c = vec![0u64; k * k];
    for (x, &y) in images.iter().enumerate() {
        c[labels[x] * k + labels[y]] += 1;
    }
    c
}

/// `max |counts/denom − J|` in floating point.
pub fn linf_counts_f64(counts: &[u64], j: &[f64]) -> f64 {
    let d: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(j)
        .map(|(&c, &v)| (c as f64 / d as f64 - v).abs())
        .fold(0.0, f64::max)
}

/// The same distance, exactly.
pub fn linf_counts_exact(counts: &[u64], j: &[Q]) -> Q {
    let d: u64 = counts.iter().sum();
    counts
        .iter()
        .zip(j)
        .map(|(&c, v)| (Q::new(c as i128, d as i128) - v).abs())
        .fold(Q::from_integer(0), |a, b| if b > a { b } else { a })
}

/// Walk a line bijection from `0`; true when every point is visited once.
pub fn is_hamiltonian_line(images: &[usize]) -> bool {
    let n = images.len() + 1;
    let mut seen = vec![false; n];
    let mut x = 0;
    let mut visited = 1;
    seen[0] = true;
    while x < images.len() {
        x = images[x];
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
        visited += 1;
    }
    visited == n
}

/// Symbol counts of a labeling.
pub fn symbol_counts(labels: &[usize], k: usize) -> Vec<u64> {
    let mut c = vec![0u64; k];
    for &a in labels {
        c[a] += 1;
    }
    c
}

pub fn observable(labels: Vec<usize>, k: usize) -> Observable {
    Observable::new(labels, k).expect("labels below k")
}

/// All permutations of `items`, in lexicographic order of positions.
pub fn for_each_permutation(items: &mut [usize], f: &mut impl FnMut(&[usize])) {
    fn rec(items: &mut [usize], at: usize, f: &mut impl FnMut(&[usize])) {
        if at == items.len() {
            f(items);
            return;
        }
        for i in at..items.len() {
            items.swap(at, i);
            rec(items, at + 1, f);
            items.swap(at, i);
        }
    }
    rec(items, 0, f)
}

/// FNV-1a over a byte string; used to digest large outputs for comparison.
pub fn digest(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}
