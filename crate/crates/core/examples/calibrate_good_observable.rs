//! Monte Carlo calibration of the retry budget for `good_observable`.
//!
//! For each minimum cycle length and ε, draws rank-2 actions whose generators
//! only have cycles of at least that length, runs the lemma-form acceptance
//! test (threshold 3ε, mass bound ε) with i.i.d. balanced labels, and reports
//! how often the first accepted attempt falls within each retry budget.
//!
//! ```text
//! cargo run --release -p orbit-forge --example calibrate_good_observable [seeds]
//! ```

use orbit_forge::pipeline::rng::{stream, Purpose};
use orbit_forge::pipeline::{good_observable, GoodObservableParams};
use orbit_forge::{Dist, FiniteAction, Permutation};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

/// A permutation of `n` points whose cycles all have length at least `min_len`.
fn long_cycles<R: Rng>(n: usize, min_len: usize, rng: &mut R) -> Permutation {
    let parts = rng.gen_range(1..=(n / min_len).clamp(1, 10));
    let free = n - parts * min_len;
    let mut cuts: Vec<usize> = (0..parts - 1).map(|_| rng.gen_range(0..=free)).collect();
    cuts.sort_unstable();
    cuts.push(free);
    let mut pts: Vec<usize> = (0..n).collect();
    pts.shuffle(rng);
    let mut images = vec![0; n];
    let (mut at, mut prev) = (0, 0);
    for c in cuts {
        let len = min_len + c - prev;
        prev = c;
        let cyc = &pts[at..at + len];
        for i in 0..len {
            images[cyc[i]] = cyc[(i + 1) % len];
        }
        at += len;
    }
    Permutation::new(images).expect("cycles cover every point")
}

fn main() {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200);
    let n = 100_000;
    let max_retries = 8;
    let pi = Dist::new(vec![1, 1]).unwrap();
    println!("min_cycle,eps,seeds,{}", (1..=max_retries).map(|r| format!("within_{r}")).collect::<Vec<_>>().join(","));
    for &min_len in &[100usize, 300, 1_000, 10_000] {
        for &eps in &[0.01, 0.02, 0.05] {
            let params = GoodObservableParams::lemma(&eps, max_retries);
            let attempts: Vec<Option<usize>> = (0..seeds)
                .into_par_iter()
                .map(|seed| {
                    let mut rng = stream(seed, Purpose::SourceAction, min_len as u64);
                    let a = FiniteAction::new((0..2).map(|_| long_cycles(n, min_len, &mut rng)).collect()).unwrap();
                    good_observable(&a, &pi, &params, seed).ok().map(|g| g.attempts)
                })
                .collect();
            let within: Vec<String> = (1..=max_retries)
                .map(|r| attempts.iter().filter(|a| a.is_some_and(|a| a <= r)).count().to_string())
                .collect();
            println!("{min_len},{eps},{seeds},{}", within.join(","));
        }
    }
}
