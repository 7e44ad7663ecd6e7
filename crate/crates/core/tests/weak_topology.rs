mod common;

use num_traits::Zero;
use orbit_forge::weak_topology::{ball_transport_certificate, stats_matrices, AtomBijection};
use orbit_forge::{ball, evaluate, kechris_distance, refine_partition, stats_matrix, weak_distance, FiniteAction, Observable, Permutation};
use proptest::prelude::*;

use common::Q;

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle().prop_map(|p| Permutation::new(p).unwrap())
}

fn action(n: usize, rank: usize) -> impl Strategy<Value = FiniteAction> {
    proptest::collection::vec(perm(n), rank).prop_map(|ps| FiniteAction::new(ps).unwrap())
}

fn partition(n: usize, k: usize) -> impl Strategy<Value = Observable> {
    proptest::collection::vec(0..k, n).prop_map(move |l| Observable::new(l, k).unwrap())
}

proptest! {
    #[test]
    fn stats_rows_and_columns_are_atom_sizes(a in action(40, 2), p in partition(40, 3), r in 0..3usize) {
        let sizes: Vec<u64> = (0..3).map(|i| p.labels().iter().filter(|&&l| l == i).count() as u64).collect();
        for s in stats_matrices(&a, &p, &ball(&a.generators(), r)).unwrap() {
            let k = s.alphabet_size();
            prop_assert_eq!(s.row_counts(), sizes.clone());
            let cols: Vec<u64> = (0..k).map(|j| (0..k).map(|i| s.count(i, j)).sum()).collect();
            prop_assert_eq!(cols, sizes.clone());
            // oracle: μ(P_i ∩ g·P_j) = #{x : P(x) = i, P(g⁻¹x) = j} / n
            let gi = evaluate(&a, &s.word().inverse()).unwrap();
            for i in 0..k {
                for j in 0..k {
                    let direct = (0..40).filter(|&x| p.label(x) == i && p.label(gi[x]) == j).count() as u64;
                    prop_assert_eq!(s.count(i, j), direct);
                }
            }
        }
    }

    #[test]
    fn kechris_is_a_pseudometric(u in action(24, 2), v in action(24, 2), w in action(24, 2),
                                 p in partition(24, 2), q in partition(24, 2), o in partition(24, 2)) {
        let words = ball(&u.generators(), 2);
        let d = |x: &FiniteAction, y: &FiniteAction, px: &Observable, py: &Observable| -> Q {
            kechris_distance(x, y, px, py, &words).unwrap()
        };
        prop_assert_eq!(d(&u, &u, &p, &p), Q::zero());
        prop_assert_eq!(d(&u, &v, &p, &q), d(&v, &u, &q, &p));
        prop_assert!(d(&u, &w, &p, &o) <= d(&u, &v, &p, &q) + d(&v, &w, &q, &o));
    }

    #[test]
    fn conjugate_data_has_zero_distance(v in action(30, 2), p in partition(30, 3), t in perm(30)) {
        let w = v.conjugate(&t);
        let mut moved = vec![0; 30];
        for x in 0..30 {
            moved[t[x]] = p.label(x);
        }
        let q = Observable::new(moved, 3).unwrap();
        let words = ball(&v.generators(), 2);
        prop_assert_eq!(kechris_distance::<Q>(&v, &w, &p, &q, &words).unwrap(), Q::zero());
    }

    #[test]
    fn weak_distance_is_a_metric_on_fixed_sets(t in perm(20), u in perm(20), s in perm(20),
                                               sets in proptest::collection::vec(proptest::collection::vec(0..20usize, 0..8), 1..5)) {
        let d = |a: &Permutation, b: &Permutation| -> Q { weak_distance(a, b, &sets).unwrap() };
        prop_assert_eq!(d(&t, &t), Q::zero());
        prop_assert_eq!(d(&t, &u), d(&u, &t));
        prop_assert!(d(&t, &s) <= d(&t, &u) + d(&u, &s));
    }

    /// Whenever the certificate reports the generator hypothesis, both claims
    /// and the final bound follow.
    #[test]
    fn transport_is_sound(v in action(60, 1), p in partition(60, 2), t in perm(60),
                          swaps in proptest::collection::vec((0..60usize, 0..60usize), 0..3),
                          eps_num in 1i128..10) {
        let eps = Q::new(eps_num, 10);
        let words = ball(&v.generators(), 2);
        let fine = refine_partition(&p, &words, &v).unwrap();
        let kp = fine.alphabet_size();
        let mut perm = v.conjugate(&t).generator(0).clone();
        for (x, y) in swaps {
            perm = perm.with_transposition(x, y);
        }
        let w = FiniteAction::new(vec![perm]).unwrap();
        let mut moved = vec![0; 60];
        for x in 0..60 {
            moved[t[x]] = fine.label(x);
        }
        let beta = AtomBijection::new((0..kp).collect(), Observable::new(moved, kp).unwrap()).unwrap();
        let cert = ball_transport_certificate(&v, &w, &p, 2, &beta, &eps).unwrap();
        if cert.hypothesis_held {
            prop_assert!(cert.claim1_holds());
            prop_assert!(cert.claim2_holds());
            prop_assert!(cert.final_discrepancy < eps);
        }
    }
}

#[test]
fn identity_word_statistics_are_diagonal() {
    let a = FiniteAction::new(vec![Permutation::shift(6)]).unwrap();
    let p = Observable::from_labels(vec![0, 0, 1, 1, 2, 2]);
    let s = stats_matrix(&a, &p, &"e".parse().unwrap()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(s.count(i, j), if i == j { 2 } else { 0 });
        }
    }
}
