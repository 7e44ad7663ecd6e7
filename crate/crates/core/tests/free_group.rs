use std::collections::{HashMap, HashSet};

use orbit_forge::free_group::ball_size;
use orbit_forge::{ball, evaluate, reduce, refine_partition, FiniteAction, GeneratorSet, Letter, Observable, Permutation, ReducedWord};
use proptest::prelude::*;

fn letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    proptest::collection::vec((0..rank, any::<bool>()).prop_map(|(g, inv)| Letter { generator: g, inverse: inv }), 0..max_len)
}

fn action(n: usize, rank: usize) -> impl Strategy<Value = FiniteAction> {
    proptest::collection::vec(Just((0..n).collect::<Vec<usize>>()).prop_shuffle(), rank)
        .prop_map(|ps| FiniteAction::new(ps.into_iter().map(|p| Permutation::new(p).unwrap()).collect()).unwrap())
}

/// Apply letters right to left, straight from the generator images.
fn act(a: &FiniteAction, word: &[Letter], x: usize) -> usize {
    word.iter().rev().fold(x, |y, l| {
        let p = a.generator(l.generator);
        if l.inverse {
            p.images().iter().position(|&z| z == y).unwrap()
        } else {
            p[y]
        }
    })
}

proptest! {
    #[test]
    fn reduction_is_idempotent_and_free(w in letters(3, 20)) {
        let r = reduce(w.iter().copied());
        prop_assert!(r.letters().windows(2).all(|p| p[0] != p[1].inverse()));
        prop_assert_eq!(reduce(r.letters().iter().copied()), r.clone());
        prop_assert!(r.concat(&r.inverse()).is_identity());
        let printed: ReducedWord = r.to_string().replace(' ', "").parse().unwrap();
        prop_assert_eq!(printed, r);
    }

    #[test]
    fn evaluation_matches_pointwise_action(a in action(12, 2), w in letters(2, 8), v in letters(2, 8)) {
        let g = reduce(w.iter().copied());
        let h = reduce(v.iter().copied());
        let pg = evaluate(&a, &g).unwrap();
        for x in 0..a.size() {
            prop_assert_eq!(pg[x], act(&a, &w, x));
        }
        let gh = evaluate(&a, &g.concat(&h)).unwrap();
        prop_assert_eq!(gh, pg.compose(&evaluate(&a, &h).unwrap()));
        prop_assert!(evaluate(&a, &g.inverse()).unwrap().compose(&pg).is_identity());
    }

    #[test]
    fn refinement_atoms_are_signature_classes(a in action(30, 2), labels in proptest::collection::vec(0..3usize, 30), r in 0..3usize) {
        let p = Observable::new(labels, 3).unwrap();
        let words = ball(&a.generators(), r);
        let fine = refine_partition(&p, &words, &a).unwrap();
        // two points share an atom iff g⁻¹x and g⁻¹y share a P-atom for every g
        let inv: Vec<Permutation> = words.iter().map(|w| evaluate(&a, &w.inverse()).unwrap()).collect();
        let sig = |x: usize| inv.iter().map(|gi| p.label(gi[x])).collect::<Vec<_>>();
        let mut classes: HashMap<Vec<usize>, usize> = HashMap::new();
        for x in 0..a.size() {
            let c = *classes.entry(sig(x)).or_insert(fine.label(x));
            prop_assert_eq!(c, fine.label(x));
        }
        prop_assert_eq!(classes.len(), fine.alphabet_size());
    }
}

#[test]
fn balls_have_the_free_group_size() {
    for rank in 1..=3 {
        for r in 0..=4 {
            let b = ball(&GeneratorSet::new(rank).unwrap(), r);
            assert_eq!(b.len(), ball_size(rank, r));
            let expected = if r == 0 { 1 } else { 1 + 2 * rank * ((2 * rank - 1).pow(r as u32) - 1) / (2 * rank - 2).max(1) };
            if rank > 1 {
                assert_eq!(b.len(), expected, "rank {rank} radius {r}");
            } else {
                assert_eq!(b.len(), 2 * r + 1);
            }
            let distinct: HashSet<_> = b.iter().collect();
            assert_eq!(distinct.len(), b.len());
            assert!(b.iter().all(|w| w.len() <= r && reduce(w.letters().iter().copied()) == *w));
        }
    }
}
