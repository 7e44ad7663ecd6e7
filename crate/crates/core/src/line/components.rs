use crate::error::{Error, Result};
use crate::space::Observable;
use crate::union_find::UnionFind;

use super::LineBijection;

fn components_of(images: &[usize]) -> UnionFind {
    let mut uf = UnionFind::new(images.len() + 1);
    for (i, &j) in images.iter().enumerate() {
        uf.union(i, j);
    }
    uf
}

/// Number of connected components of the pair graph.
pub fn component_count(tau: &LineBijection) -> usize {
    components_of(tau.images()).sets()
}

/// Join components by swapping the images of two edges that carry the same
/// label pair. Each swap joins exactly two components and leaves the multiset
/// of label pairs unchanged.
///
/// Edges are scanned in ascending order; each is compared with the first
/// edge of its label-pair bucket and swapped with it when the two lie in
/// different components. Afterwards all edges of a bucket share a component,
/// so at most `|A|²` components remain.
///
/// Returns the new bijection and its component count.
pub fn merge_components(phi: &Observable, tau: &LineBijection) -> Result<(LineBijection, usize)> {
    if phi.len() != tau.len() {
        return Err(Error::Shape(format!("line on {} points, observable on {}", tau.len(), phi.len())));
    }
    let k = phi.alphabet_size();
    let mut images = tau.images().to_vec();
    let mut uf = components_of(&images);
    let mut anchor = vec![usize::MAX; k * k];
    for i in 0..images.len() {
        let bucket = phi.label(i) * k + phi.label(images[i]);
        let first = anchor[bucket];
        if first == usize::MAX {
            anchor[bucket] = i;
        } else if uf.find(first) != uf.find(i) {
            images.swap(first, i);
            uf.union(first, i);
        }
    }
    let sets = uf.sets();
    Ok((LineBijection::from_vec_unchecked(images), sets))
}

/// Make the pair graph connected by rotating the images of one
/// representative per component: with representatives `i_1 < … < i_k`
/// (the smallest vertex of each component that has an out-edge),
/// `σ(i_s) = τ(i_{s+1})`, indices mod `k`.
///
/// Returns the line bijection and the number of edges whose image changed
/// (`k`, or `0` when the graph was already connected).
pub fn close_line(tau: &LineBijection) -> (LineBijection, usize) {
    let images = tau.images();
    let mut uf = components_of(images);
    let mut seen = vec![false; images.len() + 1];
    let mut reps = Vec::new();
    for i in 0..images.len() {
        let root = uf.find(i);
        if !std::mem::replace(&mut seen[root], true) {
            reps.push(i);
        }
    }
    if reps.len() <= 1 {
        return (tau.clone(), 0);
    }
    let mut out = images.to_vec();
    for (s, &i) in reps.iter().enumerate() {
        out[i] = images[reps[(s + 1) % reps.len()]];
    }
    (LineBijection::from_vec_unchecked(out), reps.len())
}
