use std::ops::Index;

use rand::Rng;

use crate::error::{Error, Result};

/// A bijection of `{0..n-1}` in one-line notation: `self[x]` is the image of `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for (x, &y) in images.iter().enumerate() {
            if y >= n {
                return Err(Error::Permutation(format!("image {y} of {x} is out of range 0..{n}")));
            }
            if std::mem::replace(&mut seen[y], true) {
                return Err(Error::Permutation(format!("image {y} is hit twice")));
            }
        }
        Ok(Self(images))
    }

    pub(crate) fn from_vec_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::new(images.clone()).is_ok());
        Self(images)
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// `x -> x + 1 mod n`.
    pub fn shift(n: usize) -> Self {
        Self((0..n).map(|x| (x + 1) % n.max(1)).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            v.swap(i, j);
        }
        Self(v)
    }

    /// Uniformly random single `n`-cycle (Sattolo's algorithm).
    pub fn random_cycle<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..i);
            v.swap(i, j);
        }
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn into_images(self) -> Vec<usize> {
        self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Self(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len(), "composing permutations of different sizes");
        Self(other.0.iter().map(|&y| self.0[y]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(x, &y)| x == y)
    }

    /// Swap the images of `x` and `y`.
    pub fn swap_images(&mut self, x: usize, y: usize) {
        self.0.swap(x, y);
    }

    /// `self ∘ (x y)`.
    pub fn with_transposition(&self, x: usize, y: usize) -> Self {
        let mut p = self.clone();
        p.swap_images(x, y);
        p
    }
}

impl Index<usize> for Permutation {
    type Output = usize;

    fn index(&self, x: usize) -> &usize {
        &self.0[x]
    }
}
