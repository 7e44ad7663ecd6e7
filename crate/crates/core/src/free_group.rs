//! Reduced words in a finitely generated free group and finite actions of it.
//!
//! Letters are written `a, b, c, ...` for generators and `A, B, C, ...` for
//! their inverses. Words act by composition with the leftmost letter applied
//! last: `evaluate(a, gh) = evaluate(a, g) ∘ evaluate(a, h)`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::space::Observable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn gen(generator: usize) -> Self {
        Self { generator, inverse: false }
    }

    pub fn inv(generator: usize) -> Self {
        Self { generator, inverse: true }
    }

    pub fn inverse(self) -> Self {
        Self { inverse: !self.inverse, ..self }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.inverse { b'A' } else { b'a' };
        match u8::try_from(self.generator).ok().filter(|g| *g < 26) {
            Some(g) => write!(f, "{}", (base + g) as char),
            None => write!(f, "{}{}", if self.inverse { "S" } else { "s" }, self.generator),
        }
    }
}

/// `rank` free generators; the symmetric alphabet adds their inverses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorSet {
    rank: usize,
}

impl GeneratorSet {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Shape("a free group needs at least one generator".into()));
        }
        Ok(Self { rank })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// `a, A, b, B, ...`
    pub fn symmetric(&self) -> Vec<Letter> {
        (0..self.rank).flat_map(|g| [Letter::gen(g), Letter::inv(g)]).collect()
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ReducedWord(Vec<Letter>);

impl ReducedWord {
    pub fn identity() -> Self {
        Self(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Self(vec![l])
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Word length `|g|`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Reduced form of the concatenation `self · other`.
    pub fn concat(&self, other: &Self) -> Self {
        reduce(self.0.iter().chain(other.0.iter()).copied())
    }

    fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator).max()
    }
}

impl fmt::Display for ReducedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for ReducedWord {
    type Err = Error;

    /// Accepts `"a B a"`, `"aBa"` and `"e"` / `""` for the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Self::identity());
        }
        let mut letters = Vec::new();
        for c in s.chars().filter(|c| !c.is_whitespace()) {
            let l = match c {
                'a'..='z' => Letter::gen(c as usize - 'a' as usize),
                'A'..='Z' => Letter::inv(c as usize - 'A' as usize),
                _ => return Err(Error::Parse(format!("unexpected character {c:?} in word {s:?}"))),
            };
            letters.push(l);
        }
        Ok(reduce(letters))
    }
}

/// Free reduction by cancelling adjacent inverse pairs.
pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> ReducedWord {
    let mut stack: Vec<Letter> = Vec::new();
    for l in letters {
        if stack.last() == Some(&l.inverse()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    ReducedWord(stack)
}

/// All reduced words of length at most `r`, ordered by length and then
/// lexicographically in the letter order `a < A < b < B < ...`.
pub fn ball(s: &GeneratorSet, r: usize) -> Vec<ReducedWord> {
    let alphabet = s.symmetric();
    let mut out = vec![ReducedWord::identity()];
    let mut frontier = 0..1;
    for _ in 0..r {
        let start = out.len();
        for idx in frontier.clone() {
            let w = out[idx].clone();
            let last = w.0.last().copied();
            for &l in &alphabet {
                if Some(l.inverse()) == last {
                    continue;
                }
                let mut next = w.0.clone();
                next.push(l);
                out.push(ReducedWord(next));
            }
        }
        frontier = start..out.len();
    }
    out
}

/// `1 + Σ_{i=1..r} 2k(2k-1)^{i-1}` for rank `k`.
pub fn ball_size(rank: usize, r: usize) -> usize {
    let mut total = 1;
    let mut sphere = 2 * rank;
    for _ in 0..r {
        total += sphere;
        sphere *= 2 * rank - 1;
    }
    total
}

/// A finite stand-in for a measure-preserving action: one permutation of
/// `{0..n-1}` per free generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAction {
    perms: Vec<Permutation>,
    inverses: Vec<Permutation>,
}

impl FiniteAction {
    pub fn new(perms: Vec<Permutation>) -> Result<Self> {
        let Some(first) = perms.first() else {
            return Err(Error::Shape("an action needs at least one generator".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(Error::Shape("an action needs a nonempty space".into()));
        }
        if perms.iter().any(|p| p.len() != n) {
            return Err(Error::Shape("generator permutations act on different sizes".into()));
        }
        let inverses = perms.iter().map(Permutation::inverse).collect();
        Ok(Self { perms, inverses })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..rank).map(|_| Permutation::random(n, rng)).collect())
    }

    /// Every generator is a uniformly random single `n`-cycle.
    pub fn random_cyclic<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..rank).map(|_| Permutation::random_cycle(n, rng)).collect())
    }

    pub fn rank(&self) -> usize {
        self.perms.len()
    }

    pub fn generators(&self) -> GeneratorSet {
        GeneratorSet { rank: self.perms.len() }
    }

    pub fn size(&self) -> usize {
        self.perms[0].len()
    }

    pub fn generator(&self, s: usize) -> &Permutation {
        &self.perms[s]
    }

    pub fn perms(&self) -> &[Permutation] {
        &self.perms
    }

    pub fn letter(&self, l: Letter) -> &Permutation {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.perms[l.generator]
        }
    }

    /// The action with every generator inverted.
    pub fn inverted(&self) -> Self {
        Self { perms: self.inverses.clone(), inverses: self.perms.clone() }
    }

    /// Conjugate by `t`: generator `s` becomes `t ∘ a_s ∘ t⁻¹`.
    pub fn conjugate(&self, t: &Permutation) -> Self {
        let ti = t.inverse();
        let perms = self.perms.iter().map(|p| t.compose(&p.compose(&ti))).collect();
        Self::new(perms).expect("conjugation preserves shape")
    }

    pub fn with_generator(&self, s: usize, p: Permutation) -> Result<Self> {
        let mut perms = self.perms.clone();
        perms[s] = p;
        Self::new(perms)
    }
}

/// The permutation a word acts by: leftmost letter applied last.
pub fn evaluate(a: &FiniteAction, w: &ReducedWord) -> Result<Permutation> {
    if let Some(g) = w.max_generator().filter(|&g| g >= a.rank()) {
        return Err(Error::Shape(format!("word uses generator {g} but the action has rank {}", a.rank())));
    }
    let n = a.size();
    let images = (0..n)
        .map(|x| w.0.iter().rev().fold(x, |y, &l| a.letter(l)[y]))
        .collect();
    Ok(Permutation::from_vec_unchecked(images))
}

/// The common refinement `⋁_{g ∈ F} g·P`, with the coordinates that define
/// each atom.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub observable: Observable,
    /// `signatures[atom][t]` is the `P`-atom `i` with `atom ⊂ g_t·P_i`.
    pub signatures: Vec<Vec<usize>>,
}

pub fn refinement(p: &Observable, words: &[ReducedWord], a: &FiniteAction) -> Result<Refinement> {
    if p.len() != a.size() {
        return Err(Error::Shape(format!("partition on {} points, action on {}", p.len(), a.size())));
    }
    let inverses = words
        .iter()
        .map(|w| evaluate(a, &w.inverse()))
        .collect::<Result<Vec<_>>>()?;
    let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut signatures = Vec::new();
    let mut labels = Vec::with_capacity(p.len());
    for x in 0..p.len() {
        // x ∈ g·P_i  iff  g⁻¹x ∈ P_i
        let sig: Vec<usize> = inverses.iter().map(|gi| p.label(gi[x])).collect();
        let next = ids.len();
        let id = *ids.entry(sig.clone()).or_insert_with(|| {
            signatures.push(sig);
            next
        });
        labels.push(id);
    }
    let alphabet = signatures.len().max(1);
    Ok(Refinement { observable: Observable::new(labels, alphabet)?, signatures })
}

/// Atoms are the nonempty intersections `⋂_{g ∈ F} g·P_{i_g}`, numbered by
/// first occurrence.
pub fn refine_partition(p: &Observable, words: &[ReducedWord], a: &FiniteAction) -> Result<Observable> {
    refinement(p, words, a).map(|r| r.observable)
}
