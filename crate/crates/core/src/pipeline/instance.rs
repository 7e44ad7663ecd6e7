//! Random actions and observables used as pipeline inputs.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::free_group::FiniteAction;
use crate::io;
use crate::line::round_coupling_unchecked;
use crate::perm::Permutation;
use crate::space::{empirical_distribution, Coupling, Observable, PairCounts};

use super::rng::{stream, Purpose};

/// How an action is produced.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionSpec {
    /// Uniform random permutations.
    Random,
    /// Uniform random single `n`-cycles.
    Cyclic,
    /// Random permutations whose label-pair counts against the target
    /// observable follow `π(a)(p·[a = b] + (1 − p)π(b))`.
    Coupled(f64),
    /// One permutation file per generator.
    Files(Vec<PathBuf>),
}

impl FromStr for ActionSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "random" => return Ok(Self::Random),
            "cyclic" => return Ok(Self::Cyclic),
            _ => {}
        }
        if let Some(p) = s.strip_prefix("coupled:") {
            let p: f64 = p.trim().parse().map_err(|_| format!("`{p}` is not a number"))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("coupling strength {p} outside [0, 1]"));
            }
            return Ok(Self::Coupled(p));
        }
        if let Some(files) = s.strip_prefix("file:") {
            let paths: Vec<PathBuf> = files.split(',').map(|f| PathBuf::from(f.trim())).collect();
            if paths.iter().any(|p| p.as_os_str().is_empty()) {
                return Err("empty file name".into());
            }
            return Ok(Self::Files(paths));
        }
        Err(format!("expected random, cyclic, coupled:<p> or file:<path>[,<path>…], got `{s}`"))
    }
}

impl fmt::Display for ActionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Random => f.write_str("random"),
            Self::Cyclic => f.write_str("cyclic"),
            Self::Coupled(p) => write!(f, "coupled:{p}"),
            Self::Files(paths) => {
                let names: Vec<_> = paths.iter().map(|p| p.display().to_string()).collect();
                write!(f, "file:{}", names.join(","))
            }
        }
    }
}

/// How the target observable is produced.
#[derive(Clone, Debug, PartialEq)]
pub enum ObservableSpec {
    /// A random labeling in which symbol counts differ by at most one.
    Balanced,
    /// I.i.d. uniform labels.
    Random,
    /// One label per line.
    File(PathBuf),
}

impl FromStr for ObservableSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "balanced" => Ok(Self::Balanced),
            "random" => Ok(Self::Random),
            t => match t.strip_prefix("file:") {
                Some(p) if !p.trim().is_empty() => Ok(Self::File(PathBuf::from(p.trim()))),
                _ => Err(format!("expected balanced, random or file:<path>, got `{t}`")),
            },
        }
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Balanced => f.write_str("balanced"),
            Self::Random => f.write_str("random"),
            Self::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Labels `x mod k`, shuffled.
pub fn balanced_observable<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Observable> {
    let mut labels: Vec<usize> = (0..n).map(|x| x % k.max(1)).collect();
    labels.shuffle(rng);
    Observable::new(labels, k)
}

pub fn random_observable<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Observable> {
    if k == 0 {
        return Err(Error::Observable("alphabet must be nonempty".into()));
    }
    Observable::new((0..n).map(|_| rng.gen_range(0..k)).collect(), k)
}

/// A uniformly random permutation `t` among those with
/// `#{x: φ(x) = a, φ(t x) = b} = counts(a, b)`.
pub fn permutation_with_pair_counts<R: Rng + ?Sized>(
    phi: &Observable,
    counts: &PairCounts,
    rng: &mut R,
) -> Result<Permutation> {
    let k = phi.alphabet_size();
    let pi = empirical_distribution(phi);
    if counts.alphabet_size() != k || counts.row_counts() != pi.counts() || counts.col_counts() != pi.counts() {
        return Err(Error::MarginMismatch("pair counts do not match the label counts".into()));
    }
    let mut sources = phi.atoms();
    let mut targets = phi.atoms();
    for atom in sources.iter_mut().chain(targets.iter_mut()) {
        atom.shuffle(rng);
    }
    let mut images = vec![0; phi.len()];
    for a in 0..k {
        let mut src = sources[a].iter();
        for b in 0..k {
            for &x in src.by_ref().take(counts.get(a, b) as usize) {
                images[x] = targets[b].pop().expect("column counts match");
            }
        }
    }
    Permutation::new(images)
}

/// `π(a)(p·[a = b] + (1 − p)π(b))`, the law of a lazy step that stays put
/// with probability `p` and otherwise resamples from `π`.
pub fn sticky_coupling(phi: &Observable, p: f64) -> Result<Coupling<f64>> {
    let pi = empirical_distribution(phi).probs::<f64>();
    let k = pi.len();
    let mut entries = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let stay = if a == b { p } else { 0.0 };
            entries.push(pi[a] * (stay + (1.0 - p) * pi[b]));
        }
    }
    Coupling::new(k, entries)
}

/// Build an action of the given rank on `n` points. `phi` is needed for
/// [`ActionSpec::Coupled`]. Generator `s` draws from stream `(purpose, s)`.
pub fn build_action(
    spec: &ActionSpec,
    n: usize,
    rank: usize,
    phi: &Observable,
    seed: u64,
    purpose: Purpose,
) -> Result<FiniteAction> {
    let perms = match spec {
        ActionSpec::Files(paths) => {
            if paths.len() != rank {
                return Err(Error::Shape(format!("{} permutation files for rank {rank}", paths.len())));
            }
            paths.iter().map(io::read_permutation).collect::<Result<Vec<_>>>()?
        }
        _ => (0..rank)
            .map(|s| {
                let mut rng = stream(seed, purpose, s as u64);
                match spec {
                    ActionSpec::Random => Ok(Permutation::random(n, &mut rng)),
                    ActionSpec::Cyclic => Ok(Permutation::random_cycle(n, &mut rng)),
                    ActionSpec::Coupled(p) => {
                        let target = sticky_coupling(phi, *p)?;
                        let counts = round_coupling_unchecked(&target, &empirical_distribution(phi)).counts;
                        permutation_with_pair_counts(phi, &counts, &mut rng)
                    }
                    ActionSpec::Files(_) => unreachable!(),
                }
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let action = FiniteAction::new(perms)?;
    if action.size() != n {
        return Err(Error::Shape(format!("action acts on {} points, expected {n}", action.size())));
    }
    Ok(action)
}

pub fn build_observable(spec: &ObservableSpec, n: usize, k: usize, seed: u64) -> Result<Observable> {
    let mut rng = stream(seed, Purpose::TargetObservable, 0);
    let phi = match spec {
        ObservableSpec::Balanced => balanced_observable(n, k, &mut rng)?,
        ObservableSpec::Random => random_observable(n, k, &mut rng)?,
        ObservableSpec::File(p) => io::read_labels(p, Some(k))?,
    };
    if phi.len() != n {
        return Err(Error::Shape(format!("observable on {} points, expected {n}", phi.len())));
    }
    Ok(phi)
}
