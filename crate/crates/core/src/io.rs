//! Plain-text formats.
//!
//! * permutation: one image per line, 0-based;
//! * labels: one symbol per line (any token without whitespace or commas);
//! * coupling: CSV `row,col,value` keyed by symbol, header optional, values
//!   as decimals or `p/q` fractions; missing pairs are zero.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::scalar::Scalar;
use crate::space::{Coupling, Observable};

fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

pub fn read_permutation<P: AsRef<Path>>(path: P) -> Result<Permutation> {
    let path = path.as_ref();
    let images = lines(path)?
        .into_iter()
        .map(|(i, l)| {
            l.parse::<usize>()
                .map_err(|_| Error::Parse(format!("{}:{i}: `{l}` is not a point index", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    Permutation::new(images)
}

pub fn write_permutation<W: Write>(mut out: W, t: &Permutation) -> Result<()> {
    for &y in t.images() {
        writeln!(out, "{y}")?;
    }
    Ok(())
}

/// Integer labels in `0..k`; the alphabet is `k` when given, else one more
/// than the largest label.
pub fn read_labels<P: AsRef<Path>>(path: P, k: Option<usize>) -> Result<Observable> {
    let path = path.as_ref();
    let labels = lines(path)?
        .into_iter()
        .map(|(i, l)| {
            l.parse::<usize>()
                .map_err(|_| Error::Parse(format!("{}:{i}: `{l}` is not a label index", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    match k {
        Some(k) => Observable::new(labels, k),
        None => Ok(Observable::from_labels(labels)),
    }
}

/// Symbols in a fixed order: numerically when every name is an integer,
/// lexicographically otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl SymbolTable {
    pub fn new<I: IntoIterator<Item = String>>(names: I) -> Self {
        let set: BTreeSet<String> = names.into_iter().collect();
        let mut names: Vec<String> = set.into_iter().collect();
        if names.iter().all(|s| s.parse::<i64>().is_ok()) {
            names.sort_by_key(|s| s.parse::<i64>().unwrap());
        }
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { names, index }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, s: &str) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Decimal (optionally with exponent) or `p/q`. Decimals without an exponent
/// are read exactly.
pub fn parse_scalar<S: Scalar>(s: &str) -> Option<S> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q) = (p.trim().parse::<i128>().ok()?, q.trim().parse::<i128>().ok()?);
        return (q != 0).then(|| S::from_ratio(p, q));
    }
    if s.contains(['e', 'E']) {
        return S::from_f64(s.parse().ok()?);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 30 {
        return S::from_f64(s.parse().ok()?);
    }
    let digits = format!("{int}{frac}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let num: i128 = digits.parse().ok()?;
    let den = 10i128.checked_pow(frac.len() as u32)?;
    Some(S::from_ratio(if neg { -num } else { num }, den))
}

/// Raw `(row, col, value)` records.
pub fn read_coupling_records<P: AsRef<Path>>(path: P) -> Result<Vec<(String, String, String)>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("{}: record {} has {} fields, expected 3", path.display(), i + 1, rec.len())));
        }
        if i == 0 && &rec[0] == "row" && &rec[1] == "col" {
            continue;
        }
        out.push((rec[0].to_string(), rec[1].to_string(), rec[2].to_string()));
    }
    Ok(out)
}

/// Labels by symbol name.
pub fn read_named_labels<P: AsRef<Path>>(path: P) -> Result<(Observable, SymbolTable)> {
    let names: Vec<String> = lines(path.as_ref())?.into_iter().map(|(_, l)| l).collect();
    let table = SymbolTable::new(names.iter().cloned());
    let phi = Observable::new(names.iter().map(|s| table.index(s).unwrap()).collect(), table.len().max(1))?;
    Ok((phi, table))
}

/// Labels by symbol name and a coupling over the union of symbols seen in
/// either file.
pub fn read_labeled_coupling<S: Scalar, P: AsRef<Path>, Q: AsRef<Path>>(
    labels: P,
    coupling: Q,
) -> Result<(Observable, Coupling<S>, SymbolTable)> {
    let names: Vec<String> = lines(labels.as_ref())?.into_iter().map(|(_, l)| l).collect();
    let records = read_coupling_records(coupling.as_ref())?;
    let table = SymbolTable::new(
        names
            .iter()
            .cloned()
            .chain(records.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()])),
    );
    let k = table.len();
    let phi = Observable::new(names.iter().map(|s| table.index(s).unwrap()).collect(), k.max(1))?;
    let mut entries = vec![S::zero(); k * k];
    for (a, b, v) in &records {
        let value = parse_scalar::<S>(v).ok_or_else(|| Error::Parse(format!("`{v}` is not a number")))?;
        entries[table.index(a).unwrap() * k + table.index(b).unwrap()] = value;
    }
    Ok((phi, Coupling::new(k, entries)?, table))
}

/// `row,col,value` with a header; `names` labels rows and columns.
pub fn write_matrix_csv<W: Write, S: std::fmt::Display>(out: W, names: &[String], entries: &[S]) -> Result<()> {
    let k = names.len();
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["row", "col", "value"]).map_err(io)?;
    for (idx, v) in entries.iter().enumerate() {
        w.write_record([names[idx / k].as_str(), names[idx % k].as_str(), &v.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i128>;

    #[test]
    fn scalars_parse_exactly() {
        assert_eq!(parse_scalar::<Q>("0.305"), Some(Q::new(61, 200)));
        assert_eq!(parse_scalar::<Q>("3/8"), Some(Q::new(3, 8)));
        assert_eq!(parse_scalar::<Q>("-.5"), Some(Q::new(-1, 2)));
        assert_eq!(parse_scalar::<f64>("2.5e-1"), Some(0.25));
        assert_eq!(parse_scalar::<Q>("1"), Some(Q::from_integer(1)));
        assert_eq!(parse_scalar::<Q>("x"), None);
        assert_eq!(parse_scalar::<Q>("1/0"), None);
    }

    #[test]
    fn symbol_order() {
        let t = SymbolTable::new(["10", "2", "1"].map(String::from));
        assert_eq!((t.name(0), t.name(2)), ("1", "10"));
        let t = SymbolTable::new(["b", "a", "b"].map(String::from));
        assert_eq!(t.len(), 2);
        assert_eq!(t.index("b"), Some(1));
    }

    #[test]
    fn files_round_trip() {
        let dir = std::env::temp_dir().join(format!("orbit-forge-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let perm = dir.join("t.txt");
        let mut buf = Vec::new();
        write_permutation(&mut buf, &Permutation::new(vec![2, 0, 1]).unwrap()).unwrap();
        fs::write(&perm, &buf).unwrap();
        assert_eq!(read_permutation(&perm).unwrap().images(), &[2, 0, 1]);

        let labels = dir.join("l.txt");
        let coupling = dir.join("j.csv");
        fs::write(&labels, "a\nb\na\nb\n").unwrap();
        fs::write(&coupling, "row,col,value\na,a,1/4\na,b,0.25\nb,a,1/4\nb,b,1/4\n").unwrap();
        let (phi, j, table) = read_labeled_coupling::<Q, _, _>(&labels, &coupling).unwrap();
        assert_eq!(phi.labels(), &[0, 1, 0, 1]);
        assert_eq!(*j.get(0, 1), Q::new(1, 4));
        assert_eq!(table.name(1), "b");
        fs::remove_dir_all(&dir).ok();
    }
}
