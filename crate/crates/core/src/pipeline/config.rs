//! Experiment configuration: a flat `key = value` file.
//!
//! ```text
//! # standard rank-2 instance
//! n = 100000
//! rank = 2
//! alphabet = 2
//! seed = 7
//! eps = 0.1, 0.03, 0.01
//! retries = 5
//! source = random          # random | cyclic | coupled:<p> | file:<path>,…
//! target = coupled:0.5
//! observable = balanced    # balanced | random | file:<path>
//! sampling = iid           # iid | exact
//! radius = 2
//! output_json = report.json
//! output_csv = report.csv
//! ```
//!
//! Only `n` is required. `eps` may be empty, giving an empty schedule.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

use super::instance::{ActionSpec, ObservableSpec};
use super::Sampling;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub n: usize,
    pub rank: usize,
    pub alphabet: usize,
    pub seed: u64,
    pub eps_schedule: Vec<f64>,
    pub retries: usize,
    pub source: ActionSpec,
    pub target: ActionSpec,
    pub observable: ObservableSpec,
    pub sampling: Sampling,
    pub radius: usize,
    pub output_json: Option<PathBuf>,
    pub output_csv: Option<PathBuf>,
}

impl PipelineConfig {
    /// Defaults for everything but `n`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rank: 2,
            alphabet: 2,
            seed: 0,
            eps_schedule: vec![0.01],
            retries: 5,
            source: ActionSpec::Random,
            target: ActionSpec::Random,
            observable: ObservableSpec::Balanced,
            sampling: Sampling::Iid,
            radius: 2,
            output_json: None,
            output_csv: None,
        }
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        fs::read_to_string(path)?.parse()
    }

    pub fn summary(&self) -> ConfigSummary {
        ConfigSummary {
            n: self.n,
            rank: self.rank,
            alphabet: self.alphabet,
            seed: self.seed,
            eps: self.eps_schedule.clone(),
            retries: self.retries,
            source: self.source.to_string(),
            target: self.target.to_string(),
            observable: self.observable.to_string(),
            sampling: self.sampling,
            radius: self.radius,
        }
    }
}

/// The configuration as echoed into reports (output paths omitted so
/// reports do not depend on where they are written).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub n: usize,
    pub rank: usize,
    pub alphabet: usize,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub retries: usize,
    pub source: String,
    pub target: String,
    pub observable: String,
    pub sampling: Sampling,
    pub radius: usize,
}

fn err(line: usize, field: &str, message: impl Into<String>) -> Error {
    Error::Config { line, field: field.to_string(), message: message.into() }
}

fn parse_field<T: FromStr>(line: usize, field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| err(line, field, format!("cannot parse `{value}`: {e}")))
}

impl FromStr for PipelineConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut cfg = PipelineConfig::new(0);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(line, content, "expected `key = value`"));
            };
            let (key, value) = (key.trim(), value.trim());
            if let Some(first) = seen.insert(key.to_string(), line) {
                return Err(err(line, key, format!("already set on line {first}")));
            }
            match key {
                "n" => cfg.n = parse_field(line, key, value)?,
                "rank" => cfg.rank = parse_field(line, key, value)?,
                "alphabet" => cfg.alphabet = parse_field(line, key, value)?,
                "seed" => cfg.seed = parse_field(line, key, value)?,
                "retries" => cfg.retries = parse_field(line, key, value)?,
                "radius" => cfg.radius = parse_field(line, key, value)?,
                "eps" => {
                    cfg.eps_schedule = value
                        .split(',')
                        .map(str::trim)
                        .filter(|v| !v.is_empty())
                        .map(|v| parse_field::<f64>(line, key, v))
                        .collect::<Result<_>>()?
                }
                "source" => cfg.source = parse_field(line, key, value)?,
                "target" => cfg.target = parse_field(line, key, value)?,
                "observable" => cfg.observable = parse_field(line, key, value)?,
                "sampling" => {
                    cfg.sampling = match value {
                        "iid" => Sampling::Iid,
                        "exact" => Sampling::Exact,
                        _ => return Err(err(line, key, format!("expected iid or exact, got `{value}`"))),
                    }
                }
                "output_json" => cfg.output_json = Some(PathBuf::from(value)),
                "output_csv" => cfg.output_csv = Some(PathBuf::from(value)),
                _ => return Err(err(line, key, "unknown field")),
            }
        }

        let at = |field: &str| seen.get(field).copied().unwrap_or(0);
        if !seen.contains_key("n") {
            return Err(err(0, "n", "missing required field"));
        }
        if cfg.n == 0 {
            return Err(err(at("n"), "n", "must be at least 1"));
        }
        if cfg.rank == 0 {
            return Err(err(at("rank"), "rank", "must be at least 1"));
        }
        if cfg.alphabet == 0 {
            return Err(err(at("alphabet"), "alphabet", "must be at least 1"));
        }
        if cfg.retries == 0 {
            return Err(err(at("retries"), "retries", "must be at least 1"));
        }
        if let Some(e) = cfg.eps_schedule.iter().find(|&&e| !(e > 0.0 && e < 1.0 / 6.0)) {
            return Err(err(at("eps"), "eps", format!("{e} is not in (0, 1/6)")));
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_fields() {
        let text = "n = 100\nrank=3 # three generators\nalphabet = 4\nseed = 9\neps = 0.1, 0.03\n\
                    retries = 2\nsource = cyclic\ntarget = coupled:0.5\nobservable = random\n\
                    sampling = exact\nradius = 1\noutput_csv = out.csv\n";
        let c: PipelineConfig = text.parse().unwrap();
        assert_eq!((c.n, c.rank, c.alphabet, c.seed, c.retries, c.radius), (100, 3, 4, 9, 2, 1));
        assert_eq!(c.eps_schedule, vec![0.1, 0.03]);
        assert_eq!(c.target, ActionSpec::Coupled(0.5));
        assert_eq!(c.sampling, Sampling::Exact);
        assert_eq!(c.output_csv, Some(PathBuf::from("out.csv")));
        assert_eq!(c.output_json, None);
    }

    #[test]
    fn empty_schedule() {
        let c: PipelineConfig = "n = 5\neps =\n".parse().unwrap();
        assert!(c.eps_schedule.is_empty());
    }

    fn fails(text: &str) -> (usize, String) {
        match text.parse::<PipelineConfig>() {
            Err(Error::Config { line, field, .. }) => (line, field),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        assert_eq!(fails("n = 10\nrank = two\n"), (2, "rank".into()));
        assert_eq!(fails("n = 10\n\neps = 0.5\n"), (3, "eps".into()));
        assert_eq!(fails("n = 10\ncolour = red\n"), (2, "colour".into()));
        assert_eq!(fails("n = 10\nn = 11\n"), (2, "n".into()));
        assert_eq!(fails("rank = 2\n"), (0, "n".into()));
        assert_eq!(fails("n = 10\nretries = 0\n"), (2, "retries".into()));
        assert_eq!(fails("n = 10\nsource = spiral\n"), (2, "source".into()));
        assert_eq!(fails("n = 10\njunk\n"), (2, "junk".into()));
    }
}
