use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use orbit_forge::io::{read_labeled_coupling, read_named_labels, read_permutation, write_matrix_csv, write_permutation};
use orbit_forge::line::{rearrange_line, rearrange_line_unchecked};
use orbit_forge::pipeline::config::PipelineConfig;
use orbit_forge::pipeline::experiment::run_experiment;
use orbit_forge::pipeline::instance::{balanced_observable, sticky_coupling};
use orbit_forge::pipeline::rng::{stream, Purpose};
use orbit_forge::rewire::{rewire, rewire_with, RewireOptions};
use orbit_forge::{stats_matrix, FiniteAction, Observable, Permutation, ReducedWord};

#[derive(Parser)]
#[command(name = "orbit-forge", version, about = "Orbit rewiring and line rearrangement on finite spaces")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Print the JSON report instead of the CSV table.
        #[arg(long)]
        json: bool,
    },
    /// Arrange labels into one line whose consecutive pairs follow a coupling.
    LemmaRearrange {
        /// One symbol per line.
        #[arg(long)]
        labels: PathBuf,
        /// CSV `row,col,value` keyed by symbol.
        #[arg(long)]
        coupling: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Run even when the hypotheses fail.
        #[arg(long)]
        unchecked: bool,
        /// Where to write σ (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the JSON report (default: stderr).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Rewire a permutation inside its cycles toward a coupling.
    Rewire {
        /// One image per line, 0-based.
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        coupling: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Skip the global hypothesis checks.
        #[arg(long)]
        unchecked: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print μ(P_i ∩ g·P_j) as CSV.
    Stats {
        /// One file per generator, in order.
        #[arg(long = "perm", required = true)]
        perms: Vec<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
        /// Reduced word such as `aB` or `a B`; `e` for the identity.
        #[arg(long, default_value = "a")]
        word: String,
    },
    /// Time the main constructions on random inputs.
    Bench {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn sink(path: Option<&Path>, fallback: Box<dyn Write>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => fallback,
    })
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Pipeline { config, json } => {
            let cfg = PipelineConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let out = run_experiment(&cfg)?;
            let mut stdout = io::stdout().lock();
            stdout.write_all(if json { out.json.as_bytes() } else { out.csv.as_bytes() })?;
            if !out.all_bounds_held() {
                eprintln!("some runs failed or exceeded their bound; see the JSON report");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::LemmaRearrange { labels, coupling, eps, unchecked, out, report } => {
            let (phi, j, table) = read_labeled_coupling::<f64, _, _>(&labels, &coupling)?;
            let (sigma, rep) = if unchecked {
                rearrange_line_unchecked(&phi, &j, &eps)?
            } else {
                rearrange_line(&phi, &j, &eps)?
            };
            let mut w = sink(out.as_deref(), Box::new(io::stdout().lock()))?;
            for &y in sigma.images() {
                writeln!(w, "{y}")?;
            }
            w.flush()?;
            let body = json!({
                "schema_version": 1,
                "symbols": table.names(),
                "points": phi.len(),
                "report": rep,
                "within_bound": rep.within_bound(),
            });
            let mut r = sink(report.as_deref(), Box::new(io::stderr()))?;
            writeln!(r, "{}", serde_json::to_string_pretty(&body)?)?;
        }
        Command::Rewire { perm, labels, coupling, eps, unchecked, out, report } => {
            let t = read_permutation(&perm)?;
            let (psi, j, table) = read_labeled_coupling::<f64, _, _>(&labels, &coupling)?;
            if t.len() != psi.len() {
                bail!("permutation has {} points but there are {} labels", t.len(), psi.len());
            }
            let (t_prime, rep) = if unchecked {
                rewire_with(&t, &psi, &j, &RewireOptions::new(eps))?
            } else {
                rewire(&t, &psi, &j, &eps)?
            };
            let mut w = sink(out.as_deref(), Box::new(io::stdout().lock()))?;
            write_permutation(&mut w, &t_prime)?;
            w.flush()?;
            let body = json!({
                "schema_version": 1,
                "symbols": table.names(),
                "points": t.len(),
                "report": rep,
                "within_bound": rep.within_bound(),
            });
            let mut r = sink(report.as_deref(), Box::new(io::stderr()))?;
            writeln!(r, "{}", serde_json::to_string_pretty(&body)?)?;
        }
        Command::Stats { perms, labels, word } => {
            let perms = perms.iter().map(read_permutation).collect::<orbit_forge::Result<Vec<_>>>()?;
            let action = FiniteAction::new(perms)?;
            let (p, table) = read_named_labels(&labels)?;
            let g: ReducedWord = word.parse()?;
            let s = stats_matrix(&action, &p, &g)?;
            let k = s.alphabet_size();
            let entries: Vec<f64> = (0..k * k).map(|idx| s.entry(idx / k, idx % k)).collect();
            write_matrix_csv(io::stdout().lock(), table.names(), &entries)?;
        }
        Command::Bench { seed } => bench(seed)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn bench(seed: u64) -> Result<()> {
    println!("task,size,seconds,achieved_error,bound");
    for &n in &[10_000usize, 100_000, 1_000_000] {
        let mut rng = stream(seed, Purpose::Trial, n as u64);
        let phi: Observable = balanced_observable(n, 3, &mut rng)?;
        let j = sticky_coupling(&phi, 0.3)?;
        let start = Instant::now();
        let (_, rep) = rearrange_line(&phi, &j, &0.01)?;
        println!("rearrange_line,{n},{:.4},{},{}", start.elapsed().as_secs_f64(), rep.achieved_error, rep.bound);
    }
    for &n in &[100_000usize, 1_000_000] {
        let mut rng = stream(seed, Purpose::Trial, (n as u64) << 1);
        let psi = balanced_observable(n, 2, &mut rng)?;
        let t = Permutation::random_cycle(n, &mut rng);
        let j = sticky_coupling(&psi, 0.3)?;
        let start = Instant::now();
        let (_, rep) = rewire(&t, &psi, &j, &0.01)?;
        println!("rewire,{n},{:.4},{},{}", start.elapsed().as_secs_f64(), rep.achieved_error, rep.bound);
    }
    Ok(())
}
