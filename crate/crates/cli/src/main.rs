mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use molmatch::experiment::{run_comparison, FitConfig, Strategy, DEFAULT_LEARNING_RATE, DEFAULT_TAIL_WINDOW};
use molmatch::generate::random_molecule;
use molmatch::graph::{discretize, FeatureMatrix, ProbabilisticGraph};
use molmatch::losses::{embedding_loss, rec_loss, statistics_loss, DEFAULT_ROUNDS};
use molmatch::metrics::{canonical_form, evaluate, GenerationReport};
use molmatch::smiles_io::{load_dataset, Dataset, DEFAULT_MAX_ATOMS};
use molmatch::{parse_smiles, write_smiles, Matcher};

use input::{content_lines, Molecule};

#[derive(Parser)]
#[command(name = "molmatch", version, about = "Graph matching losses and metrics for small molecules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match two molecules (SMILES or .json feature matrices).
    Match {
        first: String,
        second: String,
        /// Return the k best permutations, or sample one of them with --seed.
        #[arg(long)]
        k: Option<usize>,
        /// Draw one permutation uniformly from the top k.
        #[arg(long, requires = "k")]
        seed: Option<u64>,
        /// Also print search statistics.
        #[arg(long)]
        stats: bool,
    },
    /// Evaluate a reconstruction loss between a target and an output.
    Loss {
        target: String,
        output: String,
        #[arg(long, value_enum, default_value_t = LossKind::Matched)]
        kind: LossKind,
        /// Matched loss: sample the permutation from the top k.
        #[arg(long)]
        k: Option<usize>,
        /// Sampling seed for --k, weight seed for the embedding loss.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report the gradient norm.
        #[arg(long)]
        grad: bool,
    },
    /// Parse SMILES and print the feature matrix.
    Parse { smiles: String },
    /// Print canonical forms and canonical SMILES.
    Canon {
        #[arg(required = true)]
        smiles: Vec<String>,
    },
    /// Validity, uniqueness and novelty of generated samples.
    Eval {
        /// One sample per line: SMILES, or a JSON feature matrix.
        #[arg(long)]
        samples: PathBuf,
        /// Reference dataset, one SMILES per line.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ATOMS)]
        max_atoms: usize,
    },
    /// Fit toy decoders under several matching strategies.
    Fit {
        #[arg(long)]
        targets: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "optimal,top10,top50,top100,none")]
        strategies: Vec<String>,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
        lr: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "curves.csv")]
        out: PathBuf,
        /// Keep the target's atom order fixed instead of relabeling it each step.
        #[arg(long)]
        no_augment: bool,
        /// Sample a top-k permutation once instead of every step.
        #[arg(long)]
        fixed_sample: bool,
        /// Steps averaged into each run's final eval loss.
        #[arg(long, default_value_t = DEFAULT_TAIL_WINDOW)]
        tail_window: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_ATOMS)]
        max_atoms: usize,
    },
    /// Print random valid molecules as SMILES.
    Random {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        min_atoms: usize,
        #[arg(long, default_value_t = 7)]
        max_atoms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LossKind {
    Matched,
    None,
    Stats,
    Embed,
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn cmd_match(first: &str, second: &str, k: Option<usize>, seed: Option<u64>, stats: bool) -> Result<()> {
    let (x1, x2) = (Molecule::resolve(first)?.features(), Molecule::resolve(second)?.features());
    let matcher = Matcher::default();
    let start = Instant::now();
    let results = match (k, seed) {
        (None, _) => vec![matcher.optimal_match(&x1, &x2)?],
        (Some(k), None) => matcher.top_k(&x1, &x2, k)?.ranked,
        (Some(k), Some(seed)) => vec![matcher.sample_top_k(&x1, &x2, k, seed)?],
    };
    let elapsed = start.elapsed();
    for r in &results {
        println!(
            "{}",
            json!({ "cost": r.cost, "permutation": r.permutation.as_slice(), "nodes_expanded": r.nodes_expanded })
        );
    }
    if stats {
        println!(
            "{}",
            json!({
                "n_atoms": x1.n_atoms(),
                "results": results.len(),
                "nodes_expanded": results.first().map_or(0, |r| r.nodes_expanded),
                "elapsed_us": elapsed.as_micros() as u64,
            })
        );
    }
    Ok(())
}

fn cmd_loss(target: &str, output: &str, kind: LossKind, k: Option<usize>, seed: u64, grad: bool) -> Result<()> {
    let target = Molecule::resolve(target)?;
    let x = target.features();
    let p = Molecule::resolve(output)?.probabilistic()?;
    let mut permutation = None;
    let value = match kind {
        LossKind::Matched => {
            let matcher = Matcher::default();
            let m = match k {
                Some(k) => matcher.sample_top_k(&x, p.matrix(), k, seed)?,
                None => matcher.optimal_match(&x, p.matrix())?,
            };
            permutation = Some(m.permutation.as_slice().to_vec());
            rec_loss(&x, &p, &m.permutation, grad)?
        }
        LossKind::None => molmatch::no_matching_loss(&x, &p, grad)?,
        LossKind::Stats => statistics_loss(&x, &p, grad)?,
        LossKind::Embed => embedding_loss(target.graph()?, &p, DEFAULT_ROUNDS, seed, grad)?,
    };
    let mut out = json!({ "value": value.value });
    if let Some(pi) = permutation {
        out["permutation"] = json!(pi);
    }
    if let Some(norm) = value.gradient_norm() {
        out["gradient_norm"] = json!(norm);
    }
    println!("{out}");
    Ok(())
}

fn cmd_parse(smiles: &str) -> Result<()> {
    let g = parse_smiles(smiles)?;
    let m = g.to_feature_matrix();
    let rows: Vec<&[f64]> = m.rows().collect();
    let atoms: Vec<String> = g.atoms().iter().map(|a| a.to_string()).collect();
    println!("{}", json!({ "n_atoms": g.n_atoms(), "atoms": atoms, "rows": rows }));
    Ok(())
}

fn cmd_canon(smiles: &[String]) -> Result<()> {
    for s in smiles {
        let g = parse_smiles(s).with_context(|| format!("parsing '{s}'"))?;
        let smiles_out = write_smiles(&g).ok();
        println!("{}", json!({ "input": s, "canonical_form": canonical_form(&g).as_str(), "smiles": smiles_out }));
    }
    Ok(())
}

fn cmd_eval(samples: &Path, reference: &Path, max_atoms: usize) -> Result<()> {
    let reference = load_dataset(reference, max_atoms)?;
    let text = fs::read_to_string(samples).with_context(|| format!("reading {}", samples.display()))?;
    let mut graphs = Vec::new();
    let mut total = 0;
    for (_, line) in content_lines(&text) {
        total += 1;
        // Unreadable samples count as invalid.
        let parsed = if line.starts_with('[') {
            serde_json::from_str::<Vec<Vec<f64>>>(line)
                .ok()
                .and_then(|rows| FeatureMatrix::from_row_vecs(&rows).ok())
                .and_then(|m| ProbabilisticGraph::new(m).ok())
                .map(|p| discretize(&p))
        } else {
            parse_smiles(line).ok()
        };
        graphs.extend(parsed);
    }
    if total == 0 {
        bail!("no samples in {}", samples.display());
    }
    let parsed = if graphs.is_empty() { GenerationReport::from_counts(0, 0, 0, 0) } else { evaluate(&graphs, &reference)? };
    let r = GenerationReport::from_counts(total, parsed.n_valid, parsed.n_unique, parsed.n_novel);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "n_samples": r.n_samples,
            "n_valid": r.n_valid,
            "n_unique": r.n_unique,
            "n_novel": r.n_novel,
            "validity": round4(r.validity),
            "uniqueness": round4(r.uniqueness),
            "novelty": round4(r.novelty),
            "overall": round4(r.overall),
        }))?
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    targets: &Path,
    strategies: &[String],
    steps: usize,
    lr: f64,
    seed: u64,
    out: &Path,
    augment: bool,
    resample: bool,
    tail_window: usize,
    max_atoms: usize,
) -> Result<()> {
    let dataset: Dataset = load_dataset(targets, max_atoms)?;
    for f in &dataset.failures {
        eprintln!("warning: line {}: {}", f.line, f.message);
    }
    if !dataset.oversize.is_empty() {
        eprintln!("warning: skipped {} molecules above {max_atoms} atoms", dataset.oversize.len());
    }
    let configs = strategies
        .iter()
        .map(|s| {
            Ok(FitConfig {
                strategy: s.parse::<Strategy>()?,
                steps,
                learning_rate: lr,
                seed,
                resample_every_step: resample,
                augment_relabel: augment,
                tail_window,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cmp = run_comparison(&dataset, &configs, out)?;
    for row in &cmp.summary {
        println!("{}", serde_json::to_string(row)?);
    }
    eprintln!(
        "wrote {} and {}",
        out.display(),
        molmatch::experiment::summary_path(out).display()
    );
    Ok(())
}

fn cmd_random(count: usize, min_atoms: usize, max_atoms: usize, seed: u64) -> Result<()> {
    if min_atoms == 0 || min_atoms > max_atoms {
        bail!("need 1 <= min-atoms <= max-atoms");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..count {
        let n = min_atoms + k % (max_atoms - min_atoms + 1);
        println!("{}", write_smiles(&random_molecule(&mut rng, n))?);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Match { first, second, k, seed, stats } => cmd_match(&first, &second, k, seed, stats),
        Command::Loss { target, output, kind, k, seed, grad } => cmd_loss(&target, &output, kind, k, seed, grad),
        Command::Parse { smiles } => cmd_parse(&smiles),
        Command::Canon { smiles } => cmd_canon(&smiles),
        Command::Eval { samples, reference, max_atoms } => cmd_eval(&samples, &reference, max_atoms),
        Command::Fit { targets, strategies, steps, lr, seed, out, no_augment, fixed_sample, tail_window, max_atoms } => {
            cmd_fit(&targets, &strategies, steps, lr, seed, &out, !no_augment, !fixed_sample, tail_window, max_atoms)
        }
        Command::Random { count, min_atoms, max_atoms, seed } => cmd_random(count, min_atoms, max_atoms, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
