//! Toy decoder-fitting harness for comparing matching strategies.
//!
//! A per-target table of logits stands in for a neural decoder. Each step
//! picks an atom correspondence according to the strategy, takes the loss
//! gradient with respect to the softmax output, pushes it through the
//! softmax and applies plain gradient descent. Every step also records the
//! optimally matched loss against the untouched target, so all strategies
//! share one yardstick.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generate::random_permutation;
use crate::graph::{discretize, to_feature_matrix, FeatureMatrix, MolecularGraph, ProbabilisticGraph, RowKind};
use crate::losses::{embedding_loss, rec_loss, statistics_loss, LossValue, DEFAULT_ROUNDS};
use crate::matching::{AtomPermutation, Matcher};
use crate::smiles_io::Dataset;

/// Logit slots per row; atom rows use the first four.
pub const LOGIT_WIDTH: usize = 5;
pub const DEFAULT_LEARNING_RATE: f64 = 5.0;
pub const DEFAULT_TAIL_WINDOW: usize = 100;
const INIT_SCALE: f64 = 0.01;
// Separates the per-step stream from the initialization stream.
const STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Strategy {
    Optimal,
    TopK(usize),
    NoMatching,
    Statistics,
    Embedding,
}

impl Strategy {
    pub fn label(&self) -> String {
        match self {
            Self::Optimal => "optimal".into(),
            Self::TopK(k) => format!("top{k}"),
            Self::NoMatching => "none".into(),
            Self::Statistics => "stats".into(),
            Self::Embedding => "embed".into(),
        }
    }

    /// Position on the matching-precision scale; `None` for the
    /// matching-free losses.
    pub fn precision_rank(&self) -> Option<usize> {
        match self {
            Self::Optimal => Some(1),
            Self::TopK(k) => Some(*k),
            Self::NoMatching => Some(usize::MAX),
            Self::Statistics | Self::Embedding => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "optimal" | "top1" => Ok(Self::Optimal),
            "none" | "nomatching" | "identity" => Ok(Self::NoMatching),
            "stats" | "statistics" => Ok(Self::Statistics),
            "embed" | "embedding" => Ok(Self::Embedding),
            _ => match s.strip_prefix("top").map(str::parse::<usize>) {
                Some(Ok(k)) if k >= 1 => Ok(Self::TopK(k)),
                _ => Err(Error::InvalidConfig(format!("unknown strategy '{s}'"))),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitConfig {
    pub strategy: Strategy,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Draw a fresh top-k sample every step; otherwise the same sampling
    /// seed is reused, which keeps picking the same rank.
    pub resample_every_step: bool,
    /// Randomly relabel the target atoms every step.
    pub augment_relabel: bool,
    /// Steps averaged into the final eval loss of a comparison.
    pub tail_window: usize,
}

impl FitConfig {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            steps: 500,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed: 0,
            resample_every_step: true,
            augment_relabel: false,
            tail_window: DEFAULT_TAIL_WINDOW,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("steps must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.strategy == Strategy::TopK(0) {
            return Err(Error::InvalidK);
        }
        if self.tail_window == 0 {
            return Err(Error::InvalidConfig("tail window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Row-wise softmax over each row's legal categories.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyDecoder {
    n_atoms: usize,
    logits: Vec<f64>,
}

impl ToyDecoder {
    /// Zero-mean logits with standard deviation 0.01.
    pub fn new(n_atoms: usize, seed: u64) -> Result<Self> {
        let mut dec = Self::zeros(n_atoms)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_SCALE).expect("valid normal");
        for r in 0..dec.n_rows() {
            for k in 0..dec.width(r) {
                dec.logits[r * LOGIT_WIDTH + k] = normal.sample(&mut rng);
            }
        }
        Ok(dec)
    }

    pub fn zeros(n_atoms: usize) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::EmptyGraph);
        }
        let rows = n_atoms + n_atoms * (n_atoms - 1) / 2;
        Ok(Self { n_atoms, logits: vec![0.0; rows * LOGIT_WIDTH] })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_rows(&self) -> usize {
        self.logits.len() / LOGIT_WIDTH
    }

    fn kind(&self, r: usize) -> RowKind {
        if r < self.n_atoms {
            RowKind::Atom
        } else {
            RowKind::Bond
        }
    }

    fn width(&self, r: usize) -> usize {
        self.kind(r).legal_columns().len()
    }

    /// Row-major `rows x 5`; unused atom slots stay zero.
    pub fn logits(&self) -> &[f64] {
        &self.logits
    }

    pub fn logits_mut(&mut self) -> &mut [f64] {
        &mut self.logits
    }

    fn softmax_row(&self, r: usize) -> [f64; LOGIT_WIDTH] {
        let w = self.width(r);
        let z = &self.logits[r * LOGIT_WIDTH..r * LOGIT_WIDTH + w];
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut p = [0.0; LOGIT_WIDTH];
        for (pk, zk) in p.iter_mut().zip(z) {
            *pk = (zk - max).exp();
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }

    pub fn output(&self) -> ProbabilisticGraph {
        let mut m = FeatureMatrix::structural(self.n_atoms).expect("n >= 1");
        for r in 0..self.n_rows() {
            let p = self.softmax_row(r);
            for (k, c) in self.kind(r).legal_columns().enumerate() {
                m.set(r, c, p[k]);
            }
        }
        ProbabilisticGraph::new(m).expect("softmax rows are distributions")
    }

    /// Chain rule through the softmax: `dz_k = p_k (g_k - sum_j p_j g_j)`.
    pub fn logit_gradient(&self, grad_output: &FeatureMatrix) -> Vec<f64> {
        let mut dz = vec![0.0; self.logits.len()];
        for r in 0..self.n_rows() {
            let p = self.softmax_row(r);
            let cols = self.kind(r).legal_columns();
            let g: Vec<f64> = cols.clone().map(|c| grad_output.get(r, c)).collect();
            let mean: f64 = g.iter().zip(&p).map(|(a, b)| a * b).sum();
            for k in 0..g.len() {
                dz[r * LOGIT_WIDTH + k] = p[k] * (g[k] - mean);
            }
        }
        dz
    }

    pub fn descend(&mut self, dz: &[f64], learning_rate: f64) {
        for (z, d) in self.logits.iter_mut().zip(dz) {
            *z -= learning_rate * d;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub step: usize,
    pub train_loss: f64,
    pub eval_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossCurve {
    pub strategy: Strategy,
    /// `steps + 1` points; point 0 is the untrained decoder.
    pub points: Vec<CurvePoint>,
    pub final_graph: MolecularGraph,
}

impl LossCurve {
    pub fn last_eval(&self) -> f64 {
        self.points.last().expect("at least one point").eval_loss
    }

    /// Mean eval loss over the last `window` points.
    pub fn tail_eval(&self, window: usize) -> f64 {
        let w = window.clamp(1, self.points.len());
        let tail = &self.points[self.points.len() - w..];
        tail.iter().map(|p| p.eval_loss).sum::<f64>() / w as f64
    }
}

/// Training loss and output gradient for one step.
fn strategy_loss(
    strategy: Strategy,
    matcher: &Matcher,
    target: &MolecularGraph,
    x_target: &FeatureMatrix,
    out: &ProbabilisticGraph,
    sample_seed: u64,
    embed_seed: u64,
) -> Result<LossValue> {
    match strategy {
        Strategy::Optimal => {
            let m = matcher.optimal_match(x_target, out.matrix())?;
            rec_loss(x_target, out, &m.permutation, true)
        }
        Strategy::TopK(k) => {
            let m = matcher.sample_top_k(x_target, out.matrix(), k, sample_seed)?;
            rec_loss(x_target, out, &m.permutation, true)
        }
        Strategy::NoMatching => rec_loss(x_target, out, &AtomPermutation::identity(target.n_atoms()), true),
        Strategy::Statistics => statistics_loss(x_target, out, true),
        Strategy::Embedding => embedding_loss(target, out, DEFAULT_ROUNDS, embed_seed, true),
    }
}

/// Fits a fresh decoder to one target. Deterministic in `(target, config)`.
pub fn fit(target: &MolecularGraph, config: &FitConfig) -> Result<LossCurve> {
    config.validate()?;
    let matcher = Matcher::default();
    let n = target.n_atoms();
    if n > matcher.max_atoms {
        return Err(Error::TooLarge { n_atoms: n, limit: matcher.max_atoms });
    }
    let x_eval = to_feature_matrix(target);
    let mut decoder = ToyDecoder::new(n, config.seed)?;
    let mut stream = ChaCha8Rng::seed_from_u64(config.seed ^ STREAM_SALT);
    let fixed_sample_seed: u64 = stream.random();
    let embed_seed: u64 = stream.random();

    let mut points = Vec::with_capacity(config.steps + 1);
    for step in 0..=config.steps {
        let relabeled;
        let (g_train, x_train) = if config.augment_relabel {
            let sigma = random_permutation(&mut stream, n);
            relabeled = target.permuted(&sigma)?;
            let x = to_feature_matrix(&relabeled);
            (&relabeled, x)
        } else {
            (target, x_eval.clone())
        };
        let sample_seed = if config.resample_every_step { stream.random() } else { fixed_sample_seed };

        let out = decoder.output();
        let eval_loss = matcher.optimal_match(&x_eval, out.matrix())?.cost;
        let train = strategy_loss(config.strategy, &matcher, g_train, &x_train, &out, sample_seed, embed_seed)?;
        points.push(CurvePoint { step, train_loss: train.value, eval_loss });
        if step < config.steps {
            let grad = train.gradient.expect("gradient requested");
            let dz = decoder.logit_gradient(&grad);
            decoder.descend(&dz, config.learning_rate);
        }
    }
    Ok(LossCurve { strategy: config.strategy, points, final_graph: discretize(&decoder.output()) })
}

#[derive(Debug, Clone, Serialize)]
struct CurveRow<'a> {
    target_id: usize,
    strategy: &'a str,
    step: usize,
    train_loss: f64,
    eval_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub targets: usize,
    /// Mean over targets of the tail-window mean eval loss.
    pub mean_final_eval: f64,
    pub mean_last_step_eval: f64,
    /// Fraction of targets whose matched strategies are ordered by precision.
    pub ordering_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub configs: Vec<FitConfig>,
    /// `curves[target][config]`.
    pub curves: Vec<Vec<LossCurve>>,
    pub summary: Vec<SummaryRow>,
    pub ordering_fraction: f64,
}

impl Comparison {
    /// Final eval losses of one target, indexed like `configs`.
    pub fn final_evals(&self, target: usize) -> Vec<f64> {
        self.curves[target].iter().zip(&self.configs).map(|(c, cfg)| c.tail_eval(cfg.tail_window)).collect()
    }

    /// Whether the target's matched strategies, sorted from most to least
    /// precise, have nondecreasing final eval losses.
    pub fn ordered(&self, target: usize) -> bool {
        let finals = self.final_evals(target);
        let mut ranked: Vec<(usize, f64)> = self
            .configs
            .iter()
            .zip(&finals)
            .filter_map(|(cfg, &f)| cfg.strategy.precision_rank().map(|r| (r, f)))
            .collect();
        ranked.sort_by_key(|&(r, _)| r);
        ranked.windows(2).all(|w| w[0].1 <= w[1].1)
    }

    pub fn write_curves(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for (target_id, row) in self.curves.iter().enumerate() {
            for curve in row {
                let label = curve.strategy.label();
                for p in &curve.points {
                    w.serialize(CurveRow {
                        target_id,
                        strategy: &label,
                        step: p.step,
                        train_loss: p.train_loss,
                        eval_loss: p.eval_loss,
                    })?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.summary {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every config on every target in parallel. Target `t` is fitted with
/// seed `config.seed + t`, so strategies share initializations per target.
pub fn compare(targets: &[MolecularGraph], configs: &[FitConfig]) -> Result<Comparison> {
    if targets.is_empty() {
        return Err(Error::NoTargets);
    }
    if configs.is_empty() {
        return Err(Error::InvalidConfig("no strategies given".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..targets.len()).flat_map(|t| (0..configs.len()).map(move |c| (t, c))).collect();
    let results: Vec<LossCurve> = jobs
        .par_iter()
        .map(|&(t, c)| {
            let mut cfg = configs[c].clone();
            cfg.seed = cfg.seed.wrapping_add(t as u64);
            fit(&targets[t], &cfg)
        })
        .collect::<Result<_>>()?;
    let mut it = results.into_iter();
    let curves: Vec<Vec<LossCurve>> = (0..targets.len()).map(|_| it.by_ref().take(configs.len()).collect()).collect();

    let mut cmp = Comparison { configs: configs.to_vec(), curves, summary: Vec::new(), ordering_fraction: 0.0 };
    let n_targets = targets.len();
    cmp.ordering_fraction = (0..n_targets).filter(|&t| cmp.ordered(t)).count() as f64 / n_targets as f64;
    cmp.summary = configs
        .iter()
        .enumerate()
        .map(|(c, cfg)| {
            let finals: f64 = (0..n_targets).map(|t| cmp.curves[t][c].tail_eval(cfg.tail_window)).sum();
            let lasts: f64 = (0..n_targets).map(|t| cmp.curves[t][c].last_eval()).sum();
            SummaryRow {
                strategy: cfg.strategy.label(),
                targets: n_targets,
                mean_final_eval: finals / n_targets as f64,
                mean_last_step_eval: lasts / n_targets as f64,
                ordering_fraction: cmp.ordering_fraction,
            }
        })
        .collect();
    Ok(cmp)
}

/// `curves.csv` becomes `curves.summary.csv`.
pub fn summary_path(out_path: &Path) -> PathBuf {
    let stem = out_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "curves".into());
    out_path.with_file_name(format!("{stem}.summary.csv"))
}

/// Compares strategies over a dataset and writes the per-step curves to
/// `out_path` and the per-strategy summary next to it.
pub fn run_comparison(targets: &Dataset, configs: &[FitConfig], out_path: &Path) -> Result<Comparison> {
    let cmp = compare(&targets.molecules, configs)?;
    cmp.write_curves(out_path)?;
    cmp.write_summary(&summary_path(out_path))?;
    Ok(cmp)
}
