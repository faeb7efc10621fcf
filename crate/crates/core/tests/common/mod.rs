//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use itertools::Itertools;
use molmatch::graph::{FeatureMatrix, MolecularGraph, ProbabilisticGraph, FEATURE_COLS};
use molmatch::matching::{matched_cost, AtomPermutation};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Minimum over all n! permutations, first in lexicographic order on ties.
pub fn brute_force(x1: &FeatureMatrix, x2: &FeatureMatrix) -> (f64, AtomPermutation) {
    let n = x1.n_atoms();
    let mut best: Option<(f64, AtomPermutation)> = None;
    for p in (0..n).permutations(n) {
        let pi = AtomPermutation::new(p).unwrap();
        let c = matched_cost(x1, x2, &pi).unwrap();
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, pi));
        }
    }
    best.unwrap()
}

/// All n! costs, sorted ascending.
pub fn all_costs(x1: &FeatureMatrix, x2: &FeatureMatrix) -> Vec<(f64, AtomPermutation)> {
    let n = x1.n_atoms();
    let mut v: Vec<_> = (0..n)
        .permutations(n)
        .map(|p| {
            let pi = AtomPermutation::new(p).unwrap();
            (matched_cost(x1, x2, &pi).unwrap(), pi)
        })
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    v
}

/// Cost computed from atom indices directly, without the row permutation
/// machinery: atom `i` against `pi(i)`, pair `{i,j}` against `{pi(i),pi(j)}`.
pub fn naive_cost(x1: &FeatureMatrix, x2: &FeatureMatrix, pi: &[usize]) -> f64 {
    let n = x1.n_atoms();
    let d = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>();
    let mut total = 0.0;
    for (i, &pi_i) in pi.iter().enumerate() {
        total += d(x1.row(i), x2.row(pi_i));
    }
    for i in 0..n {
        for j in i + 1..n {
            total += d(x1.row(x1.bond_row(i, j)), x2.row(x2.bond_row(pi[i], pi[j])));
        }
    }
    total
}

/// Random distributions on every row's legal columns.
pub fn random_probabilistic<R: Rng>(rng: &mut R, n: usize) -> ProbabilisticGraph {
    let mut m = FeatureMatrix::structural(n).unwrap();
    for r in 0..m.n_rows() {
        let cols = m.row_kind(r).legal_columns();
        let w: Vec<f64> = cols.clone().map(|_| rng.random::<f64>() + 0.01).collect();
        let total: f64 = w.iter().sum();
        for (c, v) in cols.zip(w) {
            m.set(r, c, v / total);
        }
    }
    ProbabilisticGraph::new(m).unwrap()
}

/// Random distributions whose entries are multiples of 1/16, so sums of
/// their squares are exact in floating point regardless of order.
pub fn random_dyadic<R: Rng>(rng: &mut R, n: usize) -> ProbabilisticGraph {
    let mut m = FeatureMatrix::structural(n).unwrap();
    for r in 0..m.n_rows() {
        let cols: Vec<usize> = m.row_kind(r).legal_columns().collect();
        let mut units = vec![0u32; cols.len()];
        for _ in 0..16 {
            units[rng.random_range(0..cols.len())] += 1;
        }
        for (c, u) in cols.into_iter().zip(units) {
            m.set(r, c, f64::from(u) / 16.0);
        }
    }
    ProbabilisticGraph::new(m).unwrap()
}

/// Entrywise error measure: `|a - n| / max(1, |a|, |n|)`.
pub fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / 1f64.max(a.abs()).max(n.abs())
}

/// Largest error between an analytic gradient and central differences over
/// the legal entries of `p`. Structural entries of the gradient must be 0.
pub fn fd_check(p: &ProbabilisticGraph, grad: &FeatureMatrix, h: f64, f: impl Fn(&ProbabilisticGraph) -> f64) -> f64 {
    let base = p.matrix();
    let mut worst = 0.0f64;
    for r in 0..base.n_rows() {
        let legal = base.row_kind(r).legal_columns();
        for c in 0..FEATURE_COLS {
            if !legal.contains(&c) {
                assert_eq!(grad.get(r, c), 0.0, "structural gradient at ({r},{c})");
                continue;
            }
            let eval = |delta: f64| {
                let mut m = base.clone();
                m.set(r, c, m.get(r, c) + delta);
                f(&ProbabilisticGraph::relaxed(m).unwrap())
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            worst = worst.max(rel_err(grad.get(r, c), numeric));
        }
    }
    worst
}

/// Central differences over a flat parameter vector.
pub fn fd_check_params(params: &[f64], grad: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut worst = 0.0f64;
    let mut x = params.to_vec();
    for k in 0..params.len() {
        x[k] = params[k] + h;
        let up = f(&x);
        x[k] = params[k] - h;
        let down = f(&x);
        x[k] = params[k];
        worst = worst.max(rel_err(grad[k], (up - down) / (2.0 * h)));
    }
    worst
}

pub fn graph_features(g: &MolecularGraph) -> FeatureMatrix {
    molmatch::graph::to_feature_matrix(g)
}
