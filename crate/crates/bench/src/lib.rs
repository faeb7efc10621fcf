//! Deterministic inputs shared by the benchmarks.

use molmatch::generate::{random_molecule, random_permutation};
use molmatch::{FeatureMatrix, MolecularGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `count` random valid molecules with `n` atoms.
pub fn molecules(n: usize, count: usize, seed: u64) -> Vec<MolecularGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_molecule(&mut rng, n)).collect()
}

/// One-hot rows of `x` blended with random distributions over each row's legal columns.
pub fn blur<R: Rng>(rng: &mut R, x: &FeatureMatrix, noise: f64) -> FeatureMatrix {
    let mut out = x.clone();
    for r in 0..out.n_rows() {
        let cols = out.row_kind(r).legal_columns();
        let weights: Vec<f64> = cols.clone().map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        for (c, w) in cols.zip(weights) {
            let v = (1.0 - noise) * x.get(r, c) + noise * w / total;
            out.set(r, c, v);
        }
    }
    out
}

/// Pairs of target features and a blurred, relabeled copy.
pub fn match_pairs(n: usize, count: usize, seed: u64) -> Vec<(FeatureMatrix, FeatureMatrix)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    molecules(n, count, seed)
        .into_iter()
        .map(|g| {
            let pi = random_permutation(&mut rng, n);
            let relabeled = g.permuted(&pi).expect("permutation sized to graph").to_feature_matrix();
            let noise = rng.random_range(0.05..0.3);
            (g.to_feature_matrix(), blur(&mut rng, &relabeled, noise))
        })
        .collect()
}
