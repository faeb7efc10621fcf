//! Untrained message-passing embedding baseline.
//!
//! Node states start as feature rows and are updated with
//! `h <- tanh(W h + U sum_{neighbors} h)`, where neighbors follow the
//! atom/pair incidence of the quasi-fully-connected encoding: an atom sees
//! all of its pair nodes and a pair node sees its two atoms. The graph
//! embedding is the sum of final states. `W` and `U` are fixed random
//! matrices drawn from a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{check_shapes, mask_structural, LossValue, ProbabilisticGraph};
use crate::error::{Error, Result};
use crate::graph::{pairs, to_feature_matrix, FeatureMatrix, MolecularGraph, FEATURE_COLS};

pub const DEFAULT_ROUNDS: usize = 3;

const D: usize = FEATURE_COLS;

type Vector = [f64; D];
type Weights = [[f64; D]; D];

fn matvec(m: &Weights, v: &Vector) -> Vector {
    let mut out = [0.0; D];
    for (o, row) in out.iter_mut().zip(m) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

fn matvec_t(m: &Weights, v: &Vector) -> Vector {
    let mut out = [0.0; D];
    for (row, &vi) in m.iter().zip(v) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * vi;
        }
    }
    out
}

fn add_into(acc: &mut Vector, v: &Vector) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

#[derive(Debug, Clone)]
pub struct EmbeddingNet {
    w: Weights,
    u: Weights,
    rounds: usize,
}

impl EmbeddingNet {
    pub fn new(rounds: usize, seed: u64) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidConfig("embedding rounds must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (D as f64).sqrt()).expect("valid normal");
        let mut draw = || {
            let mut m = [[0.0; D]; D];
            for row in m.iter_mut() {
                for v in row.iter_mut() {
                    *v = normal.sample(&mut rng);
                }
            }
            m
        };
        let w = draw();
        let u = draw();
        Ok(Self { w, u, rounds })
    }

    fn neighbor_sums(x_atoms: usize, states: &[Vector]) -> Vec<Vector> {
        let n = x_atoms;
        let mut sums = vec![[0.0; D]; states.len()];
        for (p, (i, j)) in pairs(n).enumerate() {
            let r = n + p;
            let (hr, hi, hj) = (states[r], states[i], states[j]);
            add_into(&mut sums[i], &hr);
            add_into(&mut sums[j], &hr);
            add_into(&mut sums[r], &hi);
            add_into(&mut sums[r], &hj);
        }
        sums
    }

    /// States after each round; `layers[0]` is the input.
    fn forward(&self, x: &FeatureMatrix) -> Vec<Vec<Vector>> {
        let n = x.n_atoms();
        let init: Vec<Vector> = x.rows().map(|r| r.try_into().expect("row width")).collect();
        let mut layers = vec![init];
        for _ in 0..self.rounds {
            let h = layers.last().expect("non-empty");
            let s = Self::neighbor_sums(n, h);
            let next = h
                .iter()
                .zip(&s)
                .map(|(hr, sr)| {
                    let mut z = matvec(&self.w, hr);
                    add_into(&mut z, &matvec(&self.u, sr));
                    z.map(f64::tanh)
                })
                .collect();
            layers.push(next);
        }
        layers
    }

    pub fn embed(&self, x: &FeatureMatrix) -> Vector {
        let layers = self.forward(x);
        let mut e = [0.0; D];
        for h in layers.last().expect("non-empty") {
            add_into(&mut e, h);
        }
        e
    }

    /// Gradient of `dot(upstream, embed(x))` with respect to `x`.
    fn backward(&self, x: &FeatureMatrix, upstream: &Vector) -> FeatureMatrix {
        let n = x.n_atoms();
        let layers = self.forward(x);
        let mut dh = vec![*upstream; x.n_rows()];
        for t in (1..layers.len()).rev() {
            let out = &layers[t];
            let dz: Vec<Vector> = dh
                .iter()
                .zip(out)
                .map(|(g, h)| {
                    let mut d = [0.0; D];
                    for k in 0..D {
                        d[k] = g[k] * (1.0 - h[k] * h[k]);
                    }
                    d
                })
                .collect();
            let via_u: Vec<Vector> = dz.iter().map(|d| matvec_t(&self.u, d)).collect();
            let spread = Self::neighbor_sums(n, &via_u);
            dh = dz
                .iter()
                .zip(&spread)
                .map(|(d, s)| {
                    let mut g = matvec_t(&self.w, d);
                    add_into(&mut g, s);
                    g
                })
                .collect();
        }
        let mut grad = FeatureMatrix::zeros(n);
        for (r, g) in dh.iter().enumerate() {
            grad.row_mut(r).copy_from_slice(g);
        }
        grad
    }
}

/// Squared distance between untrained, seed-fixed graph embeddings.
pub fn embedding_loss(
    g_target: &MolecularGraph,
    p_out: &ProbabilisticGraph,
    rounds: usize,
    seed: u64,
    want_gradient: bool,
) -> Result<LossValue> {
    let x_target = to_feature_matrix(g_target);
    check_shapes(&x_target, p_out)?;
    let net = EmbeddingNet::new(rounds, seed)?;
    let e_t = net.embed(&x_target);
    let e_o = net.embed(p_out.matrix());
    let diff: Vector = std::array::from_fn(|k| e_o[k] - e_t[k]);
    let value = diff.iter().map(|d| d * d).sum();
    let gradient = want_gradient.then(|| {
        let upstream = diff.map(|d| 2.0 * d);
        let mut grad = net.backward(p_out.matrix(), &upstream);
        mask_structural(&mut grad);
        grad
    });
    Ok(LossValue { value, gradient })
}
