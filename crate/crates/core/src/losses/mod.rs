//! Reconstruction losses between a target graph and a probabilistic output.
//!
//! Every loss returns its value and, on request, the gradient with respect
//! to the output matrix. The node-kind column and illegal type columns are
//! structural and always receive a zero gradient.

mod embedding;
mod statistics;

use serde::Serialize;

pub use crate::graph::ProbabilisticGraph;
pub use embedding::{embedding_loss, EmbeddingNet, DEFAULT_ROUNDS};
pub use statistics::{statistics_loss, statistics_vector};

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, FEATURE_COLS};
use crate::matching::{induced_node_permutation, matched_cost, AtomPermutation};

#[derive(Debug, Clone, PartialEq)]
pub struct LossValue {
    pub value: f64,
    pub gradient: Option<FeatureMatrix>,
}

impl LossValue {
    pub fn gradient_norm(&self) -> Option<f64> {
        self.gradient.as_ref().map(|g| g.squared_norm().sqrt())
    }
}

/// Posterior statistics of a diagonal Gaussian, with standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatentStats {
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl LatentStats {
    pub fn new(mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::LatentLength { mu: mu.len(), sigma: sigma.len() });
        }
        if let Some((index, &value)) = sigma.iter().enumerate().find(|(_, s)| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::NonPositiveSigma { index, value });
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// Closed-form `KL(N(mu, diag(sigma^2)) || N(0, I))`.
pub fn kl_to_standard_normal(q: &LatentStats) -> f64 {
    0.5 * q
        .mu
        .iter()
        .zip(&q.sigma)
        .map(|(m, s)| {
            let var = s * s;
            m * m + var - 1.0 - var.ln()
        })
        .sum::<f64>()
}

fn check_shapes(x: &FeatureMatrix, p: &ProbabilisticGraph) -> Result<()> {
    if x.n_atoms() != p.n_atoms() {
        return Err(Error::ShapeMismatch { left: x.n_atoms(), right: p.n_atoms() });
    }
    Ok(())
}

/// Squared distance between the target and the output under matching `pi`.
pub fn rec_loss(
    x_target: &FeatureMatrix,
    p_out: &ProbabilisticGraph,
    pi: &AtomPermutation,
    want_gradient: bool,
) -> Result<LossValue> {
    check_shapes(x_target, p_out)?;
    let p = p_out.matrix();
    let value = matched_cost(x_target, p, pi)?;
    let gradient = want_gradient.then(|| {
        let mut grad = FeatureMatrix::zeros(x_target.n_atoms());
        for (r, &s) in induced_node_permutation(pi).iter().enumerate() {
            for c in x_target.row_kind(r).legal_columns() {
                grad.set(s, c, 2.0 * (p.get(s, c) - x_target.get(r, c)));
            }
        }
        grad
    });
    Ok(LossValue { value, gradient })
}

/// The "no matching" baseline: rows compared in the order they come.
pub fn no_matching_loss(
    x_target: &FeatureMatrix,
    p_out: &ProbabilisticGraph,
    want_gradient: bool,
) -> Result<LossValue> {
    rec_loss(x_target, p_out, &AtomPermutation::identity(x_target.n_atoms()), want_gradient)
}

/// Zeroes the structural columns of a gradient.
fn mask_structural(grad: &mut FeatureMatrix) {
    for r in 0..grad.n_rows() {
        let legal = grad.row_kind(r).legal_columns();
        for c in 0..FEATURE_COLS {
            if !legal.contains(&c) {
                grad.set(r, c, 0.0);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{to_feature_matrix, AtomType, BondType, MolecularGraph};
    use crate::matching::optimal_match;

    fn sample_graph() -> MolecularGraph {
        use AtomType::*;
        MolecularGraph::from_bonds(
            vec![C, N, O, C],
            &[(0, 1, BondType::Single), (1, 2, BondType::Double), (0, 3, BondType::Single)],
        )
        .unwrap()
    }

    #[test]
    fn one_hot_output_gives_zero_loss_and_gradient() {
        let g = sample_graph();
        let x = to_feature_matrix(&g);
        let p = ProbabilisticGraph::from_graph(&g);
        let l = rec_loss(&x, &p, &AtomPermutation::identity(4), true).unwrap();
        assert_eq!(l.value, 0.0);
        assert!(l.gradient.unwrap().as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_c_half_n_single_atom() {
        let g = MolecularGraph::new(vec![AtomType::C]).unwrap();
        let x = to_feature_matrix(&g);
        let mut m = FeatureMatrix::structural(1).unwrap();
        m.row_mut(0)[1..5].copy_from_slice(&[0.5, 0.5, 0.0, 0.0]);
        let p = ProbabilisticGraph::new(m).unwrap();
        let l = rec_loss(&x, &p, &AtomPermutation::identity(1), true).unwrap();
        assert_eq!(l.value, 0.5);
        assert_eq!(l.gradient.unwrap().row(0), &[0.0, -1.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn gradient_absent_unless_requested() {
        let g = sample_graph();
        let l = no_matching_loss(&to_feature_matrix(&g), &ProbabilisticGraph::from_graph(&g), false).unwrap();
        assert!(l.gradient.is_none());
        assert!(l.gradient_norm().is_none());
    }

    #[test]
    fn no_matching_is_not_permutation_invariant() {
        let g = sample_graph();
        let sigma = AtomPermutation::new(vec![2, 3, 0, 1]).unwrap();
        let x = to_feature_matrix(&g);
        let p = ProbabilisticGraph::from_graph(&g.permuted(&sigma).unwrap());
        assert!(no_matching_loss(&x, &p, false).unwrap().value > 0.0);
        assert_eq!(optimal_match(&x, p.matrix()).unwrap().cost, 0.0);
    }

    #[test]
    fn shape_mismatch() {
        let g = sample_graph();
        let p = ProbabilisticGraph::from_graph(&MolecularGraph::new(vec![AtomType::C]).unwrap());
        assert!(no_matching_loss(&to_feature_matrix(&g), &p, false).is_err());
    }

    #[test]
    fn kl_closed_form_values() {
        let q = LatentStats::new(vec![0.0; 5], vec![1.0; 5]).unwrap();
        assert_eq!(kl_to_standard_normal(&q), 0.0);
        let q = LatentStats::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(kl_to_standard_normal(&q), 0.5);
        let q = LatentStats::new(vec![0.0], vec![2.0]).unwrap();
        assert!((kl_to_standard_normal(&q) - 0.806_852_819_440_054_7).abs() < 1e-12);
    }

    #[test]
    fn kl_rejects_bad_sigma() {
        assert!(matches!(
            LatentStats::new(vec![0.0, 0.0], vec![1.0, 0.0]),
            Err(Error::NonPositiveSigma { index: 1, .. })
        ));
        assert!(LatentStats::new(vec![0.0], vec![-1.0]).is_err());
        assert!(LatentStats::new(vec![0.0], vec![1.0, 1.0]).is_err());
    }
}
