//! Global graph statistics baseline.
//!
//! The statistics vector concatenates the expected atom-type histogram, the
//! expected bond-type histogram and the expected atom degrees sorted
//! ascending. Expected degree of atom `i` is the sum over its pair rows of
//! `1 - P(NoBond)`.

use super::{check_shapes, LossValue, ProbabilisticGraph};
use crate::error::Result;
use crate::graph::{pairs, AtomType, BondType, FeatureMatrix, RowKind};

const ATOM_BINS: usize = AtomType::ALL.len();
const BOND_BINS: usize = BondType::ALL.len();

fn expected_degrees(x: &FeatureMatrix) -> Vec<f64> {
    let n = x.n_atoms();
    let no_bond = BondType::NoBond.column();
    let mut deg = vec![0.0; n];
    for (p, (i, j)) in pairs(n).enumerate() {
        let present = 1.0 - x.get(n + p, no_bond);
        deg[i] += present;
        deg[j] += present;
    }
    deg
}

/// Statistics vector plus the atom order that sorts the degrees.
fn stats_with_order(x: &FeatureMatrix) -> (Vec<f64>, Vec<usize>) {
    let n = x.n_atoms();
    let mut s = vec![0.0; ATOM_BINS + BOND_BINS + n];
    for r in 0..x.n_rows() {
        let (kind, offset) = match x.row_kind(r) {
            RowKind::Atom => (RowKind::Atom, 0),
            RowKind::Bond => (RowKind::Bond, ATOM_BINS),
        };
        for (k, c) in kind.legal_columns().enumerate() {
            s[offset + k] += x.get(r, c);
        }
    }
    let deg = expected_degrees(x);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| deg[a].total_cmp(&deg[b]).then(a.cmp(&b)));
    for (k, &i) in order.iter().enumerate() {
        s[ATOM_BINS + BOND_BINS + k] = deg[i];
    }
    (s, order)
}

pub fn statistics_vector(x: &FeatureMatrix) -> Vec<f64> {
    stats_with_order(x).0
}

/// `||s(target) - s(output)||^2`.
pub fn statistics_loss(
    x_target: &FeatureMatrix,
    p_out: &ProbabilisticGraph,
    want_gradient: bool,
) -> Result<LossValue> {
    check_shapes(x_target, p_out)?;
    let p = p_out.matrix();
    let n = p.n_atoms();
    let s_t = statistics_vector(x_target);
    let (s_o, order) = stats_with_order(p);
    let diff: Vec<f64> = s_o.iter().zip(&s_t).map(|(o, t)| o - t).collect();
    let value = diff.iter().map(|d| d * d).sum();

    let gradient = want_gradient.then(|| {
        let g: Vec<f64> = diff.iter().map(|d| 2.0 * d).collect();
        let mut grad = FeatureMatrix::zeros(n);
        for r in 0..n {
            for (k, c) in RowKind::Atom.legal_columns().enumerate() {
                grad.set(r, c, g[k]);
            }
        }
        for r in n..p.n_rows() {
            for (k, c) in RowKind::Bond.legal_columns().enumerate() {
                grad.set(r, c, g[ATOM_BINS + k]);
            }
        }
        // The sort is held fixed at the evaluation point.
        let mut g_deg = vec![0.0; n];
        for (k, &i) in order.iter().enumerate() {
            g_deg[i] = g[ATOM_BINS + BOND_BINS + k];
        }
        let no_bond = BondType::NoBond.column();
        for (q, (i, j)) in pairs(n).enumerate() {
            let r = n + q;
            grad.set(r, no_bond, grad.get(r, no_bond) - g_deg[i] - g_deg[j]);
        }
        grad
    });
    Ok(LossValue { value, gradient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{to_feature_matrix, MolecularGraph};
    use crate::matching::AtomPermutation;

    #[test]
    fn vector_layout() {
        use AtomType::*;
        let g = MolecularGraph::from_bonds(
            vec![C, N, O],
            &[(0, 1, BondType::Single), (1, 2, BondType::Double)],
        )
        .unwrap();
        let s = statistics_vector(&to_feature_matrix(&g));
        assert_eq!(s, vec![1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 2.0]);
    }

    #[test]
    fn zero_on_self_and_relabeling() {
        use AtomType::*;
        let g = MolecularGraph::from_bonds(
            vec![C, C, O, N],
            &[(0, 1, BondType::Single), (1, 2, BondType::Single), (1, 3, BondType::Triple)],
        )
        .unwrap();
        let x = to_feature_matrix(&g);
        let p = ProbabilisticGraph::from_graph(&g);
        assert_eq!(statistics_loss(&x, &p, false).unwrap().value, 0.0);
        let sigma = AtomPermutation::new(vec![3, 1, 0, 2]).unwrap();
        let q = ProbabilisticGraph::from_graph(&g.permuted(&sigma).unwrap());
        assert_eq!(statistics_loss(&x, &q, false).unwrap().value, 0.0);
    }
}
